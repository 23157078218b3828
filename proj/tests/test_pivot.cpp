#include <doctest.h>

#include <cmath>

#include "thc/pivot.hpp"
#include "test_util.hpp"

using namespace thc;

namespace {

std::vector<uint8_t> all_background(int w, int h) {
    return std::vector<uint8_t>(static_cast<size_t>(w) * h, 1);
}

}  // namespace

TEST_CASE("identical frames produce identical embeddings at distance zero") {
    Frame f = test_util::smooth_frame(64, 64);
    auto mask = border_band_mask(64, 64);
    BackgroundEmbedding a = background_embedding(f, mask);
    BackgroundEmbedding b = background_embedding(f, mask);
    CHECK(embedding_distance(a, b) == 0.0);
    double norm = 0.0;
    for (float v : a.values) norm += static_cast<double>(v) * v;
    CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
}

TEST_CASE("uniform brightness shift changes the embedding direction") {
    // brute-force check: normalize(g) vs normalize(g + 10) differ on non-constant g
    Frame f = test_util::smooth_frame(64, 64);
    Frame brighter = f;
    for (uint8_t& p : brighter.pixels)
        p = static_cast<uint8_t>(std::min(245, static_cast<int>(p)) + 10);
    auto mask = all_background(64, 64);
    double d = embedding_distance(background_embedding(f, mask),
                                  background_embedding(brighter, mask));
    CHECK(d > 0.0);
}

TEST_CASE("all-background constant image embeds as the uniform 1/16 vector") {
    Frame c = Frame::filled(32, 32, 80, 80, 80);
    BackgroundEmbedding e = background_embedding(c, all_background(32, 32));
    for (float v : e.values) CHECK(v == doctest::Approx(1.0f / 16.0f).epsilon(1e-6));
    // all-black image: direction undefined, defined to be the same uniform vector
    Frame black = Frame::filled(32, 32, 0, 0, 0);
    BackgroundEmbedding z = background_embedding(black, all_background(32, 32));
    for (float v : z.values) CHECK(v == doctest::Approx(1.0f / 16.0f).epsilon(1e-6));
}

TEST_CASE("empty background mask is rejected") {
    Frame f = test_util::smooth_frame(32, 32);
    std::vector<uint8_t> none(32 * 32, 0);
    CHECK_THROWS_WITH_AS(background_embedding(f, none), "no background pixels", ConfigError);
}

TEST_CASE("threshold decisions follow the OR-of-breaches rule") {
    PivotState state;
    state.pivot_pose = {0.0, 0.0, 0.0};
    Frame f = test_util::smooth_frame(64, 64);
    state.pivot_bg = background_embedding(f, all_background(64, 64));
    PivotThresholds th;  // defaults: 15 deg each, d_bg 0.05

    BackgroundEmbedding near_bg = state.pivot_bg;  // distance 0
    CHECK(should_replace(state, {10.0, 10.0, 10.0}, near_bg, th) == PivotDecision::Keep);
    CHECK(should_replace(state, {20.0, 0.0, 0.0}, near_bg, th) == PivotDecision::Replace);
    CHECK(should_replace(state, {0.0, 20.0, 0.0}, near_bg, th) == PivotDecision::Replace);
    CHECK(should_replace(state, {0.0, 0.0, 20.0}, near_bg, th) == PivotDecision::Replace);
    CHECK(should_replace(state, {-20.0, 0.0, 0.0}, near_bg, th) == PivotDecision::Replace);

    // background breach alone: perturb one cell direction by a bit over d_bg
    BackgroundEmbedding far_bg = state.pivot_bg;
    far_bg.values[0] += 0.06f;
    CHECK(embedding_distance(state.pivot_bg, far_bg) > 0.05);
    CHECK(should_replace(state, {0.0, 0.0, 0.0}, far_bg, th) == PivotDecision::Replace);
    BackgroundEmbedding close_bg = state.pivot_bg;
    close_bg.values[0] += 0.01f;
    CHECK(should_replace(state, {0.0, 0.0, 0.0}, close_bg, th) == PivotDecision::Keep);
}

TEST_CASE("replacement updates state, ledger, and emits the pivot packet") {
    Frame first = test_util::smooth_frame(64, 64, 0);
    Frame later = test_util::smooth_frame(64, 64, 300, 1.3);
    auto mask = all_background(64, 64);

    PivotState state;
    state.pivot_frame = first;
    state.pivot_pose = {0, 0, 0};
    state.pivot_bg = background_embedding(first, mask);
    state.established_at = 0;

    RateLedger ledger;
    BackgroundEmbedding bg = background_embedding(later, mask);
    auto [next, pkt] = apply_replacement(state, later, {20, 0, 0}, bg, ledger);
    CHECK(pkt.kind == PacketKind::Pivot);
    CHECK(pkt.frame_index == 300);
    CHECK(next.established_at == 300);
    CHECK(ledger.pivot_payload_bits == pkt.payload.size() * 8);
    CHECK(ledger.replacement_indices == std::vector<uint32_t>{300});
    CHECK(ledger.pivot_frames.count(300) == 1);

    // against its own frame the new pivot reads Keep
    PivotThresholds th;
    CHECK(should_replace(next, {20, 0, 0}, bg, th) == PivotDecision::Keep);
}

TEST_CASE("consecutive breaches replace twice without a cooldown, once with") {
    // scripted pose trace: yaw ramps 20 degrees per frame, so every frame breaches
    // the default threshold against the current pivot
    PivotThresholds th;
    auto run = [&th](uint32_t cooldown) {
        PivotState state;
        state.established_at = 0;
        state.pivot_pose = {0, 0, 0};
        Frame f = test_util::smooth_frame(32, 32);
        state.pivot_bg = background_embedding(f, all_background(32, 32));
        RateLedger ledger;
        int replacements = 0;
        for (uint32_t i = 1; i <= 60; ++i) {
            PoseAngles pose{20.0 * i, 0, 0};
            if (should_replace(state, pose, state.pivot_bg, th) == PivotDecision::Replace &&
                cooldown_allows(state, i, cooldown)) {
                Frame nf = f;
                nf.index = i;
                auto [next, pkt] = apply_replacement(state, nf, pose, state.pivot_bg, ledger);
                state = std::move(next);
                replacements += 1;
            }
        }
        return replacements;
    };
    CHECK(run(0) == 60);   // every frame breaches and replaces
    CHECK(run(30) == 2);   // deferred inside the 30-frame window
}

TEST_CASE("raising thresholds never increases replacements on a drifting trace") {
    // scripted drift plus wobble; decision replay is pure, so sweeping gamma up
    // must sweep the replacement count down
    auto replacements_at = [](double gamma) {
        PivotThresholds th;
        th.gamma_yaw = th.gamma_roll = th.gamma_pitch = gamma;
        PivotState state;
        state.pivot_pose = {0, 0, 0};
        Frame f = test_util::smooth_frame(32, 32);
        state.pivot_bg = background_embedding(f, all_background(32, 32));
        int count = 0;
        for (uint32_t i = 1; i <= 400; ++i) {
            PoseAngles pose{0.35 * i + 3.0 * std::sin(0.2 * i), 0.1 * i, 0.05 * i};
            if (should_replace(state, pose, state.pivot_bg, th) == PivotDecision::Replace) {
                state.pivot_pose = pose;
                state.established_at = i;
                count += 1;
            }
        }
        return count;
    };
    int r15 = replacements_at(15.0);
    int r30 = replacements_at(30.0);
    int r45 = replacements_at(45.0);
    CHECK(r15 >= r30);
    CHECK(r30 >= r45);
    CHECK(r45 >= 1);
}
