#include <doctest.h>

#include <cmath>

#include "thc/metrics.hpp"
#include "test_util.hpp"

using namespace thc;

TEST_CASE("psnr caps identical frames at 99 dB") {
    Frame f = test_util::smooth_frame(64, 64);
    CHECK(psnr(f, f) == 99.0);
}

TEST_CASE("psnr of a uniform difference of 16 is the closed-form value") {
    // oracle: MSE = 256, 10*log10(255^2/256) = 20*log10(255/16) = 24.0484 dB
    Frame a = Frame::filled(32, 32, 100, 100, 100);
    Frame b = Frame::filled(32, 32, 116, 116, 116);
    double expect = 20.0 * std::log10(255.0 / 16.0);
    CHECK(expect == doctest::Approx(24.0484).epsilon(1e-4));
    CHECK(psnr(a, b) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(psnr(a, b) == doctest::Approx(test_util::psnr_oracle(a, b)).epsilon(1e-12));
}

TEST_CASE("psnr and ssim reject dimension mismatches") {
    Frame a = test_util::smooth_frame(32, 32);
    Frame b = test_util::smooth_frame(16, 32);
    CHECK_THROWS_AS(psnr(a, b), ConfigError);
    CHECK_THROWS_AS(ssim(a, b), ConfigError);
    Frame tiny_a(16, 8), tiny_b(16, 8);
    tiny_a.pixels.assign(tiny_a.pixels.size(), 0);
    CHECK_THROWS_AS(ssim(tiny_a, tiny_b), ConfigError);
}

TEST_CASE("ssim of identical frames is exactly one") {
    Frame f = test_util::random_frame(32, 32, 8);
    CHECK(ssim(f, f) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim matches the brute-force oracle on random pairs") {
    for (uint32_t seed = 0; seed < 8; ++seed) {
        Frame a = test_util::random_frame(16, 16, seed * 2 + 1);
        Frame b = test_util::random_frame(16, 16, seed * 2 + 2);
        CHECK(ssim(a, b) == doctest::Approx(test_util::ssim_oracle(a, b)).epsilon(1e-6));
    }
    // constant offset case from a known setup
    Frame c = Frame::filled(16, 16, 90, 90, 90);
    Frame d = Frame::filled(16, 16, 140, 140, 140);
    CHECK(ssim(c, d) == doctest::Approx(test_util::ssim_oracle(c, d)).epsilon(1e-6));
}

TEST_CASE("ssim is symmetric and negative against the photographic negative") {
    // the sign flip needs real local variance, so use a high-contrast checkerboard
    Frame a(48, 48);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x) {
            uint8_t v = ((x / 4) + (y / 4)) % 2 ? 210 : 40;
            for (int c = 0; c < 3; ++c) a.at(x, y, c) = v;
        }
    Frame neg = a;
    for (uint8_t& p : neg.pixels) p = static_cast<uint8_t>(255 - p);
    CHECK(ssim(a, neg) == doctest::Approx(ssim(neg, a)).epsilon(1e-12));
    CHECK(ssim(a, neg) < 0.0);
    CHECK(test_util::ssim_oracle(a, neg) < 0.0);
    Frame b = test_util::random_frame(48, 48, 3);
    CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)).epsilon(1e-12));
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-9));
}

namespace {

RateLedger ledger_for(uint64_t frames, uint64_t kp_packets, uint64_t kp_bits_each) {
    RateLedger ledger;
    ledger.displayed_frames = frames;
    ledger.keypoint_payload_bits = kp_packets * kp_bits_each;
    ledger.header_bits = kp_packets * 48;
    return ledger;
}

}  // namespace

TEST_CASE("bpp arithmetic lands on the expected keypoint figures") {
    // m=0: every displayed frame after the pivot carries 640 payload bits
    RateLedger m0 = ledger_for(300, 299, 640);
    CHECK(bpp(m0, 512, 512, BppMode::Paper) == doctest::Approx(0.0024).epsilon(0.05));
    CHECK(std::abs(bpp(m0, 512, 512, BppMode::Paper) - 0.0024) < 0.0001);

    RateLedger m1 = ledger_for(300, 150, 640);
    CHECK(std::abs(bpp(m1, 512, 512, BppMode::Paper) - 0.0012) < 0.0001);

    // keypoint-only at source resolution
    CHECK(std::abs(bpp(m0, 256, 256, BppMode::Paper) - 0.0097) < 0.0001);

    CHECK(bpp(m0, 512, 512, BppMode::Full) > bpp(m0, 512, 512, BppMode::Paper));

    RateLedger empty;
    CHECK_THROWS_AS(bpp(empty, 512, 512, BppMode::Paper), ConfigError);
}

TEST_CASE("bpp is monotone in interpolation depth and resolution") {
    double prev = 1.0;
    for (uint64_t m = 0; m <= 3; ++m) {
        RateLedger l = ledger_for(1000, 999 / (m + 1), 640);
        double v = bpp(l, 512, 512, BppMode::Paper);
        CHECK(v < prev);
        prev = v;
    }
    RateLedger l = ledger_for(1000, 999, 640);
    CHECK(bpp(l, 512, 512, BppMode::Paper) < bpp(l, 256, 256, BppMode::Paper));
}

TEST_CASE("evaluation report aggregates per-frame metrics and serializes") {
    std::vector<Frame> ref, out;
    for (int i = 0; i < 4; ++i) {
        ref.push_back(test_util::smooth_frame(32, 32, i));
        out.push_back(ref.back());
    }
    RateLedger ledger = ledger_for(4, 3, 640);
    EvalReport rep = evaluate_frames(ref, out, &ledger);
    CHECK(rep.frames == 4);
    CHECK(rep.psnr_mean == 99.0);
    CHECK(rep.ssim_mean == doctest::Approx(1.0));
    auto j = rep.to_json();
    CHECK(j["frames"] == 4);
    CHECK(j["psnr"]["per_frame"].size() == 4);
    CHECK(j["channel"].is_null());
    CHECK(j["fid"].is_null());

    out.pop_back();
    CHECK_THROWS_AS(evaluate_frames(ref, out, nullptr), ConfigError);
}
