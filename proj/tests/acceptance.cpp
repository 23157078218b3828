// Acceptance suite: one test case per criterion, each printing a PASS/FAIL line.
// Run directly or through ctest; all tolerances are pinned in code.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "thc/thc.hpp"
#include "test_util.hpp"

using namespace thc;

namespace {

void report(int criterion, const char* what, bool ok) {
    std::printf("criterion %2d: %-58s %s\n", criterion, what, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
}

EncodeInputs synthetic_inputs(int frames, int width, int height, int m, int sr,
                              float wobble = 0.05f, float drift = 0.0f, uint64_t seed = 7) {
    SynthSpec spec;
    spec.width = width;
    spec.height = height;
    spec.frames = frames;
    spec.wobble = wobble;
    spec.drift = drift;
    spec.seed = seed;
    SynthClip clip = synthesize_clip(spec);
    EncodeInputs inputs;
    inputs.frames = std::move(clip.frames);
    inputs.keypoints = std::move(clip.trajectories);
    inputs.poses = std::move(clip.poses);
    inputs.bg_masks = std::move(clip.bg_masks);
    inputs.config.width = width;
    inputs.config.height = height;
    inputs.config.interp_frames = m;
    inputs.config.sr_factor = sr;
    return inputs;
}

}  // namespace

TEST_CASE("criterion 1: interpolation-depth BPP sweep at 512x512 output") {
    auto start = std::chrono::steady_clock::now();

    EncodeInputs inputs = synthetic_inputs(300, 256, 256, 1, 2);
    SweepSpec sweep{SweepKind::Interp, {0, 1, 2, 3}};
    AblationResult result = run_ablation(inputs, sweep);

    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const double expected[4] = {0.0024, 0.0012, 0.0008, 0.0006};
    bool ok = result.rows.size() == 4;
    for (size_t i = 0; i < result.rows.size(); ++i) {
        double got = result.rows[i].report.bpp_paper;
        bool row_ok = std::abs(got - expected[i]) <= 0.0001;
        std::printf("    m=%zu  bpp_paper=%.6f  expected %.4f +/- 0.0001  psnr=%.2f dB\n", i,
                    got, expected[i], result.rows[i].report.psnr_mean);
        CHECK(row_ok);
        ok = ok && row_ok;
    }
    std::printf("    harness runtime %.1f s (limit 60)\n", elapsed);
    bool timing_ok = elapsed < 60.0;
    CHECK(timing_ok);
    report(1, "BPP sweep over m matches the expected column", ok && timing_ok);
}

TEST_CASE("criterion 2: module-stack BPP at source and upscaled resolution") {
    EncodeInputs kp_only = synthetic_inputs(300, 256, 256, 0, 1);
    EncodeResult enc0 = encode_session(kp_only);
    double bpp_kp_only = bpp(enc0.ledger, 256, 256, BppMode::Paper);

    EncodeInputs with_interp = synthetic_inputs(300, 256, 256, 1, 1);
    EncodeResult enc1 = encode_session(with_interp);
    double bpp_interp = bpp(enc1.ledger, 256, 256, BppMode::Paper);
    double bpp_interp_sr = bpp(enc1.ledger, 512, 512, BppMode::Paper);

    std::printf("    keypoint only      256x256: %.6f (expect 0.0097-0.0098)\n", bpp_kp_only);
    std::printf("    + interpolation    256x256: %.6f (expect 0.0048-0.0049)\n", bpp_interp);
    std::printf("    + 2x SR denominator 512x512: %.6f (expect 0.0012 +/- 0.0001)\n",
                bpp_interp_sr);
    bool ok = bpp_kp_only >= 0.0097 && bpp_kp_only <= 0.0098;
    ok = ok && bpp_interp >= 0.0048 && bpp_interp <= 0.0049;
    ok = ok && std::abs(bpp_interp_sr - 0.0012) <= 0.0001;
    CHECK(ok);
    report(2, "module-stack BPP figures reproduce", ok);
}

TEST_CASE("criterion 3: 8 bytes per keypoint against the 24-byte layout") {
    KeyPointSet kps = test_util::grid_keypoints(10, 1);
    Packet packed = encode_keypoints(kps);
    auto legacy = encode_keypoints_jacobian_payload(kps);
    bool ok = packed.payload.size() == 80 && legacy.size() == 240;
    CHECK(packed.payload.size() == 80);
    CHECK(legacy.size() == 240);
    report(3, "keypoint payload is 80 bytes vs 240 with Jacobians", ok);
}

TEST_CASE("criterion 4: bitstream roundtrip over 1000 randomized sequences") {
    std::mt19937 rng(20240601);
    bool ok = true;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        StreamConfig cfg;
        cfg.width = 16 + static_cast<int>(rng() % 17);
        cfg.height = 16 + static_cast<int>(rng() % 17);
        cfg.num_keypoints = 1 + static_cast<int>(rng() % 20);
        cfg.interp_frames = static_cast<int>(rng() % 4);
        cfg.sr_factor = 1 + static_cast<int>(rng() % 2);
        cfg.sr_patch = 8 + static_cast<int>(rng() % 121);
        cfg.fps = 1 + static_cast<int>(rng() % 120);
        std::vector<Packet> packets;
        packets.push_back(encode_handshake(cfg));
        packets.push_back(encode_pivot(test_util::random_frame(cfg.width, cfg.height, rng())));
        int body = static_cast<int>(rng() % 10);
        for (int i = 0; i < body; ++i) {
            if (rng() % 5 == 0) {
                Frame f = test_util::random_frame(cfg.width, cfg.height, rng());
                f.index = static_cast<uint32_t>(i + 1);
                packets.push_back(encode_pivot(f));
            } else {
                KeyPointSet kps;
                kps.frame_index = static_cast<uint32_t>(i + 1);
                for (int k = 0; k < cfg.num_keypoints; ++k) {
                    auto coord = [&rng] {
                        return static_cast<float>(
                            static_cast<double>(rng()) / std::mt19937::max() * 2.0 - 1.0);
                    };
                    kps.points.push_back({coord(), coord()});
                }
                packets.push_back(encode_keypoints(kps));
            }
        }
        packets.push_back(end_of_stream(static_cast<uint32_t>(body + 1)));

        std::ostringstream out(std::ios::binary);
        write_stream(packets, out);
        std::istringstream in(out.str(), std::ios::binary);
        std::vector<Packet> back = read_stream(in);
        ok = back.size() == packets.size();
        for (size_t i = 0; ok && i < packets.size(); ++i) ok = back[i] == packets[i];
    }
    CHECK(ok);
    report(4, "read(write(s)) is the identity on random streams", ok);
}

TEST_CASE("criterion 5: warp identities") {
    Frame pivot = test_util::smooth_frame(96, 80);

    // zero-displacement flow reproduces the pivot exactly
    DenseFlow zero;
    zero.width = pivot.width;
    zero.height = pivot.height;
    zero.vectors.assign(static_cast<size_t>(pivot.width) * pivot.height, Vec2{0, 0});
    bool identity_ok = warp(pivot, zero) == pivot;
    KeyPointSet kps = test_util::grid_keypoints(10);
    identity_ok = identity_ok && reference_reconstruct(pivot, kps, kps) == pivot;
    CHECK(identity_ok);

    // uniform keypoint translation gives uniform flow
    KeyPointSet driving = test_util::grid_keypoints(10);
    KeyPointSet source = driving;
    for (Vec2& p : source.points) {
        p.x += 0.125f;
        p.y -= 0.0625f;
    }
    DenseFlow flow = dense_flow(source, driving, kDefaultSigma, 96, 80);
    float max_dev = 0.0f;
    for (const Vec2& v : flow.vectors) {
        max_dev = std::max(max_dev, std::abs(v.x - 0.125f));
        max_dev = std::max(max_dev, std::abs(v.y + 0.0625f));
    }
    bool uniform_ok = max_dev < 1e-6f;
    std::printf("    uniform-translation max flow deviation: %.3g\n",
                static_cast<double>(max_dev));
    CHECK(uniform_ok);

    // softmax weights sum to one at every pixel
    double worst = 0.0;
    for (int y = 0; y < 80; ++y)
        for (int x = 0; x < 96; ++x) {
            Vec2 z{pixel_to_norm(static_cast<float>(x), 96),
                   pixel_to_norm(static_cast<float>(y), 80)};
            auto w = dense_flow_weights(driving, kDefaultSigma, z);
            double sum = 0.0;
            for (double v : w) sum += v;
            worst = std::max(worst, std::abs(sum - 1.0));
        }
    bool weights_ok = worst < 1e-6;
    std::printf("    worst |sum(w)-1| over all pixels: %.3g\n", worst);
    CHECK(weights_ok);

    report(5, "zero-flow identity, uniform flow, weight normalization",
           identity_ok && uniform_ok && weights_ok);
}

TEST_CASE("criterion 6: end-to-end oracle reconstruction") {
    // linear trajectories: keyed and interpolated frames bit-exact after
    // encode -> reliable channel -> decode (midpoint blending is exact)
    const int w = 96, h = 96, n = 41;
    Frame base = test_util::smooth_frame(w, h);
    KeyPointSet start = test_util::grid_keypoints(10);
    auto traj = test_util::linear_trajectories(start, n, 1.0f / 512.0f, -1.0f / 512.0f);
    std::vector<Frame> truth = synthesize_sequence(base, traj);

    EncodeInputs inputs;
    inputs.frames = truth;
    inputs.keypoints = traj;
    inputs.config.width = w;
    inputs.config.height = h;
    inputs.config.interp_frames = 1;
    inputs.config.sr_factor = 1;
    inputs.config.sr_patch = 32;
    EncodeResult enc = encode_session(inputs);
    auto [delivered, channel_report] = transmit(enc.packets, ChannelConfig{});
    DecodeResult dec = decode_session(delivered);

    Schedule schedule = build_schedule(n, 1);
    bool exact_ok = dec.frames.size() == truth.size();
    int exact_keyed = 0, exact_interp = 0;
    for (uint32_t i = 0; exact_ok && i < truth.size(); ++i) {
        bool same = dec.frames[i] == truth[i];
        exact_ok = exact_ok && same;
        if (schedule.entries[i].tag == FrameTag::Interpolated)
            exact_interp += same;
        else
            exact_keyed += same;
    }
    std::printf("    linear motion: %d keyed/pivot and %d interpolated frames bit-exact\n",
                exact_keyed, exact_interp);
    CHECK(exact_ok);

    // nonlinear trajectories: mean PSNR over the clip stays above 28 dB
    EncodeInputs wavy = synthetic_inputs(60, 96, 96, 1, 1, 0.06f);
    wavy.config.sr_patch = 32;
    EncodeResult enc2 = encode_session(wavy);
    auto [delivered2, report2] = transmit(enc2.packets, ChannelConfig{});
    DecodeResult dec2 = decode_session(delivered2);
    double mean_psnr = 0.0;
    for (size_t i = 0; i < dec2.frames.size(); ++i)
        mean_psnr += psnr(wavy.frames[i], dec2.frames[i]);
    mean_psnr /= static_cast<double>(dec2.frames.size());
    std::printf("    nonlinear motion: mean PSNR %.2f dB (needs >= 28)\n", mean_psnr);
    bool psnr_ok = mean_psnr >= 28.0;
    CHECK(psnr_ok);

    report(6, "oracle clips reconstruct exactly (linear) / >=28 dB", exact_ok && psnr_ok);
}

TEST_CASE("criterion 7: patch stitching is lossless with the identity backend") {
    IdentitySrBackend identity;
    bool ok = true;
    for (auto [w, h] : {std::pair{512, 512}, {500, 500}, {257, 129}}) {
        Frame img = test_util::random_frame(w, h, static_cast<uint32_t>(w + h));
        for (int k : {16, 32, 64, 128}) {
            bool same = enhance_image(img, k, identity) == img;
            if (!same) std::printf("    MISMATCH at %dx%d k=%d\n", w, h, k);
            ok = ok && same;
        }
    }
    CHECK(ok);
    report(7, "identity enhancement is bit-exact on all grid shapes", ok);
}

TEST_CASE("criterion 8: pivot replacements fall as thresholds rise") {
    // scripted trace: the whole scene slides on a slow two-axis oscillation so the
    // background keeps changing without pinning keypoints at the box edge, and the
    // pose drifts steadily with a small wobble
    const int n = 240, W = 64, H = 64;
    constexpr double kTau = 2.0 * 3.14159265358979323846;
    EncodeInputs inputs;
    inputs.config.width = W;
    inputs.config.height = H;
    inputs.config.interp_frames = 1;
    inputs.config.sr_factor = 1;
    inputs.config.sr_patch = 16;
    inputs.policy_enabled = true;
    KeyPointSet ring = test_util::grid_keypoints(10);
    inputs.keypoints.resize(n);
    for (int t = 0; t < n; ++t) {
        inputs.keypoints[t].frame_index = static_cast<uint32_t>(t);
        for (Vec2 p : ring.points) {
            p.x = clamp_norm(p.x + static_cast<float>(0.35 * std::sin(kTau * t / 110.0)));
            p.y = clamp_norm(p.y + static_cast<float>(0.175 * std::sin(kTau * t / 150.7)));
            inputs.keypoints[t].points.push_back(p);
        }
    }
    inputs.frames = synthesize_sequence(synth_base_frame(W, H, 3), inputs.keypoints);
    inputs.bg_masks.assign(n, center_ellipse_bg_mask(W, H));
    inputs.poses.resize(n);
    for (size_t i = 0; i < inputs.poses.size(); ++i) {
        double t = static_cast<double>(i);
        inputs.poses[i] = {0.35 * t + 3.0 * std::sin(0.2 * t), 0.1 * t, 0.05 * t};
    }

    auto run_sweep = [&](SweepKind kind, std::vector<double> values) {
        EncodeInputs sweep_inputs = inputs;
        if (kind == SweepKind::Gamma) {
            // hold the background channel quiet so gamma alone drives replacements
            sweep_inputs.config.pivot_policy.d_bg = 10.0;
        } else {
            sweep_inputs.config.pivot_policy.gamma_yaw = 1e9;
            sweep_inputs.config.pivot_policy.gamma_roll = 1e9;
            sweep_inputs.config.pivot_policy.gamma_pitch = 1e9;
        }
        return run_ablation(sweep_inputs, SweepSpec{kind, std::move(values)});
    };

    AblationResult gamma = run_sweep(SweepKind::Gamma, {15, 30, 45});
    AblationResult dbg = run_sweep(SweepKind::Dbg, {0.05, 0.06, 0.07});

    bool ok = true;
    auto check_monotone = [&ok](const AblationResult& r, const char* name) {
        for (size_t i = 0; i < r.rows.size(); ++i)
            std::printf("    %s=%.2f  replacements=%llu  bpp_full=%.6f\n", name,
                        r.rows[i].value,
                        static_cast<unsigned long long>(r.rows[i].replacements),
                        r.rows[i].report.bpp_full);
        for (size_t i = 1; i < r.rows.size(); ++i) {
            ok = ok && r.rows[i].replacements <= r.rows[i - 1].replacements;
            ok = ok && r.rows[i].report.bpp_full <= r.rows[i - 1].report.bpp_full;
        }
        ok = ok && r.rows.front().replacements >= 1;  // the trace must actually fire
    };
    check_monotone(gamma, "gamma");
    check_monotone(dbg, "d_bg");
    CHECK(ok);
    report(8, "replacement count and full BPP nonincreasing in thresholds", ok);
}

TEST_CASE("criterion 9: metric oracles") {
    // closed form: uniform |diff| 16 -> MSE 256 -> 20*log10(255/16) = 24.0484 dB
    Frame a = Frame::filled(64, 64, 60, 60, 60);
    Frame b = Frame::filled(64, 64, 76, 76, 76);
    double expect = 20.0 * std::log10(255.0 / 16.0);
    bool psnr_ok = std::abs(psnr(a, b) - expect) <= 0.01;
    std::printf("    uniform-16 PSNR %.4f dB vs closed form %.4f\n", psnr(a, b), expect);
    CHECK(psnr_ok);

    bool ssim_ok = true;
    for (uint32_t seed = 100; seed < 116; ++seed) {
        Frame x = test_util::random_frame(16, 16, seed * 3 + 1);
        Frame y = test_util::random_frame(16, 16, seed * 3 + 2);
        double lib = ssim(x, y);
        double oracle = test_util::ssim_oracle(x, y);
        ssim_ok = ssim_ok && std::abs(lib - oracle) < 1e-6;
    }
    CHECK(ssim_ok);

    Frame s = test_util::smooth_frame(32, 32);
    bool self_ok = std::abs(ssim(s, s) - 1.0) < 1e-12;
    CHECK(self_ok);

    report(9, "PSNR closed form, SSIM brute-force match, SSIM(a,a)=1",
           psnr_ok && ssim_ok && self_ok);
}

TEST_CASE("criterion 10: schedule stays total under 30% keypoint loss") {
    EncodeInputs inputs = synthetic_inputs(120, 48, 48, 1, 1, 0.04f);
    inputs.config.sr_patch = 16;
    EncodeResult enc = encode_session(inputs);
    ChannelConfig ch;
    ch.mode = ChannelMode::Lossy;
    ch.loss_rate = 0.30;
    ch.seed = 424242;
    auto [delivered, channel_report] = transmit(enc.packets, ch);
    std::printf("    dropped %llu of %llu keypoint packets\n",
                static_cast<unsigned long long>(channel_report.counts(PacketKind::KeyPoints).dropped),
                static_cast<unsigned long long>(channel_report.counts(PacketKind::KeyPoints).sent));

    // the amended schedule still partitions the display range
    std::set<uint32_t> kp_indices;
    for (const Packet& p : delivered)
        if (p.kind == PacketKind::KeyPoints) kp_indices.insert(p.frame_index);
    Schedule amended = amend_schedule_for_losses(build_schedule(120, 1), kp_indices);
    bool coverage_ok = amended.entries.size() == 120;
    for (uint32_t i = 1; i < 120 && coverage_ok; ++i) {
        const ScheduleEntry& e = amended.entries[i];
        switch (e.tag) {
            case FrameTag::Keyed:
                coverage_ok = kp_indices.count(i) > 0;
                break;
            case FrameTag::Interpolated:
                coverage_ok = e.left < i && e.right > i && kp_indices.count(e.right) > 0;
                break;
            case FrameTag::Hold:
                coverage_ok = e.left == i - 1;
                break;
            case FrameTag::PivotDirect:
                coverage_ok = false;
                break;
        }
    }
    CHECK(coverage_ok);

    bool dropped_some = channel_report.counts(PacketKind::KeyPoints).dropped > 0;
    DecodeResult dec = decode_session(delivered);
    bool count_ok = dec.frames.size() == 120;
    std::printf("    decoder emitted %zu frames (%zu holds)\n", dec.frames.size(),
                dec.held_frames.size());
    CHECK(count_ok);
    report(10, "lossy decode emits the full frame count", coverage_ok && count_ok && dropped_some);
}

TEST_CASE("criterion 11: neural-quality numbers are out of scope by design") {
    // Trained-model metrics (FID scores, learned-reconstruction PSNR/SSIM tables)
    // are not reproducible here; rate arithmetic and ordering trends above stand
    // in for them. Nothing to compute: this records the boundary explicitly.
    report(11, "trained-model quality metrics excluded; covered by properties", true);
    CHECK(true);
}
