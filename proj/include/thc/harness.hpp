#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thc/core.hpp"
#include "thc/frame_io.hpp"
#include "thc/metrics.hpp"
#include "thc/motion.hpp"
#include "thc/session.hpp"

namespace thc {

// Synthetic clips: scenes whose true motion is exactly the reference warp model,
// so the encode/decode pipeline is verifiable at desk scale without trained
// models. Pose traces are scripted (poses are an input interface, not derived
// from pixels).

struct SynthSpec {
    int width = 256;
    int height = 256;
    int frames = 100;
    int num_keypoints = 10;
    uint64_t seed = 1;
    float wobble = 0.08f;   // per-keypoint oscillation amplitude, normalized units
    float drift = 0.0f;     // shared translation per frame; drives background change
    double pose_rate = 0.3; // yaw drift in degrees per frame for the pose trace
    float sigma = kDefaultSigma;
};

struct SynthClip {
    Frame base;
    std::vector<Frame> frames;
    std::vector<KeyPointSet> trajectories;
    std::vector<PoseAngles> poses;
    std::vector<std::vector<uint8_t>> bg_masks;  // nonzero = background
};

/// Smooth multi-tone test card with a brighter center blob standing in for the face.
inline Frame synth_base_frame(int width, int height, uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto phase = [&rng] {
        return static_cast<double>(rng() % 6283) / 1000.0;
    };
    double p1 = phase(), p2 = phase(), p3 = phase();
    Frame f(width, height, 0);
    for (int y = 0; y < height; ++y) {
        double ny = pixel_to_norm(static_cast<float>(y), height);
        for (int x = 0; x < width; ++x) {
            double nx = pixel_to_norm(static_cast<float>(x), width);
            double blob = 70.0 * std::exp(-(nx * nx + ny * ny) / 0.18);
            double r = 120.0 + 70.0 * std::sin(2.1 * nx + p1) * std::cos(1.6 * ny - p2) + blob;
            double g = 110.0 + 70.0 * std::sin(1.4 * nx - p3) * std::cos(2.3 * ny + p1) + blob;
            double b = 100.0 + 70.0 * std::cos(1.9 * nx + p2) * std::sin(1.3 * ny + p3) + blob;
            f.at(x, y, 0) = static_cast<uint8_t>(std::clamp(std::lround(r), 0L, 255L));
            f.at(x, y, 1) = static_cast<uint8_t>(std::clamp(std::lround(g), 0L, 255L));
            f.at(x, y, 2) = static_cast<uint8_t>(std::clamp(std::lround(b), 0L, 255L));
        }
    }
    return f;
}

inline std::vector<uint8_t> center_ellipse_bg_mask(int width, int height) {
    std::vector<uint8_t> bg(static_cast<size_t>(width) * height, 1);
    double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;
    double rx = 0.30 * width, ry = 0.35 * height;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double dx = (x - cx) / rx, dy = (y - cy) / ry;
            if (dx * dx + dy * dy <= 1.0) bg[static_cast<size_t>(y) * width + x] = 0;
        }
    return bg;
}

inline SynthClip synthesize_clip(const SynthSpec& spec) {
    if (spec.frames < 1) throw ConfigError("empty sequence");
    if (spec.num_keypoints < 1 || spec.num_keypoints > 255)
        throw ConfigError("num_keypoints out of range");
    std::mt19937_64 rng(spec.seed);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    SynthClip clip;
    clip.base = synth_base_frame(spec.width, spec.height, spec.seed);

    const int K = spec.num_keypoints;
    std::vector<Vec2> origin(K);
    std::vector<double> omega_x(K), omega_y(K), phi_x(K), phi_y(K);
    for (int k = 0; k < K; ++k) {
        double theta = 2.0 * 3.14159265358979323846 * k / K;
        origin[k] = {static_cast<float>(0.35 * std::cos(theta)),
                     static_cast<float>(0.35 * std::sin(theta))};
        omega_x[k] = 0.05 + 0.15 * unit();
        omega_y[k] = 0.05 + 0.15 * unit();
        phi_x[k] = 6.28 * unit();
        phi_y[k] = 6.28 * unit();
    }

    clip.trajectories.resize(spec.frames);
    for (int t = 0; t < spec.frames; ++t) {
        KeyPointSet kps;
        kps.frame_index = static_cast<uint32_t>(t);
        kps.points.resize(K);
        for (int k = 0; k < K; ++k) {
            double x = origin[k].x + spec.wobble * std::sin(omega_x[k] * t + phi_x[k]) +
                       spec.drift * t;
            double y = origin[k].y + spec.wobble * std::cos(omega_y[k] * t + phi_y[k]);
            kps.points[k] = {clamp_norm(static_cast<float>(x)),
                             clamp_norm(static_cast<float>(y))};
        }
        clip.trajectories[t] = std::move(kps);
    }

    clip.frames = synthesize_sequence(clip.base, clip.trajectories, spec.sigma);

    clip.poses.resize(spec.frames);
    for (int t = 0; t < spec.frames; ++t) {
        clip.poses[t].yaw = spec.pose_rate * t + 4.0 * std::sin(0.13 * t);
        clip.poses[t].roll = 0.5 * spec.pose_rate * t + 2.0 * std::sin(0.07 * t + 1.0);
        clip.poses[t].pitch = 0.25 * spec.pose_rate * t + 2.0 * std::cos(0.11 * t);
    }

    clip.bg_masks.assign(spec.frames, center_ellipse_bg_mask(spec.width, spec.height));
    return clip;
}

// Ablation harness: re-run encode -> decode -> evaluate over a parameter grid.

enum class SweepKind { Interp, Patch, Gamma, Dbg };

inline const char* sweep_name(SweepKind k) {
    switch (k) {
        case SweepKind::Interp: return "interp";
        case SweepKind::Patch: return "patch";
        case SweepKind::Gamma: return "gamma";
        case SweepKind::Dbg: return "dbg";
    }
    return "?";
}

inline SweepKind sweep_from_name(const std::string& name) {
    if (name == "interp") return SweepKind::Interp;
    if (name == "patch") return SweepKind::Patch;
    if (name == "gamma") return SweepKind::Gamma;
    if (name == "dbg") return SweepKind::Dbg;
    throw ConfigError("unknown sweep kind: " + name);
}

struct SweepSpec {
    SweepKind kind = SweepKind::Interp;
    std::vector<double> values;
};

struct AblationRow {
    double value = 0.0;
    uint64_t replacements = 0;
    EvalReport report;
};

struct AblationResult {
    SweepKind kind = SweepKind::Interp;
    std::vector<AblationRow> rows;
};

/// One full pipeline pass per grid value, deterministic row order. Quality is
/// measured against the input frames, bicubically upscaled when the output
/// resolution exceeds the source.
inline AblationResult run_ablation(const EncodeInputs& base, const SweepSpec& sweep,
                                   const DecodeOptions& base_opts = {}) {
    if (sweep.values.empty()) throw ConfigError("empty sweep");
    AblationResult result;
    result.kind = sweep.kind;

    std::vector<Frame> ref_cache;
    int ref_sr = 0;
    auto reference_at = [&](int sr) -> const std::vector<Frame>& {
        if (ref_sr != sr) {
            ref_cache.resize(base.frames.size());
            parallel_for(static_cast<int>(base.frames.size()), [&](int i) {
                ref_cache[i] = sr == 1 ? base.frames[i]
                                       : bicubic_resample(base.frames[i],
                                                          base.frames[i].width * sr,
                                                          base.frames[i].height * sr);
            });
            ref_sr = sr;
        }
        return ref_cache;
    };

    for (double value : sweep.values) {
        EncodeInputs inputs = base;
        DecodeOptions opts = base_opts;
        switch (sweep.kind) {
            case SweepKind::Interp:
                inputs.config.interp_frames = static_cast<int>(value);
                break;
            case SweepKind::Patch:
                inputs.config.sr_patch = static_cast<int>(value);
                opts.sr_patch = static_cast<int>(value);
                break;
            case SweepKind::Gamma:
                inputs.policy_enabled = true;
                inputs.config.pivot_policy.gamma_yaw = value;
                inputs.config.pivot_policy.gamma_roll = value;
                inputs.config.pivot_policy.gamma_pitch = value;
                break;
            case SweepKind::Dbg:
                inputs.policy_enabled = true;
                inputs.config.pivot_policy.d_bg = value;
                break;
        }
        EncodeResult enc = encode_session(inputs);
        DecodeResult dec = decode_session(enc.packets, opts);
        int sr = opts.sr_factor > 0 ? opts.sr_factor : inputs.config.sr_factor;
        EvalReport report = evaluate_frames(reference_at(sr), dec.frames, &enc.ledger);
        AblationRow row;
        row.value = value;
        row.replacements = enc.replacement_indices.size();
        row.report = std::move(report);
        result.rows.push_back(std::move(row));
    }
    return result;
}

inline std::string ablation_csv(const AblationResult& r) {
    std::ostringstream out;
    out << "sweep,value,frames,bpp_paper,bpp_full,psnr_mean,ssim_mean,replacements\n";
    out.precision(10);
    for (const AblationRow& row : r.rows) {
        out << sweep_name(r.kind) << ',' << row.value << ',' << row.report.frames << ','
            << row.report.bpp_paper << ',' << row.report.bpp_full << ','
            << row.report.psnr_mean << ',' << row.report.ssim_mean << ',' << row.replacements
            << '\n';
    }
    return out.str();
}

inline nlohmann::json ablation_json(const AblationResult& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const AblationRow& row : r.rows) {
        nlohmann::json j;
        j["value"] = row.value;
        j["replacements"] = row.replacements;
        j["report"] = row.report.to_json();
        rows.push_back(std::move(j));
    }
    return nlohmann::json{{"sweep", sweep_name(r.kind)}, {"rows", rows}};
}

/// Assemble ablation inputs from a key-value spec file (see docs/FORMAT.md):
/// required keys input, keypoints, sweep, values; optional pose, masks, and the
/// usual stream parameters.
inline AblationResult run_ablation_from_manifest(const SessionManifest& m) {
    EncodeInputs inputs;
    inputs.frames = read_frame_dir(m.get("input"));
    inputs.config.width = inputs.frames[0].width;
    inputs.config.height = inputs.frames[0].height;
    inputs.config.num_keypoints = static_cast<int>(m.number_or("kp", 10));
    inputs.config.interp_frames = static_cast<int>(m.number_or("interp", 1));
    inputs.config.sr_factor = static_cast<int>(m.number_or("sr", 2));
    inputs.config.sr_patch = static_cast<int>(m.number_or("patch", 64));
    inputs.config.fps = static_cast<int>(m.number_or("fps", 30));
    inputs.config.pivot_policy.gamma_yaw = m.number_or("gamma", 15.0);
    inputs.config.pivot_policy.gamma_roll = inputs.config.pivot_policy.gamma_yaw;
    inputs.config.pivot_policy.gamma_pitch = inputs.config.pivot_policy.gamma_yaw;
    inputs.config.pivot_policy.d_bg = m.number_or("dbg", 0.05);
    inputs.config.pivot_policy.cooldown_frames =
        static_cast<uint32_t>(m.number_or("cooldown", 0));
    inputs.keypoints = read_keypoint_file(m.get("keypoints"), inputs.frames.size(),
                                          inputs.config.num_keypoints);

    SweepSpec sweep;
    sweep.kind = sweep_from_name(m.get("sweep"));
    std::istringstream vs(m.get("values"));
    double v;
    while (vs >> v) sweep.values.push_back(v);

    bool needs_pose = sweep.kind == SweepKind::Gamma || sweep.kind == SweepKind::Dbg;
    if (m.has("pose")) {
        inputs.poses = read_pose_file(m.get("pose"), inputs.frames.size());
        inputs.policy_enabled = true;
    } else if (needs_pose) {
        throw ConfigError("pose sidecar required for pivot-policy sweeps");
    }
    if (m.has("masks"))
        inputs.bg_masks = read_mask_dir(m.get("masks"), inputs.frames.size());

    return run_ablation(inputs, sweep);
}

}  // namespace thc
