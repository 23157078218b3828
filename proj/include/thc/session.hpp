#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <vector>

#include "thc/bitstream.hpp"
#include "thc/channel.hpp"
#include "thc/core.hpp"
#include "thc/interpolate.hpp"
#include "thc/metrics.hpp"
#include "thc/motion.hpp"
#include "thc/patch_sr.hpp"
#include "thc/pivot.hpp"

namespace thc {

// Sender session. Emits, in order: Handshake; Pivot(0); KeyPoints(0) as the
// pivot's warp source (when more than one frame exists); per-schedule KeyPoints
// for keyed frames, preceded by a replacement Pivot whenever the policy fires;
// EndOfStream carrying the display frame count.

struct EncodeInputs {
    std::vector<Frame> frames;
    std::vector<KeyPointSet> keypoints;            // one per frame
    std::vector<PoseAngles> poses;                 // required when policy_enabled
    std::vector<std::vector<uint8_t>> bg_masks;    // optional; empty = border-band fallback
    StreamConfig config;
    bool policy_enabled = false;
};

struct EncodeResult {
    std::vector<Packet> packets;
    RateLedger ledger;
    std::vector<uint32_t> replacement_indices;
};

inline EncodeResult encode_session(const EncodeInputs& in) {
    require_valid_config(in.config);
    const size_t n = in.frames.size();
    if (n == 0) throw ConfigError("empty sequence");
    if (in.keypoints.size() != n) throw ConfigError("keypoint sidecar does not cover every frame");
    if (in.policy_enabled && in.poses.size() != n)
        throw ConfigError("pose sidecar does not cover every frame");
    for (size_t i = 0; i < n; ++i) {
        if (!frame_well_formed(in.frames[i])) throw ConfigError("malformed input frame");
        if (in.frames[i].width != in.config.width || in.frames[i].height != in.config.height)
            throw ConfigError("frame resolution differs from config");
        if (in.keypoints[i].points.size() != static_cast<size_t>(in.config.num_keypoints))
            throw ConfigError("keypoint count differs from config");
    }

    EncodeResult result;
    RateLedger& ledger = result.ledger;
    auto emit = [&](Packet p) {
        ledger.add_packet(p);
        result.packets.push_back(std::move(p));
    };

    emit(encode_handshake(in.config));

    auto mask_for = [&](size_t i) -> std::vector<uint8_t> {
        if (i < in.bg_masks.size() && !in.bg_masks[i].empty()) return in.bg_masks[i];
        return border_band_mask(in.frames[i].width, in.frames[i].height);
    };

    PivotState state;
    state.pivot_frame = in.frames[0];
    state.pivot_frame.index = 0;
    if (in.policy_enabled) {
        state.pivot_pose = in.poses[0];
        state.pivot_bg = background_embedding(in.frames[0], mask_for(0));
    }
    state.established_at = 0;
    emit(encode_pivot(state.pivot_frame));
    if (n > 1) {
        KeyPointSet kp0 = in.keypoints[0];
        kp0.frame_index = 0;
        emit(encode_keypoints(kp0));
    }

    Schedule schedule = build_schedule(static_cast<uint32_t>(n), in.config.interp_frames);
    for (uint32_t i = 1; i < n; ++i) {
        if (schedule.entries[i].tag != FrameTag::Keyed) continue;
        if (in.policy_enabled) {
            BackgroundEmbedding bg = background_embedding(in.frames[i], mask_for(i));
            if (should_replace(state, in.poses[i], bg, in.config.pivot_policy) ==
                    PivotDecision::Replace &&
                cooldown_allows(state, i, in.config.pivot_policy.cooldown_frames)) {
                Frame pivot_frame = in.frames[i];
                pivot_frame.index = i;
                auto [next_state, pkt] =
                    apply_replacement(state, pivot_frame, in.poses[i], bg, ledger);
                state = std::move(next_state);
                result.packets.push_back(std::move(pkt));
                result.replacement_indices.push_back(i);
            }
        }
        KeyPointSet kps = in.keypoints[i];
        kps.frame_index = i;
        emit(encode_keypoints(kps));
    }

    emit(end_of_stream(static_cast<uint32_t>(n)));
    ledger.displayed_frames = n;
    return result;
}

// Receiver session. Tolerates missing keyed keypoint packets by re-planning the
// schedule, reconstructs keyed frames first, then interpolations, then holds,
// and finally runs bicubic upscale plus patch enhancement on every frame.

struct DecodeOptions {
    int sr_factor = 0;   // 0 = take from handshake
    int sr_patch = 0;    // 0 = take from handshake
    bool overlap = false;  // stride k/2 with Hann blending instead of stride k
    const WarpBackend* warp_backend = nullptr;     // default: reference warp
    const InterpBackend* interp_backend = nullptr; // default: reference keypoint-space interp
    const SrBackend* sr_backend = nullptr;  // default: unsharp when upscaling, identity at 1x
};

struct DecodeResult {
    std::vector<Frame> frames;
    StreamConfig config;
    std::vector<uint32_t> pivot_indices;
    std::vector<uint32_t> held_frames;  // display indices emitted as holds
};

inline DecodeResult decode_session(std::span<const Packet> packets,
                                   const DecodeOptions& opts = {}) {
    if (packets.empty() || packets.front().kind != PacketKind::Handshake)
        throw StreamError("stream without handshake");
    if (packets.back().kind != PacketKind::EndOfStream)
        throw StreamError("stream without end-of-stream");

    DecodeResult result;
    result.config = decode_handshake(packets.front());
    const uint32_t n = packets.back().frame_index;
    if (n == 0) throw StreamError("empty sequence");

    std::map<uint32_t, Frame> pivots;
    std::map<uint32_t, KeyPointSet> kps;
    for (const Packet& p : packets) {
        switch (p.kind) {
            case PacketKind::Pivot:
                pivots[p.frame_index] = decode_pivot(p);
                break;
            case PacketKind::KeyPoints: {
                KeyPointSet k = decode_keypoints(p);
                if (k.points.size() != static_cast<size_t>(result.config.num_keypoints))
                    throw StreamError("keypoint count differs from handshake");
                kps[p.frame_index] = std::move(k);
                break;
            }
            default:
                break;
        }
    }
    if (pivots.empty()) throw StreamError("stream without pivot frame");
    for (const auto& [idx, frame] : pivots) {
        result.pivot_indices.push_back(idx);
        if (n > 1 && !kps.count(idx)) throw StreamError("missing pivot keypoints");
        if (frame.width != result.config.width || frame.height != result.config.height)
            throw StreamError("pivot resolution differs from handshake");
    }

    Schedule schedule = build_schedule(n, result.config.interp_frames);
    std::set<uint32_t> delivered;
    for (const auto& [idx, k] : kps) delivered.insert(idx);
    schedule = amend_schedule_for_losses(schedule, delivered);

    // Pivot active for a display frame: the latest pivot at or before the last
    // packet the frame depends on (its right anchor for interpolations).
    auto active_pivot = [&](uint32_t dependency_index) -> uint32_t {
        auto it = pivots.upper_bound(dependency_index);
        if (it == pivots.begin()) throw StreamError("no pivot before first frame");
        return std::prev(it)->first;
    };

    ReferenceWarpBackend default_warp;
    ReferenceInterpBackend default_interp;
    const WarpBackend& warp_be = opts.warp_backend ? *opts.warp_backend : default_warp;
    const InterpBackend& interp_be = opts.interp_backend ? *opts.interp_backend : default_interp;

    std::vector<Frame> raw(n);
    std::vector<uint32_t> keyed_pass, interp_pass;
    for (uint32_t i = 0; i < n; ++i) {
        switch (schedule.entries[i].tag) {
            case FrameTag::PivotDirect:
                break;
            case FrameTag::Keyed:
                keyed_pass.push_back(i);
                break;
            case FrameTag::Interpolated:
                interp_pass.push_back(i);
                break;
            case FrameTag::Hold:
                break;
        }
    }

    if (pivots.begin()->first != 0) throw StreamError("no pivot before first frame");
    raw[0] = pivots.begin()->second;
    raw[0].index = 0;

    parallel_for(static_cast<int>(keyed_pass.size()), [&](int j) {
        uint32_t i = keyed_pass[static_cast<size_t>(j)];
        uint32_t pv = active_pivot(i);
        raw[i] = warp_be.reconstruct(pivots.at(pv), kps.at(pv), kps.at(i));
        raw[i].index = i;
    });
    parallel_for(static_cast<int>(interp_pass.size()), [&](int j) {
        uint32_t i = interp_pass[static_cast<size_t>(j)];
        const ScheduleEntry& e = schedule.entries[i];
        uint32_t pv = active_pivot(e.right);
        raw[i] = interp_be.interpolate(raw[e.left], raw[e.right], kps.at(e.left), kps.at(e.right),
                                       e.fraction, pivots.at(pv), kps.at(pv));
        raw[i].index = i;
    });
    for (uint32_t i = 1; i < n; ++i) {
        if (schedule.entries[i].tag != FrameTag::Hold) continue;
        raw[i] = raw[schedule.entries[i].left];
        raw[i].index = i;
        result.held_frames.push_back(i);
    }

    const int sr = opts.sr_factor > 0 ? opts.sr_factor : result.config.sr_factor;
    const int k = opts.sr_patch > 0 ? opts.sr_patch : result.config.sr_patch;
    if (sr != 1 && sr != 2) throw ConfigError("sr_factor out of range");
    if (k < 8) throw ConfigError("sr_patch below minimum");
    IdentitySrBackend identity;
    UnsharpSrBackend unsharp;
    const SrBackend& sr_be =
        opts.sr_backend ? *opts.sr_backend
                        : (sr > 1 ? static_cast<const SrBackend&>(unsharp)
                                  : static_cast<const SrBackend&>(identity));
    const int stride = opts.overlap ? k / 2 : k;
    const int out_w = result.config.width * sr;
    const int out_h = result.config.height * sr;

    result.frames.resize(n);
    parallel_for(static_cast<int>(n), [&](int i) {
        Frame up = bicubic_resample(raw[i], out_w, out_h);
        result.frames[i] = enhance_image(up, k, sr_be, stride);
        result.frames[i].index = static_cast<uint32_t>(i);
    });
    return result;
}

}  // namespace thc
