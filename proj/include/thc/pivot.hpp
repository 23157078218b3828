#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "thc/bitstream.hpp"
#include "thc/core.hpp"

namespace thc {

/// L2-normalized 256-vector summarizing the background region of a frame.
struct BackgroundEmbedding {
    std::array<float, 256> values{};
};

inline double embedding_distance(const BackgroundEmbedding& a, const BackgroundEmbedding& b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        double d = static_cast<double>(a.values[i]) - b.values[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

/// Deterministic background descriptor: grayscale the masked background,
/// average-pool onto a 16x16 grid (cells with no background pixel take the
/// global background mean), flatten, L2-normalize. A mask byte of zero marks
/// face; nonzero marks background.
inline BackgroundEmbedding background_embedding(const Frame& frame,
                                                const std::vector<uint8_t>& bg_mask) {
    if (bg_mask.size() != static_cast<size_t>(frame.width) * frame.height)
        throw ConfigError("mask size mismatch");
    constexpr int kGrid = 16;
    std::array<double, kGrid * kGrid> cell_sum{};
    std::array<uint32_t, kGrid * kGrid> cell_count{};
    double global_sum = 0.0;
    uint64_t global_count = 0;
    for (int y = 0; y < frame.height; ++y) {
        int cy = y * kGrid / frame.height;
        for (int x = 0; x < frame.width; ++x) {
            if (!bg_mask[static_cast<size_t>(y) * frame.width + x]) continue;
            int cx = x * kGrid / frame.width;
            double gray = 0.299 * frame.at(x, y, 0) + 0.587 * frame.at(x, y, 1) +
                          0.114 * frame.at(x, y, 2);
            cell_sum[cy * kGrid + cx] += gray;
            cell_count[cy * kGrid + cx] += 1;
            global_sum += gray;
            global_count += 1;
        }
    }
    if (global_count == 0) throw ConfigError("no background pixels");
    const double global_mean = global_sum / static_cast<double>(global_count);

    std::array<double, kGrid * kGrid> cells{};
    double norm_sq = 0.0;
    for (size_t i = 0; i < cells.size(); ++i) {
        cells[i] = cell_count[i] ? cell_sum[i] / cell_count[i] : global_mean;
        norm_sq += cells[i] * cells[i];
    }
    BackgroundEmbedding emb;
    if (norm_sq <= 0.0) {
        // All-black background: direction is undefined, use the uniform unit vector.
        emb.values.fill(1.0f / kGrid);
        return emb;
    }
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (size_t i = 0; i < cells.size(); ++i)
        emb.values[i] = static_cast<float>(cells[i] * inv_norm);
    return emb;
}

/// Fallback background mask for mask-less runs: the outer 20% band on every side
/// counts as background, the center window as face. Nonzero = background.
inline std::vector<uint8_t> border_band_mask(int width, int height, double band = 0.2) {
    std::vector<uint8_t> mask(static_cast<size_t>(width) * height, 0);
    int x0 = static_cast<int>(width * band);
    int x1 = width - x0;
    int y0 = static_cast<int>(height * band);
    int y1 = height - y0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (x < x0 || x >= x1 || y < y0 || y >= y1)
                mask[static_cast<size_t>(y) * width + x] = 1;
    return mask;
}

struct PivotState {
    Frame pivot_frame;
    PoseAngles pivot_pose;
    BackgroundEmbedding pivot_bg;
    uint32_t established_at = 0;
};

enum class PivotDecision : uint8_t { Keep, Replace };

/// Replace when any absolute pose delta breaches its gamma threshold OR the
/// background embedding distance breaches d_bg.
inline PivotDecision should_replace(const PivotState& state, const PoseAngles& pose,
                                    const BackgroundEmbedding& bg, const PivotThresholds& th) {
    if (std::abs(pose.yaw - state.pivot_pose.yaw) > th.gamma_yaw) return PivotDecision::Replace;
    if (std::abs(pose.roll - state.pivot_pose.roll) > th.gamma_roll) return PivotDecision::Replace;
    if (std::abs(pose.pitch - state.pivot_pose.pitch) > th.gamma_pitch)
        return PivotDecision::Replace;
    if (embedding_distance(state.pivot_bg, bg) > th.d_bg) return PivotDecision::Replace;
    return PivotDecision::Keep;
}

/// Build the replacement: encode the new pivot frame, credit the ledger, and
/// return the updated state together with the Pivot packet to enqueue.
inline std::pair<PivotState, Packet> apply_replacement(const PivotState& /*state*/,
                                                       const Frame& new_frame,
                                                       const PoseAngles& new_pose,
                                                       const BackgroundEmbedding& new_bg,
                                                       RateLedger& ledger) {
    Packet pkt = encode_pivot(new_frame);
    ledger.add_packet(pkt);
    ledger.replacement_indices.push_back(new_frame.index);
    PivotState next;
    next.pivot_frame = new_frame;
    next.pivot_pose = new_pose;
    next.pivot_bg = new_bg;
    next.established_at = new_frame.index;
    return {std::move(next), std::move(pkt)};
}

/// Cooldown gate: a breach inside the window after the last replacement is
/// deferred. cooldown_frames = 0 disables the window.
inline bool cooldown_allows(const PivotState& state, uint32_t frame_index,
                            uint32_t cooldown_frames) {
    if (cooldown_frames == 0) return true;
    return frame_index - state.established_at >= cooldown_frames;
}

}  // namespace thc
