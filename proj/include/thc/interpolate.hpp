#pragma once

#include <cstdint>
#include <vector>

#include "thc/core.hpp"
#include "thc/motion.hpp"

namespace thc {

enum class FrameTag : uint8_t {
    PivotDirect,   // displayed straight from the pivot frame
    Keyed,         // reconstructed from this frame's transmitted keypoints
    Interpolated,  // synthesized between two keyed neighbors
    Hold,          // repeats the previous displayed frame (loss recovery only)
};

struct ScheduleEntry {
    FrameTag tag = FrameTag::Keyed;
    uint32_t left = 0;       // Keyed: own index; Interpolated: left anchor; Hold: previous display
    uint32_t right = 0;      // Interpolated: right anchor
    float fraction = 0.0f;   // Interpolated: position in (0,1) between anchors

    friend bool operator==(const ScheduleEntry& a, const ScheduleEntry& b) {
        return a.tag == b.tag && a.left == b.left && a.right == b.right &&
               a.fraction == b.fraction;
    }
};

/// One entry per display frame; entries[i] says how display frame i is produced.
struct Schedule {
    std::vector<ScheduleEntry> entries;

    size_t size() const { return entries.size(); }
};

/// Frame 0 comes from the pivot; keyed frames run 1, 1+(m+1), 1+2(m+1), ... with m
/// interpolated frames between consecutive keyed pairs at fractions j/(m+1).
/// Trailing frames past the last keyed index are transmitted keyed rather than
/// extrapolated.
inline Schedule build_schedule(uint32_t n_frames, int interp_frames) {
    if (interp_frames < 0 || interp_frames > 3) throw ConfigError("interp_frames out of range");
    if (n_frames == 0) throw ConfigError("empty sequence");
    const uint32_t step = static_cast<uint32_t>(interp_frames) + 1;
    Schedule s;
    s.entries.resize(n_frames);
    s.entries[0] = {FrameTag::PivotDirect, 0, 0, 0.0f};
    uint32_t keyed = 1;
    while (keyed < n_frames) {
        s.entries[keyed] = {FrameTag::Keyed, keyed, 0, 0.0f};
        uint32_t next_keyed = keyed + step;
        if (next_keyed < n_frames) {
            for (uint32_t j = 1; j <= static_cast<uint32_t>(interp_frames); ++j) {
                float fraction = static_cast<float>(j) / static_cast<float>(step);
                s.entries[keyed + j] = {FrameTag::Interpolated, keyed, next_keyed, fraction};
            }
            keyed = next_keyed;
        } else {
            // No right neighbor inside the sequence: remaining frames are keyed.
            for (uint32_t i = keyed + 1; i < n_frames; ++i)
                s.entries[i] = {FrameTag::Keyed, i, 0, 0.0f};
            break;
        }
    }
    return s;
}

inline std::vector<uint32_t> keyed_indices(const Schedule& s) {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < s.entries.size(); ++i)
        if (s.entries[i].tag == FrameTag::Keyed) out.push_back(i);
    return out;
}

/// Componentwise (1-fraction)*left + fraction*right in 32-bit floats.
inline KeyPointSet lerp_keypoints(const KeyPointSet& left, const KeyPointSet& right,
                                  float fraction) {
    if (left.points.size() != right.points.size()) throw StreamError("keypoint count mismatch");
    KeyPointSet mid;
    mid.points.resize(left.points.size());
    const float a = 1.0f - fraction;
    for (size_t i = 0; i < mid.points.size(); ++i) {
        mid.points[i].x = a * left.points[i].x + fraction * right.points[i].x;
        mid.points[i].y = a * left.points[i].y + fraction * right.points[i].y;
    }
    return mid;
}

/// Receiver-side interpolation backend. The neural realization consumes the two
/// reconstructed neighbor frames; the reference realization works in keypoint
/// space and needs the pivot plus its keypoints.
struct InterpBackend {
    virtual ~InterpBackend() = default;
    virtual Frame interpolate(const Frame& left, const Frame& right, const KeyPointSet& left_kps,
                              const KeyPointSet& right_kps, float fraction, const Frame& pivot,
                              const KeyPointSet& pivot_kps) const = 0;
};

/// Deterministic reference: linearly blend the neighbor keypoints, then warp the
/// pivot to the blended pose. Exact on linear keypoint motion.
inline Frame reference_interpolate(const KeyPointSet& left_kps, const KeyPointSet& right_kps,
                                   float fraction, const Frame& pivot,
                                   const KeyPointSet& source_kps, float sigma = kDefaultSigma) {
    if (!(fraction > 0.0f && fraction < 1.0f)) throw ConfigError("fraction outside (0,1)");
    KeyPointSet mid = lerp_keypoints(left_kps, right_kps, fraction);
    return reference_reconstruct(pivot, source_kps, mid, sigma);
}

class ReferenceInterpBackend : public InterpBackend {
public:
    explicit ReferenceInterpBackend(float sigma = kDefaultSigma) : sigma_(sigma) {}

    Frame interpolate(const Frame& /*left*/, const Frame& /*right*/, const KeyPointSet& left_kps,
                      const KeyPointSet& right_kps, float fraction, const Frame& pivot,
                      const KeyPointSet& pivot_kps) const override {
        return reference_interpolate(left_kps, right_kps, fraction, pivot, pivot_kps, sigma_);
    }

private:
    float sigma_;
};

}  // namespace thc
