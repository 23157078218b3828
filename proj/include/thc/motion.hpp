#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "thc/core.hpp"

namespace thc {

constexpr float kDefaultSigma = 0.1f;  // Gaussian kernel width in normalized units

/// Per-pixel (dx, dy) displacement field in normalized coordinates.
struct DenseFlow {
    int width = 0;
    int height = 0;
    std::vector<Vec2> vectors;

    Vec2& at(int x, int y) { return vectors[static_cast<size_t>(y) * width + x]; }
    const Vec2& at(int x, int y) const { return vectors[static_cast<size_t>(y) * width + x]; }
};

/// Softmax keypoint weights at one normalized query point: w_k proportional to
/// exp(-|z - p_d^k|^2 / (2 sigma^2)), normalized to sum 1. Diagnostic entry point;
/// dense_flow evaluates the same weighting over the whole grid.
inline std::vector<double> dense_flow_weights(const KeyPointSet& driving, float sigma, Vec2 z) {
    const size_t n = driving.points.size();
    std::vector<double> w(n, 0.0);
    if (n == 0) return w;
    const double inv_two_sigma_sq = 1.0 / (2.0 * static_cast<double>(sigma) * sigma);
    double max_exponent = -1e300;
    for (size_t k = 0; k < n; ++k) {
        double dx = static_cast<double>(z.x) - driving.points[k].x;
        double dy = static_cast<double>(z.y) - driving.points[k].y;
        double e = -(dx * dx + dy * dy) * inv_two_sigma_sq;
        w[k] = e;
        if (e > max_exponent) max_exponent = e;
    }
    double sum = 0.0;
    for (size_t k = 0; k < n; ++k) {
        w[k] = std::exp(w[k] - max_exponent);
        sum += w[k];
    }
    for (size_t k = 0; k < n; ++k) w[k] /= sum;
    return w;
}

/// Translation-only dense flow: at every pixel, the softmax-weighted mean of the
/// per-keypoint displacements (source - driving). Keypoint Jacobians are gone, so
/// each local field is a pure translation.
inline DenseFlow dense_flow(const KeyPointSet& source_kps, const KeyPointSet& driving_kps,
                            float sigma, int width, int height) {
    if (source_kps.points.size() != driving_kps.points.size())
        throw StreamError("keypoint count mismatch");
    if (source_kps.points.empty()) throw StreamError("empty keypoint set");
    if (!(sigma > 0.0f)) throw ConfigError("sigma must be positive");

    const size_t n = source_kps.points.size();
    std::vector<double> disp_x(n), disp_y(n);
    for (size_t k = 0; k < n; ++k) {
        disp_x[k] = static_cast<double>(source_kps.points[k].x) - driving_kps.points[k].x;
        disp_y[k] = static_cast<double>(source_kps.points[k].y) - driving_kps.points[k].y;
    }

    // The Gaussian factorizes per axis; precompute exp tables so the pixel loop
    // is multiply-accumulate only.
    const double inv_two_sigma_sq = 1.0 / (2.0 * static_cast<double>(sigma) * sigma);
    std::vector<double> col_factor(n * static_cast<size_t>(width));
    std::vector<double> row_factor(n * static_cast<size_t>(height));
    for (size_t k = 0; k < n; ++k) {
        for (int x = 0; x < width; ++x) {
            double d = static_cast<double>(pixel_to_norm(static_cast<float>(x), width)) -
                       driving_kps.points[k].x;
            col_factor[k * width + x] = std::exp(-d * d * inv_two_sigma_sq);
        }
        for (int y = 0; y < height; ++y) {
            double d = static_cast<double>(pixel_to_norm(static_cast<float>(y), height)) -
                       driving_kps.points[k].y;
            row_factor[k * height + y] = std::exp(-d * d * inv_two_sigma_sq);
        }
    }

    DenseFlow flow;
    flow.width = width;
    flow.height = height;
    flow.vectors.resize(static_cast<size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        Vec2* out_row = flow.vectors.data() + static_cast<size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double sum = 0.0, fx = 0.0, fy = 0.0;
            for (size_t k = 0; k < n; ++k) {
                double w = col_factor[k * width + x] * row_factor[k * height + y];
                sum += w;
                fx += w * disp_x[k];
                fy += w * disp_y[k];
            }
            if (sum > 1e-280) {
                out_row[x].x = static_cast<float>(fx / sum);
                out_row[x].y = static_cast<float>(fy / sum);
            } else {
                // All factored weights underflowed (tiny sigma); redo this pixel
                // with max-subtracted exponents.
                Vec2 z{pixel_to_norm(static_cast<float>(x), width),
                       pixel_to_norm(static_cast<float>(y), height)};
                std::vector<double> w = dense_flow_weights(driving_kps, sigma, z);
                double sx = 0.0, sy = 0.0;
                for (size_t k = 0; k < n; ++k) {
                    sx += w[k] * disp_x[k];
                    sy += w[k] * disp_y[k];
                }
                out_row[x].x = static_cast<float>(sx);
                out_row[x].y = static_cast<float>(sy);
            }
        }
    }
    return flow;
}

/// Backward warp with bilinear sampling and edge clamping. Flow displacements are
/// normalized units; sample position is computed in double so a zero displacement
/// lands exactly on the source pixel.
inline Frame warp(const Frame& pivot, const DenseFlow& flow) {
    if (pivot.width != flow.width || pivot.height != flow.height)
        throw StreamError("flow/frame size mismatch");
    Frame out(pivot.width, pivot.height, pivot.index);
    const int w = pivot.width, h = pivot.height;
    const double half_w = (w - 1) / 2.0;
    const double half_h = (h - 1) / 2.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec2& f = flow.at(x, y);
            double sx = x + static_cast<double>(f.x) * half_w;
            double sy = y + static_cast<double>(f.y) * half_h;
            int x0 = static_cast<int>(std::floor(sx));
            int y0 = static_cast<int>(std::floor(sy));
            double tx = sx - x0;
            double ty = sy - y0;
            int x0c = std::clamp(x0, 0, w - 1);
            int x1c = std::clamp(x0 + 1, 0, w - 1);
            int y0c = std::clamp(y0, 0, h - 1);
            int y1c = std::clamp(y0 + 1, 0, h - 1);
            for (int c = 0; c < 3; ++c) {
                double top = (1.0 - tx) * pivot.at(x0c, y0c, c) + tx * pivot.at(x1c, y0c, c);
                double bot = (1.0 - tx) * pivot.at(x0c, y1c, c) + tx * pivot.at(x1c, y1c, c);
                double v = (1.0 - ty) * top + ty * bot;
                out.at(x, y, c) = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return out;
}

/// Motion backend contract: output resolution equals the pivot's, and
/// reconstruct(pivot, s, s) must reproduce the pivot.
struct WarpBackend {
    virtual ~WarpBackend() = default;
    virtual Frame reconstruct(const Frame& pivot, const KeyPointSet& source_kps,
                              const KeyPointSet& driving_kps) const = 0;
};

inline Frame reference_reconstruct(const Frame& pivot, const KeyPointSet& source_kps,
                                   const KeyPointSet& driving_kps,
                                   float sigma = kDefaultSigma) {
    return warp(pivot, dense_flow(source_kps, driving_kps, sigma, pivot.width, pivot.height));
}

class ReferenceWarpBackend : public WarpBackend {
public:
    explicit ReferenceWarpBackend(float sigma = kDefaultSigma) : sigma_(sigma) {}

    Frame reconstruct(const Frame& pivot, const KeyPointSet& source_kps,
                      const KeyPointSet& driving_kps) const override {
        return reference_reconstruct(pivot, source_kps, driving_kps, sigma_);
    }

    float sigma() const { return sigma_; }

private:
    float sigma_;
};

/// Test oracle: a sequence whose true motion is exactly the reference model's
/// motion. Frame t warps the base by the flow from trajectories[0] to
/// trajectories[t], so transmitting the trajectories and reconstructing with
/// reference_reconstruct reproduces each frame through the same arithmetic.
inline std::vector<Frame> synthesize_sequence(const Frame& base,
                                              const std::vector<KeyPointSet>& trajectories,
                                              float sigma = kDefaultSigma) {
    if (trajectories.empty()) throw ConfigError("empty sequence");
    std::vector<Frame> frames(trajectories.size());
    parallel_for(static_cast<int>(trajectories.size()), [&](int t) {
        DenseFlow flow =
            dense_flow(trajectories[0], trajectories[t], sigma, base.width, base.height);
        frames[t] = warp(base, flow);
        frames[t].index = static_cast<uint32_t>(t);
    });
    return frames;
}

}  // namespace thc
