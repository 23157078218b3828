#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "thc/core.hpp"

namespace thc {

namespace detail {

// Catmull-Rom (a = -0.5) weights for taps at offsets -1..2 around the base sample.
inline void catmull_rom_weights(double t, double w[4]) {
    double t2 = t * t;
    double t3 = t2 * t;
    w[0] = -0.5 * t3 + t2 - 0.5 * t;
    w[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
    w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
    w[3] = 0.5 * t3 - 0.5 * t2;
}

}  // namespace detail

/// Whole-image bicubic resampling, Catmull-Rom kernel, edge-clamped, centers
/// aligned (src = (dst + 0.5) * in/out - 0.5). Separable two-pass evaluation in
/// double precision.
inline Frame bicubic_resample(const Frame& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw ConfigError("output dimensions must be positive");
    const int in_w = img.width, in_h = img.height;

    struct Tap {
        int idx[4];
        double w[4];
    };
    auto make_taps = [](int n_in, int n_out) {
        std::vector<Tap> taps(n_out);
        const double scale = static_cast<double>(n_in) / n_out;
        for (int o = 0; o < n_out; ++o) {
            double src = (o + 0.5) * scale - 0.5;
            int base = static_cast<int>(std::floor(src));
            double t = src - base;
            detail::catmull_rom_weights(t, taps[o].w);
            for (int k = 0; k < 4; ++k)
                taps[o].idx[k] = std::clamp(base - 1 + k, 0, n_in - 1);
        }
        return taps;
    };
    std::vector<Tap> xt = make_taps(in_w, out_w);
    std::vector<Tap> yt = make_taps(in_h, out_h);

    // Horizontal pass into a double buffer, then vertical pass with final rounding.
    std::vector<double> mid(static_cast<size_t>(out_w) * in_h * 3);
    for (int y = 0; y < in_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const Tap& tp = xt[x];
            for (int c = 0; c < 3; ++c) {
                double v = 0.0;
                for (int k = 0; k < 4; ++k) v += tp.w[k] * img.at(tp.idx[k], y, c);
                mid[(static_cast<size_t>(y) * out_w + x) * 3 + c] = v;
            }
        }
    }
    Frame out(out_w, out_h, img.index);
    for (int y = 0; y < out_h; ++y) {
        const Tap& tp = yt[y];
        for (int x = 0; x < out_w; ++x) {
            for (int c = 0; c < 3; ++c) {
                double v = 0.0;
                for (int k = 0; k < 4; ++k)
                    v += tp.w[k] * mid[(static_cast<size_t>(tp.idx[k]) * out_w + x) * 3 + c];
                out.at(x, y, c) = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return out;
}

/// Training-pair corruption: bicubic downsample by `factor`, then bicubic back to
/// the original size. Exposed so a learned backend can be trained against the
/// exact inference-time blur.
inline Frame degrade_for_training(const Frame& patch, double factor) {
    if (factor < 2.0) throw ConfigError("factor below 2");
    if (factor > 6.0) throw ConfigError("factor above 6");
    int down_w = std::max(1, static_cast<int>(std::lround(patch.width / factor)));
    int down_h = std::max(1, static_cast<int>(std::lround(patch.height / factor)));
    Frame small = bicubic_resample(patch, down_w, down_h);
    return bicubic_resample(small, patch.width, patch.height);
}

/// Sliding-window tiling: origins of k-by-k patches covering the image after
/// edge-replication padding to the next stride multiple.
struct PatchGrid {
    int patch = 0;
    int stride = 0;
    int padded_width = 0;
    int padded_height = 0;
    std::vector<std::pair<int, int>> origins;  // row-major (x, y)
};

inline PatchGrid tile(int width, int height, int k, int stride = 0) {
    if (k < 8) throw ConfigError("patch size below minimum");
    if (stride == 0) stride = k;
    if (stride < 1 || stride > k || k % stride != 0)
        throw ConfigError("stride must divide patch size");
    auto pad = [&](int dim) {
        int cells = (std::max(dim, k) + stride - 1) / stride;
        return cells * stride;
    };
    PatchGrid g;
    g.patch = k;
    g.stride = stride;
    g.padded_width = pad(width);
    g.padded_height = pad(height);
    for (int y = 0; y + k <= g.padded_height; y += stride)
        for (int x = 0; x + k <= g.padded_width; x += stride) g.origins.emplace_back(x, y);
    return g;
}

inline PatchGrid tile(const Frame& img, int k, int stride = 0) {
    return tile(img.width, img.height, k, stride);
}

/// Patch enhancement backend: k-by-k in, k-by-k out.
struct SrBackend {
    virtual ~SrBackend() = default;
    virtual Frame enhance(const Frame& patch) const = 0;
};

struct IdentitySrBackend : SrBackend {
    Frame enhance(const Frame& patch) const override { return patch; }
};

/// Deterministic stand-in for a learned enhancer: unsharp masking with a 3x3
/// Gaussian blur and amount 0.5, applied per patch.
class UnsharpSrBackend : public SrBackend {
public:
    explicit UnsharpSrBackend(double amount = 0.5) : amount_(amount) {}

    Frame enhance(const Frame& patch) const override {
        // 3x3 Gaussian, kernel (1 2 1)x(1 2 1)/16, clamped at patch borders;
        // separable integer passes, the /16 stays exact in double
        const int w = patch.width, h = patch.height;
        std::vector<uint16_t> horiz(static_cast<size_t>(w) * h * 3);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
                for (int c = 0; c < 3; ++c)
                    horiz[(static_cast<size_t>(y) * w + x) * 3 + c] = static_cast<uint16_t>(
                        patch.at(xm, y, c) + 2 * patch.at(x, y, c) + patch.at(xp, y, c));
            }
        Frame out(w, h, patch.index);
        for (int y = 0; y < h; ++y) {
            int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < 3; ++c) {
                    uint32_t sum = horiz[(static_cast<size_t>(ym) * w + x) * 3 + c] +
                                   2u * horiz[(static_cast<size_t>(y) * w + x) * 3 + c] +
                                   horiz[(static_cast<size_t>(yp) * w + x) * 3 + c];
                    double blur = sum / 16.0;
                    double v = patch.at(x, y, c) + amount_ * (patch.at(x, y, c) - blur);
                    out.at(x, y, c) = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
                }
            }
        }
        return out;
    }

private:
    double amount_;
};

namespace detail {

inline Frame pad_replicate(const Frame& img, int padded_w, int padded_h) {
    Frame out(padded_w, padded_h, img.index);
    for (int y = 0; y < padded_h; ++y) {
        int sy = std::min(y, img.height - 1);
        for (int x = 0; x < padded_w; ++x) {
            int sx = std::min(x, img.width - 1);
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(sx, sy, c);
        }
    }
    return out;
}

}  // namespace detail

/// Enhance every grid patch through the backend and stitch. stride == k writes
/// patches back tiled; stride < k blends overlaps with a Hann-weighted average.
/// With the identity backend the result equals the input on all sizes.
inline Frame enhance_image(const Frame& img, int k, const SrBackend& backend, int stride = 0) {
    PatchGrid grid = tile(img, k, stride);
    Frame padded = detail::pad_replicate(img, grid.padded_width, grid.padded_height);

    auto extract = [&](int ox, int oy) {
        Frame patch(k, k);
        for (int y = 0; y < k; ++y)
            for (int x = 0; x < k; ++x)
                for (int c = 0; c < 3; ++c) patch.at(x, y, c) = padded.at(ox + x, oy + y, c);
        return patch;
    };

    std::vector<Frame> enhanced(grid.origins.size());
    parallel_for(static_cast<int>(grid.origins.size()), [&](int i) {
        auto [ox, oy] = grid.origins[i];
        enhanced[i] = backend.enhance(extract(ox, oy));
        if (enhanced[i].width != k || enhanced[i].height != k ||
            enhanced[i].pixels.size() != static_cast<size_t>(k) * k * 3)
            throw StreamError("backend shape violation");
    });

    Frame out(img.width, img.height, img.index);
    if (grid.stride == k) {
        for (size_t i = 0; i < grid.origins.size(); ++i) {
            auto [ox, oy] = grid.origins[i];
            for (int y = 0; y < k; ++y) {
                int py = oy + y;
                if (py >= img.height) break;
                for (int x = 0; x < k; ++x) {
                    int px = ox + x;
                    if (px >= img.width) break;
                    for (int c = 0; c < 3; ++c) out.at(px, py, c) = enhanced[i].at(x, y, c);
                }
            }
        }
        return out;
    }

    // Overlapping patches: Hann-weighted accumulation with a small floor so
    // border pixels covered only by a window edge keep positive weight.
    std::vector<double> hann(k);
    constexpr double kPi = 3.14159265358979323846;
    for (int i = 0; i < k; ++i)
        hann[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * (i + 0.5) / k) + 1e-4;
    std::vector<double> num(static_cast<size_t>(img.width) * img.height * 3, 0.0);
    std::vector<double> den(static_cast<size_t>(img.width) * img.height, 0.0);
    for (size_t i = 0; i < grid.origins.size(); ++i) {
        auto [ox, oy] = grid.origins[i];
        for (int y = 0; y < k; ++y) {
            int py = oy + y;
            if (py >= img.height) break;
            for (int x = 0; x < k; ++x) {
                int px = ox + x;
                if (px >= img.width) break;
                double wgt = hann[x] * hann[y];
                size_t p = static_cast<size_t>(py) * img.width + px;
                den[p] += wgt;
                for (int c = 0; c < 3; ++c) num[p * 3 + c] += wgt * enhanced[i].at(x, y, c);
            }
        }
    }
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            size_t p = static_cast<size_t>(y) * img.width + x;
            for (int c = 0; c < 3; ++c) {
                double v = num[p * 3 + c] / den[p];
                out.at(x, y, c) = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return out;
}

}  // namespace thc
