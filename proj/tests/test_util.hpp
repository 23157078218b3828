#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here are
// deliberately brute-force and separate from the library's computation paths.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "thc/core.hpp"
#include "thc/motion.hpp"

namespace test_util {

// Smooth image: low-frequency sinusoid mix, suitable for warp round-trips.
inline thc::Frame smooth_frame(int w, int h, uint32_t index = 0, double phase = 0.0) {
    thc::Frame f(w, h, index);
    for (int y = 0; y < h; ++y) {
        double ny = thc::pixel_to_norm(static_cast<float>(y), h);
        for (int x = 0; x < w; ++x) {
            double nx = thc::pixel_to_norm(static_cast<float>(x), w);
            double r = 128.0 + 80.0 * std::sin(1.9 * nx + phase) * std::cos(1.3 * ny);
            double g = 128.0 + 80.0 * std::sin(1.1 * nx - 0.5 + phase) * std::cos(2.1 * ny);
            double b = 128.0 + 80.0 * std::cos(1.5 * nx + 0.9 * ny + phase);
            f.at(x, y, 0) = static_cast<uint8_t>(std::clamp(std::lround(r), 0L, 255L));
            f.at(x, y, 1) = static_cast<uint8_t>(std::clamp(std::lround(g), 0L, 255L));
            f.at(x, y, 2) = static_cast<uint8_t>(std::clamp(std::lround(b), 0L, 255L));
        }
    }
    return f;
}

// Horizontal ramp: channel value == column index mod 256.
inline thc::Frame ramp_frame(int w, int h, uint32_t index = 0) {
    thc::Frame f(w, h, index);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) f.at(x, y, c) = static_cast<uint8_t>(x % 256);
    return f;
}

inline thc::Frame random_frame(int w, int h, uint32_t seed) {
    std::mt19937 rng(seed);
    thc::Frame f(w, h, 0);
    for (uint8_t& p : f.pixels) p = static_cast<uint8_t>(rng() & 0xff);
    return f;
}

// Keypoints on a ring, all coordinates exact multiples of 1/256 so linear float
// arithmetic on them stays exact.
inline thc::KeyPointSet grid_keypoints(int count, uint32_t frame_index = 0) {
    thc::KeyPointSet kps;
    kps.frame_index = frame_index;
    for (int k = 0; k < count; ++k) {
        double theta = 2.0 * 3.14159265358979323846 * k / count;
        auto snap = [](double v) {
            return static_cast<float>(std::lround(v * 256.0)) / 256.0f;
        };
        kps.points.push_back({snap(0.4 * std::cos(theta)), snap(0.4 * std::sin(theta))});
    }
    return kps;
}

// Linear trajectories built from exact binary fractions: position(t) = start + t*step
// evaluated in float; every coordinate is a multiple of 1/256 and stays within
// (-1, 1), so sums and halving are exact in 32-bit floats.
inline std::vector<thc::KeyPointSet> linear_trajectories(const thc::KeyPointSet& start,
                                                         int frames, float step_x,
                                                         float step_y) {
    std::vector<thc::KeyPointSet> traj(frames);
    for (int t = 0; t < frames; ++t) {
        traj[t].frame_index = static_cast<uint32_t>(t);
        traj[t].points.resize(start.points.size());
        for (size_t k = 0; k < start.points.size(); ++k) {
            traj[t].points[k].x = start.points[k].x + static_cast<float>(t) * step_x;
            traj[t].points[k].y = start.points[k].y + static_cast<float>(t) * step_y;
        }
    }
    return traj;
}

// Brute-force PSNR used as the metric oracle.
inline double psnr_oracle(const thc::Frame& a, const thc::Frame& b) {
    double sq = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
        sq += d * d;
    }
    if (sq == 0.0) return 99.0;
    double mse = sq / static_cast<double>(a.pixels.size());
    return std::min(99.0, 10.0 * std::log10(255.0 * 255.0 / mse));
}

// Brute-force SSIM oracle: direct per-window sums, no separable shortcuts.
inline double ssim_oracle(const thc::Frame& a, const thc::Frame& b) {
    const int w = a.width, h = a.height;
    auto luma = [](const thc::Frame& f, int x, int y) {
        return 0.299 * f.at(x, y, 0) + 0.587 * f.at(x, y, 1) + 0.114 * f.at(x, y, 2);
    };
    double win[11][11];
    double wsum = 0.0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            double dx = i - 5.0, dy = j - 5.0;
            win[i][j] = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5));
            wsum += win[i][j];
        }
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) win[i][j] /= wsum;

    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    double total = 0.0;
    int windows = 0;
    for (int oy = 0; oy + 11 <= h; ++oy) {
        for (int ox = 0; ox + 11 <= w; ++ox) {
            double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
            for (int j = 0; j < 11; ++j)
                for (int i = 0; i < 11; ++i) {
                    double va = luma(a, ox + i, oy + j);
                    double vb = luma(b, ox + i, oy + j);
                    mu_a += win[j][i] * va;
                    mu_b += win[j][i] * vb;
                    aa += win[j][i] * va * va;
                    bb += win[j][i] * vb * vb;
                    ab += win[j][i] * va * vb;
                }
            double var_a = aa - mu_a * mu_a;
            double var_b = bb - mu_b * mu_b;
            double cov = ab - mu_a * mu_b;
            total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            windows += 1;
        }
    }
    return total / windows;
}

// Scratch directory unique to a test, removed when the guard dies.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("thc_test_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace test_util
