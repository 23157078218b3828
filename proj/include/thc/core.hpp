#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace thc {

// Error hierarchy mapped to CLI exit codes: ConfigError=2, IoError=3, StreamError=4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct StreamError : Error {
    using Error::Error;
};

struct Vec2 {
    float x = 0.0f;
    float y = 0.0f;

    friend bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(const Vec2& a, const Vec2& b) { return !(a == b); }
};

/// A single decoded image: 8-bit RGB, row-major, pixels.size() == width*height*3.
struct Frame {
    int width = 0;
    int height = 0;
    uint32_t index = 0;
    std::vector<uint8_t> pixels;

    Frame() = default;
    Frame(int w, int h, uint32_t idx = 0)
        : width(w), height(h), index(idx), pixels(static_cast<size_t>(w) * h * 3, 0) {}

    static Frame filled(int w, int h, uint8_t r, uint8_t g, uint8_t b, uint32_t idx = 0) {
        Frame f(w, h, idx);
        for (size_t i = 0; i + 2 < f.pixels.size(); i += 3) {
            f.pixels[i] = r;
            f.pixels[i + 1] = g;
            f.pixels[i + 2] = b;
        }
        return f;
    }

    uint8_t& at(int x, int y, int c) {
        return pixels[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    uint8_t at(int x, int y, int c) const {
        return pixels[(static_cast<size_t>(y) * width + x) * 3 + c];
    }

    bool same_size(const Frame& o) const { return width == o.width && height == o.height; }

    friend bool operator==(const Frame& a, const Frame& b) {
        return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
    }
};

constexpr int kMinFrameDim = 16;

inline bool frame_well_formed(const Frame& f) {
    return f.width >= kMinFrameDim && f.height >= kMinFrameDim &&
           f.pixels.size() == static_cast<size_t>(f.width) * f.height * 3;
}

/// Per-frame payload: ordered normalized 2-D keypoints, each coordinate in [-1, 1]
/// (center origin, +x right, +y down). Stored as 32-bit floats so the wire roundtrip
/// is bit-exact.
struct KeyPointSet {
    uint32_t frame_index = 0;
    std::vector<Vec2> points;

    friend bool operator==(const KeyPointSet& a, const KeyPointSet& b) {
        return a.frame_index == b.frame_index && a.points == b.points;
    }
};

inline bool keypoints_in_range(const KeyPointSet& k) {
    for (const Vec2& p : k.points) {
        if (!(p.x >= -1.0f && p.x <= 1.0f && p.y >= -1.0f && p.y <= 1.0f)) return false;
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
    }
    return true;
}

struct PoseAngles {
    double yaw = 0.0;
    double roll = 0.0;
    double pitch = 0.0;
};

/// Pivot replacement thresholds. gamma_* in degrees, d_bg an embedding distance.
/// cooldown_frames = 0 disables the replacement cooldown window.
struct PivotThresholds {
    double gamma_yaw = 15.0;
    double gamma_roll = 15.0;
    double gamma_pitch = 15.0;
    double d_bg = 0.05;
    uint32_t cooldown_frames = 0;
};

struct StreamConfig {
    int width = 256;
    int height = 256;
    int num_keypoints = 10;
    int interp_frames = 1;  // m: receiver-interpolated frames between keyed frames
    int sr_factor = 2;      // output upscale, 1 or 2
    int sr_patch = 64;      // k: SR patch edge in pixels
    int fps = 30;
    PivotThresholds pivot_policy;
};

/// Total function: returns every violated invariant; an empty list means the config is valid.
inline std::vector<std::string> validate_config(const StreamConfig& cfg) {
    std::vector<std::string> errors;
    if (cfg.width < kMinFrameDim) errors.push_back("width below minimum");
    if (cfg.height < kMinFrameDim) errors.push_back("height below minimum");
    if (cfg.num_keypoints < 1 || cfg.num_keypoints > 255)
        errors.push_back("num_keypoints out of range");
    if (cfg.interp_frames < 0 || cfg.interp_frames > 3)
        errors.push_back("interp_frames out of range");
    if (cfg.sr_factor != 1 && cfg.sr_factor != 2) errors.push_back("sr_factor out of range");
    if (cfg.sr_patch < 8) errors.push_back("sr_patch below minimum");
    if (cfg.fps < 1 || cfg.fps > 65535) errors.push_back("fps out of range");
    const PivotThresholds& t = cfg.pivot_policy;
    if (t.gamma_yaw <= 0.0 || t.gamma_roll <= 0.0 || t.gamma_pitch <= 0.0)
        errors.push_back("pose thresholds must be positive");
    if (t.d_bg <= 0.0) errors.push_back("d_bg must be positive");
    return errors;
}

inline void require_valid_config(const StreamConfig& cfg) {
    std::vector<std::string> errors = validate_config(cfg);
    if (errors.empty()) return;
    std::string joined = "invalid config:";
    for (const std::string& e : errors) joined += " " + e + ";";
    throw ConfigError(joined);
}

// Normalized [-1,1] <-> pixel coordinate conversion; pixel 0 maps to -1,
// pixel size-1 maps to +1.
inline float norm_to_pixel(float nc, int size) {
    return (nc + 1.0f) * 0.5f * static_cast<float>(size - 1);
}

inline float pixel_to_norm(float pc, int size) {
    return 2.0f * pc / static_cast<float>(size - 1) - 1.0f;
}

inline float clamp_norm(float c) { return std::clamp(c, -1.0f, 1.0f); }

/// Static-chunked parallel map over [0, n). Work items must be independent;
/// results are deterministic regardless of thread count. The first worker
/// exception is rethrown on the calling thread.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
    if (n <= 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    int workers = static_cast<int>(hw == 0 ? 1 : hw);
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::mutex error_mutex;
    std::exception_ptr error;
    int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int begin = w * chunk;
        int end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn, &error_mutex, &error] {
            try {
                for (int i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace thc
