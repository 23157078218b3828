#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thc/bitstream.hpp"
#include "thc/core.hpp"
#include "thc/png_io.hpp"

namespace thc {

namespace fs = std::filesystem;

inline std::vector<uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    return data;
}

inline void write_file_bytes(const fs::path& path, const std::vector<uint8_t>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failure: " + path.string());
}

inline Frame read_png_frame(const fs::path& path, uint32_t index = 0) {
    return png_decode_rgb(read_file_bytes(path), index);
}

inline void write_png_frame(const Frame& frame, const fs::path& path) {
    write_file_bytes(path, png_encode_rgb(frame));
}

/// All *.png files in the directory, lexicographically sorted, assigned frame
/// ordinals 0..n-1 in that order.
inline std::vector<Frame> read_frame_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path());
    if (files.empty()) throw IoError("no png frames in " + dir.string());
    std::sort(files.begin(), files.end());
    std::vector<Frame> frames(files.size());
    parallel_for(static_cast<int>(files.size()), [&](int i) {
        frames[i] = read_png_frame(files[i], static_cast<uint32_t>(i));
    });
    return frames;
}

inline void write_frame_dir(const std::vector<Frame>& frames, const fs::path& dir) {
    fs::create_directories(dir);
    parallel_for(static_cast<int>(frames.size()), [&](int i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%06d.png", i);
        write_png_frame(frames[i], dir / name);
    });
}

/// Face masks as single-channel PNGs, nonzero = face. Returns the background
/// mask (nonzero = background) expected by background_embedding.
inline std::vector<uint8_t> read_background_mask(const fs::path& path) {
    GrayImage img = png_decode_gray(read_file_bytes(path).data(), fs::file_size(path));
    std::vector<uint8_t> bg(img.pixels.size());
    for (size_t i = 0; i < bg.size(); ++i) bg[i] = img.pixels[i] ? 0 : 1;
    return bg;
}

inline std::vector<std::vector<uint8_t>> read_mask_dir(const fs::path& dir, size_t n_frames) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.size() != n_frames) throw IoError("mask count differs from frame count");
    std::vector<std::vector<uint8_t>> masks(files.size());
    parallel_for(static_cast<int>(files.size()), [&](int i) {
        masks[i] = read_background_mask(files[i]);
    });
    return masks;
}

/// Pose sidecar: one line per frame, "index yaw roll pitch", degrees.
inline std::vector<PoseAngles> read_pose_file(const fs::path& path, size_t n_frames) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pose file: " + path.string());
    std::vector<PoseAngles> poses(n_frames);
    std::vector<bool> seen(n_frames, false);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        size_t idx;
        PoseAngles p;
        if (!(ss >> idx >> p.yaw >> p.roll >> p.pitch))
            throw IoError("malformed pose line: " + line);
        if (idx >= n_frames) throw IoError("pose index out of range: " + line);
        poses[idx] = p;
        seen[idx] = true;
    }
    for (size_t i = 0; i < n_frames; ++i)
        if (!seen[i]) throw IoError("pose file missing frame " + std::to_string(i));
    return poses;
}

inline void write_pose_file(const std::vector<PoseAngles>& poses, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open pose file for writing: " + path.string());
    out.precision(15);
    for (size_t i = 0; i < poses.size(); ++i)
        out << i << ' ' << poses[i].yaw << ' ' << poses[i].roll << ' ' << poses[i].pitch << '\n';
}

/// Keypoint sidecar: one line per frame, "index x0 y0 x1 y1 ...".
inline std::vector<KeyPointSet> read_keypoint_file(const fs::path& path, size_t n_frames,
                                                   int num_keypoints) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open keypoint file: " + path.string());
    std::vector<KeyPointSet> sets(n_frames);
    std::vector<bool> seen(n_frames, false);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        size_t idx;
        if (!(ss >> idx)) throw IoError("malformed keypoint line: " + line);
        if (idx >= n_frames) throw IoError("keypoint index out of range: " + line);
        KeyPointSet kps;
        kps.frame_index = static_cast<uint32_t>(idx);
        float x, y;
        while (ss >> x >> y) kps.points.push_back({x, y});
        if (kps.points.size() != static_cast<size_t>(num_keypoints))
            throw IoError("keypoint line has wrong point count: " + line);
        sets[idx] = std::move(kps);
        seen[idx] = true;
    }
    for (size_t i = 0; i < n_frames; ++i)
        if (!seen[i]) throw IoError("keypoint file missing frame " + std::to_string(i));
    return sets;
}

inline void write_keypoint_file(const std::vector<KeyPointSet>& sets, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open keypoint file for writing: " + path.string());
    out.precision(9);
    for (size_t i = 0; i < sets.size(); ++i) {
        out << i;
        for (const Vec2& p : sets[i].points) out << ' ' << p.x << ' ' << p.y;
        out << '\n';
    }
}

// Ledger sidecar (JSON) written next to encoded streams.

inline void save_ledger(const RateLedger& ledger, const fs::path& path) {
    nlohmann::json j;
    j["keypoint_payload_bits"] = ledger.keypoint_payload_bits;
    j["pivot_payload_bits"] = ledger.pivot_payload_bits;
    j["header_bits"] = ledger.header_bits;
    j["displayed_frames"] = ledger.displayed_frames;
    j["pivot_frames"] = std::vector<uint32_t>(ledger.pivot_frames.begin(),
                                              ledger.pivot_frames.end());
    j["replacement_indices"] = ledger.replacement_indices;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open ledger for writing: " + path.string());
    out << j.dump(2) << '\n';
}

inline RateLedger load_ledger(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ledger: " + path.string());
    nlohmann::json j;
    in >> j;
    RateLedger ledger;
    ledger.keypoint_payload_bits = j.at("keypoint_payload_bits").get<uint64_t>();
    ledger.pivot_payload_bits = j.at("pivot_payload_bits").get<uint64_t>();
    ledger.header_bits = j.at("header_bits").get<uint64_t>();
    ledger.displayed_frames = j.at("displayed_frames").get<uint64_t>();
    for (uint32_t v : j.value("pivot_frames", std::vector<uint32_t>{}))
        ledger.pivot_frames.insert(v);
    ledger.replacement_indices =
        j.value("replacement_indices", std::vector<uint32_t>{});
    return ledger;
}

inline void write_stream_file(std::span<const Packet> packets, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open stream for writing: " + path.string());
    write_stream(packets, out);
}

inline std::vector<Packet> read_stream_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open stream: " + path.string());
    return read_stream(in);
}

/// Minimal YUV4MPEG2 reader (C420/C420jpeg/C420mpeg2/C420paldv and C444),
/// BT.601 limited-range conversion to RGB. Convenience import path only.
inline std::vector<Frame> read_y4m(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open y4m file: " + path.string());
    std::string header;
    if (!std::getline(in, header) || header.rfind("YUV4MPEG2", 0) != 0)
        throw IoError("not a y4m file: " + path.string());
    int w = 0, h = 0;
    bool chroma420 = true;
    std::istringstream hs(header);
    std::string token;
    hs >> token;  // YUV4MPEG2
    while (hs >> token) {
        if (token.size() < 2) continue;
        switch (token[0]) {
            case 'W': w = std::stoi(token.substr(1)); break;
            case 'H': h = std::stoi(token.substr(1)); break;
            case 'C': {
                std::string cs = token.substr(1);
                if (cs.rfind("420", 0) == 0) chroma420 = true;
                else if (cs == "444") chroma420 = false;
                else throw IoError("unsupported y4m chroma: " + cs);
                break;
            }
            default: break;
        }
    }
    if (w < kMinFrameDim || h < kMinFrameDim) throw IoError("bad y4m dimensions");

    const size_t y_size = static_cast<size_t>(w) * h;
    const size_t c_size = chroma420 ? static_cast<size_t>((w + 1) / 2) * ((h + 1) / 2) : y_size;
    std::vector<uint8_t> yp(y_size), up(c_size), vp(c_size);
    std::vector<Frame> frames;
    std::string frame_line;
    while (std::getline(in, frame_line)) {
        if (frame_line.rfind("FRAME", 0) != 0) throw IoError("malformed y4m frame marker");
        in.read(reinterpret_cast<char*>(yp.data()), static_cast<std::streamsize>(y_size));
        in.read(reinterpret_cast<char*>(up.data()), static_cast<std::streamsize>(c_size));
        in.read(reinterpret_cast<char*>(vp.data()), static_cast<std::streamsize>(c_size));
        if (!in) throw IoError("truncated y4m frame");
        Frame f(w, h, static_cast<uint32_t>(frames.size()));
        const int cw = chroma420 ? (w + 1) / 2 : w;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                size_t ci = chroma420
                                ? static_cast<size_t>(y / 2) * cw + x / 2
                                : static_cast<size_t>(y) * w + x;
                int c = static_cast<int>(yp[static_cast<size_t>(y) * w + x]) - 16;
                int d = static_cast<int>(up[ci]) - 128;
                int e = static_cast<int>(vp[ci]) - 128;
                auto clip = [](int v) {
                    return static_cast<uint8_t>(std::clamp(v, 0, 255));
                };
                f.at(x, y, 0) = clip((298 * c + 409 * e + 128) >> 8);
                f.at(x, y, 1) = clip((298 * c - 100 * d - 208 * e + 128) >> 8);
                f.at(x, y, 2) = clip((298 * c + 516 * d + 128) >> 8);
            }
        }
        frames.push_back(std::move(f));
    }
    if (frames.empty()) throw IoError("y4m file has no frames");
    return frames;
}

/// Key-value manifest: "key = value" lines, '#' comments.
struct SessionManifest {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }

    std::string get(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) throw ConfigError("manifest missing key: " + key);
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }

    double number(const std::string& key) const {
        try {
            return std::stod(get(key));
        } catch (const std::exception&) {
            throw ConfigError("manifest value for " + key + " is not a number");
        }
    }

    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }
};

inline SessionManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path.string());
    SessionManifest m;
    std::string line;
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t\r");
        size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("malformed manifest line: " + line);
        m.values[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return m;
}

}  // namespace thc
