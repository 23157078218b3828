#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thc/bitstream.hpp"
#include "thc/channel.hpp"
#include "thc/core.hpp"

namespace thc {

constexpr double kPsnrCap = 99.0;

/// PSNR over all RGB samples, capped at 99 dB (identical frames report the cap).
inline double psnr(const Frame& a, const Frame& b) {
    if (!a.same_size(b)) throw ConfigError("frame size mismatch");
    double sq = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
        sq += d * d;
    }
    if (sq == 0.0) return kPsnrCap;
    double mse = sq / static_cast<double>(a.pixels.size());
    return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

namespace detail {

inline std::vector<double> ssim_window() {
    // 11-tap separable Gaussian, sigma 1.5, normalized to sum 1.
    std::vector<double> w(11);
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
        double d = i - 5.0;
        w[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace detail

/// Mean SSIM over 11x11 Gaussian windows (sigma 1.5) fully inside the frame,
/// luminance channel, K1=0.01, K2=0.03, L=255. The five window moments are
/// filtered separably in one interleaved buffer.
inline double ssim(const Frame& a, const Frame& b) {
    if (!a.same_size(b)) throw ConfigError("frame size mismatch");
    if (a.width < 11 || a.height < 11) throw ConfigError("frame too small for ssim");
    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    const int w = a.width, h = a.height;

    // interleaved moments per pixel: luma_a, luma_b, a^2, b^2, ab
    std::vector<double> in(static_cast<size_t>(w) * h * 5);
    for (size_t i = 0, p = 0; i < static_cast<size_t>(w) * h; ++i, p += 3) {
        double la = 0.299 * a.pixels[p] + 0.587 * a.pixels[p + 1] + 0.114 * a.pixels[p + 2];
        double lb = 0.299 * b.pixels[p] + 0.587 * b.pixels[p + 1] + 0.114 * b.pixels[p + 2];
        double* q = &in[i * 5];
        q[0] = la;
        q[1] = lb;
        q[2] = la * la;
        q[3] = lb * lb;
        q[4] = la * lb;
    }

    std::vector<double> taps = detail::ssim_window();
    const int ow = w - 10, oh = h - 10;
    std::vector<double> mid(static_cast<size_t>(ow) * h * 5);
    for (int y = 0; y < h; ++y) {
        const double* row = &in[static_cast<size_t>(y) * w * 5];
        double* out_row = &mid[static_cast<size_t>(y) * ow * 5];
        for (int x = 0; x < ow; ++x) {
            double m0 = 0, m1 = 0, m2 = 0, m3 = 0, m4 = 0;
            const double* s = row + static_cast<size_t>(x) * 5;
            for (int k = 0; k < 11; ++k, s += 5) {
                double t = taps[k];
                m0 += t * s[0];
                m1 += t * s[1];
                m2 += t * s[2];
                m3 += t * s[3];
                m4 += t * s[4];
            }
            double* o = out_row + static_cast<size_t>(x) * 5;
            o[0] = m0;
            o[1] = m1;
            o[2] = m2;
            o[3] = m3;
            o[4] = m4;
        }
    }

    double total = 0.0;
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double mu_a = 0, mu_b = 0, m_a2 = 0, m_b2 = 0, m_ab = 0;
            for (int k = 0; k < 11; ++k) {
                const double* s = &mid[(static_cast<size_t>(y + k) * ow + x) * 5];
                double t = taps[k];
                mu_a += t * s[0];
                mu_b += t * s[1];
                m_a2 += t * s[2];
                m_b2 += t * s[3];
                m_ab += t * s[4];
            }
            double var_a = m_a2 - mu_a * mu_a;
            double var_b = m_b2 - mu_b * mu_b;
            double cov = m_ab - mu_a * mu_b;
            double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
        }
    }
    return total / (static_cast<double>(ow) * oh);
}

enum class BppMode { Paper, Full };

/// Bits per displayed output pixel. Paper mode counts driving-frame keypoint
/// payload only; full mode adds pivot payloads and all header bytes.
inline double bpp(const RateLedger& ledger, int out_w, int out_h, BppMode mode) {
    if (ledger.displayed_frames == 0) throw ConfigError("zero displayed frames");
    if (out_w < 1 || out_h < 1) throw ConfigError("output dimensions must be positive");
    double denom = static_cast<double>(ledger.displayed_frames) * out_w * out_h;
    uint64_t bits = mode == BppMode::Paper ? ledger.keypoint_payload_bits : ledger.total_bits();
    return static_cast<double>(bits) / denom;
}

inline nlohmann::json channel_report_to_json(const ChannelReport& r) {
    static const char* kKindNames[4] = {"handshake", "pivot", "keypoints", "end_of_stream"};
    nlohmann::json c;
    for (int k = 0; k < 4; ++k) {
        const ClassCounts& cc = r.per_kind[static_cast<size_t>(k)];
        c[kKindNames[k]] = {{"sent", cc.sent}, {"delivered", cc.delivered},
                            {"dropped", cc.dropped}};
    }
    c["delivered_bits"] = r.delivered_bits;
    c["dropped_bits"] = r.dropped_bits;
    c["simulated_time_s"] = r.simulated_time_s;
    return c;
}

inline ChannelReport channel_report_from_json(const nlohmann::json& j) {
    static const char* kKindNames[4] = {"handshake", "pivot", "keypoints", "end_of_stream"};
    ChannelReport r;
    for (int k = 0; k < 4; ++k) {
        const nlohmann::json& c = j.at(kKindNames[k]);
        r.per_kind[static_cast<size_t>(k)] = {c.at("sent").get<uint64_t>(),
                                              c.at("delivered").get<uint64_t>(),
                                              c.at("dropped").get<uint64_t>()};
    }
    r.delivered_bits = j.at("delivered_bits").get<uint64_t>();
    r.dropped_bits = j.at("dropped_bits").get<uint64_t>();
    r.simulated_time_s = j.at("simulated_time_s").get<double>();
    return r;
}

struct EvalReport {
    uint64_t frames = 0;
    std::vector<double> psnr_per_frame;
    std::vector<double> ssim_per_frame;
    double psnr_mean = 0.0;
    double ssim_mean = 0.0;
    double bpp_paper = 0.0;
    double bpp_full = 0.0;
    std::vector<uint32_t> replacement_indices;
    std::optional<ChannelReport> channel;
    std::optional<double> fid;  // reserved for external tooling

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["frames"] = frames;
        j["psnr"] = {{"mean", psnr_mean}, {"per_frame", psnr_per_frame}};
        j["ssim"] = {{"mean", ssim_mean}, {"per_frame", ssim_per_frame}};
        j["bpp_paper"] = bpp_paper;
        j["bpp_full"] = bpp_full;
        j["replacement_indices"] = replacement_indices;
        j["channel"] = channel ? channel_report_to_json(*channel) : nlohmann::json(nullptr);
        j["fid"] = fid ? nlohmann::json(*fid) : nlohmann::json(nullptr);
        return j;
    }
};

/// Frame-by-frame PSNR/SSIM against a reference sequence, plus rate figures from
/// the ledger when one is supplied. Output dimensions for BPP come from the
/// evaluated frames.
inline EvalReport evaluate_frames(const std::vector<Frame>& ref, const std::vector<Frame>& out,
                                  const RateLedger* ledger = nullptr) {
    if (ref.size() != out.size()) throw ConfigError("frame count mismatch");
    if (ref.empty()) throw ConfigError("empty sequence");
    EvalReport report;
    report.frames = ref.size();
    report.psnr_per_frame.resize(ref.size());
    report.ssim_per_frame.resize(ref.size());
    parallel_for(static_cast<int>(ref.size()), [&](int i) {
        report.psnr_per_frame[i] = psnr(ref[i], out[i]);
        report.ssim_per_frame[i] = ssim(ref[i], out[i]);
    });
    double psum = 0.0, ssum = 0.0;
    for (size_t i = 0; i < ref.size(); ++i) {
        psum += report.psnr_per_frame[i];
        ssum += report.ssim_per_frame[i];
    }
    report.psnr_mean = psum / static_cast<double>(ref.size());
    report.ssim_mean = ssum / static_cast<double>(ref.size());
    if (ledger) {
        report.bpp_paper = bpp(*ledger, out[0].width, out[0].height, BppMode::Paper);
        report.bpp_full = bpp(*ledger, out[0].width, out[0].height, BppMode::Full);
        report.replacement_indices = ledger->replacement_indices;
    }
    return report;
}

}  // namespace thc
