#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "thc/bitstream.hpp"
#include "thc/core.hpp"
#include "thc/interpolate.hpp"

namespace thc {

enum class ChannelMode : uint8_t { ReliableOrdered, Lossy };

/// Loss applies to driving-frame KeyPoints packets only; Handshake, Pivot,
/// EndOfStream, and the pivot's own keypoints ride a reliable sub-channel.
struct ChannelConfig {
    ChannelMode mode = ChannelMode::ReliableOrdered;
    double loss_rate = 0.0;  // probability in [0,1)
    uint64_t seed = 0;
    uint64_t bandwidth_bits_per_s = 0;  // 0 = uncapped
    double latency_ms = 0.0;
};

struct ClassCounts {
    uint64_t sent = 0;
    uint64_t delivered = 0;
    uint64_t dropped = 0;
};

struct ChannelReport {
    std::array<ClassCounts, 4> per_kind{};  // indexed by PacketKind byte
    uint64_t delivered_bits = 0;
    uint64_t dropped_bits = 0;
    double simulated_time_s = 0.0;

    const ClassCounts& counts(PacketKind k) const {
        return per_kind[static_cast<size_t>(k)];
    }
};

namespace detail {

// Deterministic uniform in [0,1) from the top 53 bits of an mt19937_64 draw.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Sequential simulated channel: deterministic for a fixed seed. Simulated wall
/// time is delivered bits over bandwidth plus the fixed latency.
inline std::pair<std::vector<Packet>, ChannelReport> transmit(std::span<const Packet> packets,
                                                              const ChannelConfig& cfg) {
    if (packets.empty() || packets.front().kind != PacketKind::Handshake)
        throw StreamError("stream without handshake");
    if (cfg.loss_rate < 0.0 || cfg.loss_rate >= 1.0) throw ConfigError("loss_rate outside [0,1)");

    std::mt19937_64 rng(cfg.seed);
    std::set<uint32_t> pivot_indices;
    std::vector<Packet> delivered;
    delivered.reserve(packets.size());
    ChannelReport report;
    for (const Packet& p : packets) {
        if (p.kind == PacketKind::Pivot) pivot_indices.insert(p.frame_index);
        bool reliable = p.kind != PacketKind::KeyPoints || pivot_indices.count(p.frame_index) > 0;
        ClassCounts& c = report.per_kind[static_cast<size_t>(p.kind)];
        c.sent += 1;
        bool drop = cfg.mode == ChannelMode::Lossy && !reliable &&
                    detail::uniform01(rng) < cfg.loss_rate;
        uint64_t bits = packet_wire_bits(p);
        if (drop) {
            c.dropped += 1;
            report.dropped_bits += bits;
        } else {
            c.delivered += 1;
            report.delivered_bits += bits;
            delivered.push_back(p);
        }
    }
    report.simulated_time_s =
        (cfg.bandwidth_bits_per_s > 0
             ? static_cast<double>(report.delivered_bits) / static_cast<double>(cfg.bandwidth_bits_per_s)
             : 0.0) +
        cfg.latency_ms / 1000.0;
    return {std::move(delivered), report};
}

/// Re-plan display frames whose keyed keypoints never arrived. Surviving anchors
/// are display frame 0 plus the keyed frames in `delivered_kp_indices`; frames
/// between two anchors interpolate across the widened span, frames past the last
/// anchor hold the previous displayed frame.
inline Schedule amend_schedule_for_losses(const Schedule& schedule,
                                          const std::set<uint32_t>& delivered_kp_indices) {
    Schedule out = schedule;
    const uint32_t n = static_cast<uint32_t>(out.entries.size());
    if (n == 0) return out;

    std::vector<uint32_t> anchors;
    anchors.push_back(0);
    for (uint32_t i = 1; i < n; ++i)
        if (schedule.entries[i].tag == FrameTag::Keyed && delivered_kp_indices.count(i))
            anchors.push_back(i);

    auto anchored = [&](uint32_t i) {
        return std::binary_search(anchors.begin(), anchors.end(), i);
    };

    for (uint32_t i = 1; i < n; ++i) {
        const ScheduleEntry& e = schedule.entries[i];
        bool intact = false;
        switch (e.tag) {
            case FrameTag::PivotDirect:
                intact = true;
                break;
            case FrameTag::Keyed:
                intact = anchored(i);
                break;
            case FrameTag::Interpolated:
                intact = anchored(e.left) && anchored(e.right);
                break;
            case FrameTag::Hold:
                intact = true;
                break;
        }
        if (intact) continue;
        // Nearest surviving anchors on each side.
        auto it = std::upper_bound(anchors.begin(), anchors.end(), i);
        uint32_t left = *std::prev(it);
        if (it != anchors.end()) {
            uint32_t right = *it;
            out.entries[i] = {FrameTag::Interpolated, left, right,
                              static_cast<float>(i - left) / static_cast<float>(right - left)};
        } else {
            out.entries[i] = {FrameTag::Hold, i - 1, 0, 0.0f};
        }
    }
    return out;
}

/// Single-drop form: the dropped index must be a Keyed entry of the schedule.
inline Schedule receiver_loss_policy(const Schedule& schedule, uint32_t dropped_keyed_index) {
    if (dropped_keyed_index >= schedule.entries.size() ||
        schedule.entries[dropped_keyed_index].tag != FrameTag::Keyed)
        throw StreamError("dropped index is not a keyed frame");
    std::set<uint32_t> delivered;
    for (uint32_t i = 0; i < schedule.entries.size(); ++i)
        if (schedule.entries[i].tag == FrameTag::Keyed && i != dropped_keyed_index)
            delivered.insert(i);
    return amend_schedule_for_losses(schedule, delivered);
}

}  // namespace thc
