#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <set>
#include <span>
#include <vector>

#include "thc/core.hpp"
#include "thc/png_io.hpp"

namespace thc {

// .thc container: magic "THC1", then packets in order. Every packet starts with
// kind (1 byte) and frame_index (u32 LE); the remainder is kind-specific:
//   Handshake    15-byte config: width u32, height u32, num_keypoints u8,
//                interp_frames u8, sr_factor u8, sr_patch u16, fps u16 (all LE)
//   Pivot        payload length u32 LE, then a lossless PNG of the frame
//   KeyPoints    point count u8, then per point x and y as 32-bit IEEE-754 LE
//   EndOfStream  nothing; frame_index carries the display frame count
// Full layout notes live in docs/FORMAT.md.

enum class PacketKind : uint8_t {
    Handshake = 0x00,
    Pivot = 0x01,
    KeyPoints = 0x02,
    EndOfStream = 0x03,
};

struct Packet {
    PacketKind kind = PacketKind::Handshake;
    uint32_t frame_index = 0;
    std::vector<uint8_t> payload;

    friend bool operator==(const Packet& a, const Packet& b) {
        return a.kind == b.kind && a.frame_index == b.frame_index && a.payload == b.payload;
    }
};

namespace wire {

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
}

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::vector<uint8_t>& out, float v) {
    uint32_t bits = std::bit_cast<uint32_t>(v);
    put_u32(out, bits);
}

inline uint16_t get_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (static_cast<uint16_t>(p[1]) << 8));
}

inline uint32_t get_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline float get_f32(const uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

}  // namespace wire

constexpr size_t kHandshakePayloadBytes = 15;
constexpr size_t kPacketHeaderBytes = 5;  // kind + frame_index
constexpr size_t kBytesPerKeyPoint = 8;
constexpr size_t kBytesPerJacobianKeyPoint = 24;

/// Wire size of a packet including its header fields, in bits.
inline uint64_t packet_wire_bits(const Packet& p) {
    uint64_t bytes = kPacketHeaderBytes + p.payload.size();
    switch (p.kind) {
        case PacketKind::Pivot:
            bytes += 4;  // payload length field
            break;
        case PacketKind::KeyPoints:
            bytes += 1;  // point count field
            break;
        default:
            break;
    }
    return bytes * 8;
}

/// Single-writer accumulator of transmitted bits per packet class. KeyPoints
/// packets addressed to a pivot frame (the pivot's own warp-source keypoints)
/// are charged to the pivot class so the keypoint class counts driving-frame
/// payload only — the quantity the paper-mode BPP is defined over.
struct RateLedger {
    uint64_t keypoint_payload_bits = 0;
    uint64_t pivot_payload_bits = 0;
    uint64_t header_bits = 0;
    uint64_t displayed_frames = 0;
    std::set<uint32_t> pivot_frames;
    std::vector<uint32_t> replacement_indices;

    void add_packet(const Packet& p) {
        switch (p.kind) {
            case PacketKind::Handshake:
                header_bits += (kPacketHeaderBytes + p.payload.size()) * 8;
                break;
            case PacketKind::Pivot:
                header_bits += (kPacketHeaderBytes + 4) * 8;
                pivot_payload_bits += p.payload.size() * 8;
                pivot_frames.insert(p.frame_index);
                break;
            case PacketKind::KeyPoints:
                header_bits += (kPacketHeaderBytes + 1) * 8;
                if (pivot_frames.count(p.frame_index))
                    pivot_payload_bits += p.payload.size() * 8;
                else
                    keypoint_payload_bits += p.payload.size() * 8;
                break;
            case PacketKind::EndOfStream:
                header_bits += kPacketHeaderBytes * 8;
                break;
        }
    }

    uint64_t total_bits() const { return keypoint_payload_bits + pivot_payload_bits + header_bits; }
};

/// 8 bytes per keypoint: two 32-bit floats.
inline Packet encode_keypoints(const KeyPointSet& kps) {
    if (kps.points.empty()) throw StreamError("empty keypoint set");
    if (kps.points.size() > 255) throw StreamError("keypoint count exceeds 255");
    if (!keypoints_in_range(kps)) throw StreamError("coordinate out of range");
    Packet p;
    p.kind = PacketKind::KeyPoints;
    p.frame_index = kps.frame_index;
    p.payload.reserve(kps.points.size() * kBytesPerKeyPoint);
    for (const Vec2& pt : kps.points) {
        wire::put_f32(p.payload, pt.x);
        wire::put_f32(p.payload, pt.y);
    }
    return p;
}

inline KeyPointSet decode_keypoints(const Packet& p) {
    if (p.kind != PacketKind::KeyPoints) throw StreamError("packet is not a keypoint packet");
    if (p.payload.size() % kBytesPerKeyPoint != 0 || p.payload.empty())
        throw StreamError("truncated keypoint payload");
    KeyPointSet kps;
    kps.frame_index = p.frame_index;
    kps.points.resize(p.payload.size() / kBytesPerKeyPoint);
    for (size_t i = 0; i < kps.points.size(); ++i) {
        kps.points[i].x = wire::get_f32(p.payload.data() + i * 8);
        kps.points[i].y = wire::get_f32(p.payload.data() + i * 8 + 4);
    }
    if (!keypoints_in_range(kps)) throw StreamError("coordinate out of range");
    return kps;
}

using Jacobian2x2 = std::array<float, 4>;  // row-major: j00 j01 j10 j11

/// Comparison encoder: the 24-byte-per-keypoint layout (coordinates plus a 2x2
/// Jacobian). Used only for rate accounting against the 8-byte layout; our
/// streams never carry it.
inline std::vector<uint8_t> encode_keypoints_jacobian_payload(
    const KeyPointSet& kps, std::span<const Jacobian2x2> jacobians = {}) {
    if (kps.points.empty()) throw StreamError("empty keypoint set");
    static constexpr Jacobian2x2 kIdentity{1.0f, 0.0f, 0.0f, 1.0f};
    std::vector<uint8_t> payload;
    payload.reserve(kps.points.size() * kBytesPerJacobianKeyPoint);
    for (size_t i = 0; i < kps.points.size(); ++i) {
        const Jacobian2x2& j = i < jacobians.size() ? jacobians[i] : kIdentity;
        wire::put_f32(payload, kps.points[i].x);
        wire::put_f32(payload, kps.points[i].y);
        for (float v : j) wire::put_f32(payload, v);
    }
    return payload;
}

inline Packet encode_pivot(const Frame& frame) {
    if (!frame_well_formed(frame)) throw StreamError("pivot encode error: malformed frame");
    Packet p;
    p.kind = PacketKind::Pivot;
    p.frame_index = frame.index;
    p.payload = png_encode_rgb(frame);
    return p;
}

inline Frame decode_pivot(const Packet& p) {
    if (p.kind != PacketKind::Pivot) throw StreamError("packet is not a pivot packet");
    return png_decode_rgb(p.payload, p.frame_index);
}

inline Packet encode_handshake(const StreamConfig& cfg) {
    Packet p;
    p.kind = PacketKind::Handshake;
    p.frame_index = 0;
    p.payload.reserve(kHandshakePayloadBytes);
    wire::put_u32(p.payload, static_cast<uint32_t>(cfg.width));
    wire::put_u32(p.payload, static_cast<uint32_t>(cfg.height));
    p.payload.push_back(static_cast<uint8_t>(cfg.num_keypoints));
    p.payload.push_back(static_cast<uint8_t>(cfg.interp_frames));
    p.payload.push_back(static_cast<uint8_t>(cfg.sr_factor));
    wire::put_u16(p.payload, static_cast<uint16_t>(cfg.sr_patch));
    wire::put_u16(p.payload, static_cast<uint16_t>(cfg.fps));
    return p;
}

inline StreamConfig decode_handshake(const Packet& p) {
    if (p.kind != PacketKind::Handshake) throw StreamError("packet is not a handshake");
    if (p.payload.size() != kHandshakePayloadBytes) throw StreamError("malformed handshake");
    StreamConfig cfg;
    const uint8_t* d = p.payload.data();
    cfg.width = static_cast<int>(wire::get_u32(d));
    cfg.height = static_cast<int>(wire::get_u32(d + 4));
    cfg.num_keypoints = d[8];
    cfg.interp_frames = d[9];
    cfg.sr_factor = d[10];
    cfg.sr_patch = wire::get_u16(d + 11);
    cfg.fps = wire::get_u16(d + 13);
    return cfg;
}

inline Packet end_of_stream(uint32_t display_frame_count) {
    Packet p;
    p.kind = PacketKind::EndOfStream;
    p.frame_index = display_frame_count;
    return p;
}

constexpr std::array<uint8_t, 4> kStreamMagic{'T', 'H', 'C', '1'};

inline void write_stream(std::span<const Packet> packets, std::ostream& out) {
    if (packets.empty() || packets.front().kind != PacketKind::Handshake)
        throw StreamError("stream without handshake");
    if (packets.back().kind != PacketKind::EndOfStream)
        throw StreamError("stream without end-of-stream");
    out.write(reinterpret_cast<const char*>(kStreamMagic.data()), kStreamMagic.size());
    std::vector<uint8_t> buf;
    for (const Packet& p : packets) {
        buf.clear();
        buf.push_back(static_cast<uint8_t>(p.kind));
        wire::put_u32(buf, p.frame_index);
        switch (p.kind) {
            case PacketKind::Handshake:
                if (p.payload.size() != kHandshakePayloadBytes)
                    throw StreamError("malformed handshake");
                buf.insert(buf.end(), p.payload.begin(), p.payload.end());
                break;
            case PacketKind::Pivot:
                wire::put_u32(buf, static_cast<uint32_t>(p.payload.size()));
                buf.insert(buf.end(), p.payload.begin(), p.payload.end());
                break;
            case PacketKind::KeyPoints: {
                size_t count = p.payload.size() / kBytesPerKeyPoint;
                if (count == 0 || count > 255 || p.payload.size() % kBytesPerKeyPoint != 0)
                    throw StreamError("truncated keypoint payload");
                buf.push_back(static_cast<uint8_t>(count));
                buf.insert(buf.end(), p.payload.begin(), p.payload.end());
                break;
            }
            case PacketKind::EndOfStream:
                break;
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    if (!out) throw IoError("stream write failure");
}

namespace detail {

inline bool read_exact(std::istream& in, uint8_t* dst, size_t n) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    return static_cast<size_t>(in.gcount()) == n;
}

}  // namespace detail

inline std::vector<Packet> read_stream(std::istream& in) {
    std::array<uint8_t, 4> magic{};
    if (!detail::read_exact(in, magic.data(), magic.size()) || magic != kStreamMagic)
        throw StreamError("bad stream magic");
    std::vector<Packet> packets;
    uint32_t last_good = 0;
    auto truncated = [&last_good]() -> StreamError {
        return StreamError("unexpected end of stream after frame " + std::to_string(last_good));
    };
    bool saw_eos = false;
    while (true) {
        uint8_t kind_byte = 0;
        in.read(reinterpret_cast<char*>(&kind_byte), 1);
        if (in.gcount() != 1) break;  // clean end of file between packets
        if (kind_byte > static_cast<uint8_t>(PacketKind::EndOfStream))
            throw StreamError("unknown packet kind");
        Packet p;
        p.kind = static_cast<PacketKind>(kind_byte);
        uint8_t hdr[4];
        if (!detail::read_exact(in, hdr, 4)) throw truncated();
        p.frame_index = wire::get_u32(hdr);
        switch (p.kind) {
            case PacketKind::Handshake:
                p.payload.resize(kHandshakePayloadBytes);
                if (!detail::read_exact(in, p.payload.data(), p.payload.size())) throw truncated();
                break;
            case PacketKind::Pivot: {
                uint8_t len[4];
                if (!detail::read_exact(in, len, 4)) throw truncated();
                p.payload.resize(wire::get_u32(len));
                if (!detail::read_exact(in, p.payload.data(), p.payload.size())) throw truncated();
                break;
            }
            case PacketKind::KeyPoints: {
                uint8_t count = 0;
                if (!detail::read_exact(in, &count, 1)) throw truncated();
                if (count == 0) throw StreamError("truncated keypoint payload");
                p.payload.resize(static_cast<size_t>(count) * kBytesPerKeyPoint);
                if (!detail::read_exact(in, p.payload.data(), p.payload.size())) throw truncated();
                break;
            }
            case PacketKind::EndOfStream:
                saw_eos = true;
                break;
        }
        if (packets.empty() && p.kind != PacketKind::Handshake)
            throw StreamError("stream without handshake");
        last_good = p.frame_index;
        packets.push_back(std::move(p));
        if (saw_eos) break;
    }
    if (packets.empty()) throw StreamError("stream without handshake");
    if (!saw_eos) throw truncated();
    return packets;
}

}  // namespace thc
