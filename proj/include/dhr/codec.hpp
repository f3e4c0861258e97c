#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "dhr/camera.hpp"
#include "dhr/visibility.hpp"

namespace dhr {

inline constexpr std::array<std::uint8_t, 4> kPacketMagic{'D', 'H', 'R', 'C'};
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::uint8_t kCameraUpdateType = 0x01;
inline constexpr std::uint8_t kVisibilityChunkType = 0x02;
inline constexpr std::size_t kCameraUpdateSize = 46;
inline constexpr std::size_t kChunkHeaderSize = 20;
inline constexpr std::size_t kMaxChunkPayload = 1200;
inline constexpr std::size_t kMaxDatagram = kChunkHeaderSize + kMaxChunkPayload;

/// Client to server, once per frame. Wire layout (little-endian):
///   0 magic "DHRC" | 4 version u8 | 5 type u8 = 0x01 | 6 frame u32 |
///   10 position 3 x f32 | 22 target 3 x f32 | 34 up 3 x f32          (46 bytes)
struct CameraUpdatePacket {
    std::uint32_t frame = 0;
    std::array<float, 3> position{};
    std::array<float, 3> target{};
    std::array<float, 3> up{};

    static CameraUpdatePacket from_pose(const CameraPose& pose);
    CameraPose to_pose() const;

    friend bool operator==(const CameraUpdatePacket&, const CameraUpdatePacket&) = default;
};

/// Server to client, one per fragment of a compressed bitmap. Wire layout (little-endian):
///   0 magic "DHRC" | 4 version u8 | 5 type u8 = 0x02 | 6 frame u32 | 10 chunk_index u16 |
///   12 chunk_count u16 | 14 uncompressed_len u32 | 18 payload_len u16 | 20 payload (<= 1200 bytes)
struct VisibilityChunkPacket {
    std::uint32_t frame = 0;
    std::uint16_t chunk_index = 0;
    std::uint16_t chunk_count = 0;
    std::uint32_t uncompressed_len = 0;
    std::vector<std::uint8_t> payload;

    friend bool operator==(const VisibilityChunkPacket&, const VisibilityChunkPacket&) = default;
};

using Packet = std::variant<CameraUpdatePacket, VisibilityChunkPacket>;

std::vector<std::uint8_t> encode_packet(const CameraUpdatePacket& p);
std::vector<std::uint8_t> encode_packet(const VisibilityChunkPacket& p);

/// Throws DecodeError on bad magic, version, type, length or field values.
Packet decode_packet(std::span<const std::uint8_t> datagram);

/// LZ4 block compression of the bitmap's data words (serialised little-endian). Metadata travels in packets.
std::vector<std::uint8_t> compress_bitmap(const VisibilityBitmap& bitmap);

/// Throws DecodeError when the block is corrupt or does not expand to exactly width*height*words*4 bytes.
VisibilityBitmap decompress_bitmap(std::span<const std::uint8_t> compressed, int width, int height, int num_lights,
                                   FrameIndex frame);

/// Worst-case LZ4 block size for `raw_size` input bytes.
std::size_t lz4_bound(std::size_t raw_size);

/// Splits a compressed frame into chunks of at most kMaxChunkPayload bytes.
std::vector<VisibilityChunkPacket> chunk_frame(std::span<const std::uint8_t> compressed, std::uint32_t frame,
                                               std::uint32_t uncompressed_len);

/// Concatenated payload iff every chunk of the frame is present. Order and duplicates do not matter.
/// Throws ContractViolation when the packets disagree on frame, chunk_count or uncompressed_len.
std::optional<std::vector<std::uint8_t>> reassemble(std::span<const VisibilityChunkPacket> packets);

struct CompletedFrame {
    FrameIndex frame = 0;
    std::uint32_t uncompressed_len = 0;
    std::vector<std::uint8_t> compressed;
};

/// Receive-side reassembly table. Owned by one receive path.
///
/// Chunks of frames at or below the newest completed frame are dropped. Completing a frame discards every
/// older partial frame, and partial frames older than the timeout are expired.
class Reassembler {
public:
    explicit Reassembler(std::int64_t timeout_us = 250'000) : timeout_us_(timeout_us) {}

    std::optional<CompletedFrame> accept(const VisibilityChunkPacket& chunk, std::int64_t now_us);
    void expire(std::int64_t now_us);

    std::size_t pending_frames() const { return partial_.size(); }
    std::optional<FrameIndex> newest_completed() const { return newest_; }

private:
    struct Partial {
        std::uint16_t chunk_count = 0;
        std::uint32_t uncompressed_len = 0;
        std::int64_t first_seen_us = 0;
        std::size_t received = 0;
        std::vector<std::optional<std::vector<std::uint8_t>>> chunks;
    };

    std::int64_t timeout_us_;
    std::map<FrameIndex, Partial> partial_;
    std::optional<FrameIndex> newest_;
};

} // namespace dhr
