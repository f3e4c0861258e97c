#include "dhr/codec.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "dhr/bytes.hpp"
#include "dhr/error.hpp"
#include "lz4.h"

namespace dhr {

namespace {

void put_header(std::vector<std::uint8_t>& out, std::uint8_t type)
{
    out.insert(out.end(), kPacketMagic.begin(), kPacketMagic.end());
    bytes::put_u8(out, kProtocolVersion);
    bytes::put_u8(out, type);
}

std::array<float, 3> to_f32(const Vec3& v)
{
    return {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
}

Vec3 from_f32(const std::array<float, 3>& v) { return {v[0], v[1], v[2]}; }

std::vector<std::uint8_t> words_to_le_bytes(std::span<const std::uint32_t> words)
{
    std::vector<std::uint8_t> raw(words.size() * 4);
    if constexpr (std::endian::native == std::endian::little) {
        if (!words.empty()) std::memcpy(raw.data(), words.data(), raw.size());
    } else {
        for (std::size_t i = 0; i < words.size(); ++i) {
            for (int b = 0; b < 4; ++b) raw[i * 4 + static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(words[i] >> (8 * b));
        }
    }
    return raw;
}

} // namespace

CameraUpdatePacket CameraUpdatePacket::from_pose(const CameraPose& pose)
{
    if (pose.frame_index < 0 || pose.frame_index > std::numeric_limits<std::uint32_t>::max()) {
        throw ContractViolation("frame index does not fit the wire format");
    }
    return {static_cast<std::uint32_t>(pose.frame_index), to_f32(pose.position), to_f32(pose.target), to_f32(pose.up)};
}

CameraPose CameraUpdatePacket::to_pose() const
{
    return {from_f32(position), from_f32(target), from_f32(up), static_cast<FrameIndex>(frame)};
}

std::vector<std::uint8_t> encode_packet(const CameraUpdatePacket& p)
{
    std::vector<std::uint8_t> out;
    out.reserve(kCameraUpdateSize);
    put_header(out, kCameraUpdateType);
    bytes::put_u32(out, p.frame);
    for (const auto* v : {&p.position, &p.target, &p.up}) {
        for (const float f : *v) bytes::put_f32(out, f);
    }
    return out;
}

std::vector<std::uint8_t> encode_packet(const VisibilityChunkPacket& p)
{
    if (p.payload.size() > kMaxChunkPayload) throw ContractViolation("chunk payload exceeds 1200 bytes");
    if (p.chunk_index >= p.chunk_count) throw ContractViolation("chunk_index must be below chunk_count");
    std::vector<std::uint8_t> out;
    out.reserve(kChunkHeaderSize + p.payload.size());
    put_header(out, kVisibilityChunkType);
    bytes::put_u32(out, p.frame);
    bytes::put_u16(out, p.chunk_index);
    bytes::put_u16(out, p.chunk_count);
    bytes::put_u32(out, p.uncompressed_len);
    bytes::put_u16(out, static_cast<std::uint16_t>(p.payload.size()));
    out.insert(out.end(), p.payload.begin(), p.payload.end());
    return out;
}

Packet decode_packet(std::span<const std::uint8_t> datagram)
{
    bytes::Reader in(datagram);
    const auto magic = in.take(4);
    if (!std::equal(magic.begin(), magic.end(), kPacketMagic.begin())) throw DecodeError("bad packet magic");
    if (in.u8() != kProtocolVersion) throw DecodeError("unsupported protocol version");
    const std::uint8_t type = in.u8();
    if (type == kCameraUpdateType) {
        if (datagram.size() != kCameraUpdateSize) throw DecodeError("camera update must be 46 bytes");
        CameraUpdatePacket p;
        p.frame = in.u32();
        for (auto* v : {&p.position, &p.target, &p.up}) {
            for (float& f : *v) f = in.f32();
        }
        return p;
    }
    if (type == kVisibilityChunkType) {
        VisibilityChunkPacket p;
        p.frame = in.u32();
        p.chunk_index = in.u16();
        p.chunk_count = in.u16();
        p.uncompressed_len = in.u32();
        const std::uint16_t len = in.u16();
        if (len > kMaxChunkPayload) throw DecodeError("chunk payload exceeds 1200 bytes");
        if (p.chunk_index >= p.chunk_count) throw DecodeError("chunk_index out of range");
        if (in.remaining() != len) throw DecodeError("chunk payload length mismatch");
        const auto payload = in.take(len);
        p.payload.assign(payload.begin(), payload.end());
        return p;
    }
    throw DecodeError("unknown packet type");
}

std::size_t lz4_bound(std::size_t raw_size)
{
    return raw_size + raw_size / 255 + 16;
}

std::vector<std::uint8_t> compress_bitmap(const VisibilityBitmap& bitmap)
{
    const auto raw = words_to_le_bytes(bitmap.words());
    if (raw.size() > static_cast<std::size_t>(LZ4_MAX_INPUT_SIZE)) throw ContractViolation("bitmap too large for LZ4");
    const int src_size = static_cast<int>(raw.size());
    std::vector<std::uint8_t> out(static_cast<std::size_t>(LZ4_compressBound(src_size)));
    const int n = LZ4_compress_default(reinterpret_cast<const char*>(raw.data()), reinterpret_cast<char*>(out.data()),
                                       src_size, static_cast<int>(out.size()));
    if (n <= 0) throw Error("LZ4 compression failed");
    out.resize(static_cast<std::size_t>(n));
    return out;
}

VisibilityBitmap decompress_bitmap(std::span<const std::uint8_t> compressed, int width, int height, int num_lights,
                                   FrameIndex frame)
{
    VisibilityBitmap bitmap(width, height, num_lights, frame);
    const std::size_t expected = bitmap.byte_size();
    if (compressed.size() > static_cast<std::size_t>(std::numeric_limits<int>::max()) ||
        expected > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
        throw DecodeError("compressed bitmap too large");
    }
    std::vector<std::uint8_t> raw(expected);
    const int n = LZ4_decompress_safe(reinterpret_cast<const char*>(compressed.data()),
                                      reinterpret_cast<char*>(raw.data()), static_cast<int>(compressed.size()),
                                      static_cast<int>(expected));
    if (n < 0) throw DecodeError("corrupt LZ4 block");
    if (static_cast<std::size_t>(n) != expected) {
        throw DecodeError("LZ4 block expands to " + std::to_string(n) + " bytes, expected " + std::to_string(expected));
    }
    bytes::Reader in(raw);
    for (auto& word : bitmap.words()) word = in.u32();

    // Reject stray high bits so decoded bitmaps always satisfy the packing invariant.
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto px = bitmap.pixel(x, y);
            for (int w = 0; w < bitmap.words_per_pixel(); ++w) {
                if (px[static_cast<std::size_t>(w)] & ~bitmap.word_mask(w)) throw DecodeError("bits set beyond num_lights");
            }
        }
    }
    return bitmap;
}

std::vector<VisibilityChunkPacket> chunk_frame(std::span<const std::uint8_t> compressed, std::uint32_t frame,
                                               std::uint32_t uncompressed_len)
{
    const std::size_t count = std::max<std::size_t>(1, (compressed.size() + kMaxChunkPayload - 1) / kMaxChunkPayload);
    if (count > std::numeric_limits<std::uint16_t>::max()) throw ContractViolation("frame needs too many chunks");
    std::vector<VisibilityChunkPacket> chunks;
    chunks.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t begin = i * kMaxChunkPayload;
        const std::size_t end = std::min(compressed.size(), begin + kMaxChunkPayload);
        VisibilityChunkPacket c;
        c.frame = frame;
        c.chunk_index = static_cast<std::uint16_t>(i);
        c.chunk_count = static_cast<std::uint16_t>(count);
        c.uncompressed_len = uncompressed_len;
        c.payload.assign(compressed.begin() + static_cast<std::ptrdiff_t>(begin),
                         compressed.begin() + static_cast<std::ptrdiff_t>(end));
        chunks.push_back(std::move(c));
    }
    return chunks;
}

std::optional<std::vector<std::uint8_t>> reassemble(std::span<const VisibilityChunkPacket> packets)
{
    if (packets.empty()) return std::nullopt;
    const auto& first = packets.front();
    std::vector<const VisibilityChunkPacket*> slots(first.chunk_count, nullptr);
    for (const auto& p : packets) {
        if (p.frame != first.frame) throw ContractViolation("reassemble given chunks of different frames");
        if (p.chunk_count != first.chunk_count || p.uncompressed_len != first.uncompressed_len) {
            throw ContractViolation("chunks of one frame disagree on chunk_count or uncompressed_len");
        }
        if (p.chunk_index >= p.chunk_count) throw ContractViolation("chunk_index out of range");
        if (!slots[p.chunk_index]) slots[p.chunk_index] = &p;
    }
    std::vector<std::uint8_t> out;
    for (const auto* s : slots) {
        if (!s) return std::nullopt;
        out.insert(out.end(), s->payload.begin(), s->payload.end());
    }
    return out;
}

std::optional<CompletedFrame> Reassembler::accept(const VisibilityChunkPacket& chunk, std::int64_t now_us)
{
    expire(now_us);
    const auto frame = static_cast<FrameIndex>(chunk.frame);
    if (newest_ && frame <= *newest_) return std::nullopt;
    if (chunk.chunk_index >= chunk.chunk_count) return std::nullopt;

    auto [it, inserted] = partial_.try_emplace(frame);
    Partial& part = it->second;
    if (inserted) {
        part.chunk_count = chunk.chunk_count;
        part.uncompressed_len = chunk.uncompressed_len;
        part.first_seen_us = now_us;
        part.chunks.resize(chunk.chunk_count);
    } else if (part.chunk_count != chunk.chunk_count || part.uncompressed_len != chunk.uncompressed_len) {
        return std::nullopt; // inconsistent fragment; keep what we have
    }
    auto& slot = part.chunks[chunk.chunk_index];
    if (slot) return std::nullopt;
    slot = chunk.payload;
    if (++part.received < part.chunk_count) return std::nullopt;

    CompletedFrame done{frame, part.uncompressed_len, {}};
    for (auto& c : part.chunks) done.compressed.insert(done.compressed.end(), c->begin(), c->end());
    partial_.erase(partial_.begin(), std::next(it));
    newest_ = frame;
    return done;
}

void Reassembler::expire(std::int64_t now_us)
{
    std::erase_if(partial_, [&](const auto& kv) { return now_us - kv.second.first_seen_us > timeout_us_; });
}

} // namespace dhr
