#include "dhr/server.hpp"

#include <spdlog/spdlog.h>

#include "dhr/codec.hpp"
#include "dhr/error.hpp"
#include "dhr/visibility.hpp"

namespace dhr {

VisibilityServer::VisibilityServer(const Scene& scene, const Intrinsics& intr, std::int64_t server_delay_us)
    : scene_(scene), intr_(intr), server_delay_us_(server_delay_us)
{
    intr_.validate();
}

std::optional<FrameIndex> VisibilityServer::tick(DatagramEndpoint& endpoint, std::int64_t now_us)
{
    std::optional<CameraUpdatePacket> newest;
    std::int64_t newest_arrival = now_us;
    for (const Datagram& d : endpoint.poll(now_us)) {
        try {
            const Packet p = decode_packet(d.bytes);
            const auto* update = std::get_if<CameraUpdatePacket>(&p);
            if (!update) continue;
            ++stats_.updates_received;
            if (!newest || update->frame > newest->frame) {
                if (newest) ++stats_.stale_updates_skipped;
                newest = *update;
                newest_arrival = d.arrival_us;
            } else {
                ++stats_.stale_updates_skipped;
            }
        } catch (const DecodeError& e) {
            ++stats_.decode_errors;
            spdlog::warn("server: dropping undecodable datagram: {}", e.what());
        }
    }
    if (!newest) return std::nullopt;
    const auto frame = static_cast<FrameIndex>(newest->frame);
    if (last_served_ && frame <= *last_served_) {
        ++stats_.stale_updates_skipped;
        return std::nullopt;
    }

    const VisibilityBitmap bitmap = trace_visibility(scene_, newest->to_pose(), intr_);
    const auto compressed = compress_bitmap(bitmap);
    const std::int64_t send_us = newest_arrival + server_delay_us_;
    for (const auto& chunk : chunk_frame(compressed, newest->frame, static_cast<std::uint32_t>(bitmap.byte_size()))) {
        const auto bytes = encode_packet(chunk);
        endpoint.send(bytes, send_us);
        ++stats_.chunks_sent;
        stats_.bytes_sent += bytes.size();
    }
    ++stats_.frames_rendered;
    last_served_ = frame;
    return frame;
}

} // namespace dhr
