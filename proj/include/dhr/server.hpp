#pragma once

#include <cstdint>
#include <optional>

#include "dhr/camera.hpp"
#include "dhr/scene.hpp"
#include "dhr/transport.hpp"

namespace dhr {

struct ServerStats {
    std::uint64_t frames_rendered = 0;
    std::uint64_t updates_received = 0;
    std::uint64_t stale_updates_skipped = 0;
    std::uint64_t decode_errors = 0;
    std::uint64_t chunks_sent = 0;
    std::uint64_t bytes_sent = 0;
};

/// Server side of the pipeline: camera updates in, compressed visibility chunks out.
///
/// Each tick renders only the highest-numbered camera update received since the previous tick and
/// ignores anything not newer than the last frame it served. Replies are stamped with the request's
/// arrival time plus `server_delay_us`, which is what the simulated link schedules delivery from.
class VisibilityServer {
public:
    VisibilityServer(const Scene& scene, const Intrinsics& intr, std::int64_t server_delay_us = 0);

    /// Drains `endpoint`, serves the newest request if any. Returns the frame rendered.
    std::optional<FrameIndex> tick(DatagramEndpoint& endpoint, std::int64_t now_us);

    const ServerStats& stats() const { return stats_; }
    std::optional<FrameIndex> last_served() const { return last_served_; }

private:
    const Scene& scene_;
    Intrinsics intr_;
    std::int64_t server_delay_us_;
    std::optional<FrameIndex> last_served_;
    ServerStats stats_;
};

} // namespace dhr
