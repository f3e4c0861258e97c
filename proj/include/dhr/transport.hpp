#pragma once

#include <cstdint>
#include <memory>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dhr {

struct Datagram {
    std::vector<std::uint8_t> bytes;
    std::int64_t arrival_us = 0; ///< delivery time on the receiver's clock
};

/// Unreliable, unordered datagram endpoint. Both the simulated link and the UDP socket implement it.
class DatagramEndpoint {
public:
    virtual ~DatagramEndpoint() = default;

    /// `now_us` is the sender's clock; the simulator schedules delivery relative to it.
    virtual void send(std::span<const std::uint8_t> packet, std::int64_t now_us) = 0;

    /// Everything deliverable at `now_us`, in delivery order. Never blocks.
    virtual std::vector<Datagram> poll(std::int64_t now_us) = 0;
};

struct NetworkConditions {
    double base_delay_ms = 0.0;
    double jitter_ms = 0.0; ///< uniform on [-jitter, +jitter], total delay clamped at zero
    double loss_prob = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

inline std::int64_t ms_to_us(double ms) { return static_cast<std::int64_t>(ms * 1000.0 + (ms >= 0.0 ? 0.5 : -0.5)); }

/// Frame-quantised virtual time for lockstep simulation.
class VirtualClock {
public:
    explicit VirtualClock(double frame_time_ms = 11.1) : frame_time_us_(ms_to_us(frame_time_ms)) {}

    std::int64_t frame_time_us() const { return frame_time_us_; }
    std::int64_t current_frame() const { return frame_; }
    std::int64_t now_us() const { return time_of(frame_); }
    std::int64_t time_of(std::int64_t frame) const { return frame * frame_time_us_; }
    void advance() { ++frame_; }

private:
    std::int64_t frame_time_us_;
    std::int64_t frame_ = 0;
};

/// Record of one packet's fate, for determinism checks.
struct LinkEvent {
    std::uint64_t sequence = 0;
    std::int64_t send_us = 0;
    std::int64_t deliver_us = -1; ///< -1 when dropped
    std::size_t size = 0;
    friend bool operator==(const LinkEvent&, const LinkEvent&) = default;
};

/// One direction of a simulated network. Loss and jitter are drawn from a private seeded generator,
/// two draws per packet, so the schedule depends only on (conditions, send sequence).
class SimLink {
public:
    explicit SimLink(NetworkConditions conditions);

    void send(std::span<const std::uint8_t> packet, std::int64_t send_us);
    std::vector<Datagram> poll(std::int64_t now_us);

    std::size_t in_flight() const { return queue_.size(); }
    const std::vector<LinkEvent>& trace() const { return trace_; }
    const NetworkConditions& conditions() const { return conditions_; }

private:
    struct InFlight {
        std::int64_t deliver_us;
        std::uint64_t sequence;
        std::vector<std::uint8_t> bytes;
    };
    struct Later {
        bool operator()(const InFlight& a, const InFlight& b) const
        {
            return a.deliver_us != b.deliver_us ? a.deliver_us > b.deliver_us : a.sequence > b.sequence;
        }
    };

    double uniform01();

    NetworkConditions conditions_;
    std::mt19937_64 rng_;
    std::uint64_t next_sequence_ = 0;
    std::priority_queue<InFlight, std::vector<InFlight>, Later> queue_;
    std::vector<LinkEvent> trace_;
};

/// Client and server endpoints joined by two independent simulated links.
class SimNetwork {
public:
    SimNetwork(NetworkConditions uplink, NetworkConditions downlink);

    DatagramEndpoint& client() { return client_; }
    DatagramEndpoint& server() { return server_; }
    const SimLink& uplink() const { return up_; }
    const SimLink& downlink() const { return down_; }

private:
    class Endpoint final : public DatagramEndpoint {
    public:
        Endpoint(SimLink& out, SimLink& in) : out_(out), in_(in) {}
        void send(std::span<const std::uint8_t> packet, std::int64_t now_us) override { out_.send(packet, now_us); }
        std::vector<Datagram> poll(std::int64_t now_us) override { return in_.poll(now_us); }

    private:
        SimLink& out_;
        SimLink& in_;
    };

    SimLink up_;
    SimLink down_;
    Endpoint client_{up_, down_};
    Endpoint server_{down_, up_};
};

/// IPv4 UDP socket. A bound (server) socket replies to whoever sent the most recent datagram;
/// a connected (client) socket always sends to its configured peer.
class UdpEndpoint final : public DatagramEndpoint {
public:
    static UdpEndpoint bind(const std::string& host, std::uint16_t port);
    static UdpEndpoint connect(const std::string& host, std::uint16_t port);

    UdpEndpoint(UdpEndpoint&& other) noexcept;
    UdpEndpoint& operator=(UdpEndpoint&& other) noexcept;
    UdpEndpoint(const UdpEndpoint&) = delete;
    UdpEndpoint& operator=(const UdpEndpoint&) = delete;
    ~UdpEndpoint() override;

    void send(std::span<const std::uint8_t> packet, std::int64_t now_us) override;
    std::vector<Datagram> poll(std::int64_t now_us) override;

    /// Blocks up to `timeout_ms` for a readable socket.
    bool wait_readable(int timeout_ms) const;
    std::uint16_t local_port() const;

private:
    struct PeerAddress;
    UdpEndpoint(int fd, std::unique_ptr<PeerAddress> peer);

    int fd_ = -1;
    std::unique_ptr<PeerAddress> peer_;
};

} // namespace dhr
