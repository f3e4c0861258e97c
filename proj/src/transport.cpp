#include "dhr/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include "dhr/codec.hpp"
#include "dhr/error.hpp"

namespace dhr {

void NetworkConditions::validate() const
{
    if (!(base_delay_ms >= 0.0) || !(jitter_ms >= 0.0)) throw ConfigError("network delays must be non-negative");
    if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) throw ConfigError("loss probability must be in [0, 1]");
}

SimLink::SimLink(NetworkConditions conditions) : conditions_(conditions), rng_(conditions.seed)
{
    conditions_.validate();
}

double SimLink::uniform01()
{
    // 53 random mantissa bits; std distributions are not reproducible across standard libraries
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

void SimLink::send(std::span<const std::uint8_t> packet, std::int64_t send_us)
{
    const std::uint64_t seq = next_sequence_++;
    const double loss_draw = uniform01();
    const double jitter_draw = uniform01();
    LinkEvent ev{seq, send_us, -1, packet.size()};
    if (loss_draw < conditions_.loss_prob) {
        trace_.push_back(ev);
        return;
    }
    const double delay_ms = conditions_.base_delay_ms + (2.0 * jitter_draw - 1.0) * conditions_.jitter_ms;
    const std::int64_t delay_us = std::max<std::int64_t>(0, ms_to_us(delay_ms));
    ev.deliver_us = send_us + delay_us;
    trace_.push_back(ev);
    queue_.push(InFlight{ev.deliver_us, seq, std::vector<std::uint8_t>(packet.begin(), packet.end())});
}

std::vector<Datagram> SimLink::poll(std::int64_t now_us)
{
    std::vector<Datagram> out;
    while (!queue_.empty() && queue_.top().deliver_us <= now_us) {
        // top() is const; the element is popped right after, so moving from it is safe
        auto& top = const_cast<InFlight&>(queue_.top());
        out.push_back(Datagram{std::move(top.bytes), top.deliver_us});
        queue_.pop();
    }
    return out;
}

SimNetwork::SimNetwork(NetworkConditions uplink, NetworkConditions downlink) : up_(uplink), down_(downlink) {}

// --- UDP ---------------------------------------------------------------------------------------

struct UdpEndpoint::PeerAddress {
    sockaddr_in addr{};
    bool known = false;
    bool fixed = false; ///< connected sockets never retarget
};

namespace {

sockaddr_in resolve_ipv4(const std::string& host, std::uint16_t port)
{
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* res = nullptr;
    if (const int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &res); rc != 0 || !res) {
        throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    sockaddr_in addr{};
    std::memcpy(&addr, res->ai_addr, sizeof(addr));
    ::freeaddrinfo(res);
    addr.sin_port = htons(port);
    return addr;
}

int open_socket()
{
    const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    // bitmaps arrive as bursts of chunks; give the kernel room to queue them
    const int buf = 4 << 20;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &buf, sizeof(buf));
    ::setsockopt(fd, SOL_SOCKET, SO_SNDBUF, &buf, sizeof(buf));
    return fd;
}

} // namespace

UdpEndpoint::UdpEndpoint(int fd, std::unique_ptr<PeerAddress> peer) : fd_(fd), peer_(std::move(peer)) {}

UdpEndpoint::UdpEndpoint(UdpEndpoint&& other) noexcept : fd_(other.fd_), peer_(std::move(other.peer_))
{
    other.fd_ = -1;
}

UdpEndpoint& UdpEndpoint::operator=(UdpEndpoint&& other) noexcept
{
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = other.fd_;
        peer_ = std::move(other.peer_);
        other.fd_ = -1;
    }
    return *this;
}

UdpEndpoint::~UdpEndpoint()
{
    if (fd_ >= 0) ::close(fd_);
}

UdpEndpoint UdpEndpoint::bind(const std::string& host, std::uint16_t port)
{
    const sockaddr_in addr = resolve_ipv4(host, port);
    const int fd = open_socket();
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
        const std::string err = std::strerror(errno);
        ::close(fd);
        throw TransportError("bind " + host + ":" + std::to_string(port) + ": " + err);
    }
    return UdpEndpoint(fd, std::make_unique<PeerAddress>());
}

UdpEndpoint UdpEndpoint::connect(const std::string& host, std::uint16_t port)
{
    auto peer = std::make_unique<PeerAddress>();
    peer->addr = resolve_ipv4(host, port);
    peer->known = true;
    peer->fixed = true;
    const int fd = open_socket();
    sockaddr_in any{};
    any.sin_family = AF_INET;
    any.sin_addr.s_addr = htonl(INADDR_ANY);
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&any), sizeof(any)) != 0) {
        const std::string err = std::strerror(errno);
        ::close(fd);
        throw TransportError("bind ephemeral port: " + err);
    }
    return UdpEndpoint(fd, std::move(peer));
}

void UdpEndpoint::send(std::span<const std::uint8_t> packet, std::int64_t)
{
    if (packet.size() > kMaxDatagram) throw ContractViolation("datagram exceeds the maximum packet size");
    if (!peer_->known) return; // nobody has talked to us yet
    const auto n = ::sendto(fd_, packet.data(), packet.size(), 0, reinterpret_cast<const sockaddr*>(&peer_->addr),
                            sizeof(peer_->addr));
    if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != ECONNREFUSED) {
        throw TransportError(std::string("sendto: ") + std::strerror(errno));
    }
}

std::vector<Datagram> UdpEndpoint::poll(std::int64_t now_us)
{
    std::vector<Datagram> out;
    std::uint8_t buf[2048];
    for (;;) {
        sockaddr_in from{};
        socklen_t from_len = sizeof(from);
        const auto n = ::recvfrom(fd_, buf, sizeof(buf), 0, reinterpret_cast<sockaddr*>(&from), &from_len);
        if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK || errno == ECONNREFUSED) break;
            if (errno == EINTR) continue;
            throw TransportError(std::string("recvfrom: ") + std::strerror(errno));
        }
        out.push_back(Datagram{std::vector<std::uint8_t>(buf, buf + n), now_us});
        if (!peer_->fixed) {
            peer_->addr = from;
            peer_->known = true;
        }
    }
    return out;
}

bool UdpEndpoint::wait_readable(int timeout_ms) const
{
    pollfd p{fd_, POLLIN, 0};
    return ::poll(&p, 1, timeout_ms) > 0;
}

std::uint16_t UdpEndpoint::local_port() const
{
    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
}

} // namespace dhr
