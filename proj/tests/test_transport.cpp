#include <gtest/gtest.h>

#include "dhr/codec.hpp"
#include "dhr/error.hpp"
#include "dhr/transport.hpp"

using namespace dhr;

namespace {

std::vector<std::uint8_t> tagged(std::uint8_t tag) { return {tag, 0, 0}; }

std::vector<std::uint8_t> tags(const std::vector<Datagram>& ds)
{
    std::vector<std::uint8_t> out;
    for (const auto& d : ds) out.push_back(d.bytes.at(0));
    return out;
}

} // namespace

TEST(VirtualClock, FrameArithmetic)
{
    VirtualClock clock(11.1);
    EXPECT_EQ(clock.frame_time_us(), 11100);
    EXPECT_EQ(clock.now_us(), 0);
    clock.advance();
    clock.advance();
    EXPECT_EQ(clock.current_frame(), 2);
    EXPECT_EQ(clock.now_us(), 22200);
    EXPECT_EQ(clock.time_of(5), 55500);
}

TEST(SimLink, ZeroDelayDeliversOnTheSameTick)
{
    SimLink link({0, 0, 0, 1});
    link.send(tagged(1), 1000);
    EXPECT_EQ(tags(link.poll(1000)), std::vector<std::uint8_t>{1});
}

TEST(SimLink, FiftyFiveMillisecondsIsFiveFrames)
{
    SimLink link({55.0, 0, 0, 1});
    VirtualClock clock(11.1);
    link.send(tagged(1), clock.now_us());
    int delivered_at = -1;
    for (int f = 0; f < 10 && delivered_at < 0; ++f, clock.advance()) {
        if (!link.poll(clock.now_us()).empty()) delivered_at = f;
    }
    EXPECT_EQ(delivered_at, 5);
}

TEST(SimLink, TotalLossNeverDelivers)
{
    SimLink link({0, 0, 1.0, 1});
    for (int i = 0; i < 100; ++i) link.send(tagged(1), i);
    EXPECT_TRUE(link.poll(1'000'000'000).empty());
    EXPECT_EQ(link.in_flight(), 0u);
    for (const auto& ev : link.trace()) EXPECT_EQ(ev.deliver_us, -1);
}

TEST(SimLink, EmptyPollAndSendOrderTieBreak)
{
    SimLink link({20.0, 0, 0, 1});
    EXPECT_TRUE(link.poll(0).empty());
    link.send(tagged(1), 0);
    link.send(tagged(2), 0);
    link.send(tagged(3), 0);
    EXPECT_TRUE(link.poll(19'999).empty());
    EXPECT_EQ(tags(link.poll(20'000)), (std::vector<std::uint8_t>{1, 2, 3}));
}

TEST(SimLink, JitterReordersConsecutiveSendsForAPinnedSeed)
{
    // Seed found by searching upwards from 1 for the first reordering of two sends one frame apart.
    constexpr std::uint64_t kSeed = 19;
    SimLink link({30.0, 11.0, 0, kSeed});
    link.send(tagged(1), 0);
    link.send(tagged(2), 11'100);
    EXPECT_EQ(tags(link.poll(1'000'000)), (std::vector<std::uint8_t>{2, 1}));
}

TEST(SimLink, JitterStaysInBoundsAndDelayIsClampedAtZero)
{
    SimLink link({2.0, 5.0, 0, 9});
    int clamped = 0;
    for (int i = 0; i < 2000; ++i) link.send(tagged(0), 1'000'000);
    for (const auto& ev : link.trace()) {
        const std::int64_t delay = ev.deliver_us - ev.send_us;
        EXPECT_GE(delay, 0);
        EXPECT_LE(delay, 7000);
        clamped += delay == 0;
    }
    EXPECT_GT(clamped, 400) << "roughly 3/10 of draws fall below zero";
}

TEST(SimLink, LossRateMatchesProbability)
{
    SimLink link({0, 0, 0.2, 5});
    for (int i = 0; i < 20000; ++i) link.send(tagged(0), 0);
    const double delivered = static_cast<double>(link.poll(0).size()) / 20000.0;
    EXPECT_NEAR(delivered, 0.8, 0.015);
}

TEST(SimLink, IdenticalSeedsGiveIdenticalTraces)
{
    auto run = [](std::uint64_t seed) {
        SimLink link({10.0, 8.0, 0.3, seed});
        for (int i = 0; i < 500; ++i) link.send(tagged(static_cast<std::uint8_t>(i)), i * 1000);
        auto delivered = tags(link.poll(10'000'000));
        return std::make_pair(link.trace(), delivered);
    };
    EXPECT_EQ(run(17), run(17));
    EXPECT_NE(run(17).first, run(18).first);
}

TEST(SimLink, PayloadsArriveUncorrupted)
{
    SimLink link({5.0, 4.0, 0.1, 2});
    std::vector<std::vector<std::uint8_t>> sent;
    for (int i = 0; i < 200; ++i) {
        std::vector<std::uint8_t> p(static_cast<std::size_t>(i + 1));
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = static_cast<std::uint8_t>(i * 31 + k);
        sent.push_back(p);
        link.send(p, i * 100);
    }
    for (const auto& d : link.poll(1'000'000)) {
        const std::size_t i = d.bytes.size() - 1;
        EXPECT_EQ(d.bytes, sent[i]);
    }
}

TEST(SimNetwork, DirectionsAreIndependent)
{
    SimNetwork net({10.0, 0, 0, 1}, {0.0, 0, 0, 2});
    net.client().send(tagged(1), 0);
    net.server().send(tagged(2), 0);
    EXPECT_EQ(tags(net.client().poll(0)), std::vector<std::uint8_t>{2});
    EXPECT_TRUE(net.server().poll(9'999).empty());
    EXPECT_EQ(tags(net.server().poll(10'000)), std::vector<std::uint8_t>{1});
}

TEST(NetworkConditions, Validation)
{
    EXPECT_THROW((NetworkConditions{-1, 0, 0, 1}.validate()), ConfigError);
    EXPECT_THROW((NetworkConditions{0, -1, 0, 1}.validate()), ConfigError);
    EXPECT_THROW((NetworkConditions{0, 0, 1.5, 1}.validate()), ConfigError);
    EXPECT_THROW(SimLink({0, 0, -0.1, 1}), ConfigError);
}

TEST(Udp, LoopbackRequestAndReply)
{
    UdpEndpoint server = UdpEndpoint::bind("127.0.0.1", 0);
    UdpEndpoint client = UdpEndpoint::connect("127.0.0.1", server.local_port());
    const auto update = encode_packet(CameraUpdatePacket{});
    client.send(update, 0);
    ASSERT_TRUE(server.wait_readable(2000));
    const auto got = server.poll(0);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].bytes, update);

    std::vector<std::uint8_t> big(kMaxDatagram, 0x5A);
    server.send(big, 0);
    ASSERT_TRUE(client.wait_readable(2000));
    const auto reply = client.poll(0);
    ASSERT_EQ(reply.size(), 1u);
    EXPECT_EQ(reply[0].bytes, big);
    EXPECT_TRUE(client.poll(0).empty()) << "poll never blocks";
}

TEST(Udp, OversizedDatagramAndBadAddress)
{
    UdpEndpoint client = UdpEndpoint::connect("127.0.0.1", 9);
    std::vector<std::uint8_t> too_big(kMaxDatagram + 1);
    EXPECT_THROW(client.send(too_big, 0), ContractViolation);
    EXPECT_THROW(UdpEndpoint::connect("no.such.host.invalid", 1), TransportError);
}
