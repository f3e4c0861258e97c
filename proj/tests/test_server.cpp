#include <gtest/gtest.h>

#include "dhr/codec.hpp"
#include "dhr/server.hpp"
#include "dhr/visibility.hpp"
#include "test_support.hpp"

using namespace dhr;
using namespace dhr::test;

namespace {

struct Rig {
    Scene scene = load_scene(asset("tri-room.obj"), asset("tri-room.json"));
    Intrinsics intr = make_intrinsics(scene.lens(), 48, 27, 8, 4);
};

CameraPose pose_at(FrameIndex n)
{
    const double s = 0.05 * static_cast<double>(n);
    return quantize_pose({{4.0 - s, 3.5, 7.5}, {-0.5, 1.0, -1.5}, {0, 1, 0}, n});
}

std::vector<std::uint8_t> update(FrameIndex n) { return encode_packet(CameraUpdatePacket::from_pose(pose_at(n))); }

std::vector<VisibilityChunkPacket> chunks(const std::vector<Datagram>& ds)
{
    std::vector<VisibilityChunkPacket> out;
    for (const auto& d : ds) out.push_back(std::get<VisibilityChunkPacket>(decode_packet(d.bytes)));
    return out;
}

} // namespace

TEST(Server, NothingReceivedRendersNothing)
{
    Rig rig;
    SimNetwork net({0, 0, 0, 1}, {0, 0, 0, 2});
    VisibilityServer server(rig.scene, rig.intr);
    EXPECT_EQ(server.tick(net.server(), 0), std::nullopt);
    EXPECT_EQ(server.stats().frames_rendered, 0u);
}

TEST(Server, RepliesAreTaggedWithTheRequestFrameAndMatchTheOracle)
{
    Rig rig;
    SimNetwork net({0, 0, 0, 1}, {0, 0, 0, 2});
    VisibilityServer server(rig.scene, rig.intr);
    net.client().send(update(7), 0);
    EXPECT_EQ(server.tick(net.server(), 0), 7);

    const auto got = chunks(net.client().poll(0));
    ASSERT_FALSE(got.empty());
    for (const auto& c : got) EXPECT_EQ(c.frame, 7u);
    const auto payload = reassemble(got);
    ASSERT_TRUE(payload);
    const VisibilityBitmap bitmap = decompress_bitmap(*payload, rig.intr.buffer_width(true), rig.intr.buffer_height(true),
                                                      static_cast<int>(rig.scene.lights().size()), 7);
    EXPECT_EQ(bitmap, trace_visibility(rig.scene, pose_at(7), rig.intr));
    EXPECT_EQ(server.stats().chunks_sent, got.size());
}

TEST(Server, BacklogRendersOnlyTheNewest)
{
    Rig rig;
    SimNetwork net({0, 0, 0, 1}, {0, 0, 0, 2});
    VisibilityServer server(rig.scene, rig.intr);
    for (FrameIndex n : {3, 5, 4}) net.client().send(update(n), 0);
    EXPECT_EQ(server.tick(net.server(), 0), 5);
    for (const auto& c : chunks(net.client().poll(0))) EXPECT_EQ(c.frame, 5u);
    EXPECT_EQ(server.stats().frames_rendered, 1u);
    EXPECT_EQ(server.stats().updates_received, 3u);
    EXPECT_EQ(server.stats().stale_updates_skipped, 2u);
}

TEST(Server, UpdatesNotNewerThanTheLastServedAreSkipped)
{
    Rig rig;
    SimNetwork net({0, 0, 0, 1}, {0, 0, 0, 2});
    VisibilityServer server(rig.scene, rig.intr);
    net.client().send(update(9), 0);
    ASSERT_EQ(server.tick(net.server(), 0), 9);
    net.client().send(update(8), 1);
    net.client().send(update(9), 1);
    EXPECT_EQ(server.tick(net.server(), 1), std::nullopt);
    EXPECT_EQ(server.last_served(), 9);
    EXPECT_EQ(server.stats().frames_rendered, 1u);
}

TEST(Server, UndecodableDatagramsAreCountedAndSkipped)
{
    Rig rig;
    SimNetwork net({0, 0, 0, 1}, {0, 0, 0, 2});
    VisibilityServer server(rig.scene, rig.intr);
    const std::vector<std::uint8_t> junk{'n', 'o', 'p', 'e'};
    net.client().send(junk, 0);
    net.client().send(update(2), 0);
    EXPECT_EQ(server.tick(net.server(), 0), 2);
    EXPECT_EQ(server.stats().decode_errors, 1u);
}

TEST(Server, ReplyIsStampedAtArrivalPlusServerDelay)
{
    Rig rig;
    SimNetwork net({10.0, 0, 0, 1}, {3.0, 0, 0, 2});
    VisibilityServer server(rig.scene, rig.intr, 5'000);
    net.client().send(update(1), 0);
    // The server only looks at 20 ms, but the request arrived at 10 ms.
    ASSERT_EQ(server.tick(net.server(), 20'000), 1);
    EXPECT_TRUE(net.client().poll(17'999).empty());
    EXPECT_FALSE(net.client().poll(18'000).empty());
}

TEST(Server, ZeroDelayLockstepDeliversFrameNBeforeDisplayingN)
{
    Rig rig;
    SimNetwork net({0, 0, 0, 1}, {0, 0, 0, 2});
    VisibilityServer server(rig.scene, rig.intr);
    VirtualClock clock(11.1);
    for (FrameIndex n = 0; n < 4; ++n, clock.advance()) {
        net.client().send(update(n), clock.now_us());
        server.tick(net.server(), clock.now_us());
        const auto got = chunks(net.client().poll(clock.now_us()));
        ASSERT_FALSE(got.empty());
        for (const auto& c : got) EXPECT_EQ(c.frame, static_cast<std::uint32_t>(n));
    }
}
