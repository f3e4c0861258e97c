#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>
#include <unistd.h>

#include "dhr/error.hpp"
#include "dhr/harness.hpp"
#include "test_support.hpp"

using namespace dhr;
using namespace dhr::test;

namespace {

ExperimentConfig small_config(const char* trajectory = "tri-room-orbit.json")
{
    ExperimentConfig c;
    c.scene = asset("tri-room.obj");
    c.lights = asset("tri-room.json");
    c.trajectory = asset(trajectory);
    c.display_width = 48;
    c.display_height = 27;
    c.guard_x = 8;
    c.guard_y = 4;
    c.frames = 30;
    c.metrics = false;
    return c;
}

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("dhr_harness_" + std::to_string(::getpid()) + "_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(Config, LoadsTheShippedDefaultWithResolvedPaths)
{
    const ExperimentConfig c = load_config(asset("default.json"));
    EXPECT_EQ(c.scene, asset("tri-room.obj"));
    EXPECT_EQ(c.trajectory, asset("tri-room-orbit.json"));
    EXPECT_EQ(c.display_width, 320);
    EXPECT_EQ(c.display_height, 180);
    EXPECT_EQ(c.guard_x, 16);
    EXPECT_EQ(c.guard_y, 9);
    EXPECT_EQ(c.x_max, 2);
    EXPECT_DOUBLE_EQ(c.delay_up_ms + c.delay_down_ms, 55.0);
    EXPECT_EQ(c.frames, 240);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, KeysFormsAndErrors)
{
    const auto c = config_from_json(nlohmann::json{{"ping_ms", 110}, {"display", "64x36"}, {"guard", {4, 2}},
                                                   {"on_missing", "all_visible"}, {"mode", "reference"}},
                                    "/base");
    EXPECT_DOUBLE_EQ(c.delay_up_ms, 55.0);
    EXPECT_DOUBLE_EQ(c.delay_down_ms, 55.0);
    EXPECT_EQ(c.display_width, 64);
    EXPECT_EQ(c.guard_y, 2);
    EXPECT_EQ(c.on_missing, MissingPolicy::all_visible);
    EXPECT_EQ(c.mode, RunMode::reference);

    EXPECT_EQ(config_from_json({{"scene", "/abs/a.obj"}}, "/base").scene, "/abs/a.obj");
    EXPECT_EQ(config_from_json({{"scene", "rel/a.obj"}}, "/base").scene, "/base/rel/a.obj");

    EXPECT_THROW(config_from_json({{"x_maxx", 1}}), ConfigError);
    EXPECT_THROW(config_from_json({{"x_max", "two"}}), ConfigError);
    EXPECT_THROW(config_from_json({{"mode", "party"}}), ConfigError);
    EXPECT_THROW(config_from_json({{"display", {1, 2, 3}}}), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::array()), ConfigError);
    EXPECT_THROW(load_config("/definitely/not/here.json"), LoadError);
}

TEST(Config, RoundTripsThroughJson)
{
    ExperimentConfig c = small_config();
    c.x_max = 7;
    c.jitter_ms = 3.5;
    c.seed = 1234567890123ull;
    c.on_missing = MissingPolicy::all_visible;
    c.frame_format = "ppm";
    const auto j = config_to_json(c);
    EXPECT_EQ(config_to_json(config_from_json(j)), j);
}

TEST(Config, Validation)
{
    auto broken = [](auto&& edit) {
        ExperimentConfig c = small_config();
        edit(c);
        return c;
    };
    EXPECT_NO_THROW(small_config().validate());
    EXPECT_THROW(broken([](auto& c) { c.x_max = -1; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.loss = 1.5; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.frame_time_ms = 0; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.guard_x = -2; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.frame_format = "gif"; }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.scene.clear(); }).validate(), ConfigError);
    EXPECT_THROW(broken([](auto& c) { c.port = 70000; }).validate(), ConfigError);
    EXPECT_NO_THROW(broken([](auto& c) { c.mode = RunMode::server; c.trajectory.clear(); }).validate());
}

TEST(Config, ParseSize)
{
    EXPECT_EQ(parse_size("16x9"), std::make_pair(16, 9));
    EXPECT_EQ(parse_size("32X18"), std::make_pair(32, 18));
    EXPECT_EQ(parse_size("0"), std::make_pair(0, 0));
    for (const char* bad : {"", "16", "x9", "16x", "16x9x2", "axb", "16 x 9"}) EXPECT_THROW(parse_size(bad), ConfigError) << bad;
}

TEST(Reference, OneFrameRunWritesOneImageAndOneRow)
{
    ExperimentConfig c = small_config();
    c.mode = RunMode::reference;
    c.frames = 1;
    c.metrics = true;
    c.output = scratch("reference");
    const RunResult r = execute(c);
    ASSERT_EQ(r.logs.size(), 1u);
    EXPECT_EQ(r.logs[0].psnr_db, 99.0);
    EXPECT_EQ(r.logs[0].ssim, 1.0);
    EXPECT_EQ(r.logs[0].bitwise_error_mean, 0.0);

    std::vector<std::filesystem::path> frames;
    for (const auto& e : std::filesystem::directory_iterator(c.output / "frames")) frames.push_back(e.path());
    ASSERT_EQ(frames.size(), 1u);
    EXPECT_EQ(frames[0].filename(), "frame_000000.png");
    EXPECT_EQ(count_lines(slurp(c.output / "frame_log.csv")), 2u);
    EXPECT_EQ(load_config(c.output / "config.json").frames, 1);
    std::filesystem::remove_all(c.output);
}

TEST(Reference, PpmOutputAndNoFramesOption)
{
    ExperimentConfig c = small_config();
    c.mode = RunMode::reference;
    c.frames = 2;
    c.frame_format = "ppm";
    c.output = scratch("ppm");
    execute(c);
    EXPECT_TRUE(std::filesystem::exists(c.output / "frames" / "frame_000001.ppm"));
    const std::string ppm = slurp(c.output / "frames" / "frame_000001.ppm");
    EXPECT_EQ(ppm.rfind("P6\n48 27\n255\n", 0), 0u);
    EXPECT_EQ(ppm.size(), std::string("P6\n48 27\n255\n").size() + 48 * 27 * 3);

    c.write_frames = false;
    c.output = scratch("noframes");
    execute(c);
    EXPECT_TRUE(std::filesystem::is_empty(c.output / "frames"));
    EXPECT_EQ(count_lines(slurp(c.output / "frame_log.csv")), 3u);
    std::filesystem::remove_all(scratch("ppm"));
    std::filesystem::remove_all(c.output);
}

TEST(Inproc, OneDisplayedFramePerTick)
{
    ExperimentConfig c = small_config();
    c.delay_up_ms = c.delay_down_ms = 400.0; // nothing arrives during the run
    const Assets assets = load_assets(c);
    const RunResult r = run_inproc(c, assets);
    ASSERT_EQ(r.logs.size(), 30u);
    for (std::size_t i = 0; i < r.logs.size(); ++i) {
        EXPECT_EQ(r.logs[i].n, static_cast<std::int64_t>(i));
        EXPECT_EQ(r.logs[i].m, -1);
        EXPECT_EQ(r.logs[i].r, r.logs[i].n);
    }
}

TEST(Inproc, FiftyFiveMillisecondPingGivesFiveFramesOfStaleness)
{
    ExperimentConfig c = small_config();
    c.delay_up_ms = c.delay_down_ms = 27.5;
    c.x_max = 2;
    const Assets assets = load_assets(c);
    const RunResult r = run_inproc(c, assets);
    for (const FrameLog& row : r.logs) {
        if (row.n < 5) {
            EXPECT_EQ(row.m, -1);
            continue;
        }
        EXPECT_EQ(row.p, 5) << row.n;
        EXPECT_EQ(row.x, 2);
        EXPECT_EQ(row.n - row.r, 3);
        EXPECT_NEAR(row.displayed_lag_ms, 33.3, 1e-9);
        EXPECT_DOUBLE_EQ(row.response_time_ms, 55.5);
        EXPECT_GT(row.bytes_received, 0u);
        EXPECT_GT(row.compression_ratio, 1.0);
    }
}

TEST(Inproc, TotalLossShowsOnlyBackgroundAndBlack)
{
    ExperimentConfig c = small_config();
    c.loss = 1.0;
    c.frames = 12;
    const Assets assets = load_assets(c);
    const Rgb bg = assets.scene.background();
    const Image8 bg8 = encode_display(LinearImage{1, 1, {bg}, 0});
    int checked = 0;
    RunHooks hooks;
    hooks.on_frame = [&](const DisplayedFrame& f) {
        EXPECT_EQ(f.log.m, -1);
        for (std::size_t i = 0; i < f.gbuffer.valid.size(); ++i) {
            for (std::size_t k = 0; k < 3; ++k) {
                const std::uint8_t want = f.gbuffer.valid[i] ? 0 : bg8.rgb[k];
                ASSERT_EQ(f.image.rgb[3 * i + k], want);
            }
        }
        ++checked;
    };
    run_inproc(c, assets, hooks);
    EXPECT_EQ(checked, 12);
}

TEST(Inproc, ReproducibleByteForByte)
{
    ExperimentConfig c = small_config();
    c.delay_up_ms = 12;
    c.delay_down_ms = 20;
    c.jitter_ms = 9;
    c.loss = 0.15;
    c.x_max = 3;
    c.metrics = true;
    const Assets assets = load_assets(c);
    std::vector<Image8> first, second;
    RunHooks a, b;
    a.on_frame = [&](const DisplayedFrame& f) { first.push_back(f.image); };
    b.on_frame = [&](const DisplayedFrame& f) { second.push_back(f.image); };
    const RunResult ra = run_inproc(c, assets, a);
    const RunResult rb = run_inproc(c, assets, b);
    EXPECT_EQ(frame_log_csv(ra.logs, ra.num_lights), frame_log_csv(rb.logs, rb.num_lights));
    EXPECT_EQ(first, second);

    c.seed = 99;
    const RunResult rc = run_inproc(c, assets);
    EXPECT_NE(frame_log_csv(ra.logs, ra.num_lights), frame_log_csv(rc.logs, rc.num_lights));
}

TEST(Inproc, LossyLinkStillMakesProgress)
{
    ExperimentConfig c = small_config();
    c.frames = 150;
    c.loss = 0.3;
    c.jitter_ms = 6;
    c.delay_up_ms = c.delay_down_ms = 10;
    const Assets assets = load_assets(c);
    const RunResult r = run_inproc(c, assets);
    std::int64_t last_m = -1;
    int advances = 0;
    for (const FrameLog& row : r.logs) {
        EXPECT_GE(row.m, last_m) << "the held bitmap never goes backwards";
        if (row.m > last_m) ++advances;
        last_m = row.m;
    }
    EXPECT_GT(advances, 10);
    EXPECT_GT(last_m, 120);
}

TEST(Inproc, EvictedPoseIsTreatedAsMissing)
{
    ExperimentConfig c = small_config();
    c.delay_up_ms = c.delay_down_ms = 55.0; // p = 10
    c.history_capacity = 4;
    const Assets assets = load_assets(c);
    for (const FrameLog& row : run_inproc(c, assets).logs) EXPECT_EQ(row.m, -1);
    c.history_capacity = 11;
    const RunResult r = run_inproc(c, assets);
    EXPECT_EQ(r.logs.back().p, 10);
}

TEST(Inproc, MetricsAreExactWhenNothingMoves)
{
    ExperimentConfig c = small_config("tri-room-static.json");
    c.delay_up_ms = c.delay_down_ms = 30;
    c.x_max = 4;
    c.metrics = true;
    const Assets assets = load_assets(c);
    const RunResult r = run_inproc(c, assets);
    int counted = 0;
    for (const FrameLog& row : r.logs) {
        if (row.m < 0) continue;
        ++counted;
        EXPECT_EQ(row.bitwise_error_mean, 0.0);
        EXPECT_EQ(row.psnr_db, 99.0);
        EXPECT_DOUBLE_EQ(row.ssim, 1.0);
    }
    EXPECT_GT(counted, 20);
}

TEST(ClientPipeline, RejectsBitmapsFromTheFutureAndCountsJunk)
{
    const ExperimentConfig c = small_config();
    const Assets assets = load_assets(c);
    ClientPipeline client(assets, c);
    client.begin_frame(0, 0);

    const CameraPose future = client_pose(assets.trajectory, 5);
    const VisibilityBitmap bitmap = trace_visibility(assets.scene, future, assets.intrinsics);
    std::vector<Datagram> datagrams;
    for (const auto& chunk : chunk_frame(compress_bitmap(bitmap), 5, static_cast<std::uint32_t>(bitmap.byte_size()))) {
        datagrams.push_back({encode_packet(chunk), 0});
    }
    datagrams.push_back({{1, 2, 3}, 0});
    client.receive(datagrams, 0);
    EXPECT_EQ(client.protocol_errors(), 1u);
    EXPECT_EQ(client.decode_errors(), 1u);
    EXPECT_EQ(client.newest_bitmap_frame(), std::nullopt);
    EXPECT_EQ(client.display(0).log.m, -1);
}

TEST(Sweep, PingAxisGivesTheExpectedStaleness)
{
    ExperimentConfig c = small_config();
    c.frames = 40;
    c.output = scratch("sweep");
    const auto points = run_sweep(c, SweepAxis::ping, {"0", "55", "110"});
    ASSERT_EQ(points.size(), 3u);
    const double want[] = {0, 5, 10};
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(points[i].mean_p, want[i], 1.0) << points[i].value;
    EXPECT_EQ(count_lines(slurp(c.output / "aggregate.csv")), 4u);
    EXPECT_TRUE(std::filesystem::exists(c.output / "config.json"));
    for (const char* v : {"0", "55", "110"}) {
        const auto dir = c.output / (std::string("ping_ms_") + v);
        EXPECT_TRUE(std::filesystem::exists(dir / "frame_log.csv"));
        EXPECT_TRUE(std::filesystem::exists(dir / "config.json"));
        EXPECT_TRUE(std::filesystem::is_directory(dir / "frames"));
    }
    std::filesystem::remove_all(c.output);
    EXPECT_THROW(run_sweep(c, SweepAxis::x_max, {}), ConfigError);
    EXPECT_THROW(run_sweep(c, SweepAxis::x_max, {"lots"}), ConfigError);
    EXPECT_THROW(parse_sweep_axis("zoom"), ConfigError);
    std::filesystem::remove_all(c.output);
}

namespace {

int free_udp_port()
{
    return UdpEndpoint::bind("127.0.0.1", 0).local_port();
}

} // namespace

TEST(RealMode, ClientRunsWithoutAServer)
{
    ExperimentConfig c = small_config();
    c.frames = 5;
    c.frame_time_ms = 2;
    c.port = free_udp_port();
    const Assets assets = load_assets(c);
    std::atomic<bool> stop{false};
    const RunResult r = run_client(c, assets, stop);
    ASSERT_EQ(r.logs.size(), 5u);
    for (const FrameLog& row : r.logs) EXPECT_EQ(row.m, -1);
}

TEST(RealMode, LoopbackConvergesAndSurvivesServerShutdown)
{
    ExperimentConfig c = small_config("tri-room-static.json");
    c.frames = 90;
    c.x_max = 3;
    c.metrics = true;
    c.port = free_udp_port();
    const Assets assets = load_assets(c);
    std::atomic<bool> server_stop{false}, client_stop{false};
    std::thread server([&] { run_server(c, assets, server_stop); });
    std::this_thread::sleep_for(std::chrono::milliseconds(50));

    RunHooks hooks;
    hooks.on_frame = [&](const DisplayedFrame& f) {
        if (f.log.n == 45) {
            server_stop = true;
            // Give the server loop time to notice, then drain anything still in flight.
            std::this_thread::sleep_for(std::chrono::milliseconds(150));
        }
    };
    const RunResult r = run_client(c, assets, client_stop, hooks);
    server.join();

    ASSERT_EQ(r.logs.size(), 90u);
    int received = 0;
    for (const FrameLog& row : r.logs) {
        if (row.n >= 45 || row.m < 0) continue;
        ++received;
        EXPECT_EQ(row.psnr_db, 99.0) << "static camera: identical to the reference at r";
        EXPECT_GT(row.response_time_ms, 0.0);
    }
    EXPECT_GT(received, 20);

    // After shutdown m freezes, p grows by one per frame and x stays capped.
    const auto tail = std::vector<FrameLog>(r.logs.end() - 30, r.logs.end());
    for (std::size_t i = 0; i < tail.size(); ++i) {
        EXPECT_EQ(tail[i].m, tail.front().m);
        EXPECT_EQ(tail[i].p, tail.front().p + static_cast<std::int64_t>(i));
        EXPECT_EQ(tail[i].x, 3);
    }
}
