// Command-line front end: reference renders, lockstep simulations, real UDP client/server and sweeps.
#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <optional>

#include "dhr/error.hpp"
#include "dhr/harness.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

// Flags mirror the config keys; anything given on the command line wins over the file.
struct Overrides {
    std::string config;
    std::optional<std::string> scene, lights, trajectory, display, guard, output, on_missing, frame_format, host;
    std::optional<int> x_max, frames, history_capacity, max_lights, port;
    std::optional<double> delay_up_ms, delay_down_ms, ping_ms, jitter_ms, loss, server_delay_ms, frame_time_ms,
        reassembly_timeout_ms;
    std::optional<std::uint64_t> seed;
    std::optional<bool> metrics, write_frames, inverse_square;
};

void add_overrides(CLI::App* app, Overrides& o)
{
    app->add_option("-c,--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
    app->add_option("--scene", o.scene, "OBJ mesh");
    app->add_option("--lights", o.lights, "JSON lights/materials file");
    app->add_option("--trajectory", o.trajectory, "JSON camera keyframes");
    app->add_option("--display", o.display, "display resolution WxH");
    app->add_option("--guard", o.guard, "guard band WxH");
    app->add_option("--x-max", o.x_max, "maximum frames bridged by prediction");
    app->add_option("--delay-up-ms", o.delay_up_ms, "client to server one-way delay");
    app->add_option("--delay-down-ms", o.delay_down_ms, "server to client one-way delay");
    app->add_option("--ping-ms", o.ping_ms, "round trip, split evenly between directions");
    app->add_option("--jitter-ms", o.jitter_ms, "uniform jitter half-width");
    app->add_option("--loss", o.loss, "per-datagram loss probability");
    app->add_option("--seed", o.seed, "network seed");
    app->add_option("--server-delay-ms", o.server_delay_ms, "server render time");
    app->add_option("--frame-time-ms", o.frame_time_ms, "client frame time");
    app->add_option("--frames", o.frames, "number of frames");
    app->add_option("-o,--output", o.output, "output directory");
    app->add_option("--metrics", o.metrics, "compute per-frame metrics (true/false)");
    app->add_option("--on-missing", o.on_missing, "empty_bitmap or all_visible");
    app->add_option("--write-frames", o.write_frames, "write frame images (true/false)");
    app->add_option("--frame-format", o.frame_format, "png or ppm");
    app->add_option("--history-capacity", o.history_capacity, "pose history size");
    app->add_option("--inverse-square", o.inverse_square, "inverse-square light falloff (true/false)");
    app->add_option("--max-lights", o.max_lights, "reject scenes with more lights");
    app->add_option("--reassembly-timeout-ms", o.reassembly_timeout_ms, "partial frame lifetime");
    app->add_option("--host", o.host, "server address");
    app->add_option("--port", o.port, "server UDP port");
}

dhr::ExperimentConfig build_config(const Overrides& o, dhr::RunMode mode)
{
    dhr::ExperimentConfig c = o.config.empty() ? dhr::ExperimentConfig{} : dhr::load_config(o.config);
    c.mode = mode;
    if (o.scene) c.scene = *o.scene;
    if (o.lights) c.lights = *o.lights;
    if (o.trajectory) c.trajectory = *o.trajectory;
    if (o.display) std::tie(c.display_width, c.display_height) = dhr::parse_size(*o.display);
    if (o.guard) std::tie(c.guard_x, c.guard_y) = dhr::parse_size(*o.guard);
    if (o.x_max) c.x_max = *o.x_max;
    if (o.ping_ms) c.delay_up_ms = c.delay_down_ms = *o.ping_ms / 2.0;
    if (o.delay_up_ms) c.delay_up_ms = *o.delay_up_ms;
    if (o.delay_down_ms) c.delay_down_ms = *o.delay_down_ms;
    if (o.jitter_ms) c.jitter_ms = *o.jitter_ms;
    if (o.loss) c.loss = *o.loss;
    if (o.seed) c.seed = *o.seed;
    if (o.server_delay_ms) c.server_delay_ms = *o.server_delay_ms;
    if (o.frame_time_ms) c.frame_time_ms = *o.frame_time_ms;
    if (o.frames) c.frames = *o.frames;
    if (o.output) c.output = *o.output;
    if (o.metrics) c.metrics = *o.metrics;
    if (o.on_missing) c.on_missing = dhr::parse_missing_policy(*o.on_missing);
    if (o.write_frames) c.write_frames = *o.write_frames;
    if (o.frame_format) c.frame_format = *o.frame_format;
    if (o.history_capacity) c.history_capacity = *o.history_capacity;
    if (o.inverse_square) c.inverse_square = *o.inverse_square;
    if (o.max_lights) c.max_lights = *o.max_lights;
    if (o.reassembly_timeout_ms) c.reassembly_timeout_ms = *o.reassembly_timeout_ms;
    if (o.host) c.host = *o.host;
    if (o.port) c.port = *o.port;
    c.validate();
    return c;
}

void summarize(const dhr::RunResult& result)
{
    std::size_t counted = 0;
    double err = 0.0, psnr = 0.0;
    for (const auto& row : result.logs) {
        if (row.m < 0 || std::isnan(row.bitwise_error_mean)) continue;
        ++counted;
        err += row.bitwise_error_mean;
        psnr += row.psnr_db;
    }
    spdlog::info("{} frames displayed", result.logs.size());
    if (counted) spdlog::info("mean bitwise error {:.4g}, mean PSNR {:.4g} dB", err / counted, psnr / counted);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Distributed hybrid rendering: visibility server, predicting client and experiment harness"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

    Overrides o;
    auto* reference = app.add_subcommand("reference", "zero-latency ground-truth render");
    auto* inproc = app.add_subcommand("inproc", "lockstep simulation of client, network and server");
    auto* client = app.add_subcommand("client", "real UDP client with wall-clock pacing");
    auto* server = app.add_subcommand("server", "real UDP visibility server (Ctrl-C to stop)");
    auto* sweep = app.add_subcommand("sweep", "inproc runs over a grid, aggregated to aggregate.csv");
    for (auto* sub : {reference, inproc, client, server, sweep}) add_overrides(sub, o);
    std::string axis;
    std::vector<std::string> values;
    sweep->add_option("--axis", axis, "x_max, guard or ping")->required();
    sweep->add_option("--values", values, "grid points, e.g. 0,2,4 or 0,16x9,32x18")->required()->delimiter(',');

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::from_str(log_level));
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    try {
        if (reference->parsed() || inproc->parsed()) {
            const auto config = build_config(o, reference->parsed() ? dhr::RunMode::reference : dhr::RunMode::inproc);
            summarize(dhr::execute(config));
        } else if (client->parsed()) {
            const auto config = build_config(o, dhr::RunMode::client);
            const dhr::Assets assets = dhr::load_assets(config);
            dhr::OutputWriter writer(config);
            const auto result =
                dhr::run_client(config, assets, g_stop, {[&](const dhr::DisplayedFrame& f) { writer.write_frame(f); }, {}});
            writer.finish(result);
            summarize(result);
        } else if (server->parsed()) {
            const auto config = build_config(o, dhr::RunMode::server);
            const dhr::Assets assets = dhr::load_assets(config);
            const auto stats = dhr::run_server(config, assets, g_stop);
            spdlog::info("server: {} updates, {} chunks, {} bytes", stats.updates_received, stats.chunks_sent,
                         stats.bytes_sent);
        } else if (sweep->parsed()) {
            const auto config = build_config(o, dhr::RunMode::inproc);
            const auto points = dhr::run_sweep(config, dhr::parse_sweep_axis(axis), values);
            std::fputs(dhr::sweep_csv(dhr::parse_sweep_axis(axis), points).c_str(), stdout);
        }
    } catch (const dhr::Error& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("unexpected failure: {}", e.what());
        return 2;
    }
    return 0;
}
