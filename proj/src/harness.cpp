#include "dhr/harness.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "dhr/error.hpp"
#include "dhr/visibility.hpp"

namespace dhr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

std::string to_string(RunMode mode)
{
    switch (mode) {
    case RunMode::reference: return "reference";
    case RunMode::inproc: return "inproc";
    case RunMode::client: return "client";
    case RunMode::server: return "server";
    }
    return "?";
}

RunMode parse_run_mode(const std::string& text)
{
    if (text == "reference") return RunMode::reference;
    if (text == "inproc") return RunMode::inproc;
    if (text == "client") return RunMode::client;
    if (text == "server") return RunMode::server;
    throw ConfigError("unknown mode '" + text + "'");
}

std::string to_string(MissingPolicy policy)
{
    return policy == MissingPolicy::all_visible ? "all_visible" : "empty_bitmap";
}

MissingPolicy parse_missing_policy(const std::string& text)
{
    if (text == "empty_bitmap") return MissingPolicy::empty_bitmap;
    if (text == "all_visible") return MissingPolicy::all_visible;
    throw ConfigError("unknown on_missing policy '" + text + "'");
}

std::pair<int, int> parse_size(const std::string& text)
{
    const auto sep = text.find_first_of("xX");
    try {
        if (sep == std::string::npos) {
            const int v = std::stoi(text);
            if (v == 0) return {0, 0};
        } else {
            std::size_t used_w = 0, used_h = 0;
            const int w = std::stoi(text.substr(0, sep), &used_w);
            const int h = std::stoi(text.substr(sep + 1), &used_h);
            if (used_w == sep && used_h == text.size() - sep - 1) return {w, h};
        }
    } catch (const std::logic_error&) {
    }
    throw ConfigError("expected WxH, got '" + text + "'");
}

void ExperimentConfig::validate() const
{
    if (scene.empty()) throw ConfigError("scene path is required");
    if (lights.empty()) throw ConfigError("lights path is required");
    if (trajectory.empty() && mode != RunMode::server) throw ConfigError("trajectory path is required");
    if (display_width <= 0 || display_height <= 0) throw ConfigError("display size must be positive");
    if (guard_x < 0 || guard_y < 0) throw ConfigError("guard band must be non-negative");
    if (x_max < 0) throw ConfigError("x_max must be non-negative");
    if (!(delay_up_ms >= 0.0) || !(delay_down_ms >= 0.0)) throw ConfigError("delays must be non-negative");
    if (!(jitter_ms >= 0.0)) throw ConfigError("jitter_ms must be non-negative");
    if (!(loss >= 0.0 && loss <= 1.0)) throw ConfigError("loss must be in [0, 1]");
    if (!(server_delay_ms >= 0.0)) throw ConfigError("server_delay_ms must be non-negative");
    if (!(frame_time_ms > 0.0)) throw ConfigError("frame_time_ms must be positive");
    if (frames < 0) throw ConfigError("frames must be non-negative");
    if (frame_format != "png" && frame_format != "ppm") throw ConfigError("frame_format must be png or ppm");
    if (history_capacity < 1) throw ConfigError("history_capacity must be at least 1");
    if (max_lights < 1) throw ConfigError("max_lights must be at least 1");
    if (!(reassembly_timeout_ms > 0.0)) throw ConfigError("reassembly_timeout_ms must be positive");
    if (port < 1 || port > 65535) throw ConfigError("port must be in [1, 65535]");
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p)
{
    const std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

std::pair<int, int> size_from_json(const nlohmann::json& v, const char* key)
{
    if (v.is_string()) return parse_size(v.get<std::string>());
    if (v.is_array() && v.size() == 2) return {v[0].get<int>(), v[1].get<int>()};
    throw ConfigError(std::string(key) + ": expected [w, h] or \"WxH\"");
}

} // namespace

ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir)
{
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "mode") c.mode = parse_run_mode(v.get<std::string>());
            else if (key == "scene") c.scene = resolve(base_dir, v.get<std::string>());
            else if (key == "lights") c.lights = resolve(base_dir, v.get<std::string>());
            else if (key == "trajectory") c.trajectory = resolve(base_dir, v.get<std::string>());
            else if (key == "display") std::tie(c.display_width, c.display_height) = size_from_json(v, "display");
            else if (key == "guard") std::tie(c.guard_x, c.guard_y) = size_from_json(v, "guard");
            else if (key == "x_max") c.x_max = v.get<int>();
            else if (key == "delay_up_ms") c.delay_up_ms = v.get<double>();
            else if (key == "delay_down_ms") c.delay_down_ms = v.get<double>();
            else if (key == "ping_ms") c.delay_up_ms = c.delay_down_ms = v.get<double>() / 2.0;
            else if (key == "jitter_ms") c.jitter_ms = v.get<double>();
            else if (key == "loss") c.loss = v.get<double>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "server_delay_ms") c.server_delay_ms = v.get<double>();
            else if (key == "frame_time_ms") c.frame_time_ms = v.get<double>();
            else if (key == "frames") c.frames = v.get<int>();
            else if (key == "output") c.output = resolve(base_dir, v.get<std::string>());
            else if (key == "metrics") c.metrics = v.get<bool>();
            else if (key == "on_missing") c.on_missing = parse_missing_policy(v.get<std::string>());
            else if (key == "write_frames") c.write_frames = v.get<bool>();
            else if (key == "frame_format") c.frame_format = v.get<std::string>();
            else if (key == "history_capacity") c.history_capacity = v.get<int>();
            else if (key == "inverse_square") c.inverse_square = v.get<bool>();
            else if (key == "max_lights") c.max_lights = v.get<int>();
            else if (key == "reassembly_timeout_ms") c.reassembly_timeout_ms = v.get<double>();
            else if (key == "host") c.host = v.get<std::string>();
            else if (key == "port") c.port = v.get<int>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw LoadError(path.string() + ": cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

nlohmann::json config_to_json(const ExperimentConfig& c)
{
    return {
        {"mode", to_string(c.mode)},
        {"scene", c.scene.string()},
        {"lights", c.lights.string()},
        {"trajectory", c.trajectory.string()},
        {"display", {c.display_width, c.display_height}},
        {"guard", {c.guard_x, c.guard_y}},
        {"x_max", c.x_max},
        {"delay_up_ms", c.delay_up_ms},
        {"delay_down_ms", c.delay_down_ms},
        {"jitter_ms", c.jitter_ms},
        {"loss", c.loss},
        {"seed", c.seed},
        {"server_delay_ms", c.server_delay_ms},
        {"frame_time_ms", c.frame_time_ms},
        {"frames", c.frames},
        {"output", c.output.string()},
        {"metrics", c.metrics},
        {"on_missing", to_string(c.on_missing)},
        {"write_frames", c.write_frames},
        {"frame_format", c.frame_format},
        {"history_capacity", c.history_capacity},
        {"inverse_square", c.inverse_square},
        {"max_lights", c.max_lights},
        {"reassembly_timeout_ms", c.reassembly_timeout_ms},
        {"host", c.host},
        {"port", c.port},
    };
}

Assets load_assets(const ExperimentConfig& config)
{
    Scene scene = load_scene(config.scene, config.lights, {static_cast<std::size_t>(config.max_lights)});
    Trajectory trajectory = config.trajectory.empty()
                                ? Trajectory({Keyframe{0, {0.0, 0.0, 0.0}, {0.0, 0.0, -1.0}, {0.0, 1.0, 0.0}}})
                                : load_trajectory(config.trajectory);
    const Intrinsics intr =
        make_intrinsics(scene.lens(), config.display_width, config.display_height, config.guard_x, config.guard_y);
    return {std::move(scene), std::move(trajectory), intr};
}

CameraPose client_pose(const Trajectory& trajectory, FrameIndex n)
{
    CameraPose pose = sample_trajectory(trajectory, trajectory.first_frame() + n);
    pose.frame_index = n;
    return quantize_pose(pose);
}

// ---------------------------------------------------------------------------------------------
// Client

ClientPipeline::ClientPipeline(const Assets& assets, const ExperimentConfig& config)
    : assets_(assets),
      config_(config),
      history_(assets.intrinsics, static_cast<std::size_t>(config.history_capacity)),
      reassembler_(ms_to_us(config.reassembly_timeout_ms))
{
}

std::vector<std::uint8_t> ClientPipeline::begin_frame(FrameIndex n, std::int64_t now_us)
{
    const CameraPose pose = client_pose(assets_.trajectory, n);
    history_.record(n, pose);
    current_frame_ = n;
    send_times_[n] = now_us;
    bytes_this_tick_ = 0;
    return encode_packet(CameraUpdatePacket::from_pose(pose));
}

void ClientPipeline::receive(std::span<const Datagram> datagrams, std::int64_t now_us)
{
    const Intrinsics& intr = assets_.intrinsics;
    const int lights = static_cast<int>(assets_.scene.lights().size());
    for (const Datagram& d : datagrams) {
        bytes_this_tick_ += d.bytes.size();
        try {
            const Packet packet = decode_packet(d.bytes);
            const auto* chunk = std::get_if<VisibilityChunkPacket>(&packet);
            if (!chunk) continue;
            auto done = reassembler_.accept(*chunk, now_us);
            if (!done) continue;
            if (done->frame > current_frame_) {
                throw ProtocolError("bitmap for frame " + std::to_string(done->frame) + " arrived at frame " +
                                    std::to_string(current_frame_));
            }
            VisibilityBitmap bitmap = decompress_bitmap(done->compressed, intr.buffer_width(true),
                                                        intr.buffer_height(true), lights, done->frame);
            if (bitmap.byte_size() != done->uncompressed_len) throw DecodeError("uncompressed length mismatch");
            const auto sent = send_times_.find(done->frame);
            bitmap_response_ms_ = sent != send_times_.end() ? static_cast<double>(now_us - sent->second) / 1000.0 : kNaN;
            bitmap_ratio_ = done->compressed.empty()
                                ? 0.0
                                : static_cast<double>(done->uncompressed_len) / static_cast<double>(done->compressed.size());
            send_times_.erase(send_times_.begin(), send_times_.upper_bound(done->frame));
            bitmap_ = std::move(bitmap);
        } catch (const DecodeError& e) {
            ++decode_errors_;
            spdlog::warn("client: discarding datagram: {}", e.what());
        } catch (const ProtocolError& e) {
            ++protocol_errors_;
            spdlog::warn("client: {}", e.what());
        }
    }
    reassembler_.expire(now_us);
}

std::optional<FrameIndex> ClientPipeline::newest_bitmap_frame() const
{
    if (!bitmap_) return std::nullopt;
    return bitmap_->frame();
}

DisplayedFrame ClientPipeline::display(FrameIndex n)
{
    const Intrinsics& intr = assets_.intrinsics;
    const auto lights = assets_.scene.lights();
    DisplayedFrame out;
    FrameLog& log = out.log;
    log.n = n;

    if (bitmap_ && history_.contains(bitmap_->frame()) && history_.contains(n)) {
        const FrameIndex m = bitmap_->frame();
        const RenderChoice choice = choose_render_frame(n, m, config_.x_max);
        out.gbuffer = render_gbuffer(assets_.scene, history_.lookup(choice.r).pose, intr);
        out.prediction = reproject_visibility(*bitmap_, history_.lookup(m).view_projection, out.gbuffer, intr);
        log.r = choice.r;
        log.m = m;
        log.p = choice.p;
        log.x = choice.x;
        log.response_time_ms = bitmap_response_ms_;
        log.compression_ratio = bitmap_ratio_;
    } else {
        // Nothing usable yet, or the bitmap's pose has left the history: show the current pose.
        out.gbuffer = render_gbuffer(assets_.scene, history_.contains(n) ? history_.lookup(n).pose
                                                                          : client_pose(assets_.trajectory, n),
                                     intr);
        out.prediction = missing_visibility(out.gbuffer, static_cast<int>(lights.size()), config_.on_missing);
        log.r = n;
        log.m = -1;
        log.p = -1;
        log.x = 0;
        log.response_time_ms = -1.0;
        log.compression_ratio = 0.0;
    }
    const LinearImage shaded = shade_frame(out.gbuffer, out.prediction.bits, lights, assets_.scene.background(),
                                           {config_.inverse_square});
    out.image = encode_display(shaded);
    log.displayed_lag_ms = static_cast<double>(n - log.r) * config_.frame_time_ms;
    log.bytes_received = bytes_this_tick_;
    log.bitwise_error.assign(lights.size(), kNaN);
    log.bitwise_error_mean = kNaN;
    log.psnr_db = kNaN;
    log.ssim = kNaN;
    return out;
}

// ---------------------------------------------------------------------------------------------
// Evaluation

FrameEvaluator::FrameEvaluator(const Assets& assets, const ShadingOptions& shading)
    : assets_(assets), shading_(shading)
{
}

void FrameEvaluator::evaluate(DisplayedFrame& frame)
{
    // The displayed G-Buffer was rendered at pose r, so it doubles as the oracle's G-Buffer.
    if (!cached_actual_ || cached_r_ != frame.log.r) {
        cached_actual_ = trace_visibility_display(assets_.scene, frame.gbuffer.pose, assets_.intrinsics);
        cached_reference_ = encode_display(shade_frame(frame.gbuffer, *cached_actual_, assets_.scene.lights(),
                                                       assets_.scene.background(), shading_));
        cached_r_ = frame.log.r;
    }
    const BitwiseError err = bitwise_error(*cached_actual_, frame.prediction.bits, frame.gbuffer.valid);
    frame.log.bitwise_error = err.per_light;
    frame.log.bitwise_error_mean = err.mean;
    frame.log.psnr_db = psnr(cached_reference_, frame.image);
    frame.log.ssim = frame.image.width >= 11 && frame.image.height >= 11 ? ssim(cached_reference_, frame.image) : kNaN;
}

// ---------------------------------------------------------------------------------------------
// Runs

RunResult render_reference(const ExperimentConfig& config, const Assets& assets, const RunHooks& hooks)
{
    const auto lights = assets.scene.lights();
    RunResult result;
    result.num_lights = static_cast<int>(lights.size());
    for (FrameIndex n = 0; n < config.frames; ++n) {
        DisplayedFrame frame;
        const CameraPose pose = client_pose(assets.trajectory, n);
        frame.gbuffer = render_gbuffer(assets.scene, pose, assets.intrinsics);
        VisibilityBitmap vis = trace_visibility_display(assets.scene, pose, assets.intrinsics);
        frame.image = encode_display(
            shade_frame(frame.gbuffer, vis, lights, assets.scene.background(), {config.inverse_square}));
        std::vector<SampleOutcome> outcome(frame.gbuffer.valid.size(), SampleOutcome::sampled);
        for (std::size_t i = 0; i < outcome.size(); ++i) {
            if (!frame.gbuffer.valid[i]) outcome[i] = SampleOutcome::invalid;
        }
        frame.prediction = {std::move(vis), std::move(outcome)};

        FrameLog& log = frame.log;
        log.n = log.r = log.m = n;
        log.p = log.x = 0;
        log.response_time_ms = 0.0;
        log.displayed_lag_ms = 0.0;
        // The reference is its own oracle, so its metrics are exact by construction.
        log.bitwise_error.assign(lights.size(), config.metrics ? 0.0 : kNaN);
        log.bitwise_error_mean = config.metrics ? 0.0 : kNaN;
        log.psnr_db = config.metrics ? kPsnrIdentical : kNaN;
        log.ssim = config.metrics ? 1.0 : kNaN;

        result.logs.push_back(log);
        if (hooks.on_frame) hooks.on_frame(frame);
    }
    return result;
}

RunResult run_inproc(const ExperimentConfig& config, const Assets& assets, const RunHooks& hooks)
{
    SimNetwork net({config.delay_up_ms, config.jitter_ms, config.loss, config.seed},
                   {config.delay_down_ms, config.jitter_ms, config.loss, config.seed + 1});
    VisibilityServer server(assets.scene, assets.intrinsics, ms_to_us(config.server_delay_ms));
    ClientPipeline client(assets, config);
    FrameEvaluator evaluator(assets, {config.inverse_square});
    VirtualClock clock(config.frame_time_ms);

    RunResult result;
    result.num_lights = static_cast<int>(assets.scene.lights().size());
    for (FrameIndex n = 0; n < config.frames; ++n, clock.advance()) {
        const std::int64_t now = clock.now_us();
        net.client().send(client.begin_frame(n, now), now);
        server.tick(net.server(), now);
        const auto datagrams = net.client().poll(now);
        if (hooks.on_client_receive) hooks.on_client_receive(n, datagrams);
        client.receive(datagrams, now);

        DisplayedFrame frame = client.display(n);
        if (config.metrics) evaluator.evaluate(frame);
        result.logs.push_back(frame.log);
        if (hooks.on_frame) hooks.on_frame(frame);
    }
    result.server = server.stats();
    return result;
}

RunResult run_client(const ExperimentConfig& config, const Assets& assets, const std::atomic<bool>& stop,
                     const RunHooks& hooks)
{
    using Clock = std::chrono::steady_clock;
    UdpEndpoint socket = UdpEndpoint::connect(config.host, static_cast<std::uint16_t>(config.port));
    spdlog::info("client: sending to {}:{} from port {}", config.host, config.port, socket.local_port());
    ClientPipeline client(assets, config);
    FrameEvaluator evaluator(assets, {config.inverse_square});

    const auto start = Clock::now();
    const auto frame_time = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double, std::milli>(config.frame_time_ms));
    const auto now_us = [&] {
        return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
    };

    RunResult result;
    result.num_lights = static_cast<int>(assets.scene.lights().size());
    for (FrameIndex n = 0; n < config.frames && !stop.load(); ++n) {
        std::this_thread::sleep_until(start + frame_time * n);
        socket.send(client.begin_frame(n, now_us()), now_us());
        const std::int64_t now = now_us();
        const auto datagrams = socket.poll(now);
        if (hooks.on_client_receive) hooks.on_client_receive(n, datagrams);
        client.receive(datagrams, now);

        DisplayedFrame frame = client.display(n);
        if (config.metrics) evaluator.evaluate(frame);
        result.logs.push_back(frame.log);
        if (hooks.on_frame) hooks.on_frame(frame);
    }
    return result;
}

ServerStats run_server(const ExperimentConfig& config, const Assets& assets, const std::atomic<bool>& stop)
{
    using Clock = std::chrono::steady_clock;
    UdpEndpoint socket = UdpEndpoint::bind(config.host, static_cast<std::uint16_t>(config.port));
    spdlog::info("server: listening on {}:{}", config.host, socket.local_port());
    VisibilityServer server(assets.scene, assets.intrinsics, ms_to_us(config.server_delay_ms));
    const auto start = Clock::now();
    while (!stop.load()) {
        if (!socket.wait_readable(50)) continue;
        if (config.server_delay_ms > 0.0) {
            std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(config.server_delay_ms));
        }
        const auto now = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
        if (const auto served = server.tick(socket, now)) spdlog::debug("server: served frame {}", *served);
    }
    spdlog::info("server: stopping after {} frames", server.stats().frames_rendered);
    return server.stats();
}

// ---------------------------------------------------------------------------------------------
// Output

OutputWriter::OutputWriter(const ExperimentConfig& config)
    : dir_(config.output), write_frames_(config.write_frames), format_(config.frame_format)
{
    if (dir_.empty()) return;
    std::filesystem::create_directories(dir_ / "frames");
    std::ofstream out(dir_ / "config.json");
    out << config_to_json(config).dump(2) << '\n';
    if (!out) throw Error((dir_ / "config.json").string() + ": write failed");
}

void OutputWriter::write_frame(const DisplayedFrame& frame)
{
    if (dir_.empty() || !write_frames_) return;
    char name[48];
    std::snprintf(name, sizeof(name), "frame_%06lld.%s", static_cast<long long>(frame.log.n), format_.c_str());
    if (format_ == "ppm") write_ppm(dir_ / "frames" / name, frame.image);
    else write_png(dir_ / "frames" / name, frame.image);
}

void OutputWriter::finish(const RunResult& result)
{
    if (dir_.empty()) return;
    write_frame_log(dir_ / "frame_log.csv", result.logs, result.num_lights);
}

RunResult execute(const ExperimentConfig& config, const RunHooks& hooks)
{
    config.validate();
    if (config.mode != RunMode::reference && config.mode != RunMode::inproc) {
        throw ConfigError("execute() runs reference and inproc modes only");
    }
    const Assets assets = load_assets(config);
    OutputWriter writer(config);
    RunHooks wrapped = hooks;
    wrapped.on_frame = [&](const DisplayedFrame& frame) {
        writer.write_frame(frame);
        if (hooks.on_frame) hooks.on_frame(frame);
    };
    spdlog::info("{}: {} frames at {}x{} (guard {}x{}), x_max {}", to_string(config.mode), config.frames,
                 config.display_width, config.display_height, config.guard_x, config.guard_y, config.x_max);
    RunResult result = config.mode == RunMode::reference ? render_reference(config, assets, wrapped)
                                                          : run_inproc(config, assets, wrapped);
    writer.finish(result);
    return result;
}

// ---------------------------------------------------------------------------------------------
// Sweeps

SweepAxis parse_sweep_axis(const std::string& text)
{
    if (text == "x_max") return SweepAxis::x_max;
    if (text == "guard") return SweepAxis::guard;
    if (text == "ping") return SweepAxis::ping;
    throw ConfigError("unknown sweep axis '" + text + "' (expected x_max, guard or ping)");
}

namespace {

const char* axis_name(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::x_max: return "x_max";
    case SweepAxis::guard: return "guard";
    case SweepAxis::ping: return "ping_ms";
    }
    return "value";
}

ExperimentConfig apply_sweep_value(ExperimentConfig c, SweepAxis axis, const std::string& value)
{
    try {
        switch (axis) {
        case SweepAxis::x_max: c.x_max = std::stoi(value); break;
        case SweepAxis::guard: std::tie(c.guard_x, c.guard_y) = parse_size(value); break;
        case SweepAxis::ping: c.delay_up_ms = c.delay_down_ms = std::stod(value) / 2.0; break;
        }
    } catch (const std::logic_error&) {
        throw ConfigError(std::string("bad ") + axis_name(axis) + " value '" + value + "'");
    }
    return c;
}

} // namespace

std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::string>& values)
{
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if (!base.output.empty()) {
        std::filesystem::create_directories(base.output);
        std::ofstream(base.output / "config.json") << config_to_json(base).dump(2) << '\n';
    }
    std::vector<SweepPoint> points;
    for (const std::string& value : values) {
        ExperimentConfig c = apply_sweep_value(base, axis, value);
        c.mode = RunMode::inproc;
        c.metrics = true;
        if (!base.output.empty()) c.output = base.output / (std::string(axis_name(axis)) + "_" + value);
        const RunResult run = execute(c);

        SweepPoint pt;
        pt.value = value;
        for (const FrameLog& row : run.logs) {
            if (row.m < 0) continue;
            ++pt.frames_counted;
            pt.mean_x += static_cast<double>(row.x);
            pt.mean_p += static_cast<double>(row.p);
            pt.mean_lag += static_cast<double>(row.p - row.x);
            pt.mean_bitwise_error += row.bitwise_error_mean;
            pt.mean_psnr_db += row.psnr_db;
            pt.mean_ssim += row.ssim;
            pt.mean_response_time_ms += row.response_time_ms;
        }
        const double k = pt.frames_counted ? 1.0 / static_cast<double>(pt.frames_counted) : kNaN;
        for (double* f : {&pt.mean_x, &pt.mean_p, &pt.mean_lag, &pt.mean_bitwise_error, &pt.mean_psnr_db,
                          &pt.mean_ssim, &pt.mean_response_time_ms}) {
            *f *= k;
        }
        spdlog::info("sweep {}={}: mean x {:.3g}, error {:.4g}, PSNR {:.4g}, SSIM {:.4g}", axis_name(axis), value,
                     pt.mean_x, pt.mean_bitwise_error, pt.mean_psnr_db, pt.mean_ssim);
        points.push_back(pt);
    }
    if (!base.output.empty()) {
        std::ofstream out(base.output / "aggregate.csv", std::ios::binary);
        out << sweep_csv(axis, points);
        if (!out) throw Error((base.output / "aggregate.csv").string() + ": write failed");
    }
    return points;
}

std::string sweep_csv(SweepAxis axis, std::span<const SweepPoint> points)
{
    const auto g = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };
    std::string out = std::string(axis_name(axis)) +
                      ",mean_x,mean_p,mean_lag,mean_bitwise_error,mean_psnr_db,mean_ssim,mean_response_time_ms,"
                      "frames_counted\n";
    for (const SweepPoint& p : points) {
        out += p.value + ',' + g(p.mean_x) + ',' + g(p.mean_p) + ',' + g(p.mean_lag) + ',' + g(p.mean_bitwise_error) +
               ',' + g(p.mean_psnr_db) + ',' + g(p.mean_ssim) + ',' + g(p.mean_response_time_ms) + ',' +
               std::to_string(p.frames_counted) + '\n';
    }
    return out;
}

} // namespace dhr
