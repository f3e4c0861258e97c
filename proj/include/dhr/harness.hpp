#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dhr/camera.hpp"
#include "dhr/codec.hpp"
#include "dhr/gbuffer.hpp"
#include "dhr/image.hpp"
#include "dhr/metrics.hpp"
#include "dhr/predictor.hpp"
#include "dhr/scene.hpp"
#include "dhr/server.hpp"
#include "dhr/shading.hpp"
#include "dhr/trajectory.hpp"
#include "dhr/transport.hpp"

namespace dhr {

enum class RunMode { reference, inproc, client, server };

/// Everything a run needs. Paths are resolved against the config file's directory when loaded from disk.
struct ExperimentConfig {
    RunMode mode = RunMode::inproc;
    std::filesystem::path scene;      ///< OBJ mesh
    std::filesystem::path lights;     ///< JSON lights, materials and lens
    std::filesystem::path trajectory; ///< JSON keyframes
    int display_width = 320;
    int display_height = 180;
    int guard_x = 16;
    int guard_y = 9;
    int x_max = 0;
    double delay_up_ms = 0.0;
    double delay_down_ms = 0.0;
    double jitter_ms = 0.0;
    double loss = 0.0;
    std::uint64_t seed = 1; ///< uplink seed; the downlink uses seed + 1
    double server_delay_ms = 0.0;
    double frame_time_ms = 11.1;
    int frames = 240;
    std::filesystem::path output; ///< empty: nothing is written
    bool metrics = true;
    MissingPolicy on_missing = MissingPolicy::empty_bitmap;
    bool write_frames = true;
    std::string frame_format = "png"; ///< png or ppm
    int history_capacity = 256;
    bool inverse_square = false;
    int max_lights = static_cast<int>(kDefaultMaxLights);
    double reassembly_timeout_ms = 250.0;
    std::string host = "127.0.0.1";
    int port = 47000;

    /// Throws ConfigError naming the first offending field.
    void validate() const;
};

std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& text);
std::string to_string(MissingPolicy policy);
MissingPolicy parse_missing_policy(const std::string& text);

/// Unknown keys are rejected so that typos do not silently fall back to defaults.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Parses "WxH" (e.g. "16x9").
std::pair<int, int> parse_size(const std::string& text);

struct Assets {
    Scene scene;
    Trajectory trajectory;
    Intrinsics intrinsics;
};

Assets load_assets(const ExperimentConfig& config);

/// Pose shown at client frame n, quantised exactly as the camera-update packet will carry it.
CameraPose client_pose(const Trajectory& trajectory, FrameIndex n);

/// What the client put on screen for one tick.
struct DisplayedFrame {
    FrameLog log; ///< metric fields are left NaN; the harness fills them
    GBuffer gbuffer;
    Prediction prediction;
    Image8 image;
};

/// Client side of the pipeline. One instance per run; not thread-safe.
class ClientPipeline {
public:
    ClientPipeline(const Assets& assets, const ExperimentConfig& config);

    /// Records the pose for frame n and returns the encoded camera update to send.
    std::vector<std::uint8_t> begin_frame(FrameIndex n, std::int64_t now_us);

    /// Feeds received datagrams through reassembly and keeps the newest usable bitmap.
    void receive(std::span<const Datagram> datagrams, std::int64_t now_us);

    /// Chooses r, renders the G-Buffer at pose r, reprojects the held bitmap and shades. Never blocks.
    DisplayedFrame display(FrameIndex n);

    std::optional<FrameIndex> newest_bitmap_frame() const;
    std::uint64_t decode_errors() const { return decode_errors_; }
    std::uint64_t protocol_errors() const { return protocol_errors_; }

private:
    const Assets& assets_;
    ExperimentConfig config_;
    PoseHistory history_;
    Reassembler reassembler_;
    std::map<FrameIndex, std::int64_t> send_times_;
    std::optional<VisibilityBitmap> bitmap_;
    double bitmap_response_ms_ = -1.0;
    double bitmap_ratio_ = 0.0;
    std::uint64_t bytes_this_tick_ = 0;
    std::uint64_t decode_errors_ = 0;
    std::uint64_t protocol_errors_ = 0;
    FrameIndex current_frame_ = -1;
};

/// Fills the metric fields of `frame.log` against the zero-latency oracle at frame r.
class FrameEvaluator {
public:
    explicit FrameEvaluator(const Assets& assets, const ShadingOptions& shading);
    void evaluate(DisplayedFrame& frame);

private:
    const Assets& assets_;
    ShadingOptions shading_;
    FrameIndex cached_r_ = -1;
    std::optional<VisibilityBitmap> cached_actual_;
    Image8 cached_reference_;
};

struct RunHooks {
    std::function<void(const DisplayedFrame&)> on_frame;
    /// Every datagram the client receives, tagged with the tick it was polled on.
    std::function<void(FrameIndex, std::span<const Datagram>)> on_client_receive;
};

struct RunResult {
    std::vector<FrameLog> logs;
    int num_lights = 0;
    ServerStats server;
};

/// Ground truth: G-Buffer, visibility and shading all at pose n, no network, no prediction.
RunResult render_reference(const ExperimentConfig& config, const Assets& assets, const RunHooks& hooks = {});

/// Lockstep simulation of client, simulated network and server on a shared virtual clock.
RunResult run_inproc(const ExperimentConfig& config, const Assets& assets, const RunHooks& hooks = {});

/// Real UDP endpoints on wall-clock pacing. The server runs until `stop` is set.
RunResult run_client(const ExperimentConfig& config, const Assets& assets, const std::atomic<bool>& stop,
                     const RunHooks& hooks = {});
ServerStats run_server(const ExperimentConfig& config, const Assets& assets, const std::atomic<bool>& stop);

/// Writes the config snapshot on construction, frames as they arrive and the CSV at the end.
class OutputWriter {
public:
    OutputWriter(const ExperimentConfig& config);
    void write_frame(const DisplayedFrame& frame);
    void finish(const RunResult& result);
    const std::filesystem::path& directory() const { return dir_; }

private:
    std::filesystem::path dir_;
    bool write_frames_;
    std::string format_;
};

/// Loads assets, runs the configured mode (reference or inproc) and writes outputs if config.output is set.
RunResult execute(const ExperimentConfig& config, const RunHooks& hooks = {});

enum class SweepAxis { x_max, guard, ping };
SweepAxis parse_sweep_axis(const std::string& text);

struct SweepPoint {
    std::string value;
    double mean_x = 0.0;
    double mean_p = 0.0;
    double mean_lag = 0.0;
    double mean_bitwise_error = 0.0;
    double mean_psnr_db = 0.0;
    double mean_ssim = 0.0;
    double mean_response_time_ms = 0.0;
    std::size_t frames_counted = 0; ///< frames with a received bitmap; warm-up frames are excluded
};

/// One inproc run per value with the base seed; writes aggregate.csv (and per-point runs) under config.output.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::string>& values);
std::string sweep_csv(SweepAxis axis, std::span<const SweepPoint> points);

} // namespace dhr
