#pragma once

#include <filesystem>
#include <vector>

#include "dhr/camera.hpp"

namespace dhr {

struct Keyframe {
    FrameIndex frame = 0;
    Vec3 position;
    Vec3 target;
    Vec3 up{0.0, 1.0, 0.0};
};

/// Camera path with linear interpolation between keyframes.
class Trajectory {
public:
    /// Throws ConfigError on empty input, non-increasing frames or an up vector parallel to the view.
    explicit Trajectory(std::vector<Keyframe> keyframes);

    std::span<const Keyframe> keyframes() const { return keyframes_; }
    FrameIndex first_frame() const { return keyframes_.front().frame; }
    FrameIndex last_frame() const { return keyframes_.back().frame; }

private:
    std::vector<Keyframe> keyframes_;
};

/// JSON: {"keyframes": [{"frame": 0, "position": [..], "target": [..], "up": [..]}, ...]}
Trajectory load_trajectory(const std::filesystem::path& path);

/// Pose at `frame`: linear in position and target, up re-orthonormalised against the view direction,
/// clamped to the last keyframe. Throws RangeError before the first keyframe.
CameraPose sample_trajectory(const Trajectory& trajectory, FrameIndex frame);

} // namespace dhr
