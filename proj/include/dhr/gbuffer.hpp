#pragma once

#include <cstdint>
#include <vector>

#include "dhr/camera.hpp"
#include "dhr/scene.hpp"

namespace dhr {

/// Nearest-surface data per display pixel. Geometric fields of pixels with valid == 0 are unspecified.
struct GBuffer {
    int width = 0;
    int height = 0;
    std::vector<Vec3> world_position;
    std::vector<Vec3> normal;
    std::vector<Rgb> albedo;
    std::vector<std::uint8_t> valid;
    FrameIndex frame_index = 0;
    CameraPose pose;

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x); }
};

/// Casts one primary ray per display pixel centre; the pose's frame index tags the result.
GBuffer render_gbuffer(const Scene& scene, const CameraPose& pose, const Intrinsics& intr);

} // namespace dhr
