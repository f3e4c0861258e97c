#pragma once

#include <cstdint>
#include <optional>

#include "dhr/math.hpp"
#include "dhr/scene.hpp"

namespace dhr {

using FrameIndex = std::int64_t;

struct CameraPose {
    Vec3 position;
    Vec3 target;
    Vec3 up{0.0, 1.0, 0.0};
    FrameIndex frame_index = 0;

    friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

/// Round every component to the nearest f32 so the pose survives the camera-update packet unchanged.
CameraPose quantize_pose(const CameraPose& pose);

/// Display geometry plus the guard band the server adds around it. The band is split as evenly as
/// possible: floor(guard_x / 2) columns on the left, the rest on the right; likewise top and bottom.
struct Intrinsics {
    double vertical_fov = 1.0471975511965976; ///< radians, for the display region
    double near_plane = 0.05;
    double far_plane = 1000.0;
    int display_width = 320;
    int display_height = 180;
    int guard_x = 16;
    int guard_y = 9;

    int buffer_width(bool enlarged) const { return display_width + (enlarged ? guard_x : 0); }
    int buffer_height(bool enlarged) const { return display_height + (enlarged ? guard_y : 0); }
    int guard_left() const { return guard_x / 2; }
    int guard_top() const { return guard_y / 2; }

    /// Throws ConfigError when any invariant fails.
    void validate() const;
};

Intrinsics make_intrinsics(const Lens& lens, int display_width, int display_height, int guard_x, int guard_y);

struct CameraBasis {
    Vec3 forward, right, up;
};

/// Right-handed look-at frame; throws MathError if up is parallel to the view direction.
CameraBasis camera_basis(const CameraPose& pose);

/// World to clip transform. y is up in clip space; pixel rows grow downward.
struct ViewProjection {
    Mat4 matrix;
    friend bool operator==(const ViewProjection&, const ViewProjection&) = default;
};

/// With `enlarged`, the image plane grows by guard_x columns and guard_y rows at unchanged pixel pitch, so
/// the display region keeps exactly the same pixels. An odd guard total gives a slightly off-centre frustum.
ViewProjection view_projection(const CameraPose& pose, const Intrinsics& intr, bool enlarged);

struct PixelProjection {
    double x, y;  ///< continuous pixel coordinates; pixel (i, j) covers [i, i+1) x [j, j+1)
    double depth; ///< NDC z
};

std::optional<PixelProjection> project_to_pixel(const ViewProjection& vp, const Vec3& world, int buffer_width,
                                                 int buffer_height);

struct Ray {
    Vec3 origin;
    Vec3 direction;
};

/// Ray through continuous image coordinates (pixel_x, pixel_y). Pass i + 0.5 for the centre of pixel i.
Ray primary_ray(const CameraPose& pose, const Intrinsics& intr, double pixel_x, double pixel_y, bool enlarged);

} // namespace dhr
