#include "dhr/camera.hpp"

#include <cmath>
#include <numbers>

#include "dhr/error.hpp"

namespace dhr {

namespace {

Vec3 to_f32(const Vec3& v)
{
    return {static_cast<double>(static_cast<float>(v.x)), static_cast<double>(static_cast<float>(v.y)),
            static_cast<double>(static_cast<float>(v.z))};
}

} // namespace

CameraPose quantize_pose(const CameraPose& pose)
{
    return {to_f32(pose.position), to_f32(pose.target), to_f32(pose.up), pose.frame_index};
}

void Intrinsics::validate() const
{
    if (!(vertical_fov > 0.0 && vertical_fov < std::numbers::pi)) throw ConfigError("vertical_fov must be in (0, pi)");
    if (!(near_plane > 0.0 && near_plane < far_plane)) throw ConfigError("need 0 < near < far");
    if (display_width <= 0 || display_height <= 0) throw ConfigError("display size must be positive");
    if (guard_x < 0 || guard_y < 0) throw ConfigError("guard band sizes must be non-negative");
}

Intrinsics make_intrinsics(const Lens& lens, int display_width, int display_height, int guard_x, int guard_y)
{
    Intrinsics intr{lens.vertical_fov, lens.near_plane, lens.far_plane, display_width, display_height, guard_x,
                    guard_y};
    intr.validate();
    return intr;
}

CameraBasis camera_basis(const CameraPose& pose)
{
    const Vec3 view = pose.target - pose.position;
    const double view_len = length(view);
    const double up_len = length(pose.up);
    if (!(view_len > 0.0) || !(up_len > 0.0)) throw MathError("camera has zero-length view or up vector");
    const Vec3 forward = view / view_len;
    const Vec3 side = cross(forward, pose.up / up_len);
    if (!(length(side) > 1e-6)) throw MathError("camera up vector is parallel to the view direction");
    const Vec3 right = normalize(side);
    return {forward, right, cross(right, forward)};
}

ViewProjection view_projection(const CameraPose& pose, const Intrinsics& intr, bool enlarged)
{
    const CameraBasis b = camera_basis(pose);
    Mat4 view = Mat4::identity();
    const Vec3 rows[3] = {b.right, b.up, -b.forward};
    for (int i = 0; i < 3; ++i) {
        view(i, 0) = rows[i].x;
        view(i, 1) = rows[i].y;
        view(i, 2) = rows[i].z;
        view(i, 3) = -dot(rows[i], pose.position);
    }

    const double pitch = 2.0 * std::tan(intr.vertical_fov / 2.0) / intr.display_height;
    const double bw = intr.buffer_width(enlarged);
    const double bh = intr.buffer_height(enlarged);
    const int left = enlarged ? intr.guard_left() : 0;
    const int top = enlarged ? intr.guard_top() : 0;
    const int right = enlarged ? intr.guard_x - left : 0;
    const int bottom = enlarged ? intr.guard_y - top : 0;
    const double n = intr.near_plane;
    const double f = intr.far_plane;

    Mat4 proj;
    proj(0, 0) = 2.0 / (bw * pitch);
    proj(0, 2) = -(left - right) / bw;
    proj(1, 1) = 2.0 / (bh * pitch);
    proj(1, 2) = -(bottom - top) / bh;
    proj(2, 2) = (f + n) / (n - f);
    proj(2, 3) = 2.0 * f * n / (n - f);
    proj(3, 2) = -1.0;
    return {proj * view};
}

std::optional<PixelProjection> project_to_pixel(const ViewProjection& vp, const Vec3& world, int buffer_width,
                                                 int buffer_height)
{
    const Vec4 clip = vp.matrix * Vec4{world.x, world.y, world.z, 1.0};
    if (!(clip.w > 0.0)) return std::nullopt;
    const double nx = clip.x / clip.w;
    const double ny = clip.y / clip.w;
    return PixelProjection{(nx + 1.0) * 0.5 * buffer_width, (1.0 - ny) * 0.5 * buffer_height, clip.z / clip.w};
}

Ray primary_ray(const CameraPose& pose, const Intrinsics& intr, double pixel_x, double pixel_y, bool enlarged)
{
    const CameraBasis b = camera_basis(pose);
    const double pitch = 2.0 * std::tan(intr.vertical_fov / 2.0) / intr.display_height;
    // Offsets from the display centre are exact for integer and half-integer inputs, which keeps the
    // display and enlarged rays bit-identical for matching pixels.
    const double cx = (enlarged ? intr.guard_left() : 0) + intr.display_width / 2.0;
    const double cy = (enlarged ? intr.guard_top() : 0) + intr.display_height / 2.0;
    const double dx = pixel_x - cx;
    const double dy = cy - pixel_y;
    return {pose.position, normalize(b.forward + b.right * (dx * pitch) + b.up * (dy * pitch))};
}

} // namespace dhr
