#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dhr/camera.hpp"
#include "dhr/error.hpp"
#include "test_support.hpp"

using namespace dhr;
using namespace dhr::test;

namespace {

Intrinsics small(int gx, int gy)
{
    Intrinsics intr;
    intr.display_width = 48;
    intr.display_height = 27;
    intr.guard_x = gx;
    intr.guard_y = gy;
    return intr;
}

CameraPose random_pose(std::mt19937_64& rng)
{
    CameraPose p;
    p.position = random_point(rng, -5, 5);
    p.target = p.position + random_direction(rng) * 3.0;
    p.up = {0, 1, 0};
    if (length(cross(normalize(p.target - p.position), p.up)) < 0.1) p.up = {1, 0, 0};
    return p;
}

} // namespace

TEST(Camera, OpticalAxisProjectsToBufferCentre)
{
    const CameraPose pose{{1, 2, 3}, {1, 2, -7}, {0, 1, 0}, 0};
    const Intrinsics intr = small(16, 8);
    for (bool enlarged : {false, true}) {
        const ViewProjection vp = view_projection(pose, intr, enlarged);
        const int w = intr.buffer_width(enlarged), h = intr.buffer_height(enlarged);
        const auto p = project_to_pixel(vp, {1, 2, -2}, w, h);
        ASSERT_TRUE(p);
        EXPECT_NEAR(p->x, w / 2.0, 1e-9);
        EXPECT_NEAR(p->y, h / 2.0, 1e-9);
        const Vec4 clip = vp.matrix * Vec4{1, 2, -2, 1};
        EXPECT_NEAR(clip.x / clip.w, 0.0, 1e-12);
        EXPECT_NEAR(clip.y / clip.w, 0.0, 1e-12);
    }
}

TEST(Camera, EnlargedBufferDimensions)
{
    Intrinsics intr;
    intr.display_width = 1920;
    intr.display_height = 1080;
    intr.guard_x = 64;
    intr.guard_y = 36;
    EXPECT_EQ(intr.buffer_width(true), 1984);
    EXPECT_EQ(intr.buffer_height(true), 1116);
    EXPECT_EQ(intr.buffer_width(false), 1920);
}

TEST(Camera, DisplayOriginMapsToHalfGuardOffset)
{
    Intrinsics intr;
    intr.display_width = 1920;
    intr.display_height = 1080;
    intr.guard_x = 64;
    intr.guard_y = 36;
    const CameraPose pose{{0, 1, 5}, {0.3, 0.8, 0}, {0, 1, 0}, 0};
    const Ray ray = primary_ray(pose, intr, 0.5, 0.5, false);
    const Vec3 world = ray.origin + ray.direction * 5.0;
    const auto e = project_to_pixel(view_projection(pose, intr, true), world, 1984, 1116);
    ASSERT_TRUE(e);
    EXPECT_EQ(static_cast<int>(std::floor(e->x)), 32);
    EXPECT_EQ(static_cast<int>(std::floor(e->y)), 18);
    EXPECT_NEAR(e->x, 32.5, 1e-6);
    EXPECT_NEAR(e->y, 18.5, 1e-6);
}

TEST(Camera, PointBehindCameraHasNoProjection)
{
    const CameraPose pose{{0, 0, 0}, {0, 0, -1}, {0, 1, 0}, 0};
    const Intrinsics intr = small(0, 0);
    EXPECT_FALSE(project_to_pixel(view_projection(pose, intr, false), {0, 0, 4}, 48, 27));
    EXPECT_FALSE(project_to_pixel(view_projection(pose, intr, false), {0.2, 0.1, 0}, 48, 27));
}

TEST(Camera, RayProjectionRoundTripWithinMillipixel)
{
    std::mt19937_64 rng(17);
    for (int k = 0; k < 8; ++k) {
        const CameraPose pose = random_pose(rng);
        for (const auto& intr : {small(0, 0), small(16, 9), small(8, 4)}) {
            for (bool enlarged : {false, true}) {
                const ViewProjection vp = view_projection(pose, intr, enlarged);
                const int w = intr.buffer_width(enlarged), h = intr.buffer_height(enlarged);
                for (int y = 0; y < h; ++y) {
                    for (int x = 0; x < w; ++x) {
                        const Ray r = primary_ray(pose, intr, x + 0.5, y + 0.5, enlarged);
                        const auto p = project_to_pixel(vp, r.origin + r.direction * 5.0, w, h);
                        ASSERT_TRUE(p);
                        EXPECT_NEAR(p->x, x + 0.5, 1e-3);
                        EXPECT_NEAR(p->y, y + 0.5, 1e-3);
                    }
                }
            }
        }
    }
}

TEST(Camera, CentreRayLooksAtTarget)
{
    std::mt19937_64 rng(4);
    for (int k = 0; k < 20; ++k) {
        const CameraPose pose = random_pose(rng);
        const Intrinsics intr = small(16, 8);
        const Ray r = primary_ray(pose, intr, intr.display_width / 2.0, intr.display_height / 2.0, false);
        const Vec3 expect = normalize(pose.target - pose.position);
        EXPECT_NEAR(length(r.direction - expect), 0.0, 1e-12);
        EXPECT_EQ(r.origin, pose.position);
    }
}

TEST(Camera, GuardBandRaysAreBitIdenticalToDisplayRays)
{
    std::mt19937_64 rng(23);
    for (int k = 0; k < 4; ++k) {
        const CameraPose pose = random_pose(rng);
        for (const auto& intr : {small(16, 9), small(32, 18), small(7, 3)}) {
            for (int y = 0; y < intr.display_height; ++y) {
                for (int x = 0; x < intr.display_width; ++x) {
                    const Ray a = primary_ray(pose, intr, x + 0.5, y + 0.5, false);
                    const Ray b = primary_ray(pose, intr, intr.guard_left() + x + 0.5, intr.guard_top() + y + 0.5, true);
                    ASSERT_EQ(a.direction, b.direction) << x << "," << y;
                    ASSERT_EQ(a.origin, b.origin);
                }
            }
        }
    }
}

TEST(Camera, ImageEdgeSitsAtHalfTheVerticalFieldOfView)
{
    const CameraPose pose{{0, 0, 0}, {0, 0, -1}, {0, 1, 0}, 0};
    const Intrinsics intr = small(0, 0);
    const CameraBasis b = camera_basis(pose);
    for (double px : {0.0, intr.display_width / 2.0, static_cast<double>(intr.display_width)}) {
        const Ray r = primary_ray(pose, intr, px, 0.0, false);
        const double vertical = std::atan2(dot(r.direction, b.up), dot(r.direction, b.forward));
        EXPECT_NEAR(vertical, intr.vertical_fov / 2.0, 1e-6);
    }
    // The last row points down by the same angle.
    const Ray bottom = primary_ray(pose, intr, intr.display_width / 2.0, intr.display_height, false);
    EXPECT_NEAR(std::atan2(dot(bottom.direction, b.up), dot(bottom.direction, b.forward)), -intr.vertical_fov / 2.0, 1e-6);
}

TEST(Camera, OddGuardPutsTheExtraPixelRightAndBottom)
{
    const Intrinsics intr = small(16, 9);
    EXPECT_EQ(intr.guard_left(), 8);
    EXPECT_EQ(intr.guard_top(), 4);
    EXPECT_EQ(intr.buffer_height(true), 27 + 9);
}

TEST(Camera, DegeneratePoseIsAMathError)
{
    const Intrinsics intr = small(0, 0);
    EXPECT_THROW(view_projection({{0, 0, 0}, {0, 5, 0}, {0, 1, 0}, 0}, intr, false), MathError);
    EXPECT_THROW(view_projection({{1, 1, 1}, {1, 1, 1}, {0, 1, 0}, 0}, intr, false), MathError);
}

TEST(Camera, ViewProjectionIsDeterministicAndInvertible)
{
    std::mt19937_64 rng(31);
    for (int k = 0; k < 50; ++k) {
        const CameraPose pose = random_pose(rng);
        const Intrinsics intr = small(16, 9);
        const ViewProjection a = view_projection(pose, intr, true);
        EXPECT_EQ(a, view_projection(pose, intr, true));
        EXPECT_TRUE(inverse(a.matrix, 1e-12));
    }
}

TEST(Camera, IntrinsicsValidation)
{
    Intrinsics intr;
    EXPECT_NO_THROW(intr.validate());
    intr.guard_x = -2;
    EXPECT_THROW(intr.validate(), ConfigError);
    intr = {};
    intr.vertical_fov = std::numbers::pi;
    EXPECT_THROW(intr.validate(), ConfigError);
    intr = {};
    intr.near_plane = 10;
    intr.far_plane = 1;
    EXPECT_THROW(intr.validate(), ConfigError);
}

TEST(Camera, QuantizedPoseIsStable)
{
    const CameraPose p{{0.1, 0.2, 0.3}, {1.0 / 3.0, 2, 3}, {0, 1, 0}, 12};
    const CameraPose q = quantize_pose(p);
    EXPECT_EQ(q, quantize_pose(q));
    EXPECT_EQ(q.position.x, static_cast<double>(0.1f));
    EXPECT_EQ(q.frame_index, 12);
}
