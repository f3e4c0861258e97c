#include <gtest/gtest.h>

#include <fstream>

#include "dhr/error.hpp"
#include "dhr/trajectory.hpp"
#include "test_support.hpp"

using namespace dhr;

namespace {

Trajectory two_keys()
{
    return Trajectory({{10, {0, 0, 0}, {0, 0, -1}, {0, 1, 0}}, {20, {2, 0, 0}, {2, 0, -1}, {0, 1, 0}}});
}

} // namespace

TEST(Trajectory, KeyframeIndexReturnsThatKeyframe)
{
    const CameraPose p = sample_trajectory(two_keys(), 20);
    EXPECT_EQ(p.position, (Vec3{2, 0, 0}));
    EXPECT_EQ(p.target, (Vec3{2, 0, -1}));
    EXPECT_EQ(p.up, (Vec3{0, 1, 0}));
    EXPECT_EQ(p.frame_index, 20);
}

TEST(Trajectory, MidpointIsLinear)
{
    const CameraPose p = sample_trajectory(two_keys(), 15);
    EXPECT_DOUBLE_EQ(p.position.x, 1.0);
    EXPECT_DOUBLE_EQ(p.position.y, 0.0);
}

TEST(Trajectory, ClampsPastTheLastKeyframe)
{
    const CameraPose p = sample_trajectory(two_keys(), 500);
    EXPECT_EQ(p.position, (Vec3{2, 0, 0}));
    EXPECT_EQ(p.frame_index, 500);
}

TEST(Trajectory, BeforeFirstKeyframeIsARangeError)
{
    EXPECT_THROW(sample_trajectory(two_keys(), 9), RangeError);
}

TEST(Trajectory, UpIsOrthonormalisedAgainstTheView)
{
    const Trajectory t({{0, {0, 0, 0}, {0, -1, -1}, {0, 1, 0}}});
    const CameraPose p = sample_trajectory(t, 0);
    const Vec3 view = normalize(p.target - p.position);
    EXPECT_NEAR(dot(p.up, view), 0.0, 1e-12);
    EXPECT_NEAR(length(p.up), 1.0, 1e-12);
    EXPECT_GT(p.up.y, 0.0);
}

TEST(Trajectory, ConstructorValidates)
{
    EXPECT_THROW(Trajectory({}), ConfigError);
    EXPECT_THROW(Trajectory({{0, {0, 0, 0}, {0, 0, -1}, {0, 1, 0}}, {0, {1, 0, 0}, {1, 0, -1}, {0, 1, 0}}}), ConfigError);
    EXPECT_THROW(Trajectory({{0, {0, 0, 0}, {0, 3, 0}, {0, 1, 0}}}), ConfigError);
}

TEST(Trajectory, AdjacentFramesMoveNoMoreThanTheKeyframeSpacingBound)
{
    const Trajectory t = load_trajectory(test::asset("tri-room-orbit.json"));
    const auto keys = t.keyframes();
    double bound = 0.0;
    for (std::size_t i = 1; i < keys.size(); ++i) {
        bound = std::max(bound, length(keys[i].position - keys[i - 1].position) /
                                    static_cast<double>(keys[i].frame - keys[i - 1].frame));
    }
    for (FrameIndex f = t.first_frame(); f < t.last_frame() + 5; ++f) {
        const double step = length(sample_trajectory(t, f + 1).position - sample_trajectory(t, f).position);
        EXPECT_LE(step, bound * (1 + 1e-9) + 1e-12) << "frame " << f;
    }
}

TEST(Trajectory, LoadErrors)
{
    EXPECT_THROW(load_trajectory("/nonexistent/path.json"), LoadError);
    const auto path = std::filesystem::temp_directory_path() / "dhr_bad_traj.json";
    std::ofstream(path) << R"({"keyframes": [{"frame": 0, "position": [0, 0]}]})";
    EXPECT_THROW(load_trajectory(path), LoadError);
}
