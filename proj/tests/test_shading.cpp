#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dhr/error.hpp"
#include "dhr/shading.hpp"
#include "test_support.hpp"

using namespace dhr;
using namespace dhr::test;

namespace {

constexpr double kPi = std::numbers::pi;
const Vec3 kOrigin{0, 0, 0};
const Vec3 kUp{0, 1, 0};

void expect_rgb_near(const Rgb& a, const Rgb& b, double tol = 1e-12)
{
    EXPECT_NEAR(a.r, b.r, tol);
    EXPECT_NEAR(a.g, b.g, tol);
    EXPECT_NEAR(a.b, b.b, tol);
}

// One-pixel-per-sample G-Buffer with random surfaces, for property checks.
GBuffer random_gbuffer(std::mt19937_64& rng, int w, int h)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GBuffer g;
    g.width = w;
    g.height = h;
    for (int i = 0; i < w * h; ++i) {
        g.world_position.push_back(random_point(rng, -3, 3));
        g.normal.push_back(random_direction(rng));
        g.albedo.push_back({u(rng), u(rng), u(rng)});
        g.valid.push_back(i % 7 != 0);
    }
    return g;
}

std::vector<PointLight> random_lights(std::mt19937_64& rng, int count)
{
    std::uniform_real_distribution<double> u(0.0, 1.5);
    std::vector<PointLight> out;
    for (int i = 0; i < count; ++i) out.push_back({random_point(rng, -8, 8), {u(rng), u(rng), u(rng)}});
    return out;
}

} // namespace

TEST(Shading, SingleOverheadLight)
{
    const std::vector<PointLight> lights{{{0, 5, 0}, {1, 1, 1}}};
    const std::uint32_t mask = 1;
    expect_rgb_near(shade_pixel(kOrigin, kUp, {kPi, kPi, kPi}, {&mask, 1}, lights), {1, 1, 1});
}

TEST(Shading, NoVisibleLightsIsBlack)
{
    const std::vector<PointLight> lights{{{0, 5, 0}, {1, 1, 1}}, {{2, 5, 0}, {3, 3, 3}}};
    const std::uint32_t mask = 0;
    EXPECT_EQ(shade_pixel(kOrigin, kUp, {kPi, kPi, kPi}, {&mask, 1}, lights), (Rgb{0, 0, 0}));
}

TEST(Shading, TwoIdenticalLightsSuperpose)
{
    const std::vector<PointLight> lights{{{0, 5, 0}, {0.3, 0.3, 0.3}}, {{0, 5, 0}, {0.3, 0.3, 0.3}}};
    const std::uint32_t mask = 0b11;
    expect_rgb_near(shade_pixel(kOrigin, kUp, {kPi, 0, 0}, {&mask, 1}, lights), {0.6, 0, 0});
}

TEST(Shading, BackFacingAndGrazingLightsContributeNothing)
{
    const std::vector<PointLight> lights{{{0, -5, 0}, {1, 1, 1}}, {{5, 0, 0}, {1, 1, 1}}};
    const std::uint32_t mask = 0b11;
    EXPECT_EQ(shade_pixel(kOrigin, kUp, {1, 1, 1}, {&mask, 1}, lights), (Rgb{0, 0, 0}));
}

TEST(Shading, CosineFactor)
{
    // 60 degrees off the normal: N.L = 0.5.
    const std::vector<PointLight> lights{{{std::sqrt(3.0), 1, 0}, {1, 1, 1}}};
    const std::uint32_t mask = 1;
    expect_rgb_near(shade_pixel(kOrigin, kUp, {kPi, kPi, kPi}, {&mask, 1}, lights), {0.5, 0.5, 0.5});
}

TEST(Shading, InverseSquareIsOptIn)
{
    const std::vector<PointLight> lights{{{0, 2, 0}, {1, 1, 1}}};
    const std::uint32_t mask = 1;
    expect_rgb_near(shade_pixel(kOrigin, kUp, {kPi, kPi, kPi}, {&mask, 1}, lights, {true}), {0.25, 0.25, 0.25});
}

TEST(Shading, LightsBeyondThirtyTwoUseTheSecondWord)
{
    std::vector<PointLight> lights(40, {{0, 5, 0}, {0, 0, 0}});
    lights[35].intensity = {1, 1, 1};
    const std::uint32_t words[2] = {0, 1u << 3};
    expect_rgb_near(shade_pixel(kOrigin, kUp, {kPi, kPi, kPi}, words, lights), {1, 1, 1});
}

TEST(ShadingProperties, AdditiveOverDisjointLightSets)
{
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<std::uint32_t> bits(0, 0xFF);
    const auto lights = random_lights(rng, 8);
    for (int i = 0; i < 2000; ++i) {
        const Vec3 p = random_point(rng, -3, 3);
        const Vec3 n = random_direction(rng);
        const Rgb albedo{0.3, 0.6, 0.9};
        const std::uint32_t all = bits(rng);
        const std::uint32_t a = all & bits(rng);
        const std::uint32_t b = all & ~a;
        const Rgb whole = shade_pixel(p, n, albedo, {&all, 1}, lights);
        const Rgb sum = shade_pixel(p, n, albedo, {&a, 1}, lights) + shade_pixel(p, n, albedo, {&b, 1}, lights);
        expect_rgb_near(whole, sum, 1e-12);
    }
}

TEST(ShadingProperties, SettingABitNeverDarkens)
{
    std::mt19937_64 rng(22);
    const GBuffer g = random_gbuffer(rng, 24, 16);
    const auto lights = random_lights(rng, 5);
    VisibilityBitmap vis(24, 16, 5);
    std::bernoulli_distribution coin(0.5);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 24; ++x)
            for (int l = 0; l < 5; ++l) vis.set_bit(x, y, l, coin(rng));
    const LinearImage before = shade_frame(g, vis, lights, {});
    for (int trial = 0; trial < 200; ++trial) {
        VisibilityBitmap more = vis;
        const int x = static_cast<int>(rng() % 24), y = static_cast<int>(rng() % 16), l = static_cast<int>(rng() % 5);
        more.set_bit(x, y, l, true);
        const LinearImage after = shade_frame(g, more, lights, {});
        for (std::size_t i = 0; i < after.pixels.size(); ++i) {
            ASSERT_GE(after.pixels[i].r, before.pixels[i].r);
            ASSERT_GE(after.pixels[i].g, before.pixels[i].g);
            ASSERT_GE(after.pixels[i].b, before.pixels[i].b);
        }
    }
}

TEST(ShadingProperties, FrameIsClampedAndBackgroundFilled)
{
    std::mt19937_64 rng(23);
    const GBuffer g = random_gbuffer(rng, 20, 10);
    std::vector<PointLight> lights = random_lights(rng, 3);
    for (auto& l : lights) l.intensity = {50, 50, 50};
    VisibilityBitmap vis(20, 10, 3);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 20; ++x) vis.set_all(x, y);
    const Rgb background{0.1, 0.2, 0.3};
    const LinearImage img = shade_frame(g, vis, lights, background);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const Rgb c = img.pixels[i];
        if (!g.valid[i]) {
            EXPECT_EQ(c, background);
            continue;
        }
        for (double v : {c.r, c.g, c.b}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(ShadingProperties, ZeroLightSceneIsBlack)
{
    std::mt19937_64 rng(24);
    const GBuffer g = random_gbuffer(rng, 12, 12);
    const LinearImage img = shade_frame(g, VisibilityBitmap(12, 12, 0), {}, {0.2, 0.2, 0.2});
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        if (g.valid[i]) EXPECT_EQ(img.pixels[i], (Rgb{0, 0, 0}));
    }
}

TEST(Shading, MismatchedInputsAreRejected)
{
    std::mt19937_64 rng(25);
    const GBuffer g = random_gbuffer(rng, 12, 12);
    const auto lights = random_lights(rng, 2);
    EXPECT_THROW(shade_frame(g, VisibilityBitmap(12, 11, 2), lights, {}), ContractViolation);
    EXPECT_THROW(shade_frame(g, VisibilityBitmap(12, 12, 3), lights, {}), ContractViolation);
}

TEST(Shading, LightVisibilityImage)
{
    std::mt19937_64 rng(26);
    const GBuffer g = random_gbuffer(rng, 8, 8);
    VisibilityBitmap vis(8, 8, 2);
    vis.set_bit(1, 1, 1);
    const LinearImage img = light_visibility_image(g, vis, 1, {9, 9, 9});
    EXPECT_EQ(img.at(1, 1), g.albedo[g.index(1, 1)]);
    EXPECT_EQ(img.at(2, 1), (Rgb{0, 0, 0}));
    EXPECT_EQ(img.at(0, 0), (Rgb{9, 9, 9})); // pixel 0 is a background pixel
}

TEST(EncodeDisplay, GammaAndClamping)
{
    const LinearImage img{6, 1, {{0, 0, 0}, {1, 1, 1}, {0.5, 0.5, 0.5}, {2, -1, 0.25}, {NAN, 0.01, 0.99}, {0.18, 0.18, 0.18}}, 0};
    const Image8 out = encode_display(img);
    ASSERT_EQ(out.rgb.size(), 18u);
    // 255 * v^(1/2.2), rounded: 0.5 -> 186.08, 0.25 -> 135.8, 0.01 -> 31.4, 0.99 -> 253.8, 0.18 -> 116.96
    const std::vector<std::uint8_t> want{0, 0, 0, 255, 255, 255, 186, 186, 186, 255, 0, 136, 0, 31, 254, 117, 117, 117};
    EXPECT_EQ(out.rgb, want);
}
