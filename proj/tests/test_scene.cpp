#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "dhr/error.hpp"
#include "dhr/scene.hpp"
#include "test_support.hpp"

using namespace dhr;
using namespace dhr::test;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content)
{
    const auto path = std::filesystem::temp_directory_path() / ("dhr_scene_" + name);
    std::ofstream(path) << content;
    return path;
}

Scene tri_room() { return load_scene(asset("tri-room.obj"), asset("tri-room.json")); }

// Every triangle, no acceleration: nearest t, lowest index on ties.
std::optional<std::pair<std::uint32_t, double>> brute_force(const Scene& s, const Vec3& o, const Vec3& d, double t_max)
{
    std::optional<std::pair<std::uint32_t, double>> best;
    const auto tris = s.triangles();
    for (std::uint32_t i = 0; i < tris.size(); ++i) {
        const auto h = intersect_triangle(tris[i], o, d);
        if (!h || !(h->t > kRayEpsilon) || !(h->t < t_max)) continue;
        if (!best || h->t < best->second) best = {{i, h->t}};
    }
    return best;
}

// Number of triangles a fan triangulation of the OBJ faces yields, counted without the library loader.
std::size_t count_obj_triangles(const std::filesystem::path& path, std::size_t* declared)
{
    std::ifstream in(path);
    std::string line;
    std::size_t total = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "#") {
            std::size_t n;
            std::string word;
            if (ls >> n >> word && word == "triangles") *declared = n;
        } else if (tag == "f") {
            std::size_t corners = 0;
            std::string tok;
            while (ls >> tok) ++corners;
            total += corners - 2;
        }
    }
    return total;
}

} // namespace

TEST(IntersectRay, HitsFacingQuadAtAnalyticDistance)
{
    std::vector<Triangle> tris;
    add_quad(tris, {-0.5, -0.5, -3}, {0.5, -0.5, -3}, {0.5, 0.5, -3}, {-0.5, 0.5, -3});
    const Scene scene(tris, {}, {}, {});
    const auto hit = intersect_ray(scene, {0, 0, 0}, {0, 0, -1}, 1e9);
    ASSERT_TRUE(hit);
    EXPECT_DOUBLE_EQ(hit->t, 3.0);
    EXPECT_NEAR(hit->normal.z, 1.0, 1e-12);
    EXPECT_NEAR(hit->position.z, -3.0, 1e-12);
    EXPECT_EQ(hit->albedo, (Rgb{0.8, 0.8, 0.8}));
}

TEST(IntersectRay, NormalIsFlippedTowardsTheRay)
{
    std::vector<Triangle> tris;
    add_quad(tris, {-0.5, -0.5, -3}, {0.5, -0.5, -3}, {0.5, 0.5, -3}, {-0.5, 0.5, -3});
    const Scene scene(tris, {}, {}, {});
    const auto hit = intersect_ray(scene, {0, 0, -6}, {0, 0, 1}, 1e9);
    ASSERT_TRUE(hit);
    EXPECT_NEAR(hit->normal.z, -1.0, 1e-12);
}

TEST(IntersectRay, RayPointingAwayMisses)
{
    const Scene scene = tri_room();
    EXPECT_FALSE(intersect_ray(scene, {0, 1, 50}, {0, 0, 1}, 1e9));
    EXPECT_FALSE(intersect_ray(scene, {0, 1, 0}, {0, 0, -1}, 1.0)) << "t_max excludes the back wall";
}

TEST(IntersectRay, EmptySceneMissesEverything)
{
    const Scene scene({}, {}, {}, {});
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        EXPECT_FALSE(intersect_ray(scene, random_point(rng, -5, 5), random_direction(rng), 1e9));
    }
    EXPECT_FALSE(occluded(scene, {0, 0, 0}, {1, 2, 3}));
}

namespace {

// Origins above the floor and in front of both walls, so most rays hit something.
Vec3 inside_room(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> x(-7.5, 7.5), y(0.1, 4.5), z(-5.5, 5.5);
    return {x(rng), y(rng), z(rng)};
}

} // namespace

TEST(Bvh, TriRoomMatchesBruteForceOnTenThousandRays)
{
    const Scene scene = tri_room();
    std::mt19937_64 rng(2024);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) {
        const Vec3 o = inside_room(rng);
        const Vec3 d = random_direction(rng);
        const auto expected = brute_force(scene, o, d, 1e30);
        const auto got = intersect_ray(scene, o, d, 1e30);
        ASSERT_EQ(expected.has_value(), got.has_value()) << "ray " << i;
        if (!got) continue;
        ++hits;
        EXPECT_EQ(got->triangle, expected->first);
        EXPECT_EQ(got->t, expected->second);
    }
    EXPECT_GT(hits, 5000);
}

TEST(Bvh, KernelAgreesWithIndependentPlaneOracle)
{
    const Scene scene = tri_room();
    const auto tris = scene.triangles();
    std::mt19937_64 rng(77);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const Vec3 o = inside_room(rng);
        const Vec3 d = random_direction(rng);
        std::optional<std::pair<std::uint32_t, double>> best;
        for (std::uint32_t k = 0; k < tris.size(); ++k) {
            const auto t = oracle_hit(tris[k], o, d);
            if (t && *t > kRayEpsilon && (!best || *t < best->second)) best = {{k, *t}};
        }
        const auto got = intersect_ray(scene, o, d, 1e30);
        // Rays grazing an edge may legitimately resolve to either neighbour.
        if (best && edge_margin(tris[best->first], o, d, best->second) < 1e-7) continue;
        ASSERT_EQ(best.has_value(), got.has_value()) << "ray " << i;
        if (!got) continue;
        ++checked;
        EXPECT_NEAR(got->t, best->second, 1e-9 * std::max(1.0, best->second));
    }
    EXPECT_GT(checked, 3000);
}

TEST(Bvh, RandomSoupClosestAndAnyMatchBruteForce)
{
    std::mt19937_64 rng(99);
    std::vector<Triangle> tris;
    std::uniform_real_distribution<double> jitter(-0.6, 0.6);
    for (int i = 0; i < 600; ++i) {
        const Vec3 c = random_point(rng, -10, 10);
        const Vec3 a = c + Vec3{jitter(rng), jitter(rng), jitter(rng)};
        const Vec3 b = c + Vec3{jitter(rng), jitter(rng), jitter(rng)};
        const Vec3 e = c + Vec3{jitter(rng), jitter(rng), jitter(rng)};
        if (length(cross(b - a, e - a)) < 1e-6) continue;
        tris.push_back(make_triangle(a, b, e));
    }
    const Scene scene(tris, {}, {}, {});
    for (int i = 0; i < 3000; ++i) {
        const Vec3 o = random_point(rng, -12, 12);
        const Vec3 d = random_direction(rng);
        const double t_max = std::uniform_real_distribution<double>(0.5, 30)(rng);
        const auto expected = brute_force(scene, o, d, t_max);
        const auto got = scene.bvh().closest(scene.triangles(), o, d, kRayEpsilon, t_max);
        ASSERT_EQ(expected.has_value(), got.has_value());
        if (got) {
            EXPECT_EQ(got->first, expected->first);
            EXPECT_EQ(got->second.t, expected->second);
        }
        EXPECT_EQ(scene.bvh().any(scene.triangles(), o, d, kRayEpsilon, t_max), expected.has_value());
    }
}

TEST(Bvh, CoversEveryTriangleExactlyOnce)
{
    const Scene scene = tri_room();
    std::vector<std::uint32_t> idx(scene.bvh().primitive_indices().begin(), scene.bvh().primitive_indices().end());
    std::sort(idx.begin(), idx.end());
    std::vector<std::uint32_t> expect(scene.triangles().size());
    std::iota(expect.begin(), expect.end(), 0u);
    EXPECT_EQ(idx, expect);

    std::size_t in_leaves = 0;
    for (const auto& node : scene.bvh().nodes()) in_leaves += node.count;
    EXPECT_EQ(in_leaves, scene.triangles().size());
}

TEST(Occluded, WallBetweenPointsBlocks)
{
    std::vector<Triangle> tris;
    add_quad(tris, {-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0});
    const Scene scene(tris, {}, {}, {});
    EXPECT_TRUE(occluded(scene, {0, 0, -1}, {0, 0, 1}));
    EXPECT_FALSE(occluded(scene, {0, 0, 1}, {0, 0, 3}));
    EXPECT_FALSE(occluded(scene, {5, 0, -1}, {5, 0, 1})) << "segment passes beside the wall";
}

TEST(Occluded, PointsOnTheSameTriangleDoNotSelfShadow)
{
    std::vector<Triangle> tris;
    add_quad(tris, {-5, 0, -5}, {-5, 0, 5}, {5, 0, 5}, {5, 0, -5});
    const Scene scene(tris, {}, {}, {});
    EXPECT_FALSE(occluded(scene, {0, 0, 0}, {1, 0, 0.5}));
    EXPECT_FALSE(occluded(scene, {0, 0, 0}, {0, 3, 0})) << "surface point to a light above it";
}

TEST(Occluded, IsSymmetricForRandomPairs)
{
    const Scene scene = tri_room();
    std::mt19937_64 rng(8);
    int blocked = 0;
    for (int i = 0; i < 3000; ++i) {
        const Vec3 a = random_point(rng, -7, 6);
        const Vec3 b = random_point(rng, -7, 6);
        const bool ab = occluded(scene, a, b);
        EXPECT_EQ(ab, occluded(scene, b, a));
        blocked += ab;
    }
    EXPECT_GT(blocked, 100);
}

TEST(LoadScene, SingleTriangleAndOneLight)
{
    const auto obj = temp_file("one.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    const auto js = temp_file("one.json", R"({"lights": [{"position": [0, 0, 5], "intensity": [1, 1, 1]}]})");
    const Scene scene = load_scene(obj, js);
    EXPECT_EQ(scene.triangles().size(), 1u);
    EXPECT_EQ(scene.lights().size(), 1u);
}

TEST(LoadScene, ZeroTrianglesIsAValidScene)
{
    const auto obj = temp_file("empty.obj", "# nothing here\n");
    const auto js = temp_file("empty.json", "{}");
    const Scene scene = load_scene(obj, js);
    EXPECT_TRUE(scene.triangles().empty());
    EXPECT_FALSE(intersect_ray(scene, {0, 0, 0}, {0, 0, -1}, 1e9));
}

TEST(LoadScene, TriRoomTriangleCountMatchesDeclaredCount)
{
    std::size_t declared = 0;
    const std::size_t counted = count_obj_triangles(asset("tri-room.obj"), &declared);
    EXPECT_EQ(counted, declared);
    EXPECT_EQ(tri_room().triangles().size(), declared);
}

TEST(LoadScene, FaceFormatsAndMaterials)
{
    const auto obj = temp_file("formats.obj",
                               "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\n"
                               "usemtl red\nf 1/1/1 2/1/1 3/1/1 4/1/1\nusemtl blue\nf -4//1 -3//1 -2//1\n"
                               "o ignored\ns off\n");
    const auto js = temp_file("formats.json", R"({"materials": {"red": [1, 0, 0], "blue": [0, 0, 1]}})");
    const Scene scene = load_scene(obj, js);
    ASSERT_EQ(scene.triangles().size(), 3u);
    EXPECT_EQ(scene.materials()[scene.triangles()[0].material], (Rgb{1, 0, 0}));
    EXPECT_EQ(scene.materials()[scene.triangles()[2].material], (Rgb{0, 0, 1}));
}

TEST(LoadScene, ErrorsNameThePath)
{
    const auto js = temp_file("ok.json", "{}");
    try {
        load_scene("/nonexistent/mesh.obj", js);
        FAIL();
    } catch (const LoadError& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/mesh.obj"), std::string::npos);
    }
    const auto bad = temp_file("bad.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
    try {
        load_scene(bad, js);
        FAIL();
    } catch (const LoadError& e) {
        EXPECT_NE(std::string(e.what()).find(":4:"), std::string::npos) << e.what();
    }
    const auto corrupt = temp_file("corrupt.obj", "v 0 zero 0\n");
    EXPECT_THROW(load_scene(corrupt, js), LoadError);
    const auto bad_json = temp_file("bad.json", "{ not json");
    EXPECT_THROW(load_scene(bad, bad_json), LoadError);
}

TEST(LoadScene, TooManyLightsIsAConfigurationError)
{
    const auto obj = temp_file("few.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    std::string lights = R"({"lights": [)";
    for (int i = 0; i < 33; ++i) lights += std::string(i ? "," : "") + R"({"position": [0, 0, 1], "intensity": [1, 1, 1]})";
    lights += "]}";
    const auto js = temp_file("many.json", lights);
    EXPECT_THROW(load_scene(obj, js), ConfigError);
    EXPECT_EQ(load_scene(obj, js, {64}).lights().size(), 33u);
}

TEST(SceneInvariants, RejectsNegativeIntensityAndNonUnitNormals)
{
    EXPECT_THROW(Scene({}, {}, {{{0, 0, 0}, {-1, 0, 0}}}, {}), ConfigError);
    Triangle t = make_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
    t.n1 = {0, 0, 2};
    EXPECT_THROW(Scene({t}, {}, {}, {}), ConfigError);
}
