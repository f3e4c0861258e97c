#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dhr/math.hpp"

namespace dhr {

/// Self-intersection offset for primary and shadow rays, in world units (meters).
inline constexpr double kRayEpsilon = 1e-4;

/// Default cap on scene lights: one 32-bit visibility word per pixel.
inline constexpr std::size_t kDefaultMaxLights = 32;

struct PointLight {
    Vec3 position;
    Rgb intensity;
};

struct Triangle {
    Vec3 v0, v1, v2;
    Vec3 n0, n1, n2; ///< unit vertex normals; equal to the face normal when the mesh has none
    std::uint32_t material = 0;
};

struct Hit {
    double t = 0.0;
    Vec3 position;
    Vec3 normal; ///< interpolated, unit length, oriented against the incoming ray
    Rgb albedo;
    std::uint32_t triangle = 0;
};

struct Aabb {
    Vec3 lo{1e300, 1e300, 1e300};
    Vec3 hi{-1e300, -1e300, -1e300};

    void grow(const Vec3& p)
    {
        lo = min(lo, p);
        hi = max(hi, p);
    }
    void grow(const Aabb& b)
    {
        lo = min(lo, b.lo);
        hi = max(hi, b.hi);
    }
    bool empty() const { return lo.x > hi.x; }
    double surface_area() const;
};

/// Möller–Trumbore test. Returns the ray parameter and barycentrics (u, v) on a hit.
struct TriangleHit {
    double t, u, v;
};
std::optional<TriangleHit> intersect_triangle(const Triangle& tri, const Vec3& origin, const Vec3& dir);

/// Binned-SAH bounding volume hierarchy over a triangle array it does not own.
class Bvh {
public:
    struct Node {
        Aabb box;
        std::uint32_t first = 0; ///< right child index for interior nodes, first primitive slot for leaves
        std::uint32_t count = 0; ///< 0 for interior nodes
        std::uint8_t axis = 0;
    };

    Bvh() = default;
    explicit Bvh(std::span<const Triangle> triangles);

    /// Nearest hit with t in (t_min, t_max); ties on t resolve to the lowest triangle index.
    std::optional<std::pair<std::uint32_t, TriangleHit>> closest(std::span<const Triangle> triangles, const Vec3& origin,
                                                                const Vec3& dir, double t_min, double t_max) const;

    bool any(std::span<const Triangle> triangles, const Vec3& origin, const Vec3& dir, double t_min,
             double t_max) const;

    std::span<const Node> nodes() const { return nodes_; }
    std::span<const std::uint32_t> primitive_indices() const { return indices_; }

private:
    std::uint32_t build(std::span<const Triangle> triangles, std::vector<Aabb>& boxes, std::vector<Vec3>& centroids,
                        std::uint32_t begin, std::uint32_t end);

    std::vector<Node> nodes_;
    std::vector<std::uint32_t> indices_;
};

struct SceneLoadOptions {
    std::size_t max_lights = kDefaultMaxLights;
};

/// Camera lens parameters that live with the scene assets. Display size and guard band come from the run config.
struct Lens {
    double vertical_fov = 1.0471975511965976; ///< radians (60 degrees)
    double near_plane = 0.05;
    double far_plane = 1000.0;
};

/// Static scene shared by client and server. Immutable after construction.
class Scene {
public:
    Scene(std::vector<Triangle> triangles, std::vector<Rgb> materials, std::vector<PointLight> lights, Rgb background,
          Lens lens = {}, SceneLoadOptions options = {});

    std::span<const Triangle> triangles() const { return triangles_; }
    std::span<const Rgb> materials() const { return materials_; }
    std::span<const PointLight> lights() const { return lights_; }
    Rgb background() const { return background_; }
    const Lens& lens() const { return lens_; }
    const Bvh& bvh() const { return bvh_; }

private:
    std::vector<Triangle> triangles_;
    std::vector<Rgb> materials_;
    std::vector<PointLight> lights_;
    Rgb background_;
    Lens lens_;
    Bvh bvh_;
};

/// Loads OBJ geometry (v, vn, f, usemtl) plus a JSON file with lights, materials, background and lens.
Scene load_scene(const std::filesystem::path& mesh_path, const std::filesystem::path& lights_path,
                 SceneLoadOptions options = {});

/// Nearest hit with t in (kRayEpsilon, t_max). `direction` must be unit length.
std::optional<Hit> intersect_ray(const Scene& scene, const Vec3& origin, const Vec3& direction, double t_max);

/// True iff geometry crosses the open segment (from + eps*dir, to - eps*dir).
bool occluded(const Scene& scene, const Vec3& from, const Vec3& to);

} // namespace dhr
