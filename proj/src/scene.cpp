#include "dhr/scene.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "dhr/error.hpp"

namespace dhr {

namespace {

constexpr std::uint32_t kLeafSize = 4;
constexpr int kBins = 12;

Aabb triangle_box(const Triangle& t)
{
    Aabb b;
    b.grow(t.v0);
    b.grow(t.v1);
    b.grow(t.v2);
    return b;
}

// Slightly inflate node boxes so slab round-off never culls a hit the triangle test accepts.
Aabb padded(Aabb b)
{
    const Vec3 ext = b.hi - b.lo;
    const double pad = 1e-7 * std::max({ext.x, ext.y, ext.z, std::fabs(b.lo.x), std::fabs(b.lo.y), std::fabs(b.lo.z),
                                        std::fabs(b.hi.x), std::fabs(b.hi.y), std::fabs(b.hi.z)}) +
                       1e-9;
    b.lo = b.lo - Vec3{pad, pad, pad};
    b.hi = b.hi + Vec3{pad, pad, pad};
    return b;
}

bool slab_hit(const Aabb& box, const Vec3& origin, const Vec3& dir, double t_min, double t_max)
{
    for (int a = 0; a < 3; ++a) {
        const double o = origin[a];
        const double d = dir[a];
        if (d == 0.0) {
            if (o < box.lo[a] || o > box.hi[a]) return false;
            continue;
        }
        const double inv = 1.0 / d;
        double t0 = (box.lo[a] - o) * inv;
        double t1 = (box.hi[a] - o) * inv;
        if (t0 > t1) std::swap(t0, t1);
        t_min = std::max(t_min, t0);
        t_max = std::min(t_max, t1);
        if (t_min > t_max) return false;
    }
    return true;
}

} // namespace

double Aabb::surface_area() const
{
    if (empty()) return 0.0;
    const Vec3 e = hi - lo;
    return 2.0 * (e.x * e.y + e.y * e.z + e.z * e.x);
}

std::optional<TriangleHit> intersect_triangle(const Triangle& tri, const Vec3& origin, const Vec3& dir)
{
    const Vec3 e1 = tri.v1 - tri.v0;
    const Vec3 e2 = tri.v2 - tri.v0;
    const Vec3 p = cross(dir, e2);
    const double det = dot(e1, p);
    if (std::fabs(det) < 1e-14) return std::nullopt;
    const double inv = 1.0 / det;
    const Vec3 s = origin - tri.v0;
    const double u = dot(s, p) * inv;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    const Vec3 q = cross(s, e1);
    const double v = dot(dir, q) * inv;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;
    return TriangleHit{dot(e2, q) * inv, u, v};
}

Bvh::Bvh(std::span<const Triangle> triangles)
{
    const auto n = static_cast<std::uint32_t>(triangles.size());
    indices_.resize(n);
    std::iota(indices_.begin(), indices_.end(), 0u);
    if (n == 0) return;
    std::vector<Aabb> boxes(n);
    std::vector<Vec3> centroids(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        boxes[i] = triangle_box(triangles[i]);
        centroids[i] = (triangles[i].v0 + triangles[i].v1 + triangles[i].v2) / 3.0;
    }
    nodes_.reserve(2 * static_cast<std::size_t>(n));
    build(triangles, boxes, centroids, 0, n);
}

std::uint32_t Bvh::build(std::span<const Triangle> triangles, std::vector<Aabb>& boxes, std::vector<Vec3>& centroids,
                         std::uint32_t begin, std::uint32_t end)
{
    const auto node_index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();

    Aabb bounds;
    Aabb cbounds;
    for (std::uint32_t i = begin; i < end; ++i) {
        bounds.grow(boxes[indices_[i]]);
        cbounds.grow(centroids[indices_[i]]);
    }
    nodes_[node_index].box = padded(bounds);

    const std::uint32_t count = end - begin;
    const Vec3 extent = cbounds.hi - cbounds.lo;
    int axis = 0;
    if (extent.y > extent[axis]) axis = 1;
    if (extent.z > extent[axis]) axis = 2;

    auto make_leaf = [&] {
        nodes_[node_index].first = begin;
        nodes_[node_index].count = count;
        return node_index;
    };
    if (count <= kLeafSize || extent[axis] <= 0.0) return make_leaf();

    const double lo = cbounds.lo[axis];
    const double scale = kBins / extent[axis];
    auto bin_of = [&](std::uint32_t prim) {
        const int b = static_cast<int>((centroids[prim][axis] - lo) * scale);
        return std::clamp(b, 0, kBins - 1);
    };

    std::array<Aabb, kBins> bin_box{};
    std::array<std::uint32_t, kBins> bin_count{};
    for (std::uint32_t i = begin; i < end; ++i) {
        const int b = bin_of(indices_[i]);
        bin_box[static_cast<std::size_t>(b)].grow(boxes[indices_[i]]);
        ++bin_count[static_cast<std::size_t>(b)];
    }

    // Sweep from both sides to score every bin boundary.
    std::array<double, kBins - 1> cost{};
    Aabb left;
    std::uint32_t left_n = 0;
    for (int s = 0; s < kBins - 1; ++s) {
        left.grow(bin_box[static_cast<std::size_t>(s)]);
        left_n += bin_count[static_cast<std::size_t>(s)];
        cost[static_cast<std::size_t>(s)] = left.surface_area() * left_n;
    }
    Aabb right;
    std::uint32_t right_n = 0;
    for (int s = kBins - 1; s > 0; --s) {
        right.grow(bin_box[static_cast<std::size_t>(s)]);
        right_n += bin_count[static_cast<std::size_t>(s)];
        cost[static_cast<std::size_t>(s - 1)] += right.surface_area() * right_n;
    }
    int best = 0;
    for (int s = 1; s < kBins - 1; ++s) {
        if (cost[static_cast<std::size_t>(s)] < cost[static_cast<std::size_t>(best)]) best = s;
    }

    auto mid_it = std::stable_partition(indices_.begin() + begin, indices_.begin() + end,
                                        [&](std::uint32_t prim) { return bin_of(prim) <= best; });
    auto mid = static_cast<std::uint32_t>(mid_it - indices_.begin());
    if (mid == begin || mid == end) {
        // All centroids landed in one bin; fall back to an object median split.
        mid = begin + count / 2;
        std::stable_sort(indices_.begin() + begin, indices_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
            return centroids[a][axis] < centroids[b][axis];
        });
    }

    nodes_[node_index].axis = static_cast<std::uint8_t>(axis);
    build(triangles, boxes, centroids, begin, mid);
    const std::uint32_t right_child = build(triangles, boxes, centroids, mid, end);
    nodes_[node_index].first = right_child;
    nodes_[node_index].count = 0;
    return node_index;
}

std::optional<std::pair<std::uint32_t, TriangleHit>> Bvh::closest(std::span<const Triangle> triangles,
                                                                  const Vec3& origin, const Vec3& dir, double t_min,
                                                                  double t_max) const
{
    std::optional<std::pair<std::uint32_t, TriangleHit>> best;
    if (nodes_.empty()) return best;
    double best_t = t_max;

    std::array<std::uint32_t, 128> stack{};
    std::size_t top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        // <= on the far bound keeps equal-t candidates alive for the index tie-break
        if (!slab_hit(node.box, origin, dir, t_min, best_t)) continue;
        if (node.count > 0) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const std::uint32_t prim = indices_[i];
                const auto h = intersect_triangle(triangles[prim], origin, dir);
                if (!h || !(h->t > t_min) || !(h->t < t_max)) continue;
                if (!best || h->t < best->second.t || (h->t == best->second.t && prim < best->first)) {
                    best.emplace(prim, *h);
                    best_t = h->t;
                }
            }
            continue;
        }
        const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
        std::uint32_t near_child = self + 1;
        std::uint32_t far_child = node.first;
        if (dir[node.axis] < 0.0) std::swap(near_child, far_child);
        stack[top++] = far_child;
        stack[top++] = near_child;
    }
    return best;
}

bool Bvh::any(std::span<const Triangle> triangles, const Vec3& origin, const Vec3& dir, double t_min,
              double t_max) const
{
    if (nodes_.empty()) return false;
    std::array<std::uint32_t, 128> stack{};
    std::size_t top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (!slab_hit(node.box, origin, dir, t_min, t_max)) continue;
        if (node.count > 0) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const auto h = intersect_triangle(triangles[indices_[i]], origin, dir);
                if (h && h->t > t_min && h->t < t_max) return true;
            }
            continue;
        }
        const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
        stack[top++] = node.first;
        stack[top++] = self + 1;
    }
    return false;
}

Scene::Scene(std::vector<Triangle> triangles, std::vector<Rgb> materials, std::vector<PointLight> lights,
             Rgb background, Lens lens, SceneLoadOptions options)
    : triangles_(std::move(triangles))
    , materials_(std::move(materials))
    , lights_(std::move(lights))
    , background_(background)
    , lens_(lens)
{
    if (lights_.size() > options.max_lights) {
        throw ConfigError("scene declares " + std::to_string(lights_.size()) + " lights; limit is " +
                          std::to_string(options.max_lights));
    }
    for (const auto& l : lights_) {
        if (l.intensity.r < 0.0 || l.intensity.g < 0.0 || l.intensity.b < 0.0) {
            throw ConfigError("light intensity must be non-negative");
        }
    }
    if (materials_.empty()) materials_.push_back(Rgb{0.8, 0.8, 0.8});
    for (const auto& t : triangles_) {
        if (t.material >= materials_.size()) throw ConfigError("triangle references unknown material");
        for (const Vec3* n : {&t.n0, &t.n1, &t.n2}) {
            if (std::fabs(length(*n) - 1.0) > 1e-4) throw ConfigError("triangle normal is not unit length");
        }
    }
    bvh_ = Bvh(triangles_);
}

std::optional<Hit> intersect_ray(const Scene& scene, const Vec3& origin, const Vec3& direction, double t_max)
{
    const auto tris = scene.triangles();
    const auto found = scene.bvh().closest(tris, origin, direction, kRayEpsilon, t_max);
    if (!found) return std::nullopt;
    const auto& [prim, th] = *found;
    const Triangle& tri = tris[prim];
    Vec3 n = normalize(tri.n0 * (1.0 - th.u - th.v) + tri.n1 * th.u + tri.n2 * th.v);
    if (dot(n, direction) > 0.0) n = -n;
    return Hit{th.t, origin + direction * th.t, n, scene.materials()[tri.material], prim};
}

bool occluded(const Scene& scene, const Vec3& from, const Vec3& to)
{
    const Vec3 delta = to - from;
    const double dist = length(delta);
    if (!(dist > 2.0 * kRayEpsilon)) return false;
    const Vec3 dir = delta / dist;
    return scene.bvh().any(scene.triangles(), from, dir, kRayEpsilon, dist - kRayEpsilon);
}

} // namespace dhr
