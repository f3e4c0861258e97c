#include "dhr/gbuffer.hpp"

#include <limits>

namespace dhr {

GBuffer render_gbuffer(const Scene& scene, const CameraPose& pose, const Intrinsics& intr)
{
    GBuffer g;
    g.width = intr.display_width;
    g.height = intr.display_height;
    g.frame_index = pose.frame_index;
    g.pose = pose;
    const auto n = static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height);
    g.world_position.assign(n, Vec3{});
    g.normal.assign(n, Vec3{});
    g.albedo.assign(n, Rgb{});
    g.valid.assign(n, 0);

    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            const Ray ray = primary_ray(pose, intr, x + 0.5, y + 0.5, false);
            const auto hit = intersect_ray(scene, ray.origin, ray.direction, std::numeric_limits<double>::infinity());
            if (!hit) continue;
            const std::size_t i = g.index(x, y);
            g.world_position[i] = hit->position;
            g.normal[i] = hit->normal;
            g.albedo[i] = hit->albedo;
            g.valid[i] = 1;
        }
    }
    return g;
}

} // namespace dhr
