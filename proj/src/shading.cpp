#include "dhr/shading.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dhr/error.hpp"

namespace dhr {

Rgb shade_pixel(const Vec3& position, const Vec3& normal, const Rgb& albedo, std::span<const std::uint32_t> mask,
                std::span<const PointLight> lights, const ShadingOptions& options)
{
    Rgb sum;
    for (std::size_t i = 0; i < lights.size(); ++i) {
        if (!((mask[i / 32] >> (i % 32)) & 1u)) continue;
        const Vec3 to_light = lights[i].position - position;
        const double dist2 = dot(to_light, to_light);
        if (!(dist2 > 0.0)) continue;
        const double n_dot_l = std::clamp(dot(normal, to_light / std::sqrt(dist2)), 0.0, 1.0);
        double w = n_dot_l;
        if (options.inverse_square) w /= dist2;
        sum += lights[i].intensity * w;
    }
    return {albedo.r * sum.r / std::numbers::pi, albedo.g * sum.g / std::numbers::pi, albedo.b * sum.b / std::numbers::pi};
}

LinearImage shade_frame(const GBuffer& gbuffer, const VisibilityBitmap& visibility, std::span<const PointLight> lights,
                        Rgb background, const ShadingOptions& options)
{
    if (visibility.width() != gbuffer.width || visibility.height() != gbuffer.height) {
        throw ContractViolation("visibility and G-Buffer sizes differ");
    }
    if (visibility.num_lights() != static_cast<int>(lights.size())) {
        throw ContractViolation("visibility light count differs from the scene's");
    }
    LinearImage out{gbuffer.width, gbuffer.height, std::vector<Rgb>(gbuffer.valid.size(), background),
                    gbuffer.frame_index};
    for (int y = 0; y < gbuffer.height; ++y) {
        for (int x = 0; x < gbuffer.width; ++x) {
            const std::size_t i = gbuffer.index(x, y);
            if (!gbuffer.valid[i]) continue;
            const Rgb c = shade_pixel(gbuffer.world_position[i], gbuffer.normal[i], gbuffer.albedo[i],
                                      visibility.pixel(x, y), lights, options);
            out.pixels[i] = {std::clamp(c.r, 0.0, 1.0), std::clamp(c.g, 0.0, 1.0), std::clamp(c.b, 0.0, 1.0)};
        }
    }
    return out;
}

LinearImage light_visibility_image(const GBuffer& gbuffer, const VisibilityBitmap& visibility, int light,
                                   Rgb background)
{
    LinearImage out{gbuffer.width, gbuffer.height, std::vector<Rgb>(gbuffer.valid.size(), background),
                    gbuffer.frame_index};
    for (int y = 0; y < gbuffer.height; ++y) {
        for (int x = 0; x < gbuffer.width; ++x) {
            const std::size_t i = gbuffer.index(x, y);
            if (!gbuffer.valid[i]) continue;
            out.pixels[i] = visibility.get_bit(x, y, light) ? gbuffer.albedo[i] : Rgb{};
        }
    }
    return out;
}

} // namespace dhr
