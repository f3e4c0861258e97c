#pragma once

#include <span>

#include "dhr/gbuffer.hpp"
#include "dhr/image.hpp"
#include "dhr/scene.hpp"
#include "dhr/visibility.hpp"

namespace dhr {

struct ShadingOptions {
    bool inverse_square = false; ///< divide each light's contribution by squared distance
};

/// Lambertian sum over lights gated by the visibility mask, before clamping:
///   I = albedo / pi * sum_i k_i * clamp(N . L_i, 0, 1) * I_i
Rgb shade_pixel(const Vec3& position, const Vec3& normal, const Rgb& albedo, std::span<const std::uint32_t> mask,
                std::span<const PointLight> lights, const ShadingOptions& options = {});

/// Valid pixels get shade_pixel clamped to [0,1]; background pixels get `background`.
/// `visibility` must match the G-Buffer size and carry one bit per light.
LinearImage shade_frame(const GBuffer& gbuffer, const VisibilityBitmap& visibility, std::span<const PointLight> lights,
                        Rgb background, const ShadingOptions& options = {});

/// Debug view of one light: albedo where the light is unobstructed, black where it is blocked.
LinearImage light_visibility_image(const GBuffer& gbuffer, const VisibilityBitmap& visibility, int light,
                                   Rgb background);

} // namespace dhr
