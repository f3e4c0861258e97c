#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dhr/math.hpp"

namespace dhr {

/// Linear-light RGB frame.
struct LinearImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;
    std::int64_t frame_index = 0;

    const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
};

/// 8-bit interleaved RGB, the form every image metric consumes.
struct Image8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    friend bool operator==(const Image8&, const Image8&) = default;
};

/// clamp to [0,1], gamma 1/2.2, round to 8 bits
Image8 encode_display(const LinearImage& image);

void write_png(const std::filesystem::path& path, const Image8& image);
void write_ppm(const std::filesystem::path& path, const Image8& image);

} // namespace dhr
