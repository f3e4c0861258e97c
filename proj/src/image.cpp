#include "dhr/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "dhr/error.hpp"

namespace dhr {

namespace {

std::uint8_t encode_channel(double v)
{
    const double c = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(255.0 * std::pow(c, 1.0 / 2.2)));
}

} // namespace

Image8 encode_display(const LinearImage& image)
{
    Image8 out{image.width, image.height, std::vector<std::uint8_t>(image.pixels.size() * 3)};
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        out.rgb[3 * i + 0] = encode_channel(image.pixels[i].r);
        out.rgb[3 * i + 1] = encode_channel(image.pixels[i].g);
        out.rgb[3 * i + 2] = encode_channel(image.pixels[i].b);
    }
    return out;
}

void write_png(const std::filesystem::path& path, const Image8& image)
{
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) throw Error(path.string() + ": cannot open for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(path.string() + ": PNG encoding failed");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
        png_write_row(png, image.rgb.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width) * 3);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_ppm(const std::filesystem::path& path, const Image8& image)
{
    std::ofstream out(path, std::ios::binary);
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
    if (!out) throw Error(path.string() + ": write failed");
}

} // namespace dhr
