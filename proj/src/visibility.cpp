#include "dhr/visibility.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <limits>

#include "dhr/bytes.hpp"
#include "dhr/error.hpp"

namespace dhr {

VisibilityBitmap::VisibilityBitmap(int width, int height, int num_lights, FrameIndex frame)
    : width_(width), height_(height), num_lights_(num_lights), words_per_pixel_((num_lights + 31) / 32), frame_(frame)
{
    if (width < 0 || height < 0 || num_lights < 0) throw ContractViolation("bitmap dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                     static_cast<std::size_t>(words_per_pixel_),
                 0u);
}

std::size_t VisibilityBitmap::offset(int x, int y) const
{
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
           static_cast<std::size_t>(words_per_pixel_);
}

void VisibilityBitmap::check(int x, int y, int light) const
{
    if (x < 0 || y < 0 || x >= width_ || y >= height_ || light < 0 || light >= num_lights_) {
        throw ContractViolation("bitmap index (" + std::to_string(x) + ", " + std::to_string(y) + ", light " +
                                std::to_string(light) + ") out of range");
    }
}

bool VisibilityBitmap::get_bit(int x, int y, int light) const
{
    check(x, y, light);
    return (data_[offset(x, y) + static_cast<std::size_t>(light / 32)] >> (light % 32)) & 1u;
}

void VisibilityBitmap::set_bit(int x, int y, int light, bool value)
{
    check(x, y, light);
    auto& word = data_[offset(x, y) + static_cast<std::size_t>(light / 32)];
    const std::uint32_t bit = 1u << (light % 32);
    word = value ? (word | bit) : (word & ~bit);
}

std::uint32_t VisibilityBitmap::word_mask(int w) const
{
    const int bits = std::min(32, num_lights_ - 32 * w);
    if (bits <= 0) return 0u;
    return bits == 32 ? 0xFFFFFFFFu : ((1u << bits) - 1u);
}

void VisibilityBitmap::set_all(int x, int y)
{
    if (x < 0 || y < 0 || x >= width_ || y >= height_) throw ContractViolation("bitmap pixel out of range");
    auto px = pixel(x, y);
    for (int w = 0; w < words_per_pixel_; ++w) px[static_cast<std::size_t>(w)] = word_mask(w);
}

std::span<const std::uint32_t> VisibilityBitmap::pixel(int x, int y) const
{
    return std::span<const std::uint32_t>(data_).subspan(offset(x, y), static_cast<std::size_t>(words_per_pixel_));
}

std::span<std::uint32_t> VisibilityBitmap::pixel(int x, int y)
{
    return std::span<std::uint32_t>(data_).subspan(offset(x, y), static_cast<std::size_t>(words_per_pixel_));
}

namespace {

VisibilityBitmap trace(const Scene& scene, const CameraPose& pose, const Intrinsics& intr, bool enlarged)
{
    const auto lights = scene.lights();
    VisibilityBitmap bitmap(intr.buffer_width(enlarged), intr.buffer_height(enlarged), static_cast<int>(lights.size()),
                            pose.frame_index);
    for (int y = 0; y < bitmap.height(); ++y) {
        for (int x = 0; x < bitmap.width(); ++x) {
            const Ray ray = primary_ray(pose, intr, x + 0.5, y + 0.5, enlarged);
            const auto hit = intersect_ray(scene, ray.origin, ray.direction, std::numeric_limits<double>::infinity());
            if (!hit) {
                bitmap.set_all(x, y);
                continue;
            }
            auto px = bitmap.pixel(x, y);
            for (std::size_t i = 0; i < lights.size(); ++i) {
                if (!occluded(scene, hit->position, lights[i].position)) px[i / 32] |= 1u << (i % 32);
            }
        }
    }
    return bitmap;
}

} // namespace

VisibilityBitmap trace_visibility(const Scene& scene, const CameraPose& pose, const Intrinsics& intr)
{
    return trace(scene, pose, intr, true);
}

VisibilityBitmap trace_visibility_display(const Scene& scene, const CameraPose& pose, const Intrinsics& intr)
{
    return trace(scene, pose, intr, false);
}

VisibilityBitmap crop_display_region(const VisibilityBitmap& enlarged, const Intrinsics& intr)
{
    if (enlarged.width() != intr.buffer_width(true) || enlarged.height() != intr.buffer_height(true)) {
        throw ContractViolation("bitmap is not the enlarged buffer size for these intrinsics");
    }
    VisibilityBitmap out(intr.display_width, intr.display_height, enlarged.num_lights(), enlarged.frame());
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            const auto src = enlarged.pixel(x + intr.guard_left(), y + intr.guard_top());
            std::copy(src.begin(), src.end(), out.pixel(x, y).begin());
        }
    }
    return out;
}

std::vector<std::uint8_t> encode_bitmap_dump(const VisibilityBitmap& bitmap)
{
    std::vector<std::uint8_t> out;
    out.reserve(16 + bitmap.byte_size());
    bytes::put_u32(out, static_cast<std::uint32_t>(bitmap.width()));
    bytes::put_u32(out, static_cast<std::uint32_t>(bitmap.height()));
    bytes::put_u32(out, static_cast<std::uint32_t>(bitmap.num_lights()));
    bytes::put_u32(out, static_cast<std::uint32_t>(bitmap.frame()));
    for (const std::uint32_t w : bitmap.words()) bytes::put_u32(out, w);
    return out;
}

VisibilityBitmap decode_bitmap_dump(std::span<const std::uint8_t> data)
{
    bytes::Reader in(data);
    const std::uint32_t w = in.u32();
    const std::uint32_t h = in.u32();
    const std::uint32_t lights = in.u32();
    const std::uint32_t frame = in.u32();
    if (w > (1u << 16) || h > (1u << 16) || lights > 4096) throw DecodeError("implausible bitmap dump header");
    VisibilityBitmap bitmap(static_cast<int>(w), static_cast<int>(h), static_cast<int>(lights), frame);
    if (in.remaining() != bitmap.byte_size()) throw DecodeError("bitmap dump length does not match its header");
    for (auto& word : bitmap.words()) word = in.u32();
    return bitmap;
}

void write_bitmap_dump(const std::filesystem::path& path, const VisibilityBitmap& bitmap)
{
    const auto data = encode_bitmap_dump(bitmap);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(path.string() + ": write failed");
}

VisibilityBitmap read_bitmap_dump(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(path.string() + ": cannot open");
    const std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_bitmap_dump(data);
}

} // namespace dhr
