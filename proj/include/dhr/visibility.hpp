#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dhr/camera.hpp"
#include "dhr/scene.hpp"

namespace dhr {

/// Per-pixel light visibility, one bit per light. Pixels are row-major; each pixel owns
/// words_per_pixel() consecutive 32-bit words and light i lives in word i / 32 at bit i % 32.
/// Bits at positions >= num_lights are always zero.
class VisibilityBitmap {
public:
    VisibilityBitmap() = default;
    VisibilityBitmap(int width, int height, int num_lights, FrameIndex frame = 0);

    int width() const { return width_; }
    int height() const { return height_; }
    int num_lights() const { return num_lights_; }
    int words_per_pixel() const { return words_per_pixel_; }
    FrameIndex frame() const { return frame_; }
    void set_frame(FrameIndex frame) { frame_ = frame; }

    bool get_bit(int x, int y, int light) const;
    void set_bit(int x, int y, int light, bool value = true);

    /// Marks every light visible at (x, y).
    void set_all(int x, int y);

    std::span<const std::uint32_t> pixel(int x, int y) const;
    std::span<std::uint32_t> pixel(int x, int y);

    std::span<const std::uint32_t> words() const { return data_; }
    std::span<std::uint32_t> words() { return data_; }
    std::size_t byte_size() const { return data_.size() * sizeof(std::uint32_t); }

    /// Mask of the valid bits in word `w` of a pixel.
    std::uint32_t word_mask(int w) const;

    friend bool operator==(const VisibilityBitmap&, const VisibilityBitmap&) = default;

private:
    std::size_t offset(int x, int y) const;
    void check(int x, int y, int light) const;

    int width_ = 0;
    int height_ = 0;
    int num_lights_ = 0;
    int words_per_pixel_ = 0;
    FrameIndex frame_ = 0;
    std::vector<std::uint32_t> data_;
};

/// Shadow-ray visibility over the enlarged buffer at `pose`. Miss pixels get every light bit set.
VisibilityBitmap trace_visibility(const Scene& scene, const CameraPose& pose, const Intrinsics& intr);

/// Same, over the display region only (no guard band).
VisibilityBitmap trace_visibility_display(const Scene& scene, const CameraPose& pose, const Intrinsics& intr);

/// Copies the display-sized window out of an enlarged bitmap.
VisibilityBitmap crop_display_region(const VisibilityBitmap& enlarged, const Intrinsics& intr);

/// Dump format: width, height, num_lights, frame as u32 little-endian, then the data words little-endian.
std::vector<std::uint8_t> encode_bitmap_dump(const VisibilityBitmap& bitmap);
VisibilityBitmap decode_bitmap_dump(std::span<const std::uint8_t> bytes);
void write_bitmap_dump(const std::filesystem::path& path, const VisibilityBitmap& bitmap);
VisibilityBitmap read_bitmap_dump(const std::filesystem::path& path);

} // namespace dhr
