#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dhr/image.hpp"
#include "dhr/visibility.hpp"

namespace dhr {

/// PSNR reported for identical images.
inline constexpr double kPsnrIdentical = 99.0;

struct BitwiseError {
    std::vector<double> per_light; ///< fraction of compared pixels whose bit differs
    double mean = 0.0;
    std::size_t compared = 0;
};

/// Per-light disagreement between two display-sized bitmaps over pixels with mask != 0
/// (every pixel when `mask` is empty). Symmetric in its bitmap arguments.
BitwiseError bitwise_error(const VisibilityBitmap& actual, const VisibilityBitmap& predicted,
                           std::span<const std::uint8_t> mask = {});

/// 10 log10(255^2 / MSE) over all RGB samples; kPsnrIdentical when MSE is zero.
double psnr(const Image8& reference, const Image8& test);

/// Mean SSIM on Rec. 601 luma with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// evaluated at every window position fully inside the image. Both images must be at least 11x11.
double ssim(const Image8& reference, const Image8& test);

/// Spearman rank correlation with average ranks for ties. NaN when either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

/// One row per displayed frame. m and p are -1 until a bitmap has arrived; metric fields are NaN
/// when metrics are disabled.
struct FrameLog {
    std::int64_t n = 0;
    std::int64_t r = 0;
    std::int64_t m = -1;
    std::int64_t p = -1;
    std::int64_t x = 0;
    std::vector<double> bitwise_error;
    double bitwise_error_mean = 0.0;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double response_time_ms = -1.0;
    double displayed_lag_ms = 0.0;
    std::uint64_t bytes_received = 0;
    double compression_ratio = 0.0;
};

/// Header plus one line per row; numbers use 6 significant digits.
std::string frame_log_csv(std::span<const FrameLog> rows, int num_lights);
void write_frame_log(const std::filesystem::path& path, std::span<const FrameLog> rows, int num_lights);

} // namespace dhr
