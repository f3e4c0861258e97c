#include "dhr/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "dhr/error.hpp"

namespace dhr {

BitwiseError bitwise_error(const VisibilityBitmap& actual, const VisibilityBitmap& predicted,
                           std::span<const std::uint8_t> mask)
{
    if (actual.width() != predicted.width() || actual.height() != predicted.height() ||
        actual.num_lights() != predicted.num_lights()) {
        throw ContractViolation("bitwise_error: bitmap shapes differ");
    }
    const auto pixels = static_cast<std::size_t>(actual.width()) * static_cast<std::size_t>(actual.height());
    if (!mask.empty() && mask.size() != pixels) throw ContractViolation("bitwise_error: mask size differs");

    const int lights = actual.num_lights();
    std::vector<std::size_t> differing(static_cast<std::size_t>(lights), 0);
    std::size_t compared = 0;
    for (int y = 0; y < actual.height(); ++y) {
        for (int x = 0; x < actual.width(); ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(actual.width()) + static_cast<std::size_t>(x);
            if (!mask.empty() && !mask[i]) continue;
            ++compared;
            const auto a = actual.pixel(x, y);
            const auto b = predicted.pixel(x, y);
            for (int l = 0; l < lights; ++l) {
                const auto w = static_cast<std::size_t>(l / 32);
                if (((a[w] ^ b[w]) >> (l % 32)) & 1u) ++differing[static_cast<std::size_t>(l)];
            }
        }
    }
    BitwiseError out;
    out.compared = compared;
    for (const std::size_t d : differing) {
        out.per_light.push_back(compared ? static_cast<double>(d) / static_cast<double>(compared) : 0.0);
    }
    out.mean = out.per_light.empty()
                   ? 0.0
                   : std::accumulate(out.per_light.begin(), out.per_light.end(), 0.0) / static_cast<double>(lights);
    return out;
}

double psnr(const Image8& reference, const Image8& test)
{
    if (reference.width != test.width || reference.height != test.height || reference.rgb.size() != test.rgb.size()) {
        throw ContractViolation("psnr: image sizes differ");
    }
    if (reference.rgb.empty()) return kPsnrIdentical;
    double sum = 0.0;
    for (std::size_t i = 0; i < reference.rgb.size(); ++i) {
        const double d = static_cast<double>(reference.rgb[i]) - static_cast<double>(test.rgb[i]);
        sum += d * d;
    }
    if (sum == 0.0) return kPsnrIdentical;
    const double mse = sum / static_cast<double>(reference.rgb.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::vector<double> luma(const Image8& img)
{
    std::vector<double> y(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = 0.299 * img.rgb[3 * i] + 0.587 * img.rgb[3 * i + 1] + 0.114 * img.rgb[3 * i + 2];
    }
    return y;
}

std::array<double, kWindow> gaussian_taps()
{
    std::array<double, kWindow> g{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += g[static_cast<std::size_t>(i)];
    }
    for (auto& v : g) v /= sum;
    return g;
}

// Separable "valid" filtering: output is (w - 10) x (h - 10).
std::vector<double> blur_valid(const std::vector<double>& src, int w, int h, const std::array<double, kWindow>& g)
{
    const int ow = w - kWindow + 1;
    const int oh = h - kWindow + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWindow; ++k) s += g[static_cast<std::size_t>(k)] * src[static_cast<std::size_t>(y * w + x + k)];
            tmp[static_cast<std::size_t>(y * ow + x)] = s;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh));
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWindow; ++k) s += g[static_cast<std::size_t>(k)] * tmp[static_cast<std::size_t>((y + k) * ow + x)];
            out[static_cast<std::size_t>(y * ow + x)] = s;
        }
    }
    return out;
}

} // namespace

double ssim(const Image8& reference, const Image8& test)
{
    if (reference.width != test.width || reference.height != test.height) throw ContractViolation("ssim: image sizes differ");
    if (reference.width < kWindow || reference.height < kWindow) throw ContractViolation("ssim: images must be at least 11x11");
    const int w = reference.width;
    const int h = reference.height;
    const auto a = luma(reference);
    const auto b = luma(test);
    std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto g = gaussian_taps();
    const auto mu_a = blur_valid(a, w, h, g);
    const auto mu_b = blur_valid(b, w, h, g);
    const auto e_aa = blur_valid(aa, w, h, g);
    const auto e_bb = blur_valid(bb, w, h, g);
    const auto e_ab = blur_valid(ab, w, h, g);

    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double var_a = e_aa[i] - ma * ma;
        const double var_b = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
    return sum / static_cast<double>(mu_a.size());
}

namespace {

std::vector<double> average_ranks(std::span<const double> v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    return rank;
}

} // namespace

double spearman(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw ContractViolation("spearman: sequences differ in length");
    if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return cov / std::sqrt(va * vb);
}

namespace {

std::string fmt6(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

std::string frame_log_csv(std::span<const FrameLog> rows, int num_lights)
{
    std::string out = "n,r,m,p,x";
    for (int l = 0; l < num_lights; ++l) out += ",bitwise_error_l" + std::to_string(l);
    out += ",bitwise_error_mean,psnr_db,ssim,response_time_ms,displayed_lag_ms,bytes_received,compression_ratio\n";
    for (const FrameLog& row : rows) {
        out += std::to_string(row.n) + ',' + std::to_string(row.r) + ',' + std::to_string(row.m) + ',' +
               std::to_string(row.p) + ',' + std::to_string(row.x);
        for (int l = 0; l < num_lights; ++l) {
            const auto li = static_cast<std::size_t>(l);
            out += ',' + fmt6(li < row.bitwise_error.size() ? row.bitwise_error[li] : std::nan(""));
        }
        out += ',' + fmt6(row.bitwise_error_mean) + ',' + fmt6(row.psnr_db) + ',' + fmt6(row.ssim) + ',' +
               fmt6(row.response_time_ms) + ',' + fmt6(row.displayed_lag_ms) + ',' + std::to_string(row.bytes_received) +
               ',' + fmt6(row.compression_ratio) + '\n';
    }
    return out;
}

void write_frame_log(const std::filesystem::path& path, std::span<const FrameLog> rows, int num_lights)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(path.string() + ": cannot open for writing");
    out << frame_log_csv(rows, num_lights);
    if (!out) throw Error(path.string() + ": write failed");
}

} // namespace dhr
