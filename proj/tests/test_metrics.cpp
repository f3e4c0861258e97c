#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "dhr/error.hpp"
#include "dhr/metrics.hpp"

using namespace dhr;

namespace {

VisibilityBitmap random_bitmap(std::mt19937_64& rng, int w, int h, int lights)
{
    VisibilityBitmap b(w, h, lights);
    std::bernoulli_distribution coin(0.5);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int l = 0; l < lights; ++l) b.set_bit(x, y, l, coin(rng));
    return b;
}

Image8 solid(int w, int h, std::uint8_t v) { return {w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w * h * 3), v)}; }

Image8 random_image(std::mt19937_64& rng, int w, int h)
{
    Image8 img = solid(w, h, 0);
    for (auto& v : img.rgb) v = static_cast<std::uint8_t>(rng() & 0xFF);
    return img;
}

// Smooth image plus noise, so SSIM is well away from both 0 and 1.
Image8 textured(std::mt19937_64& rng, int w, int h, double noise)
{
    std::normal_distribution<double> g(0.0, noise);
    Image8 img = solid(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                const double v = 128 + 80 * std::sin(0.2 * x + c) * std::cos(0.15 * y) + g(rng);
                img.rgb[static_cast<std::size_t>((y * w + x) * 3 + c)] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
    return img;
}

Image8 crop(const Image8& img, int x0, int y0, int w, int h)
{
    Image8 out = solid(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                out.rgb[static_cast<std::size_t>((y * w + x) * 3 + c)] =
                    img.rgb[static_cast<std::size_t>(((y + y0) * img.width + x + x0) * 3 + c)];
    return out;
}

// Direct per-window evaluation with a full 2-D Gaussian kernel; shares nothing with the separable code.
double naive_ssim(const Image8& a, const Image8& b)
{
    auto lum = [](const Image8& img, int x, int y) {
        const auto i = static_cast<std::size_t>((y * img.width + x) * 3);
        return 0.299 * img.rgb[i] + 0.587 * img.rgb[i + 1] + 0.114 * img.rgb[i + 2];
    };
    double kernel[11][11];
    double total = 0.0;
    for (int j = 0; j < 11; ++j)
        for (int i = 0; i < 11; ++i) total += kernel[j][i] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / 4.5);
    const double c1 = 6.5025, c2 = 58.5225;
    double sum = 0.0;
    int windows = 0;
    for (int y = 0; y + 11 <= a.height; ++y) {
        for (int x = 0; x + 11 <= a.width; ++x) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (int j = 0; j < 11; ++j)
                for (int i = 0; i < 11; ++i) {
                    const double w = kernel[j][i] / total;
                    const double va = lum(a, x + i, y + j), vb = lum(b, x + i, y + j);
                    ma += w * va;
                    mb += w * vb;
                    saa += w * va * va;
                    sbb += w * vb * vb;
                    sab += w * va * vb;
                }
            const double var_a = saa - ma * ma, var_b = sbb - mb * mb, cov = sab - ma * mb;
            sum += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
            ++windows;
        }
    }
    return sum / windows;
}

} // namespace

TEST(BitwiseError, Examples)
{
    std::mt19937_64 rng(1);
    const VisibilityBitmap a = random_bitmap(rng, 16, 9, 3);
    const BitwiseError same = bitwise_error(a, a);
    EXPECT_EQ(same.per_light, (std::vector<double>{0, 0, 0}));
    EXPECT_EQ(same.mean, 0.0);
    EXPECT_EQ(same.compared, 144u);

    VisibilityBitmap lit(16, 9, 3), dark(16, 9, 3);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 16; ++x) lit.set_all(x, y);
    const BitwiseError opposite = bitwise_error(dark, lit);
    EXPECT_EQ(opposite.per_light, (std::vector<double>{1, 1, 1}));
    EXPECT_EQ(opposite.mean, 1.0);

    VisibilityBitmap p(2, 2, 1), q(2, 2, 1);
    q.set_bit(1, 0, 0);
    EXPECT_EQ(bitwise_error(p, q).per_light, std::vector<double>{0.25});
}

TEST(BitwiseError, SymmetricAndZeroOnlyWhenIdentical)
{
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) {
        const VisibilityBitmap a = random_bitmap(rng, 12, 7, 35);
        VisibilityBitmap b = random_bitmap(rng, 12, 7, 35);
        const auto ab = bitwise_error(a, b), ba = bitwise_error(b, a);
        EXPECT_EQ(ab.per_light, ba.per_light);
        EXPECT_GT(ab.mean, 0.0);

        VisibilityBitmap c = a;
        const int x = static_cast<int>(rng() % 12), y = static_cast<int>(rng() % 7), l = static_cast<int>(rng() % 35);
        c.set_bit(x, y, l, !c.get_bit(x, y, l));
        const auto ac = bitwise_error(a, c);
        EXPECT_DOUBLE_EQ(ac.per_light[static_cast<std::size_t>(l)], 1.0 / 84.0);
        EXPECT_DOUBLE_EQ(ac.mean, 1.0 / 84.0 / 35.0);
    }
}

TEST(BitwiseError, MaskRestrictsTheComparison)
{
    VisibilityBitmap p(2, 2, 2), q(2, 2, 2);
    q.set_bit(0, 0, 0);
    q.set_bit(1, 1, 1);
    const std::vector<std::uint8_t> mask{0, 1, 1, 1};
    const auto e = bitwise_error(p, q, mask);
    EXPECT_EQ(e.compared, 3u);
    EXPECT_EQ(e.per_light, (std::vector<double>{0.0, 1.0 / 3.0}));
    const std::vector<std::uint8_t> nothing(4, 0);
    EXPECT_EQ(bitwise_error(p, q, nothing).compared, 0u);
}

TEST(BitwiseError, ShapeMismatchIsRejected)
{
    EXPECT_THROW(bitwise_error(VisibilityBitmap(2, 2, 1), VisibilityBitmap(2, 3, 1)), ContractViolation);
    EXPECT_THROW(bitwise_error(VisibilityBitmap(2, 2, 1), VisibilityBitmap(2, 2, 2)), ContractViolation);
    const std::vector<std::uint8_t> mask(3, 1);
    EXPECT_THROW(bitwise_error(VisibilityBitmap(2, 2, 1), VisibilityBitmap(2, 2, 1), mask), ContractViolation);
}

TEST(Psnr, Examples)
{
    std::mt19937_64 rng(3);
    const Image8 img = random_image(rng, 20, 20);
    EXPECT_EQ(psnr(img, img), 99.0);
    EXPECT_DOUBLE_EQ(psnr(solid(20, 20, 0), solid(20, 20, 255)), 0.0);

    Image8 off = img;
    off.rgb[17] ^= 1; // a single sample off by one: MSE = 1 / 1200
    EXPECT_NEAR(psnr(img, off), 10.0 * std::log10(65025.0 * 1200.0), 1e-9);
    EXPECT_THROW(psnr(solid(20, 20, 0), solid(20, 21, 0)), ContractViolation);
}

TEST(Psnr, InvariantUnderSharedPixelPermutation)
{
    std::mt19937_64 rng(4);
    const Image8 a = random_image(rng, 32, 24);
    const Image8 b = random_image(rng, 32, 24);
    std::vector<std::size_t> perm(32 * 24);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    Image8 pa = a, pb = b;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            pa.rgb[3 * i + c] = a.rgb[3 * perm[i] + c];
            pb.rgb[3 * i + c] = b.rgb[3 * perm[i] + c];
        }
    }
    EXPECT_NEAR(psnr(pa, pb), psnr(a, b), 1e-9);
}

TEST(Ssim, IdenticalIsOne)
{
    std::mt19937_64 rng(5);
    const Image8 img = textured(rng, 40, 30, 10);
    EXPECT_NEAR(ssim(img, img), 1.0, 1e-12);
}

TEST(Ssim, CheckerboardAgainstItsInverseIsNegative)
{
    Image8 a = solid(32, 32, 0), b = solid(32, 32, 0);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            for (int c = 0; c < 3; ++c) {
                const auto i = static_cast<std::size_t>((y * 32 + x) * 3 + c);
                a.rgb[i] = ((x + y) % 2) ? 255 : 0;
                b.rgb[i] = 255 - a.rgb[i];
            }
    const double s = ssim(a, b);
    EXPECT_LT(s, 0.0);
    EXPECT_NEAR(s, naive_ssim(a, b), 1e-9);
}

TEST(Ssim, MatchesDirectWindowedEvaluation)
{
    std::mt19937_64 rng(6);
    for (double noise : {2.0, 15.0, 60.0}) {
        const Image8 a = textured(rng, 37, 23, 5);
        const Image8 b = textured(rng, 37, 23, noise);
        const double s = ssim(a, b);
        EXPECT_NEAR(s, naive_ssim(a, b), 1e-9);
        EXPECT_GT(s, -1.0);
        EXPECT_LT(s, 1.0);
    }
}

TEST(Ssim, SharedTranslationWithInteriorCrop)
{
    std::mt19937_64 rng(7);
    const Image8 a = textured(rng, 60, 50, 8);
    const Image8 b = textured(rng, 60, 50, 25);
    // Translate both by (5, 3) with fresh content entering from the edge, then compare the shared interior.
    Image8 ta = random_image(rng, 60, 50), tb = random_image(rng, 60, 50);
    for (int y = 0; y + 3 < 50; ++y)
        for (int x = 0; x + 5 < 60; ++x)
            for (int c = 0; c < 3; ++c) {
                const auto dst = static_cast<std::size_t>(((y + 3) * 60 + x + 5) * 3 + c);
                const auto src = static_cast<std::size_t>((y * 60 + x) * 3 + c);
                ta.rgb[dst] = a.rgb[src];
                tb.rgb[dst] = b.rgb[src];
            }
    const double original = ssim(crop(a, 4, 4, 40, 30), crop(b, 4, 4, 40, 30));
    const double moved = ssim(crop(ta, 9, 7, 40, 30), crop(tb, 9, 7, 40, 30));
    EXPECT_DOUBLE_EQ(original, moved);
    EXPECT_NE(ssim(ta, tb), ssim(a, b)) << "the uncropped images really differ";
}

TEST(Ssim, PreconditionsAreChecked)
{
    EXPECT_THROW(ssim(solid(10, 20, 0), solid(10, 20, 0)), ContractViolation);
    EXPECT_THROW(ssim(solid(20, 20, 0), solid(20, 21, 0)), ContractViolation);
    EXPECT_NO_THROW(ssim(solid(11, 11, 0), solid(11, 11, 9)));
}

TEST(Spearman, RanksAndTies)
{
    const std::vector<double> a{1, 2, 3, 4}, up{10, 20, 35, 400}, down{4, 3, 2, 1};
    EXPECT_DOUBLE_EQ(spearman(a, up), 1.0);
    EXPECT_DOUBLE_EQ(spearman(a, down), -1.0);
    const std::vector<double> tied{1, 2, 2, 3};
    EXPECT_NEAR(spearman(tied, a), 4.5 / std::sqrt(22.5), 1e-12);
    const std::vector<double> flat{5, 5, 5, 5};
    EXPECT_TRUE(std::isnan(spearman(flat, a)));
    EXPECT_TRUE(std::isnan(spearman(std::vector<double>{1}, std::vector<double>{2})));
    EXPECT_THROW(spearman(a, std::vector<double>{1, 2}), ContractViolation);
}

namespace {

FrameLog row(std::int64_t n)
{
    FrameLog r;
    r.n = n;
    r.r = n - 1;
    r.m = n - 3;
    r.p = 3;
    r.x = 2;
    r.bitwise_error = {0.125, 1.0 / 3.0};
    r.bitwise_error_mean = (0.125 + 1.0 / 3.0) / 2.0;
    r.psnr_db = 31.25;
    r.ssim = 0.987654321;
    r.response_time_ms = 55.5;
    r.displayed_lag_ms = 11.1;
    r.bytes_received = 4096;
    r.compression_ratio = 12.5;
    return r;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(FrameLogCsv, HeaderOnlyForAnEmptyRun)
{
    EXPECT_EQ(frame_log_csv({}, 2),
              "n,r,m,p,x,bitwise_error_l0,bitwise_error_l1,bitwise_error_mean,psnr_db,ssim,response_time_ms,"
              "displayed_lag_ms,bytes_received,compression_ratio\n");
}

TEST(FrameLogCsv, OneLinePerRowWithSixSignificantDigits)
{
    const std::vector<FrameLog> rows{row(3), row(4), row(5)};
    const std::string csv = frame_log_csv(rows, 2);
    EXPECT_EQ(count_lines(csv), 4u);
    std::istringstream in(csv);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    EXPECT_EQ(first, "3,2,0,3,2,0.125,0.333333,0.229167,31.25,0.987654,55.5,11.1,4096,12.5");
    EXPECT_EQ(csv, frame_log_csv(rows, 2));
}

TEST(FrameLogCsv, WrittenFileMatchesAndBadPathFails)
{
    const auto dir = std::filesystem::temp_directory_path() / "dhr_metrics_test";
    std::filesystem::create_directories(dir);
    const std::vector<FrameLog> rows{row(1)};
    write_frame_log(dir / "log.csv", rows, 2);
    std::ifstream in(dir / "log.csv", std::ios::binary);
    const std::string content((std::istreambuf_iterator<char>(in)), {});
    EXPECT_EQ(content, frame_log_csv(rows, 2));
    EXPECT_THROW(write_frame_log(dir / "missing" / "log.csv", rows, 2), Error);
    std::filesystem::remove_all(dir);
}
