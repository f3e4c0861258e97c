#include "dhr/math.hpp"

namespace dhr {

namespace {

double minor3(const Mat4& a, int skip_row, int skip_col)
{
    double s[9];
    int k = 0;
    for (int i = 0; i < 4; ++i) {
        if (i == skip_row) continue;
        for (int j = 0; j < 4; ++j) {
            if (j == skip_col) continue;
            s[k++] = a(i, j);
        }
    }
    return s[0] * (s[4] * s[8] - s[5] * s[7]) - s[1] * (s[3] * s[8] - s[5] * s[6]) +
           s[2] * (s[3] * s[7] - s[4] * s[6]);
}

} // namespace

double determinant(const Mat4& a)
{
    double det = 0.0;
    for (int j = 0; j < 4; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        det += sign * a(0, j) * minor3(a, 0, j);
    }
    return det;
}

std::optional<Mat4> inverse(const Mat4& a, double eps)
{
    const double det = determinant(a);
    if (!(std::fabs(det) > eps)) return std::nullopt;
    Mat4 inv;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            // adjugate is the transpose of the cofactor matrix
            inv(j, i) = sign * minor3(a, i, j) / det;
        }
    }
    return inv;
}

} // namespace dhr
