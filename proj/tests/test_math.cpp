#include <gtest/gtest.h>

#include <random>

#include "dhr/math.hpp"

using namespace dhr;

TEST(Math, CrossProductIsOrthogonalAndRightHanded)
{
    const Vec3 x{1, 0, 0}, y{0, 1, 0};
    EXPECT_EQ(cross(x, y), (Vec3{0, 0, 1}));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 100; ++i) {
        const Vec3 a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
        const Vec3 c = cross(a, b);
        EXPECT_NEAR(dot(c, a), 0.0, 1e-9);
        EXPECT_NEAR(dot(c, b), 0.0, 1e-9);
    }
}

TEST(Math, DeterminantOfTriangularMatrixIsDiagonalProduct)
{
    Mat4 m = Mat4::identity();
    m(0, 0) = 2;
    m(1, 1) = 3;
    m(2, 2) = -4;
    m(3, 3) = 0.5;
    m(0, 3) = 7;
    m(1, 2) = -2;
    EXPECT_DOUBLE_EQ(determinant(m), 2 * 3 * -4 * 0.5);
}

TEST(Math, InverseTimesMatrixIsIdentity)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int k = 0; k < 50; ++k) {
        Mat4 m;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) m(r, c) = u(rng) + (r == c ? 4.0 : 0.0);
        const auto inv = inverse(m);
        ASSERT_TRUE(inv);
        const Mat4 p = m * *inv;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) EXPECT_NEAR(p(r, c), r == c ? 1.0 : 0.0, 1e-12);
    }
}

TEST(Math, SingularMatrixHasNoInverse)
{
    Mat4 m = Mat4::identity();
    m(2, 2) = 0.0;
    EXPECT_FALSE(inverse(m));
}

TEST(Math, MatrixVectorProductActsOnColumns)
{
    Mat4 t = Mat4::identity();
    t(0, 3) = 5;
    const Vec4 p = t * Vec4{1, 2, 3, 1};
    EXPECT_EQ(p.x, 6);
    EXPECT_EQ(p.y, 2);
    EXPECT_EQ(p.w, 1);
}
