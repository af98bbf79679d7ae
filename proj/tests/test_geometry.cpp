#include "nfisac/geometry.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nfisac;

TEST(BuildUpa, PaperArrayLayout) {
    const auto a = build_upa(10, 10, 0.005, Vec3::Zero(), Vec3(0, 0, 1), Vec3(1, 0, 0));
    ASSERT_EQ(a.size(), 100u);
    double max_x = 0.0, max_y = 0.0;
    for (const auto& e : a.elements()) {
        EXPECT_NEAR(e.z(), 0.0, 1e-15);
        max_x = std::max(max_x, std::abs(e.x()));
        max_y = std::max(max_y, std::abs(e.y()));
    }
    // 4.5 spacings from the centre on each axis.
    EXPECT_NEAR(max_x, 0.0225, 1e-12);
    EXPECT_NEAR(max_y, 0.0225, 1e-12);
    EXPECT_NEAR(a.aperture(), 0.045 * std::sqrt(2.0), 1e-12);
    EXPECT_LT(a.center().norm(), 1e-12);
    EXPECT_NEAR(a.normal().norm(), 1.0, 1e-12);
}

TEST(BuildUpa, RowMajorOrdering) {
    const auto a = build_upa(2, 3, 1.0, Vec3::Zero(), Vec3(0, 0, 1), Vec3(1, 0, 0));
    // Columns along x, rows along y.
    EXPECT_TRUE(a.element(0).isApprox(Vec3(-1, -0.5, 0)));
    EXPECT_TRUE(a.element(1).isApprox(Vec3(0, -0.5, 0)));
    EXPECT_TRUE(a.element(3).isApprox(Vec3(-1, 0.5, 0)));
}

TEST(BuildUpa, SingleElement) {
    const auto a = build_upa(1, 1, 0.01, Vec3(1, 2, 3), Vec3(0, 0, 1), Vec3(1, 0, 0));
    ASSERT_EQ(a.size(), 1u);
    EXPECT_TRUE(a.element(0).isApprox(Vec3(1, 2, 3)));
    EXPECT_EQ(a.aperture(), 0.0);
}

TEST(BuildUpa, TwoElements) {
    const auto a = build_upa(2, 1, 0.01, Vec3::Zero(), Vec3(0, 0, 1), Vec3(1, 0, 0));
    ASSERT_EQ(a.size(), 2u);
    EXPECT_NEAR((a.element(0) - a.element(1)).norm(), 0.01, 1e-15);
    EXPECT_NEAR(a.aperture(), 0.01, 1e-15);
}

TEST(BuildUpa, RejectsDegenerateInput) {
    EXPECT_THROW(build_upa(2, 2, 0.01, Vec3::Zero(), Vec3(0, 0, 1), Vec3(0, 0, 2)), GeometryError);
    EXPECT_THROW(build_upa(0, 2, 0.01, Vec3::Zero(), Vec3(0, 0, 1), Vec3(1, 0, 0)), GeometryError);
    EXPECT_THROW(build_upa(2, 2, 0.0, Vec3::Zero(), Vec3(0, 0, 1), Vec3(1, 0, 0)), GeometryError);
    EXPECT_THROW(build_upa(2, 2, 0.01, Vec3::Zero(), Vec3::Zero(), Vec3(1, 0, 0)), GeometryError);
}

TEST(BuildUpa, TiltedArrayStaysInPlane) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 20; ++t) {
        const Vec3 n(nd(rng), nd(rng), nd(rng));
        const Vec3 ax(nd(rng), nd(rng), nd(rng));
        const Vec3 c(nd(rng), nd(rng), nd(rng));
        const int rows = 1 + t % 4, cols = 2 + t % 3;
        const auto a = build_upa(rows, cols, 0.02, c, n, ax);
        EXPECT_EQ(a.size(), static_cast<std::size_t>(rows * cols));
        EXPECT_NEAR(a.normal().norm(), 1.0, 1e-12);
        EXPECT_LT((a.center() - c).norm(), 1e-9);
        for (const auto& e : a.elements()) EXPECT_NEAR((e - c).dot(a.normal()), 0.0, 1e-12);
    }
}

TEST(Rayleigh, Examples) {
    EXPECT_NEAR(rayleigh_distance(0.071, 0.01), 1.0082, 1e-12);
    EXPECT_EQ(rayleigh_distance(0.0, 0.01), 0.0);
    EXPECT_NEAR(rayleigh_distance(0.1, 0.01), 2.0, 1e-12);
    EXPECT_THROW(rayleigh_distance(0.1, 0.0), ArgumentError);
    EXPECT_THROW(rayleigh_distance(0.1, -1.0), ArgumentError);
}

TEST(Rayleigh, Monotone) {
    EXPECT_LT(rayleigh_distance(0.05, 0.01), rayleigh_distance(0.06, 0.01));
    EXPECT_GT(rayleigh_distance(0.05, 0.01), rayleigh_distance(0.05, 0.02));
}

TEST(Angle, Examples) {
    EXPECT_NEAR(angle_between(Vec3(1, 2, 3), Vec3(1, 2, 3)), 0.0, 1e-7);
    EXPECT_NEAR(angle_between(Vec3(1, 0, 0), Vec3(0, 1, 0)), kPi / 2, 1e-15);
    EXPECT_NEAR(angle_between(Vec3(0, 1, 1), Vec3(0, 0, 1)), kPi / 4, 1e-15);
    EXPECT_THROW(angle_between(Vec3::Zero(), Vec3(0, 0, 1)), ArgumentError);
}

TEST(Angle, SymmetricAndScaleInvariant) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.01, 100.0);
    for (int t = 0; t < 200; ++t) {
        const Vec3 p(nd(rng), nd(rng), nd(rng));
        const Vec3 w(nd(rng), nd(rng), nd(rng));
        const double a = angle_between(p, w);
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, kPi);
        EXPECT_DOUBLE_EQ(a, angle_between(w, p));
        EXPECT_NEAR(a, angle_between(ud(rng) * p, ud(rng) * w), 1e-12);
    }
}
