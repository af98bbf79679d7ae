#include "nfisac/capon.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace nfisac;

namespace {

const ChannelModelParams kParams{0.01, 2.0};

struct Rig {
    ArrayGeometry tx = build_upa(10, 10, 0.005, Vec3::Zero(), Vec3(0, 0, 1), Vec3(1, 0, 0));
    ArrayGeometry rx = build_upa(10, 10, 0.005, Vec3(0, 0.06, 0), Vec3(0, 0, 1), Vec3(1, 0, 0));
    GridSpec grid{-0.1, 0.1, 0.05, 0.25, 0.01, 0.0};
};

SignalBlock white_block(Eigen::Index n, Eigen::Index T, std::uint64_t seed) {
    CovarianceDecomposition d{{}, CMatrix::Identity(n, n)};
    return sample_transmit_block(d, T, seed);
}

}  // namespace

TEST(Capon, SingleTargetPeakAtTarget) {
    Rig s;
    const Vec3 target(0, -0.03, 0.15);
    const auto x = white_block(100, 400, 1);
    const auto h = roundtrip_channel(nearfield_channel(s.tx, target, kParams),
                                     nearfield_channel(s.rx, target, kParams, Direction::incoming), 1.0);
    // A little noise keeps R_Y invertible.
    const auto y = simulate_echoes(x, {h}, 1e-14, 2);
    const auto g = capon_spectrum(x, y, s.tx, s.rx, s.grid, kParams);
    Eigen::Index i, j;
    g.values.maxCoeff(&i, &j);
    EXPECT_LT((g.spec.point(i, j) - target).norm(), 0.015);
    const auto peaks = find_peaks(g, 1, 0.05);
    EXPECT_LT((peaks.peaks[0].position - target).norm(), 0.015);
}

TEST(Capon, ZeroEchoGivesMinusInfinity) {
    Rig s;
    const auto x = white_block(100, 100, 1);
    SignalBlock y;
    y.samples = CMatrix::Zero(100, 100);
    const auto g = capon_spectrum(x, y, s.tx, s.rx, s.grid, kParams);
    EXPECT_TRUE((g.values.array() == -std::numeric_limits<double>::infinity()).all());
}

TEST(Capon, PhaseInvarianceOfSteering) {
    // |beta| at a point is unchanged when both steering vectors pick up a common phase.
    Rig s;
    const auto x = white_block(100, 1000, 3);
    const Vec3 target(0, 0.02, 0.12);
    const auto h = roundtrip_channel(nearfield_channel(s.tx, target, kParams),
                                     nearfield_channel(s.rx, target, kParams, Direction::incoming), 1.0);
    // Noise at the echo's total power keeps R_Y well conditioned.
    const double echo = sample_covariance(simulate_echoes(x, {h}, 0.0, 4)).trace().real();
    const auto y = simulate_echoes(x, {h}, echo, 4);
    const CMatrix ryi = sample_covariance(y).inverse();
    const CMatrix rxi = sample_covariance(x).inverse();
    CVector ht = nearfield_channel(s.tx, target, kParams).normalized();
    CVector hr = nearfield_channel(s.rx, target, kParams, Direction::incoming).normalized();
    auto beta = [&](const CVector& a, const CVector& b) {
        const Complex num = (b.adjoint() * ryi * y.samples * x.samples.adjoint() * a.conjugate()).value();
        return std::abs(num) / (1000.0 * (b.adjoint() * ryi * b).value().real() * (a.transpose() * rxi * a.conjugate()).value().real());
    };
    const double b0 = beta(ht, hr);
    const Complex ph = std::polar(1.0, 0.7), pr = std::polar(1.0, -2.1);
    EXPECT_NEAR(beta(ph * ht, pr * hr), b0, 1e-12 * b0);
    // The library value at the target cell is the same quantity in dB.
    const GridSpec cell{0.02, 0.02, 0.12, 0.12, 0.01, 0.0};
    const auto g = capon_spectrum(x, y, s.tx, s.rx, cell, kParams);
    EXPECT_NEAR(g.values(0, 0), 20 * std::log10(b0), 1e-8);
}

TEST(Capon, ScalingEchoKeepsArgmax) {
    Rig s;
    const auto x = white_block(100, 300, 5);
    const Vec3 target(0, 0.04, 0.2);
    const auto h = roundtrip_channel(nearfield_channel(s.tx, target, kParams),
                                     nearfield_channel(s.rx, target, kParams, Direction::incoming), 1.0);
    auto y = simulate_echoes(x, {h}, 1e-13, 6);
    Eigen::Index i0, j0, i1, j1;
    capon_spectrum(x, y, s.tx, s.rx, s.grid, kParams).values.maxCoeff(&i0, &j0);
    y.samples *= 37.0;
    capon_spectrum(x, y, s.tx, s.rx, s.grid, kParams).values.maxCoeff(&i1, &j1);
    EXPECT_EQ(i0, i1);
    EXPECT_EQ(j0, j1);
}

TEST(Capon, LoadingConverges) {
    Rig s;
    const auto x = white_block(100, 400, 7);
    const Vec3 target(0, -0.05, 0.1);
    const auto h = roundtrip_channel(nearfield_channel(s.tx, target, kParams),
                                     nearfield_channel(s.rx, target, kParams, Direction::incoming), 1.0);
    const auto y = simulate_echoes(x, {h}, 1e-12, 8);
    const auto ref = capon_spectrum(x, y, s.tx, s.rx, s.grid, kParams);
    std::vector<double> diffs;
    for (double delta : {1e-2, 1e-4, 1e-6}) {
        CaponOptions o;
        o.diagonal_loading = delta;
        diffs.push_back((capon_spectrum(x, y, s.tx, s.rx, s.grid, kParams, o).values - ref.values).norm());
    }
    EXPECT_GT(diffs[0], diffs[1]);
    EXPECT_GT(diffs[1], diffs[2]);
}

TEST(Capon, SingularCovarianceFallsBackOrThrows) {
    Rig s;
    // Rank-one transmit: R_X singular.
    CovarianceDecomposition d{{CVector::Ones(100)}, CMatrix::Zero(100, 100)};
    const auto x = sample_transmit_block(d, 100, 1);
    const auto y = simulate_echoes(x, {}, 1e-12, 2, 100);
    const auto g = capon_spectrum(x, y, s.tx, s.rx, s.grid, kParams);
    ASSERT_FALSE(g.notes.empty());
    EXPECT_NE(g.notes.front().find("R_X"), std::string::npos);
    CaponOptions strict;
    strict.fallback_loading = 0.0;
    try {
        capon_spectrum(x, y, s.tx, s.rx, s.grid, kParams, strict);
        FAIL() << "expected a singularity error";
    } catch (const SingularityError& e) {
        EXPECT_NE(std::string(e.what()).find("R_X"), std::string::npos);
    }
}

TEST(Capon, DimensionChecks) {
    Rig s;
    const auto x = white_block(100, 50, 1);
    const auto y = white_block(9, 50, 2);
    EXPECT_THROW(capon_spectrum(x, y, s.tx, s.rx, s.grid, kParams), ArgumentError);
}

TEST(FindPeaks, SingleBumpAndTies) {
    GridSpec spec{0, 1, 0, 1, 0.1, 0};
    auto bump = [](const Vec3& c) {
        return [c](const Vec3& p) { return -((p - c).squaredNorm()); };
    };
    const auto g = evaluate_grid(spec, bump(Vec3(0, 0.3, 0.7)));
    const auto one = find_peaks(g, 1, 0.05);
    ASSERT_EQ(one.peaks.size(), 1u);
    EXPECT_NEAR(one.peaks[0].position.y(), 0.3, 1e-12);
    EXPECT_NEAR(one.peaks[0].position.z(), 0.7, 1e-12);

    // Two equal bumps: ordered by y, then z.
    const auto twin = evaluate_grid(spec, [](const Vec3& p) {
        const double a = (p - Vec3(0, 0.8, 0.2)).squaredNorm();
        const double b = (p - Vec3(0, 0.2, 0.6)).squaredNorm();
        return std::exp(-a / 0.01) + std::exp(-b / 0.01);
    });
    const auto two = find_peaks(twin, 2, 0.05);
    ASSERT_EQ(two.peaks.size(), 2u);
    EXPECT_NEAR(two.peaks[0].position.y(), 0.2, 1e-12);
    EXPECT_NEAR(two.peaks[1].position.y(), 0.8, 1e-12);
    EXPECT_FALSE(two.shortfall);
}

TEST(FindPeaks, ShortfallAndSeparation) {
    GridSpec spec{0, 1, 0, 1, 0.1, 0};
    const auto g = evaluate_grid(spec, [](const Vec3& p) { return -(p - Vec3(0, 0.5, 0.5)).squaredNorm(); });
    const auto r = find_peaks(g, 3, 0.05);
    EXPECT_EQ(r.peaks.size(), 1u);
    EXPECT_TRUE(r.shortfall);
    EXPECT_THROW(find_peaks(g, 0, 0.05), ArgumentError);
}

TEST(GridSpecTest, CountsAndValidation) {
    GridSpec def;
    EXPECT_EQ(def.ny(), 121);
    EXPECT_EQ(def.nz(), 66);
    GridSpec bad;
    bad.step = 0;
    EXPECT_THROW(bad.validate(), ArgumentError);
}

TEST(GridCsv, HeaderDeclaresUnits) {
    GridSpec spec{0, 0.02, 0.1, 0.11, 0.01, 0};
    const auto g = evaluate_grid(spec, [](const Vec3& p) { return p.y(); });
    const auto path = std::filesystem::temp_directory_path() / "nfisac_grid.csv";
    write_grid_csv(path.string(), g);
    std::ifstream in(path);
    std::string l1, l2;
    std::getline(in, l1);
    std::getline(in, l2);
    EXPECT_EQ(l1.rfind("# ", 0), 0u);
    EXPECT_NE(l1.find("unit=dB"), std::string::npos);
    EXPECT_EQ(l2, "y_m,z_m,value_dB");
    int rows = 0;
    for (std::string l; std::getline(in, l);) ++rows;
    EXPECT_EQ(rows, 3 * 2);
    std::filesystem::remove(path);
}
