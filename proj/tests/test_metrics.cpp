#include "nfisac/embedding.hpp"
#include "nfisac/metrics.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nfisac;

namespace {

struct Rng {
    explicit Rng(std::uint64_t s) : g(s) {}
    std::mt19937_64 g;
    std::normal_distribution<double> nd;
    Complex c() { return {nd(g), nd(g)}; }
    CVector vec(Eigen::Index n) {
        CVector v(n);
        for (auto& x : v) x = c();
        return v;
    }
    CMatrix psd(Eigen::Index n, Eigen::Index rank) {
        CMatrix a(n, rank);
        for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = c();
        return a * a.adjoint();
    }
};

}  // namespace

TEST(UserSinr, SingleUserNoInterference) {
    Rng r(1);
    const CVector h = r.vec(4), f = r.vec(4);
    CovarianceDecomposition d{{f}, CMatrix::Zero(4, 4)};
    EXPECT_NEAR(user_sinr(h, d, 0.5, 0), std::norm((h.transpose() * f).value()) / 0.5, 1e-12);
}

TEST(UserSinr, ZeroBeamformer) {
    Rng r(2);
    CovarianceDecomposition d{{CVector::Zero(4)}, r.psd(4, 2)};
    EXPECT_EQ(user_sinr(r.vec(4), d, 1.0, 0), 0.0);
}

TEST(UserSinr, NullSpaceInterferer) {
    Rng r(3);
    const CVector h1 = r.vec(5);
    const CVector f1 = r.vec(5);
    // f2 orthogonal to conj(h1) so that h1^T f2 = 0.
    CVector f2 = r.vec(5);
    const CVector hc = h1.conjugate();
    f2 -= hc * (hc.adjoint() * f2).value() / hc.squaredNorm();
    ASSERT_LT(std::abs((h1.transpose() * f2).value()), 1e-12);
    CovarianceDecomposition d{{f1, f2}, CMatrix::Zero(5, 5)};
    EXPECT_NEAR(user_sinr(h1, d, 0.3, 0), std::norm((h1.transpose() * f1).value()) / 0.3, 1e-9);
}

TEST(UserSinr, RejectsBadInput) {
    CovarianceDecomposition d{{CVector::Ones(3)}, CMatrix::Zero(3, 3)};
    EXPECT_THROW(user_sinr(CVector::Ones(4), d, 1.0, 0), ArgumentError);
    EXPECT_THROW(user_sinr(CVector::Ones(3), d, 0.0, 0), ArgumentError);
    EXPECT_THROW(user_sinr(CVector::Ones(3), d, 1.0, 1), ArgumentError);
}

TEST(UserRate, Examples) {
    EXPECT_DOUBLE_EQ(user_rate(1.0), 1.0);
    EXPECT_DOUBLE_EQ(user_rate(0.0), 0.0);
    EXPECT_NEAR(user_rate(std::exp2(17.0) - 1.0), 17.0, 1e-12);
    EXPECT_THROW(user_rate(-0.1), ArgumentError);
    EXPECT_LT(user_rate(1.0), user_rate(1.0 + 1e-9));
}

TEST(Beampattern, Examples) {
    Rng r(4);
    const CVector h = r.vec(6), f = r.vec(6);
    EXPECT_NEAR(beampattern_gain(h, CMatrix::Identity(6, 6)), h.squaredNorm(), 1e-12);
    EXPECT_NEAR(beampattern_gain(h, f * f.adjoint()), std::norm((h.transpose() * f).value()), 1e-10);
    EXPECT_EQ(beampattern_gain(h, CMatrix::Zero(6, 6)), 0.0);
    EXPECT_THROW(beampattern_gain(h, CMatrix::Identity(5, 5)), ArgumentError);
}

TEST(CrossCorrelation, Examples) {
    Rng r(5);
    const CVector h = r.vec(6), g = r.vec(6), f = r.vec(6);
    const CMatrix rx = r.psd(6, 3);
    EXPECT_NEAR(cross_correlation(h, h, rx), beampattern_gain(h, rx), 1e-10 * beampattern_gain(h, rx));
    // Remove the component of g along h so that h^T g0^* = 0.
    const Complex ip = (h.transpose() * g.conjugate()).value();
    const CVector g0 = g - (std::conj(ip) / h.squaredNorm()) * h;
    ASSERT_LT(std::abs((h.transpose() * g0.conjugate()).value()), 1e-12);
    EXPECT_NEAR(cross_correlation(h, g0, CMatrix::Identity(6, 6)), 0.0, 1e-12);
    const double factored = std::abs((h.transpose() * f).value() * (f.adjoint() * g.conjugate()).value());
    EXPECT_NEAR(cross_correlation(h, g, f * f.adjoint()), factored, 1e-12 * factored);
}

TEST(CrossCorrelation, CauchySchwarz) {
    Rng r(6);
    for (int t = 0; t < 200; ++t) {
        const CVector h = r.vec(5), g = r.vec(5);
        const CMatrix rx = r.psd(5, 1 + t % 5);
        const double c = cross_correlation(h, g, rx);
        EXPECT_LE(c * c, beampattern_gain(h, rx) * beampattern_gain(g, rx) * (1 + 1e-12));
        EXPECT_GE(beampattern_gain(h, rx), -1e-9);
    }
}

TEST(RateMargin, ThresholdFactor) {
    EXPECT_DOUBLE_EQ(rate_threshold_factor(1.0), 2.0);
    EXPECT_NEAR(rate_threshold_factor(17.0), 131072.0 / 131071.0, 1e-15);
    EXPECT_NEAR(rate_threshold_factor(17.0), 1.00000763, 1e-8);
    EXPECT_THROW(rate_threshold_factor(0.0), ArgumentError);
    EXPECT_THROW(rate_constraint_margin(CVector::Ones(2), CMatrix::Identity(2, 2), CMatrix::Identity(2, 2), -1, 1),
                 ArgumentError);
}

TEST(RateMargin, EquivalentToRateTest) {
    Rng r(7);
    std::uniform_real_distribution<double> rate(0.1, 8.0);
    std::uniform_real_distribution<double> lognoise(-3, 1);
    int checked = 0;
    for (int t = 0; t < 1000; ++t) {
        const Eigen::Index n = 4;
        const CVector h = r.vec(n);
        std::vector<CVector> f{r.vec(n), r.vec(n)};
        const CovarianceDecomposition d{f, r.psd(n, 1) * 0.1};
        const double noise = std::pow(10.0, lognoise(r.g));
        const double rmin = rate(r.g);
        const double m = rate_constraint_margin(h, f[0] * f[0].adjoint(), d.total(), rmin, noise);
        const double rr = user_rate(user_sinr(h, d, noise, 0));
        if (std::abs(m) <= 1e-9 * (noise + beampattern_gain(h, d.total()))) continue;
        ++checked;
        EXPECT_EQ(m >= 0.0, rr >= rmin) << "margin " << m << " rate " << rr << " min " << rmin;
    }
    EXPECT_GT(checked, 990);
}

TEST(Embedding, Identity) {
    EXPECT_TRUE(complex_to_real_embed(CMatrix::Identity(3, 3)).isApprox(RMatrix::Identity(6, 6)));
}

TEST(Embedding, PauliYEigenvalues) {
    CMatrix a(2, 2);
    a << 0, Complex(0, -1), Complex(0, 1), 0;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(complex_to_real_embed(a));
    const RVector ev = es.eigenvalues();
    EXPECT_NEAR(ev(0), -1, 1e-14);
    EXPECT_NEAR(ev(1), -1, 1e-14);
    EXPECT_NEAR(ev(2), 1, 1e-14);
    EXPECT_NEAR(ev(3), 1, 1e-14);
}

TEST(Embedding, PsdTraceAndInnerProduct) {
    Rng r(8);
    for (int t = 0; t < 50; ++t) {
        const CMatrix a = r.psd(5, 1 + t % 5);
        const CMatrix b = hermitian_part(r.psd(5, 5) - r.psd(5, 2));
        const RMatrix ea = complex_to_real_embed(a);
        Eigen::SelfAdjointEigenSolver<RMatrix> es(ea);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * ea.norm());
        EXPECT_NEAR(ea.trace(), 2 * a.trace().real(), 1e-10);
        const double lhs = (b.adjoint() * a).trace().real();
        const double rhs = 0.5 * (complex_to_real_embed(b).transpose() * ea).trace();
        EXPECT_NEAR(lhs, rhs, 1e-9 * (1 + std::abs(lhs)));
    }
}

TEST(Embedding, RejectsNonHermitian) {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 1) = 1.0;
    EXPECT_THROW(complex_to_real_embed(a), ArgumentError);
}

TEST(HermitianParams, RoundTripAndBilinear) {
    Rng r(9);
    for (Eigen::Index d : {1, 2, 5}) {
        const CMatrix z = hermitian_part(r.psd(d, d) - r.psd(d, 1));
        const RVector p = hermitian_params::from_matrix(z);
        ASSERT_EQ(p.size(), hermitian_params::count(d));
        EXPECT_TRUE(hermitian_params::to_matrix(p, d).isApprox(z, 1e-13));
        const CVector u = r.vec(d), v = r.vec(d);
        const Complex direct = (u.adjoint() * z * v).value();
        EXPECT_NEAR(std::abs(direct - (hermitian_params::bilinear_coefficients(u, v).transpose() * p.cast<Complex>()).value()), 0.0,
                    1e-10 * (1 + std::abs(direct)));
        EXPECT_NEAR(hermitian_params::trace_coefficients(d).dot(p), z.trace().real(), 1e-12);
    }
}
