#ifndef NFISAC_METRICS_HPP
#define NFISAC_METRICS_HPP

#include "nfisac/core.hpp"

#include <vector>

namespace nfisac {

// Transmit covariance split into per-user beamformers and a sensing part.
struct CovarianceDecomposition {
    std::vector<CVector> beamformers;  // f_k
    CMatrix sensing;                   // R_s

    Eigen::Index dimension() const { return sensing.rows(); }

    CMatrix total() const {
        CMatrix r = sensing;
        for (const auto& f : beamformers) r += f * f.adjoint();
        return r;
    }
};

struct NoiseModel {
    std::vector<double> user;  // sigma_k^2 [W]
    double sensing = 0.0;      // sigma_r^2 [W]
};

namespace detail {
inline void check_dim(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) throw ArgumentError(std::string(what) + ": dimension mismatch");
}
}  // namespace detail

// Real part of h^T R h^*.
inline double beampattern_gain(const CVector& h, const CMatrix& r) {
    detail::check_dim(h.size(), r.rows(), "beampattern_gain");
    detail::check_dim(r.rows(), r.cols(), "beampattern_gain");
    const Complex v = transpose_form(h, r, h);
    if (std::abs(v.imag()) > 1e-9 * h.squaredNorm() * r.norm())
        throw NumericalError("beampattern_gain: covariance is not Hermitian");
    return v.real();
}

// |h_l^T R h_l'^*|.
inline double cross_correlation(const CVector& hl, const CVector& hm, const CMatrix& r) {
    detail::check_dim(hl.size(), r.rows(), "cross_correlation");
    detail::check_dim(hm.size(), r.cols(), "cross_correlation");
    return std::abs(transpose_form(hl, r, hm));
}

/// SINR of user k: |h^T f_k|^2 / (sum_{k' != k} |h^T f_k'|^2 + h^T R_s h^* + sigma^2).
/// `h` may be any receive channel, which is how the SINR heatmaps are built.
inline double user_sinr(const CVector& h, const CovarianceDecomposition& d, double noise, std::size_t k) {
    if (!(noise > 0.0)) throw ArgumentError("user_sinr: noise power must be positive");
    if (k >= d.beamformers.size()) throw ArgumentError("user_sinr: user index out of range");
    detail::check_dim(h.size(), d.dimension(), "user_sinr");
    double signal = 0.0;
    double interference = 0.0;
    for (std::size_t j = 0; j < d.beamformers.size(); ++j) {
        detail::check_dim(h.size(), d.beamformers[j].size(), "user_sinr");
        const double p = std::norm((h.transpose() * d.beamformers[j]).value());
        (j == k ? signal : interference) += p;
    }
    interference += std::max(0.0, transpose_form(h, d.sensing, h).real());
    return signal / (interference + noise);
}

inline double user_rate(double sinr) {
    if (sinr < 0.0) throw ArgumentError("user_rate: negative SINR");
    return std::log2(1.0 + sinr);
}

// xi = 2^R / (2^R - 1); only defined for R > 0.
inline double rate_threshold_factor(double min_rate) {
    if (!(min_rate > 0.0)) throw ArgumentError("minimum rate must be positive");
    const double p = std::exp2(min_rate);
    return p / std::expm1(min_rate * std::numbers::ln2);
}

// SINR target 2^R - 1.
inline double sinr_target(double min_rate) { return std::expm1(min_rate * std::numbers::ln2); }

/// Linear rate-constraint margin Tr(h^* h^T (xi F - R_x)) - sigma^2.
/// Non-negative exactly when the user's rate requirement holds.
inline double rate_constraint_margin(const CVector& h, const CMatrix& f, const CMatrix& rx, double min_rate,
                                     double noise) {
    const double xi = rate_threshold_factor(min_rate);
    return (xi * transpose_form(h, f, h) - transpose_form(h, rx, h)).real() - noise;
}

}  // namespace nfisac

#endif  // NFISAC_METRICS_HPP
