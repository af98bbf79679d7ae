#ifndef NFISAC_CAPON_HPP
#define NFISAC_CAPON_HPP

// Normalized Capon spectrum over a yz-plane grid and peak extraction.

#include "nfisac/channel.hpp"
#include "nfisac/core.hpp"
#include "nfisac/signalsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nfisac {

struct GridSpec {
    double y_min = -0.5;
    double y_max = 0.7;
    double z_min = 0.05;
    double z_max = 0.7;
    double step = 0.01;
    double x = 0.0;

    void validate() const {
        if (!(step > 0.0)) throw ArgumentError("grid step must be positive");
        if (!(y_max >= y_min) || !(z_max >= z_min)) throw ArgumentError("grid ranges must be non-empty");
        if (!std::isfinite(y_min + y_max + z_min + z_max + x)) throw ArgumentError("grid bounds must be finite");
    }
    // Inclusive of the upper bound up to rounding.
    Eigen::Index ny() const { return static_cast<Eigen::Index>(std::floor((y_max - y_min) / step + 1e-9)) + 1; }
    Eigen::Index nz() const { return static_cast<Eigen::Index>(std::floor((z_max - z_min) / step + 1e-9)) + 1; }
    double y(Eigen::Index i) const { return y_min + static_cast<double>(i) * step; }
    double z(Eigen::Index j) const { return z_min + static_cast<double>(j) * step; }
    Vec3 point(Eigen::Index i, Eigen::Index j) const { return {x, y(i), z(j)}; }
};

// Values indexed (y index, z index).
struct SpatialGrid {
    GridSpec spec;
    RMatrix values;
    std::string unit = "dB";
    std::vector<std::string> notes;
};

/// Evaluates f(point) at every grid point.
template <typename F>
SpatialGrid evaluate_grid(const GridSpec& spec, F&& f, std::string unit = "dB") {
    spec.validate();
    SpatialGrid g{spec, RMatrix(spec.ny(), spec.nz()), std::move(unit), {}};
    for (Eigen::Index i = 0; i < spec.ny(); ++i)
        for (Eigen::Index j = 0; j < spec.nz(); ++j) g.values(i, j) = f(spec.point(i, j));
    return g;
}

enum class TransmitWeighting {
    inverse,  // h^T R_X^{-1} h^* in the denominator
    direct,   // h^T R_X h^*, the least-squares amplitude estimator
};

struct CaponOptions {
    double diagonal_loading = 0.0;  // delta in R + delta tr(R)/N I
    double fallback_loading = 1e-6;
    double singular_ratio = 1e-12;  // eigenvalue spread treated as singular
    TransmitWeighting weighting = TransmitWeighting::inverse;
};

namespace detail {

struct LoadedInverse {
    CMatrix inverse;
    double loading = 0.0;
};

inline LoadedInverse loaded_inverse(const CMatrix& r, const CaponOptions& opt, const std::string& name,
                                    std::vector<std::string>& notes) {
    const Eigen::Index n = r.rows();
    const double t = r.trace().real() / static_cast<double>(n);
    auto attempt = [&](double delta) -> std::optional<CMatrix> {
        const CMatrix a = hermitian_part(r) + delta * t * CMatrix::Identity(n, n);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
        const RVector& ev = es.eigenvalues();
        const double top = ev.cwiseAbs().maxCoeff();
        if (!(top > 0.0) || ev.minCoeff() <= opt.singular_ratio * top) return std::nullopt;
        return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    };
    if (auto inv = attempt(opt.diagonal_loading)) return {*inv, opt.diagonal_loading};
    if (opt.diagonal_loading < opt.fallback_loading && opt.fallback_loading > 0.0 && t > 0.0) {
        if (auto inv = attempt(opt.fallback_loading)) {
            notes.push_back(name + " is singular; applied diagonal loading " + std::to_string(opt.fallback_loading));
            return {*inv, opt.fallback_loading};
        }
    }
    throw SingularityError("capon: sample covariance " + name + " is singular and loading did not help");
}

}  // namespace detail

/// |beta(p0)| in dB over the grid, with
///   beta = hr^H R_Y^{-1} Y X^H ht^* / (T (hr^H R_Y^{-1} hr)(ht^T R_X^{-1} ht^*))
/// and hr, ht the unit-norm near-field steering vectors of the receive and
/// transmit arrays at p0.
inline SpatialGrid capon_spectrum(const SignalBlock& x, const SignalBlock& y, const ArrayGeometry& tx,
                                  const ArrayGeometry& rx, const GridSpec& grid, const ChannelModelParams& params,
                                  const CaponOptions& opt = {}) {
    grid.validate();
    if (x.length() != y.length() || x.length() < 1) throw ArgumentError("capon: X and Y must have the same length");
    if (x.antennas() != static_cast<Eigen::Index>(tx.size()) || y.antennas() != static_cast<Eigen::Index>(rx.size()))
        throw ArgumentError("capon: block dimensions do not match the arrays");

    SpatialGrid out{grid, RMatrix::Constant(grid.ny(), grid.nz(), -std::numeric_limits<double>::infinity()), "dB", {}};
    if (y.samples.isZero(0.0)) {
        out.notes.push_back("Y is identically zero");
        return out;
    }
    const double T = static_cast<double>(x.length());
    const CMatrix rxx = sample_covariance(x);
    const CMatrix ryy = sample_covariance(y);
    const auto ry_inv = detail::loaded_inverse(ryy, opt, "R_Y", out.notes);
    CMatrix tx_weight;
    if (opt.weighting == TransmitWeighting::inverse) {
        tx_weight = detail::loaded_inverse(rxx, opt, "R_X", out.notes).inverse;
    } else {
        tx_weight = rxx;
    }
    const CMatrix cross = ry_inv.inverse * y.samples * x.samples.adjoint();  // R_Y^{-1} Y X^H

    for (Eigen::Index i = 0; i < grid.ny(); ++i)
        for (Eigen::Index j = 0; j < grid.nz(); ++j) {
            const Vec3 p = grid.point(i, j);
            CVector ht = nearfield_channel(tx, p, params);
            CVector hr = nearfield_channel(rx, p, params, Direction::incoming);
            const double nt = ht.norm();
            const double nr = hr.norm();
            if (!(nt > 0.0) || !(nr > 0.0)) continue;  // behind an array
            ht /= nt;
            hr /= nr;
            const Complex num = (hr.adjoint() * cross * ht.conjugate()).value();
            const double dr = (hr.adjoint() * ry_inv.inverse * hr).value().real();
            const double dt = (ht.transpose() * tx_weight * ht.conjugate()).value().real();
            const double mag = std::abs(num) / (T * dr * dt);
            out.values(i, j) = mag > 0.0 ? 20.0 * std::log10(mag) : -std::numeric_limits<double>::infinity();
        }
    return out;
}

struct Peak {
    Vec3 position = Vec3::Zero();
    double value = 0.0;
    Eigen::Index iy = 0;
    Eigen::Index iz = 0;
};

struct PeakList {
    std::vector<Peak> peaks;
    bool shortfall = false;
};

/// The `count` largest 8-neighbourhood local maxima that are pairwise at
/// least `min_separation` apart, by value descending, ties by (y, z).
inline PeakList find_peaks(const SpatialGrid& g, std::size_t count, double min_separation) {
    if (count < 1) throw ArgumentError("find_peaks: count must be >= 1");
    const Eigen::Index ny = g.values.rows();
    const Eigen::Index nz = g.values.cols();
    std::vector<Peak> cand;
    for (Eigen::Index i = 0; i < ny; ++i)
        for (Eigen::Index j = 0; j < nz; ++j) {
            const double v = g.values(i, j);
            if (!std::isfinite(v)) continue;
            bool is_max = true;
            for (Eigen::Index di = -1; di <= 1 && is_max; ++di)
                for (Eigen::Index dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const Eigen::Index a = i + di;
                    const Eigen::Index b = j + dj;
                    if (a < 0 || b < 0 || a >= ny || b >= nz) continue;
                    if (g.values(a, b) > v) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) cand.push_back({g.spec.point(i, j), v, i, j});
        }
    std::sort(cand.begin(), cand.end(), [](const Peak& a, const Peak& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.position.y() != b.position.y()) return a.position.y() < b.position.y();
        return a.position.z() < b.position.z();
    });
    PeakList out;
    for (const auto& c : cand) {
        bool ok = true;
        for (const auto& p : out.peaks)
            if ((p.position - c.position).norm() < min_separation) {
                ok = false;
                break;
            }
        if (!ok) continue;
        out.peaks.push_back(c);
        if (out.peaks.size() == count) break;
    }
    out.shortfall = out.peaks.size() < count;
    return out;
}

// CSV with a units comment line, then y_m,z_m,value_<unit>.
inline void write_grid_csv(const std::string& path, const SpatialGrid& g) {
    std::ofstream os(path);
    if (!os) throw ArgumentError("cannot open " + path + " for writing");
    os.precision(10);
    os << "# x_m=" << g.spec.x << " step_m=" << g.spec.step << " unit=" << g.unit << "\n";
    os << "y_m,z_m,value_" << g.unit << "\n";
    for (Eigen::Index i = 0; i < g.values.rows(); ++i)
        for (Eigen::Index j = 0; j < g.values.cols(); ++j)
            os << g.spec.y(i) << "," << g.spec.z(j) << "," << g.values(i, j) << "\n";
}

}  // namespace nfisac

#endif  // NFISAC_CAPON_HPP
