#ifndef NFISAC_SIGNALSIM_HPP
#define NFISAC_SIGNALSIM_HPP

// Transmit/echo snapshot synthesis and sample covariances.

#include "nfisac/channel.hpp"
#include "nfisac/core.hpp"
#include "nfisac/metrics.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace nfisac {

struct SignalBlock {
    CMatrix samples;  // antennas x T
    std::uint64_t seed = 0;

    Eigen::Index antennas() const { return samples.rows(); }
    Eigen::Index length() const { return samples.cols(); }
};

namespace detail {

// Unit-power circular complex Gaussian samples; real part drawn first.
struct CircularNormal {
    explicit CircularNormal(std::uint64_t seed) : rng(seed) {}
    Complex operator()() {
        const double re = nd(rng);
        const double im = nd(rng);
        return {re, im};
    }
    std::mt19937_64 rng;
    std::normal_distribution<double> nd{0.0, std::sqrt(0.5)};
};

}  // namespace detail

/// A with A A^H = R, from the eigendecomposition of R. Eigenvalues down to
/// -1e-8 max(||R||, reference) are treated as zero; anything more negative is
/// an error. `reference` lets a nearly empty R inherit the rounding scale of
/// the covariance it was carved out of.
inline CMatrix psd_sqrt(const CMatrix& r, double reference = 0.0) {
    if (r.rows() != r.cols()) throw ArgumentError("psd_sqrt: matrix must be square");
    if (r.size() == 0) return r;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(r));
    const RVector& ev = es.eigenvalues();
    const double scale = std::max(ev.cwiseAbs().maxCoeff(), reference);
    if (ev.minCoeff() < -1e-8 * scale) throw NumericalError("psd_sqrt: covariance is not positive semidefinite");
    return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

/// x[t] = sum_k f_k c_k[t] + s[t], c_k ~ CN(0,1) i.i.d., s ~ CN(0, R_s).
/// Column-at-a-time generation; the draw order per column is c_1..c_K then
/// the N white samples behind s.
inline SignalBlock sample_transmit_block(const CovarianceDecomposition& d, Eigen::Index length, std::uint64_t seed) {
    if (length < 1) throw ArgumentError("sample_transmit_block: block length must be >= 1");
    const Eigen::Index n = d.dimension();
    for (const auto& f : d.beamformers)
        if (f.size() != n) throw ArgumentError("sample_transmit_block: beamformer dimension mismatch");
    const CMatrix a = psd_sqrt(d.sensing, spectral_norm(d.total()));
    detail::CircularNormal draw(seed);
    SignalBlock out;
    out.seed = seed;
    out.samples = CMatrix::Zero(n, length);
    CVector w(n);
    for (Eigen::Index t = 0; t < length; ++t) {
        auto col = out.samples.col(t);
        for (const auto& f : d.beamformers) col += draw() * f;
        for (Eigen::Index i = 0; i < n; ++i) w(i) = draw();
        col += a * w;
    }
    return out;
}

/// y[t] = (sum_l H_l) x[t] + n[t], n ~ CN(0, sigma^2 I).
inline SignalBlock simulate_echoes(const SignalBlock& x, const std::vector<RoundTripChannel>& channels, double noise,
                                   std::uint64_t seed, Eigen::Index rx_antennas = -1) {
    if (noise < 0.0) throw ArgumentError("simulate_echoes: noise power must be non-negative");
    Eigen::Index nr = rx_antennas;
    if (!channels.empty()) nr = channels.front().matrix.rows();
    if (nr < 1) throw ArgumentError("simulate_echoes: receive dimension unknown");
    CMatrix h = CMatrix::Zero(nr, x.antennas());
    for (const auto& c : channels) {
        if (c.matrix.rows() != nr || c.matrix.cols() != x.antennas())
            throw ArgumentError("simulate_echoes: channel dimension mismatch");
        h += c.matrix;
    }
    SignalBlock y;
    y.seed = seed;
    y.samples = h * x.samples;
    if (noise > 0.0) {
        detail::CircularNormal draw(seed);
        const double sd = std::sqrt(noise);
        for (Eigen::Index t = 0; t < y.length(); ++t)
            for (Eigen::Index i = 0; i < nr; ++i) y.samples(i, t) += sd * draw();
    }
    return y;
}

// (1/T) X X^H.
inline CMatrix sample_covariance(const SignalBlock& b) {
    if (b.length() < 1) throw ArgumentError("sample_covariance: empty block");
    return hermitian_part(b.samples * b.samples.adjoint() / static_cast<double>(b.length()));
}

// Binary block container: "NFSB" magic, u32 version, u64 rows, u64 cols,
// u64 seed, then column-major interleaved (re, im) little-endian float64.
namespace blockio {

inline constexpr char kMagic[4] = {'N', 'F', 'S', 'B'};
inline constexpr std::uint32_t kVersion = 1;

namespace detail {
template <typename T>
void put(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "block dump assumes a little-endian host");
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw ParseError("block dump: truncated file");
    return v;
}
}  // namespace detail

inline void write(const std::string& path, const SignalBlock& b) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("cannot open " + path + " for writing");
    os.write(kMagic, 4);
    detail::put<std::uint32_t>(os, kVersion);
    detail::put<std::uint64_t>(os, static_cast<std::uint64_t>(b.antennas()));
    detail::put<std::uint64_t>(os, static_cast<std::uint64_t>(b.length()));
    detail::put<std::uint64_t>(os, b.seed);
    for (Eigen::Index j = 0; j < b.length(); ++j)
        for (Eigen::Index i = 0; i < b.antennas(); ++i) {
            detail::put<double>(os, b.samples(i, j).real());
            detail::put<double>(os, b.samples(i, j).imag());
        }
}

inline SignalBlock read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ParseError(path + ": not a signal block dump");
    if (detail::get<std::uint32_t>(is) != kVersion) throw ParseError(path + ": unsupported block dump version");
    const auto rows = detail::get<std::uint64_t>(is);
    const auto cols = detail::get<std::uint64_t>(is);
    SignalBlock b;
    b.seed = detail::get<std::uint64_t>(is);
    b.samples.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < b.length(); ++j)
        for (Eigen::Index i = 0; i < b.antennas(); ++i) {
            const double re = detail::get<double>(is);
            const double im = detail::get<double>(is);
            b.samples(i, j) = {re, im};
        }
    return b;
}

}  // namespace blockio
}  // namespace nfisac

#endif  // NFISAC_SIGNALSIM_HPP
