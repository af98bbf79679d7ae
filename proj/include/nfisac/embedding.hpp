#ifndef NFISAC_EMBEDDING_HPP
#define NFISAC_EMBEDDING_HPP

#include "nfisac/core.hpp"

namespace nfisac {

/// Real symmetric image [[Re A, -Im A], [Im A, Re A]] of a Hermitian A.
/// A is PSD iff the image is, every eigenvalue of A appears twice, and
/// Re tr(B^H A) = tr(embed(B)^T embed(A)) / 2.
inline RMatrix complex_to_real_embed(const CMatrix& a, double tol = 1e-10) {
    if (a.rows() != a.cols()) throw ArgumentError("complex_to_real_embed: matrix must be square");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (hermitian_defect(a) > tol * scale) throw ArgumentError("complex_to_real_embed: matrix is not Hermitian");
    const Eigen::Index n = a.rows();
    RMatrix e(2 * n, 2 * n);
    e.topLeftCorner(n, n) = a.real();
    e.topRightCorner(n, n) = -a.imag();
    e.bottomLeftCorner(n, n) = a.imag();
    e.bottomRightCorner(n, n) = a.real();
    return e;
}

// Real coordinates of a d x d Hermitian matrix: d diagonal entries followed,
// for each i < j (column-major), by Re Z_ij and Im Z_ij. d^2 parameters total.
namespace hermitian_params {

inline Eigen::Index count(Eigen::Index d) { return d * d; }

inline CMatrix to_matrix(const Eigen::Ref<const RVector>& p, Eigen::Index d) {
    CMatrix z = CMatrix::Zero(d, d);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) z(i, i) = p(k++);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            const Complex v(p(k), p(k + 1));
            k += 2;
            z(i, j) = v;
            z(j, i) = std::conj(v);
        }
    return z;
}

inline RVector from_matrix(const CMatrix& z) {
    const Eigen::Index d = z.rows();
    RVector p(count(d));
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) p(k++) = z(i, i).real();
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            p(k++) = z(i, j).real();
            p(k++) = z(i, j).imag();
        }
    return p;
}

/// Coefficients of the complex linear functional Z -> u^H Z v in the
/// parameter basis, so that u^H Z v = sum_k coeff_k p_k.
inline CVector bilinear_coefficients(const CVector& u, const CVector& v) {
    const Eigen::Index d = u.size();
    CVector c(count(d));
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i) c(k++) = std::conj(u(i)) * v(i);
    const Complex j1(0.0, 1.0);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            const Complex a = std::conj(u(i)) * v(j);
            const Complex b = std::conj(u(j)) * v(i);
            c(k++) = a + b;
            c(k++) = j1 * (a - b);
        }
    return c;
}

// Coefficients of Z -> tr Z.
inline RVector trace_coefficients(Eigen::Index d) {
    RVector c = RVector::Zero(count(d));
    c.head(d).setOnes();
    return c;
}

}  // namespace hermitian_params
}  // namespace nfisac

#endif  // NFISAC_EMBEDDING_HPP
