#ifndef NFISAC_CORE_HPP
#define NFISAC_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nfisac {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

// Error hierarchy. Each stage of the pipeline throws a distinct type so the
// CLI can map failures onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

// Source point colocated with an array element (or the array centre).
class SingularityError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, std::string binding)
        : Error(what), binding_(std::move(binding)) {}
    const std::string& binding_families() const noexcept { return binding_; }

private:
    std::string binding_;
};

class SolverError : public Error {
public:
    using Error::Error;
};

// Linear-algebra or reconstruction failure (non-PSD residual, singular
// covariance, degenerate user).
class NumericalError : public Error {
public:
    using Error::Error;
};

class DegenerateUserError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ParseError : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ArgumentError(msg);
}

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double to_db(double linear) { return 10.0 * std::log10(linear); }

// Max |A - A^H| entry.
inline double hermitian_defect(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

inline double min_eigenvalue(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Spectral norm of a Hermitian matrix.
inline double spectral_norm(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// True when A is PSD up to the relative floor min eig >= -rel_floor * ||A||.
inline bool is_psd(const CMatrix& a, double rel_floor) {
    const double norm = spectral_norm(a);
    return min_eigenvalue(a) >= -rel_floor * norm;
}

// h^T A h^* : the beampattern-style quadratic form used throughout.
inline Complex transpose_form(const CVector& u, const CMatrix& a, const CVector& v) {
    return (u.transpose() * a * v.conjugate())(0, 0);
}

}  // namespace nfisac

#endif  // NFISAC_CORE_HPP
