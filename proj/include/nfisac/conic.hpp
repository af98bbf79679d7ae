#ifndef NFISAC_CONIC_HPP
#define NFISAC_CONIC_HPP

// Primal-dual interior-point solver for linear cone programs
//
//     minimize    c^T x
//     subject to  G x + s = h,   s in K,
//
// with K a product of a nonnegative orthant, second-order cones and real
// symmetric PSD cones. The dual is  maximize -h^T z  s.t.  G^T z + c = 0,
// z in K. Iterates follow a homogeneous self-dual embedding (tau, kappa) so
// that infeasibility is reported with a certificate instead of a stall.
// Search directions use Nesterov-Todd scaling and a Mehrotra
// predictor-corrector step. The KKT system is reduced to the dense normal
// equations G^T W^{-1} W^{-T} G, which suits problems with at most a few
// hundred variables.
//
// Vector layout of s and z: orthant entries, then each second-order cone
// (t, u) with t >= ||u||, then each PSD block in svec form (lower triangle,
// column-major, off-diagonals scaled by sqrt 2 so that svec(A).svec(B) = tr(AB)).

#include "nfisac/core.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace nfisac::conic {

// Working precision of the iteration. The problem data and results are double;
// the extra mantissa bits of long double keep the Newton systems usable when
// the optimum needs nulls that are 1e-6 deep relative to the main beams.
using Real = long double;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

inline Eigen::Index svec_size(Eigen::Index n) { return n * (n + 1) / 2; }

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> svec(const Eigen::MatrixBase<Derived>& a) {
    using T = typename Derived::Scalar;
    const Eigen::Index n = a.rows();
    Eigen::Matrix<T, Eigen::Dynamic, 1> v(svec_size(n));
    const T r2 = std::sqrt(T(2));
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j; i < n; ++i) v(k++) = (i == j) ? a(i, j) : r2 * a(i, j);
    return v;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> smat(const Eigen::MatrixBase<Derived>& v,
                                                                             Eigen::Index n) {
    using T = typename Derived::Scalar;
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> a(n, n);
    const T r2 = std::sqrt(T(2));
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j; i < n; ++i) {
            const T x = v(k++);
            if (i == j) {
                a(i, i) = x;
            } else {
                a(i, j) = x / r2;
                a(j, i) = a(i, j);
            }
        }
    return a;
}

struct ConeDims {
    Eigen::Index orthant = 0;
    std::vector<Eigen::Index> soc;  // cone dimensions (>= 1)
    std::vector<Eigen::Index> psd;  // matrix orders

    Eigen::Index size() const {
        Eigen::Index m = orthant;
        for (auto q : soc) m += q;
        for (auto n : psd) m += svec_size(n);
        return m;
    }

    // Barrier degree: number of Jordan-frame elements.
    Eigen::Index degree() const {
        return orthant + static_cast<Eigen::Index>(soc.size()) + std::accumulate(psd.begin(), psd.end(), Eigen::Index{0});
    }
};

struct Problem {
    RVector c;
    RMatrix G;
    RVector h;
    ConeDims dims;
};

struct Options {
    double feastol = 1e-8;    // primal/dual residual
    double abstol = 1e-10;    // absolute duality gap
    double reltol = 1e-8;     // relative duality gap
    double infeastol = 1e-8;  // certificate residual for (primal/dual) infeasibility
    int max_iterations = 150;
    double step_fraction = 0.99;
    int refinement_steps = 2;
};

enum class Status { optimal, primal_infeasible, dual_infeasible, max_iterations, numerical_error };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::primal_infeasible: return "primal_infeasible";
        case Status::dual_infeasible: return "dual_infeasible";
        case Status::max_iterations: return "max_iterations";
        case Status::numerical_error: return "numerical_error";
    }
    return "unknown";
}

struct Result {
    Status status = Status::numerical_error;
    // For optimal: primal-dual solution. For primal_infeasible: z holds a
    // certificate with h^T z = -1, G^T z ~ 0. For dual_infeasible: (x, s) is
    // an improving ray with c^T x = -1.
    RVector x, s, z;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double gap = 0.0;
    double relative_gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double certificate_residual = 0.0;
    int iterations = 0;
    std::string message;
};

namespace detail {

// Iterates over cone blocks: f(kind, offset, dim_or_order).
enum class Kind { orthant, soc, psd };

template <typename F>
void for_each_block(const ConeDims& dims, F&& f) {
    Eigen::Index off = 0;
    if (dims.orthant > 0) f(Kind::orthant, off, dims.orthant);
    off += dims.orthant;
    for (auto q : dims.soc) {
        f(Kind::soc, off, q);
        off += q;
    }
    for (auto n : dims.psd) {
        f(Kind::psd, off, n);
        off += svec_size(n);
    }
}

inline Vector identity(const ConeDims& dims) {
    Vector e = Vector::Zero(dims.size());
    for_each_block(dims, [&](Kind k, Eigen::Index off, Eigen::Index d) {
        if (k == Kind::orthant) e.segment(off, d).setOnes();
        else if (k == Kind::soc) e(off) = 1.0;
        else e.segment(off, svec_size(d)) = svec(Matrix::Identity(d, d));
    });
    return e;
}

// Largest "negative eigenvalue" of u; u is interior iff the result is < 0.
inline Real max_negative_eig(const Vector& u, const ConeDims& dims) {
    Real worst = -std::numeric_limits<Real>::infinity();
    for_each_block(dims, [&](Kind k, Eigen::Index off, Eigen::Index d) {
        if (k == Kind::orthant) {
            worst = std::max(worst, -u.segment(off, d).minCoeff());
        } else if (k == Kind::soc) {
            const Real t = u(off);
            const Real r = d > 1 ? u.segment(off + 1, d - 1).norm() : Real(0);
            worst = std::max(worst, r - t);
        } else {
            Eigen::SelfAdjointEigenSolver<Matrix> es(smat(u.segment(off, svec_size(d)), d), Eigen::EigenvaluesOnly);
            worst = std::max(worst, -es.eigenvalues().minCoeff());
        }
    });
    return worst;
}

inline Vector jordan_product(const Vector& u, const Vector& v, const ConeDims& dims) {
    Vector w(u.size());
    for_each_block(dims, [&](Kind k, Eigen::Index off, Eigen::Index d) {
        if (k == Kind::orthant) {
            w.segment(off, d) = u.segment(off, d).cwiseProduct(v.segment(off, d));
        } else if (k == Kind::soc) {
            w(off) = u.segment(off, d).dot(v.segment(off, d));
            if (d > 1) w.segment(off + 1, d - 1) = u(off) * v.segment(off + 1, d - 1) + v(off) * u.segment(off + 1, d - 1);
        } else {
            const Eigen::Index m = svec_size(d);
            const Matrix a = smat(u.segment(off, m), d);
            const Matrix b = smat(v.segment(off, m), d);
            w.segment(off, m) = svec(0.5 * (a * b + b * a));
        }
    });
    return w;
}

struct Scaling {
    Vector d;                       // orthant: sqrt(s / z)
    std::vector<Real> soc_beta;    // second-order cones: W = beta (2 v v^T - J)
    std::vector<Vector> soc_v;
    std::vector<Matrix> psd_r;      // PSD: W(U) = R^T U R
    std::vector<Matrix> psd_rti;    // R^{-T}
    std::vector<Vector> psd_lambda; // eigenvalues of the scaled point
    Vector lambda;                  // W z = W^{-T} s
};

enum class Apply { w, wt, winv, winvt };

inline Vector apply(const Scaling& sc, const Vector& u, const ConeDims& dims, Apply mode) {
    Vector out(u.size());
    std::size_t iq = 0;
    std::size_t ip = 0;
    for_each_block(dims, [&](Kind k, Eigen::Index off, Eigen::Index n) {
        if (k == Kind::orthant) {
            if (mode == Apply::w || mode == Apply::wt) out.segment(off, n) = sc.d.cwiseProduct(u.segment(off, n));
            else out.segment(off, n) = u.segment(off, n).cwiseQuotient(sc.d);
        } else if (k == Kind::soc) {
            const Real beta = sc.soc_beta[iq];
            Vector v = sc.soc_v[iq];
            const auto seg = u.segment(off, n);
            Vector ju = seg;
            ju.tail(n - 1) *= -1.0;
            if (mode == Apply::w || mode == Apply::wt) {
                out.segment(off, n) = beta * (2.0 * v.dot(seg) * v - ju);
            } else {
                Vector jv = v;
                jv.tail(n - 1) *= -1.0;
                out.segment(off, n) = (2.0 * jv.dot(seg) * jv - ju) / beta;
            }
            ++iq;
        } else {
            const Eigen::Index m = svec_size(n);
            const Matrix a = smat(u.segment(off, m), n);
            const Matrix& r = sc.psd_r[ip];
            const Matrix& rti = sc.psd_rti[ip];
            Matrix b;
            switch (mode) {
                case Apply::w: b = r.transpose() * a * r; break;
                case Apply::wt: b = r * a * r.transpose(); break;
                case Apply::winv: b = rti * a * rti.transpose(); break;
                case Apply::winvt: b = rti.transpose() * a * rti; break;
            }
            out.segment(off, m) = svec(0.5 * (b + b.transpose()));
            ++ip;
        }
    });
    return out;
}

// Symmetric square-root factor L with L L^T = A (A assumed PSD).
inline Matrix sqrt_factor(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
    const Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal();
}

inline Scaling compute_scaling(const Vector& s, const Vector& z, const ConeDims& dims) {
    Scaling sc;
    sc.lambda.resize(s.size());
    for_each_block(dims, [&](Kind k, Eigen::Index off, Eigen::Index n) {
        if (k == Kind::orthant) {
            sc.d = (s.segment(off, n).cwiseQuotient(z.segment(off, n))).cwiseSqrt();
            sc.lambda.segment(off, n) = (s.segment(off, n).cwiseProduct(z.segment(off, n))).cwiseSqrt();
        } else if (k == Kind::soc) {
            const Vector ss = s.segment(off, n);
            const Vector zz = z.segment(off, n);
            auto jnorm = [n](const Vector& x) {
                const Real tail = n > 1 ? x.tail(n - 1).squaredNorm() : Real(0);
                return std::sqrt(std::max((x(0) - std::sqrt(tail)) * (x(0) + std::sqrt(tail)), Real(1e-300)));
            };
            const Real sn = jnorm(ss);
            const Real zn = jnorm(zz);
            const Vector sb = ss / sn;
            const Vector zb = zz / zn;
            const Real gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
            Vector jz = zb;
            jz.tail(n - 1) *= -1.0;
            Vector w = (sb + jz) / (2.0 * gamma);
            Vector v = w;
            v(0) += 1.0;
            v /= std::sqrt(2.0 * (w(0) + 1.0));
            const Real beta = std::sqrt(sn / zn);
            sc.soc_beta.push_back(beta);
            sc.soc_v.push_back(v);
            Vector jzz = zz;
            jzz.tail(n - 1) *= -1.0;
            sc.lambda.segment(off, n) = beta * (2.0 * v.dot(zz) * v - jzz);
        } else {
            const Eigen::Index m = svec_size(n);
            const Matrix ls = sqrt_factor(smat(s.segment(off, m), n));
            const Matrix lz = sqrt_factor(smat(z.segment(off, m), n));
            Eigen::JacobiSVD<Matrix> svd(lz.transpose() * ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
            const Vector lam = svd.singularValues().cwiseMax(1e-300);
            const Vector isq = lam.cwiseSqrt().cwiseInverse();
            sc.psd_r.push_back(ls * svd.matrixV() * isq.asDiagonal());
            sc.psd_rti.push_back(lz * svd.matrixU() * isq.asDiagonal());
            sc.psd_lambda.push_back(lam);
            sc.lambda.segment(off, m) = svec(Matrix(lam.asDiagonal()));
        }
    });
    return sc;
}

// Lower factor L with L L^T = A; Cholesky when it succeeds, else eigen.
inline Matrix psd_factor(const Matrix& a) {
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::LLT<Matrix> llt(sym);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    return sqrt_factor(sym);
}

// Refreshes the scaling after a step. st and zt are the new iterates in the
// old scaled coordinates (lambda + alpha ds, lambda + alpha dz). PSD factors
// are updated multiplicatively, which keeps them accurate as the iterates
// approach the boundary; the PSD blocks of s and z are rewritten from them.
inline Scaling update_scaling(const Scaling& old, const Vector& st, const Vector& zt, Vector& s, Vector& z,
                              const ConeDims& dims) {
    ConeDims lin = dims;
    lin.psd.clear();
    const Eigen::Index nlin = lin.size();
    Scaling sc = nlin > 0 ? compute_scaling(s.head(nlin), z.head(nlin), lin) : Scaling{};
    sc.lambda.conservativeResize(s.size());
    std::size_t ip = 0;
    for_each_block(dims, [&](Kind k, Eigen::Index off, Eigen::Index n) {
        if (k != Kind::psd) return;
        const Eigen::Index m = svec_size(n);
        const Matrix ls = psd_factor(smat(st.segment(off, m), n));
        const Matrix lz = psd_factor(smat(zt.segment(off, m), n));
        Eigen::JacobiSVD<Matrix> svd(lz.transpose() * ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vector lam = svd.singularValues().cwiseMax(1e-300);
        const Vector isq = lam.cwiseSqrt().cwiseInverse();
        const Matrix r = old.psd_r[ip] * ls * svd.matrixV() * isq.asDiagonal();
        const Matrix rti = old.psd_rti[ip] * lz * svd.matrixU() * isq.asDiagonal();
        s.segment(off, m) = svec(r * lam.asDiagonal() * r.transpose());
        z.segment(off, m) = svec(rti * lam.asDiagonal() * rti.transpose());
        sc.psd_r.push_back(r);
        sc.psd_rti.push_back(rti);
        sc.psd_lambda.push_back(lam);
        sc.lambda.segment(off, m) = svec(Matrix(lam.asDiagonal()));
        ++ip;
    });
    return sc;
}

// Solves lambda o x = r for x, with lambda the scaled point (PSD blocks diagonal).
inline Vector jordan_divide(const Scaling& sc, const Vector& r, const ConeDims& dims) {
    Vector x(r.size());
    std::size_t ip = 0;
    const Vector& lam = sc.lambda;
    for_each_block(dims, [&](Kind k, Eigen::Index off, Eigen::Index n) {
        if (k == Kind::orthant) {
            x.segment(off, n) = r.segment(off, n).cwiseQuotient(lam.segment(off, n));
        } else if (k == Kind::soc) {
            const Real l0 = lam(off);
            const Real r0 = r(off);
            if (n == 1) {
                x(off) = r0 / l0;
                return;
            }
            const auto l1 = lam.segment(off + 1, n - 1);
            const auto r1 = r.segment(off + 1, n - 1);
            const Real det = (l0 - l1.norm()) * (l0 + l1.norm());
            const Real x0 = (l0 * r0 - l1.dot(r1)) / det;
            x(off) = x0;
            x.segment(off + 1, n - 1) = (r1 - x0 * l1) / l0;
        } else {
            const Eigen::Index m = svec_size(n);
            const Vector& ev = sc.psd_lambda[ip++];
            Matrix a = smat(r.segment(off, m), n);
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index i = 0; i < n; ++i) a(i, j) *= 2.0 / (ev(i) + ev(j));
            x.segment(off, m) = svec(a);
        }
    });
    return x;
}

// Largest t with lambda + t d in the cone (infinity when unbounded).
inline Real max_step(const Scaling& sc, const Vector& dir, const ConeDims& dims) {
    Real tmax = std::numeric_limits<Real>::infinity();
    std::size_t ip = 0;
    const Vector& lam = sc.lambda;
    for_each_block(dims, [&](Kind k, Eigen::Index off, Eigen::Index n) {
        if (k == Kind::orthant) {
            for (Eigen::Index i = off; i < off + n; ++i)
                if (dir(i) < 0.0) tmax = std::min(tmax, -lam(i) / dir(i));
        } else if (k == Kind::soc) {
            const Vector u = lam.segment(off, n);
            const Vector d = dir.segment(off, n);
            auto jdot = [n](const Vector& a, const Vector& b) {
                return a(0) * b(0) - (n > 1 ? a.tail(n - 1).dot(b.tail(n - 1)) : 0.0);
            };
            // f(t) = a t^2 + b t + c, c > 0; smallest positive root.
            const Real qa = jdot(d, d);
            const Real qb = 2.0 * jdot(u, d);
            const Real qc = jdot(u, u);
            Real t = std::numeric_limits<Real>::infinity();
            if (std::abs(qa) < 1e-300) {
                if (qb < 0.0) t = -qc / qb;
            } else {
                const Real disc = qb * qb - 4.0 * qa * qc;
                if (disc >= 0.0) {
                    const Real sq = std::sqrt(disc);
                    const Real q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
                    const Real r1 = q / qa;
                    const Real r2 = (q != 0.0) ? qc / q : std::numeric_limits<Real>::infinity();
                    for (Real r : {r1, r2})
                        if (r > 0.0) t = std::min(t, r);
                }
            }
            if (d(0) < 0.0) t = std::min(t, -u(0) / d(0));
            tmax = std::min(tmax, t);
        } else {
            const Eigen::Index m = svec_size(n);
            const Vector& ev = sc.psd_lambda[ip++];
            const Vector isq = ev.cwiseSqrt().cwiseInverse();
            const Matrix a = isq.asDiagonal() * smat(dir.segment(off, m), n) * isq.asDiagonal();
            Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
            const Real lmin = es.eigenvalues().minCoeff();
            if (lmin < 0.0) tmax = std::min(tmax, -1.0 / lmin);
        }
    });
    return tmax;
}

}  // namespace detail

/// Solves the cone program. Never throws for infeasible or unbounded
/// problems; those are reported through Result::status.
inline Result solve(const Problem& p, const Options& opt = {}) {
    using namespace detail;
    const Eigen::Index n = p.G.cols();
    const Eigen::Index m = p.G.rows();
    if (p.c.size() != n || p.h.size() != m || p.dims.size() != m)
        throw ArgumentError("conic::solve: inconsistent problem dimensions");
    for (auto q : p.dims.soc)
        if (q < 1) throw ArgumentError("conic::solve: second-order cone of dimension < 1");

    const ConeDims& dims = p.dims;
    const Real degree = static_cast<Real>(dims.degree());
    const Vector e = identity(dims);
    const Matrix G = p.G.cast<Real>();
    const Vector c = p.c.cast<Real>();
    const Vector h = p.h.cast<Real>();

    Result res;

    // Starting point: least-squares primal/dual points shifted into the cone.
    Eigen::LDLT<Matrix> gtg(G.transpose() * G);
    if (gtg.info() != Eigen::Success || gtg.rcond() < 1e-15) {
        res.status = Status::numerical_error;
        res.message = "G does not have full column rank";
        return res;
    }
    Vector x = gtg.solve(G.transpose() * h);
    Vector s = h - G * x;
    Vector z = G * gtg.solve(-c);
    {
        const Real as = max_negative_eig(s, dims);
        if (as >= -1e-8 * std::max(Real(1), s.norm())) s += (1 + std::max(as, Real(0))) * e;
        const Real az = max_negative_eig(z, dims);
        if (az >= -1e-8 * std::max(Real(1), z.norm())) z += (1 + std::max(az, Real(0))) * e;
    }
    Real tau = 1.0;
    Real kappa = 1.0;
    Scaling sc = compute_scaling(s, z, dims);

    const Real resx0 = std::max(Real(1), c.norm());
    const Real resz0 = std::max(Real(1), h.norm());

    for (int iter = 0;; ++iter) {
        res.iterations = iter;
        const Vector gtz = G.transpose() * z;
        const Vector gx = G * x;
        const Vector rx = gtz + c * tau;
        const Vector rz = s + gx - h * tau;
        const Real cx = c.dot(x);
        const Real hz = h.dot(z);
        const Real rt = kappa + cx + hz;
        const Real sz = s.dot(z);
        const Real mu = (sz + tau * kappa) / (degree + 1.0);

        const Real pcost = cx / tau;
        const Real dcost = -hz / tau;
        const Real gap = sz / (tau * tau);
        Real relgap = std::numeric_limits<Real>::infinity();
        if (pcost < 0.0) relgap = gap / -pcost;
        else if (dcost > 0.0) relgap = gap / dcost;
        const Real pres = rz.norm() / (tau * resz0);
        const Real dres = rx.norm() / (tau * resx0);
        const Real pinf = hz < 0.0 ? gtz.norm() / resx0 / -hz : std::numeric_limits<Real>::infinity();
        const Real dinf = cx < 0.0 ? (gx + s).norm() / resz0 / -cx : std::numeric_limits<Real>::infinity();

        res.primal_residual = static_cast<double>(pres);
        res.dual_residual = static_cast<double>(dres);
        res.gap = static_cast<double>(gap);
        res.relative_gap = static_cast<double>(relgap);
        res.primal_objective = static_cast<double>(pcost);
        res.dual_objective = static_cast<double>(dcost);

#ifdef NFISAC_CONIC_TRACE
        std::fprintf(stderr, "%3d pcost=%.9e dcost=%.9e gap=%.2e pres=%.2e dres=%.2e tau=%.2e kappa=%.2e pinf=%.2e\n", iter,
                     pcost, dcost, gap, pres, dres, tau, kappa, pinf);
#endif
        if (pres <= opt.feastol && dres <= opt.feastol && (gap <= opt.abstol || relgap <= opt.reltol)) {
            res.status = Status::optimal;
            res.x = (x / tau).cast<double>();
            res.s = (s / tau).cast<double>();
            res.z = (z / tau).cast<double>();
            return res;
        }
        if (pinf <= opt.infeastol) {
            res.status = Status::primal_infeasible;
            res.certificate_residual = static_cast<double>(pinf);
            res.z = (z / -hz).cast<double>();
            res.x = RVector::Zero(n);
            res.s = RVector::Zero(m);
            return res;
        }
        if (dinf <= opt.infeastol) {
            res.status = Status::dual_infeasible;
            res.certificate_residual = static_cast<double>(dinf);
            res.x = (x / -cx).cast<double>();
            res.s = (s / -cx).cast<double>();
            res.z = RVector::Zero(m);
            return res;
        }
        auto bail = [&](Status st, std::string msg) {
            res.status = st;
            res.message = std::move(msg);
            res.x = (x / tau).cast<double>();
            res.s = (s / tau).cast<double>();
            res.z = (z / tau).cast<double>();
            res.certificate_residual = static_cast<double>(std::min(pinf, dinf));
            return res;
        };
        if (iter >= opt.max_iterations) return bail(Status::max_iterations, "iteration limit reached");

        const Vector& lambda = sc.lambda;
        if (!lambda.allFinite()) return bail(Status::numerical_error, "scaling became non-finite");

        // M = W^{-T} G = Q R; the reduced system M^T M ux = r is solved through
        // R without forming M^T M.
        Matrix M(m, n);
        for (Eigen::Index j = 0; j < n; ++j) M.col(j) = apply(sc, G.col(j), dims, Apply::winvt);
        const Eigen::HouseholderQR<Matrix> qr(M);
        const auto R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        {
            const Vector diag = qr.matrixQR().diagonal().cwiseAbs();
            if (!diag.allFinite() || !(diag.minCoeff() > 1e-14 * diag.maxCoeff()))
                return bail(Status::numerical_error, "KKT factorization failed");
        }
        auto normal_solve = [&](const Vector& rhs) -> Vector {
            Vector y = R.transpose().solve(rhs);
            return R.solve(y);
        };

        // G^T uz = bx,  G ux - W^T W uz = bz.
        auto solve_kkt = [&](const Vector& bx, const Vector& bz, Vector& ux, Vector& uz) {
            ux = Vector::Zero(n);
            uz = Vector::Zero(m);
            Vector ex = bx;
            Vector ez = bz;
            for (int k = 0; k <= opt.refinement_steps; ++k) {
                const Vector wbz = apply(sc, ez, dims, Apply::winvt);
                const Vector dx = normal_solve(ex + M.transpose() * wbz);
                const Vector dz = apply(sc, Vector(M * dx - wbz), dims, Apply::winv);
                ux += dx;
                uz += dz;
                ex = bx - G.transpose() * uz;
                ez = bz - (G * ux - apply(sc, apply(sc, uz, dims, Apply::w), dims, Apply::wt));
            }
        };

        Vector x1, z1;
        solve_kkt(-c, h, x1, z1);
        const Real denom = c.dot(x1) + h.dot(z1) - kappa / tau;

        Vector ds_aff, dz_aff;
        Real dtau_aff = 0.0, dkappa_aff = 0.0;
        Real sigma = 0.0;
        bool stepped = false;
        for (int phase = 0; phase < 2; ++phase) {
            Vector rs;
            Real rk;
            Real eta;
            if (phase == 0) {
                rs = -jordan_product(lambda, lambda, dims);
                rk = -tau * kappa;
                eta = 1.0;
            } else {
                rs = -jordan_product(lambda, lambda, dims) + sigma * mu * e - jordan_product(ds_aff, dz_aff, dims);
                rk = -tau * kappa + sigma * mu - dtau_aff * dkappa_aff;
                eta = 1.0 - sigma;
            }
            const Vector ls = jordan_divide(sc, rs, dims);
            Vector x2, z2;
            solve_kkt(-eta * rx, Vector(-eta * rz - apply(sc, ls, dims, Apply::wt)), x2, z2);
            const Real dtau = (-eta * rt - rk / tau - c.dot(x2) - h.dot(z2)) / denom;
            const Vector dx = x2 + dtau * x1;
            const Vector dz = z2 + dtau * z1;
            const Vector dzt = apply(sc, dz, dims, Apply::w);
            const Vector dst = ls - dzt;
            const Real dkappa = (rk - kappa * dtau) / tau;

            Real alpha = std::min(max_step(sc, dst, dims), max_step(sc, dzt, dims));
            if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
            if (dkappa < 0.0) alpha = std::min(alpha, -kappa / dkappa);
            if (std::isnan(alpha) || alpha <= 0.0) return bail(Status::numerical_error, "invalid step length");

            if (phase == 0) {
                const Real a = std::min(Real(1), alpha);
                sigma = std::pow(1.0 - a, 3);
                ds_aff = dst;
                dz_aff = dzt;
                dtau_aff = dtau;
                dkappa_aff = dkappa;
            } else {
                const Real a = std::min(Real(1), Real(opt.step_fraction) * alpha);
                if (!(a > 0.0) || !dx.allFinite() || !dz.allFinite())
                    return bail(Status::numerical_error, "search direction is degenerate");
                x += a * dx;
                z += a * dz;
                s += a * apply(sc, dst, dims, Apply::wt);
                tau += a * dtau;
                kappa += a * dkappa;
                const Vector st = lambda + a * dst;
                const Vector zt = lambda + a * dzt;
                sc = update_scaling(sc, st, zt, s, z, dims);
                stepped = true;
            }
        }
        if (!stepped) return bail(Status::numerical_error, "no step taken");
    }
}

}  // namespace nfisac::conic

#endif  // NFISAC_CONIC_HPP
