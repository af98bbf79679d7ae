#ifndef NFISAC_OPTIMIZER_HPP
#define NFISAC_OPTIMIZER_HPP

// Max-min beampattern design with cross-correlation suppression and per-user
// rate constraints, solved as a semidefinite relaxation over the lifted user
// covariances F_k and the sensing covariance R_s, followed by closed-form
// rank-one recovery.

#include "nfisac/conic.hpp"
#include "nfisac/core.hpp"
#include "nfisac/embedding.hpp"
#include "nfisac/metrics.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace nfisac {

struct SensingWeights {
    std::vector<double> target;  // w_l
    RMatrix pair;                // w_{l,l'}, symmetric; diagonal unused
    double tolerance = 0.1;      // epsilon

    void validate(std::size_t targets) const {
        if (target.size() != targets) throw ArgumentError("sensing weights: one weight per target required");
        if (pair.rows() != static_cast<Eigen::Index>(targets) || pair.cols() != pair.rows())
            throw ArgumentError("sensing weights: pair weight matrix must be L x L");
        for (double w : target)
            if (!(w > 0.0)) throw ArgumentError("sensing weights: target weights must be positive");
        for (Eigen::Index i = 0; i < pair.rows(); ++i)
            for (Eigen::Index j = 0; j < pair.cols(); ++j) {
                if (i == j) continue;
                if (!(pair(i, j) > 0.0)) throw ArgumentError("sensing weights: pair weights must be positive");
                if (std::abs(pair(i, j) - pair(j, i)) > 1e-12 * pair(i, j))
                    throw ArgumentError("sensing weights: pair weights must be symmetric");
            }
        if (!(tolerance > 0.0)) throw ArgumentError("sensing weights: tolerance must be positive");
    }
};

/// w_l = 1/||h_l||^2 and w_{l,l'} = 1/(||h_l|| ||h_l'||).
inline SensingWeights assemble_scenario_weights(const std::vector<CVector>& target_channels, double tolerance = 0.1) {
    const auto n = target_channels.size();
    SensingWeights w;
    w.tolerance = tolerance;
    w.target.resize(n);
    w.pair = RMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<double> norms(n);
    for (std::size_t l = 0; l < n; ++l) {
        norms[l] = target_channels[l].norm();
        if (!(norms[l] > 0.0))
            throw InfeasibleError("target " + std::to_string(l + 1) + " has a zero channel (outside the radiation half-space)",
                                  "beampattern");
        w.target[l] = 1.0 / (norms[l] * norms[l]);
    }
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t m = 0; m < n; ++m)
            if (l != m) w.pair(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m)) = 1.0 / (norms[l] * norms[m]);
    return w;
}

using TargetPair = std::pair<std::size_t, std::size_t>;  // (l, l') with l < l'

inline std::vector<TargetPair> all_target_pairs(std::size_t targets) {
    std::vector<TargetPair> pairs;
    for (std::size_t l = 0; l < targets; ++l)
        for (std::size_t m = l + 1; m < targets; ++m) pairs.emplace_back(l, m);
    return pairs;
}

// One instance of the design program, with channels already evaluated.
struct BeamformingProblem {
    std::vector<CVector> user_channels;    // h_{t,k}
    std::vector<CVector> target_channels;  // h_{t,l}
    SensingWeights weights;
    std::vector<TargetPair> pairs;  // cross-correlation constraints that are enforced
    double max_power = 0.0;         // P_max [W]
    std::vector<double> user_noise; // sigma_k^2 [W]
    std::vector<double> min_rate;   // R_min,k [bps/Hz]; <= 0 omits the constraint

    std::size_t users() const { return user_channels.size(); }
    std::size_t targets() const { return target_channels.size(); }
    Eigen::Index dimension() const { return target_channels.empty() ? 0 : target_channels.front().size(); }
    bool has_rate_constraint(std::size_t k) const { return min_rate[k] > 0.0; }

    void validate() const {
        if (targets() < 1) throw ArgumentError("beamforming problem needs at least one target");
        const Eigen::Index n = dimension();
        for (const auto& h : user_channels)
            if (h.size() != n) throw ArgumentError("beamforming problem: user channel dimension mismatch");
        for (const auto& h : target_channels)
            if (h.size() != n) throw ArgumentError("beamforming problem: target channel dimension mismatch");
        if (user_noise.size() != users() || min_rate.size() != users())
            throw ArgumentError("beamforming problem: per-user noise and rate lists must match the user count");
        for (double s : user_noise)
            if (!(s > 0.0)) throw ArgumentError("beamforming problem: noise powers must be positive");
        if (!(max_power >= 0.0)) throw ArgumentError("beamforming problem: power budget must be non-negative");
        weights.validate(targets());
        for (const auto& [l, m] : pairs)
            if (l >= m || m >= targets()) throw ArgumentError("beamforming problem: invalid target pair");
    }
};

struct SolverOptions {
    conic::Options conic{};
    // Solve in the span of the conjugated user/target channels. Exact: every
    // constraint only sees R_x through quadratic forms with those vectors and
    // through its trace, and projecting onto the span never increases trace.
    bool subspace_reduction = true;
    double rank_tolerance = 1e-10;
};

struct RelaxedSolution {
    std::vector<CMatrix> user_covariances;  // F_k
    CMatrix sensing_covariance;             // R_s
    CMatrix total_covariance;               // R_x
    double objective = 0.0;                 // mu
    conic::Status status = conic::Status::optimal;
    double duality_gap = 0.0;
    double relative_gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    Eigen::Index subspace_dimension = 0;
};

struct BeamformingSolution {
    std::vector<CVector> beamformers;  // f_k
    CMatrix sensing_covariance;        // adjusted R_s
    CMatrix total_covariance;          // R_x, unchanged from the relaxed solution
    double objective = 0.0;

    CovarianceDecomposition decomposition() const { return {beamformers, sensing_covariance}; }
};

namespace detail {

// Orthonormal basis of span{h_a^*} (or the identity without reduction).
inline CMatrix channel_subspace(const BeamformingProblem& p, const SolverOptions& opt) {
    const Eigen::Index n = p.dimension();
    if (!opt.subspace_reduction) return CMatrix::Identity(n, n);
    std::vector<CVector> cols;
    for (const auto& h : p.user_channels)
        if (h.norm() > 0.0) cols.push_back(h.conjugate() / h.norm());
    for (const auto& h : p.target_channels)
        if (h.norm() > 0.0) cols.push_back(h.conjugate() / h.norm());
    if (cols.empty()) return CMatrix::Identity(n, 1);
    CMatrix a(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = cols[i];
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > opt.rank_tolerance * sv(0)) ++rank;
    return svd.matrixU().leftCols(std::max<Eigen::Index>(rank, 1));
}

// Real-embedding image of every Hermitian basis matrix, as svec columns.
inline RMatrix embedding_columns(Eigen::Index d) {
    const Eigen::Index np = hermitian_params::count(d);
    RMatrix cols(conic::svec_size(2 * d), np);
    RVector p = RVector::Zero(np);
    for (Eigen::Index k = 0; k < np; ++k) {
        p.setZero();
        p(k) = 1.0;
        cols.col(k) = conic::svec(complex_to_real_embed(hermitian_params::to_matrix(p, d)));
    }
    return cols;
}

}  // namespace detail

// Real conic form of the relaxed program plus what is needed to map a conic
// solution back to covariances.
struct ConicFormulation {
    conic::Problem problem;
    CMatrix basis;                        // N x d
    Eigen::Index params_per_block = 0;    // d^2
    std::size_t users = 0;
    std::size_t targets = 0;
    std::vector<std::size_t> rate_users;  // users with a rate row, in row order
    std::size_t pairs = 0;
    double mu_ref = 1.0;                  // objective unit
    double power = 1.0;                   // covariance unit

    Eigen::Index block_col(Eigen::Index b) const { return 1 + b * params_per_block; }
    Eigen::Index rate_row0() const { return static_cast<Eigen::Index>(targets); }
    Eigen::Index power_row() const { return static_cast<Eigen::Index>(targets + rate_users.size()); }
    Eigen::Index soc_row0() const { return power_row() + 1; }
};

/// Builds the conic program behind solve_relaxed:
///
///   max mu  s.t.  w_l h_l^T R_x h_l^* >= mu,
///                 w_{l,l'} |h_l^T R_x h_l'^*| <= eps mu   (enforced pairs),
///                 Tr(h_k^* h_k^T (xi_k F_k - R_x)) >= sigma_k^2,
///                 Tr R_x <= P_max,  R_x = sum F_k + R_s,  F_k, R_s PSD.
///
/// Covariances are expressed in units of P_max inside the channel subspace.
/// Each rate constraint is written in the equivalent SINR form
/// |h_k^T f_k|^2 >= gamma_k (interference + noise), which keeps the user
/// terms free of cancellation. Requires max_power > 0.
inline ConicFormulation formulate(const BeamformingProblem& p, const SolverOptions& opt = {}) {
    p.validate();
    if (!(p.max_power > 0.0)) throw ArgumentError("formulate: power budget must be positive");
    const std::size_t K = p.users();
    const std::size_t L = p.targets();

    ConicFormulation f;
    f.basis = detail::channel_subspace(p, opt);
    f.users = K;
    f.targets = L;
    f.pairs = p.pairs.size();
    f.power = p.max_power;
    const Eigen::Index d = f.basis.cols();
    auto coords = [&](const CVector& h) -> CVector { return f.basis.adjoint() * h.conjugate(); };
    std::vector<CVector> gu, gt;
    for (const auto& h : p.user_channels) gu.push_back(coords(h));
    for (const auto& h : p.target_channels) gt.push_back(coords(h));

    double mu_ref = 0.0;
    for (std::size_t l = 0; l < L; ++l) mu_ref = std::max(mu_ref, p.weights.target[l] * gt[l].squaredNorm());
    if (!(mu_ref > 0.0)) throw InfeasibleError("every target channel is zero", "beampattern");
    f.mu_ref = mu_ref;

    const Eigen::Index np = hermitian_params::count(d);
    f.params_per_block = np;
    const Eigen::Index blocks = static_cast<Eigen::Index>(K) + 1;  // F_1..F_K, R_s
    const Eigen::Index nx = 1 + blocks * np;

    for (std::size_t k = 0; k < K; ++k)
        if (p.has_rate_constraint(k)) {
            if (!(gu[k].norm() > 0.0))
                throw InfeasibleError("user " + std::to_string(k + 1) + " has a zero channel", "rate");
            f.rate_users.push_back(k);
        }

    conic::ConeDims dims;
    dims.orthant = static_cast<Eigen::Index>(L + f.rate_users.size() + 1);
    dims.soc.assign(p.pairs.size(), 3);
    dims.psd.assign(static_cast<std::size_t>(blocks), 2 * d);
    const Eigen::Index m = dims.size();

    RMatrix G = RMatrix::Zero(m, nx);
    RVector h = RVector::Zero(m);
    RVector c = RVector::Zero(nx);
    c(0) = -1.0;

    Eigen::Index row = 0;
    // Beampattern: mu - (w_l / mu_ref) q_l(R_x) <= 0.
    for (std::size_t l = 0; l < L; ++l, ++row) {
        const RVector q = hermitian_params::bilinear_coefficients(gt[l], gt[l]).real();
        G(row, 0) = 1.0;
        for (Eigen::Index b = 0; b < blocks; ++b)
            G.row(row).segment(f.block_col(b), np) = -(p.weights.target[l] / mu_ref) * q.transpose();
    }
    // Rate: a_k - gamma_k (other users + sensing) >= gamma_k / SNR_k along the
    // unit-norm user direction, divided by 1 + gamma_k.
    for (std::size_t k : f.rate_users) {
        const double gn2 = gu[k].squaredNorm();
        const CVector gh = gu[k] / std::sqrt(gn2);
        const RVector q = hermitian_params::bilinear_coefficients(gh, gh).real();
        const double gamma = sinr_target(p.min_rate[k]);
        const double snr = p.max_power * gn2 / p.user_noise[k];
        const double scale = 1.0 / (1.0 + gamma);
        for (Eigen::Index b = 0; b < blocks; ++b) {
            const double coef = (b == static_cast<Eigen::Index>(k)) ? 1.0 : -gamma;
            G.row(row).segment(f.block_col(b), np) = -scale * coef * q.transpose();
        }
        h(row) = -scale * gamma / snr;
        ++row;
    }
    // Power: sum of traces <= 1.
    {
        const RVector t = hermitian_params::trace_coefficients(d);
        for (Eigen::Index b = 0; b < blocks; ++b) G.row(row).segment(f.block_col(b), np) = t.transpose();
        h(row) = 1.0;
        ++row;
    }
    // Cross-correlation: (eps mu, (w/mu_ref) Re c, (w/mu_ref) Im c) in Q^3.
    for (const auto& [l, lp] : p.pairs) {
        const CVector q = hermitian_params::bilinear_coefficients(gt[l], gt[lp]);
        const double w = p.weights.pair(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(lp)) / mu_ref;
        G(row, 0) = -p.weights.tolerance;
        for (Eigen::Index b = 0; b < blocks; ++b) {
            G.row(row + 1).segment(f.block_col(b), np) = -w * q.real().transpose();
            G.row(row + 2).segment(f.block_col(b), np) = -w * q.imag().transpose();
        }
        row += 3;
    }
    // PSD blocks: embed(Z_b) >= 0.
    const RMatrix emb = detail::embedding_columns(d);
    for (Eigen::Index b = 0; b < blocks; ++b) {
        G.block(row, f.block_col(b), emb.rows(), np) = -emb;
        row += emb.rows();
    }
    f.problem = conic::Problem{c, G, h, dims};
    return f;
}

/// Solves the relaxed design program (see formulate). Throws InfeasibleError
/// naming the constraint families carried by the Farkas certificate, or
/// SolverError when the interior-point method does not converge.
inline RelaxedSolution solve_relaxed(const BeamformingProblem& p, const SolverOptions& opt = {}) {
    p.validate();
    const Eigen::Index n = p.dimension();
    const std::size_t K = p.users();

    bool any_rate = false;
    for (std::size_t k = 0; k < K; ++k) any_rate = any_rate || p.has_rate_constraint(k);

    if (p.max_power == 0.0) {
        if (any_rate) throw InfeasibleError("zero power budget cannot meet a positive rate requirement", "rate,power");
        RelaxedSolution zero;
        zero.user_covariances.assign(K, CMatrix::Zero(n, n));
        zero.sensing_covariance = CMatrix::Zero(n, n);
        zero.total_covariance = CMatrix::Zero(n, n);
        zero.subspace_dimension = 0;
        return zero;
    }

    const ConicFormulation f = formulate(p, opt);
    const conic::Result r = conic::solve(f.problem, opt.conic);

    if (r.status == conic::Status::primal_infeasible) {
        auto weight = [&](Eigen::Index off, Eigen::Index len) { return r.z.segment(off, len).cwiseAbs().sum(); };
        const double thr = 1e-6 * r.z.cwiseAbs().sum();
        std::vector<std::string> fam;
        if (weight(0, static_cast<Eigen::Index>(f.targets)) > thr) fam.push_back("beampattern");
        if (!f.rate_users.empty() && weight(f.rate_row0(), static_cast<Eigen::Index>(f.rate_users.size())) > thr)
            fam.push_back("rate");
        if (weight(f.power_row(), 1) > thr) fam.push_back("power");
        if (f.pairs > 0 && weight(f.soc_row0(), 3 * static_cast<Eigen::Index>(f.pairs)) > thr)
            fam.push_back("cross_correlation");
        std::string joined;
        for (const auto& s : fam) joined += (joined.empty() ? "" : ",") + s;
        throw InfeasibleError("design program is infeasible (binding: " + joined + ")", joined);
    }
    if (r.status != conic::Status::optimal) {
        std::ostringstream os;
        os << "conic solver failed: " << conic::to_string(r.status) << " after " << r.iterations
           << " iterations (pres=" << r.primal_residual << ", dres=" << r.dual_residual << ", gap=" << r.gap
           << (r.message.empty() ? "" : ", " + r.message) << ")";
        throw SolverError(os.str());
    }

    RelaxedSolution out;
    out.subspace_dimension = f.basis.cols();
    out.status = r.status;
    out.iterations = r.iterations;
    out.primal_residual = r.primal_residual;
    out.dual_residual = r.dual_residual;
    out.duality_gap = r.gap * f.power * f.mu_ref;
    out.relative_gap = r.relative_gap;
    out.objective = r.x(0) * f.power * f.mu_ref;
    const Eigen::Index d = f.basis.cols();
    auto lift = [&](Eigen::Index b) -> CMatrix {
        const CMatrix z = hermitian_params::to_matrix(r.x.segment(f.block_col(b), f.params_per_block), d);
        return hermitian_part(f.power * (f.basis * z * f.basis.adjoint()));
    };
    out.total_covariance = CMatrix::Zero(n, n);
    for (std::size_t k = 0; k < K; ++k) {
        out.user_covariances.push_back(lift(static_cast<Eigen::Index>(k)));
        out.total_covariance += out.user_covariances.back();
    }
    out.sensing_covariance = lift(static_cast<Eigen::Index>(K));
    out.total_covariance += out.sensing_covariance;
    return out;
}

/// f = (h^T F h^*)^{-1/2} F h^*. Satisfies f f^H <= F and |h^T f|^2 = h^T F h^*.
inline CVector recover_rank_one(const CMatrix& f, const CVector& h) {
    if (f.rows() != h.size() || f.cols() != h.size()) throw ArgumentError("recover_rank_one: dimension mismatch");
    const CVector v = f * h.conjugate();
    const double q = (h.transpose() * v).value().real();
    const double floor = 1e-14 * std::max(0.0, f.trace().real()) * h.squaredNorm();
    if (!(q > floor) || !(q > 0.0)) throw DegenerateUserError("recover_rank_one: user receives no effective power");
    return v / std::sqrt(q);
}

/// R_s + sum_k (F_k - f_k f_k^H). The PSD floor is relative to the total
/// covariance, the scale of the subtraction's rounding.
inline CMatrix residual_sensing_cov(const CMatrix& rs, const std::vector<CMatrix>& fs, const std::vector<CVector>& beams,
                                    double rel_floor = 1e-7) {
    if (fs.size() != beams.size()) throw ArgumentError("residual_sensing_cov: list size mismatch");
    CMatrix out = rs;
    CMatrix total = rs;
    for (std::size_t k = 0; k < fs.size(); ++k) {
        out += fs[k] - beams[k] * beams[k].adjoint();
        total += fs[k];
    }
    out = hermitian_part(out);
    const double scale = std::max(spectral_norm(out), spectral_norm(total));
    if (min_eigenvalue(out) < -rel_floor * scale)
        throw NumericalError("residual_sensing_cov: reconstructed sensing covariance is not PSD");
    return out;
}

/// Rank-one recovery for every user. A user without a rate requirement whose
/// lifted covariance delivers no power gets f_k = 0 and its F_k moves into
/// the sensing covariance.
inline BeamformingSolution recover_solution(const RelaxedSolution& relaxed, const BeamformingProblem& p) {
    BeamformingSolution sol;
    for (std::size_t k = 0; k < p.users(); ++k) {
        try {
            sol.beamformers.push_back(recover_rank_one(relaxed.user_covariances[k], p.user_channels[k]));
        } catch (const DegenerateUserError&) {
            if (p.has_rate_constraint(k)) throw;
            sol.beamformers.push_back(CVector::Zero(p.dimension()));
        }
    }
    sol.sensing_covariance = residual_sensing_cov(relaxed.sensing_covariance, relaxed.user_covariances, sol.beamformers);
    sol.total_covariance = relaxed.total_covariance;
    sol.objective = relaxed.objective;
    return sol;
}

// ---------------------------------------------------------------------------
// Verification

struct VerifyTolerances {
    double relative = 1e-6;  // beampattern, cross-correlation, rate, power
    double identity = 1e-7;  // covariance identity, Frobenius relative
    double psd = 1e-7;       // eigenvalue floor relative to ||R_x||
};

struct ConstraintFamily {
    std::string name;
    bool passed = true;
    double value = 0.0;      // worst observed quantity
    double threshold = 0.0;  // bound it is compared with
    std::string detail;
};

struct ConstraintReport {
    std::vector<ConstraintFamily> families;
    double min_weighted_gain = 0.0;
    double max_pair_ratio = 0.0;  // max w|cross| / mu over enforced pairs
    std::vector<double> user_sinr;
    std::vector<double> user_rate;
    double trace = 0.0;

    bool passed() const {
        for (const auto& f : families)
            if (!f.passed) return false;
        return true;
    }
    const ConstraintFamily& family(const std::string& name) const {
        for (const auto& f : families)
            if (f.name == name) return f;
        throw ArgumentError("no constraint family named " + name);
    }
};

/// Audits a candidate (beamformers, sensing covariance, R_x, mu) against every
/// constraint family of the unrelaxed design program.
inline ConstraintReport verify_solution(const BeamformingSolution& sol, const BeamformingProblem& p,
                                        const VerifyTolerances& tol = {}) {
    ConstraintReport rep;
    const double mu = sol.objective;
    const CMatrix& rx = sol.total_covariance;

    double scale_gain = 0.0;
    rep.min_weighted_gain = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < p.targets(); ++l) {
        const double g = p.weights.target[l] * transpose_form(p.target_channels[l], rx, p.target_channels[l]).real();
        rep.min_weighted_gain = std::min(rep.min_weighted_gain, g);
        scale_gain = std::max(scale_gain, p.weights.target[l] * p.target_channels[l].squaredNorm() * p.max_power);
    }
    const double abs_floor = 1e-12 * scale_gain;
    {
        ConstraintFamily f{"beampattern"};
        f.value = rep.min_weighted_gain;
        f.threshold = mu - tol.relative * std::abs(mu) - abs_floor;
        f.passed = f.value >= f.threshold;
        rep.families.push_back(f);
    }
    {
        ConstraintFamily f{"cross_correlation"};
        double worst = 0.0;
        for (const auto& [l, lp] : p.pairs) {
            const double w = p.weights.pair(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(lp));
            const double v = w * cross_correlation(p.target_channels[l], p.target_channels[lp], rx);
            worst = std::max(worst, v);
            if (v > p.weights.tolerance * mu * (1.0 + tol.relative) + abs_floor) {
                f.passed = false;
                f.detail += "(" + std::to_string(l + 1) + "," + std::to_string(lp + 1) + ") ";
            }
        }
        f.value = worst;
        f.threshold = p.weights.tolerance * mu * (1.0 + tol.relative) + abs_floor;
        rep.max_pair_ratio = mu != 0.0 ? worst / mu : (worst > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        rep.families.push_back(f);
    }
    {
        ConstraintFamily f{"rate"};
        const auto dec = sol.decomposition();
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < p.users(); ++k) {
            const double s = user_sinr(p.user_channels[k], dec, p.user_noise[k], k);
            rep.user_sinr.push_back(s);
            rep.user_rate.push_back(user_rate(s));
            if (!p.has_rate_constraint(k)) continue;
            const double margin = rep.user_rate.back() - p.min_rate[k] * (1.0 - tol.relative);
            worst = std::min(worst, rep.user_rate.back() - p.min_rate[k]);
            if (margin < 0.0) {
                f.passed = false;
                f.detail += "user " + std::to_string(k + 1) + " ";
            }
        }
        f.value = std::isfinite(worst) ? worst : 0.0;
        f.threshold = 0.0;
        rep.families.push_back(f);
    }
    {
        ConstraintFamily f{"power"};
        rep.trace = rx.trace().real();
        f.value = rep.trace;
        f.threshold = p.max_power * (1.0 + tol.relative);
        f.passed = f.value <= f.threshold;
        rep.families.push_back(f);
    }
    {
        ConstraintFamily f{"covariance_identity"};
        const double resid = (sol.decomposition().total() - rx).norm();
        f.value = resid;
        f.threshold = tol.identity * std::max(rx.norm(), 1e-300);
        f.passed = resid <= f.threshold || (rx.norm() == 0.0 && resid == 0.0);
        rep.families.push_back(f);
    }
    {
        ConstraintFamily f{"psd"};
        f.value = sol.sensing_covariance.size() ? min_eigenvalue(sol.sensing_covariance) : 0.0;
        f.threshold = -tol.psd * spectral_norm(rx);
        f.passed = f.value >= f.threshold;
        rep.families.push_back(f);
    }
    return rep;
}

/// Largest common R_min (bisection) for which the program stays feasible.
/// Used as a diagnostic when a requested rate is infeasible.
inline double max_feasible_common_rate(BeamformingProblem p, double upper, const SolverOptions& opt = {},
                                       double tol = 1e-3) {
    auto feasible = [&](double rate) {
        for (auto& r : p.min_rate) r = rate;
        try {
            solve_relaxed(p, opt);
            return true;
        } catch (const InfeasibleError&) {
            return false;
        }
    };
    double lo = 0.0;
    double hi = upper;
    if (feasible(hi)) return hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace nfisac

#endif  // NFISAC_OPTIMIZER_HPP
