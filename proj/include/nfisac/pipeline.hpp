#ifndef NFISAC_PIPELINE_HPP
#define NFISAC_PIPELINE_HPP

// End-to-end runs: solve, recover, verify, synthesize, evaluate, export.

#include "nfisac/capon.hpp"
#include "nfisac/config.hpp"
#include "nfisac/scenario.hpp"
#include "nfisac/signalsim.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace nfisac {

/// SINR of user k's stream at a hypothetical receiver at each grid point:
/// the user channel is replaced by the near-field channel to the point while
/// the beamformers and sensing covariance stay fixed.
inline SpatialGrid sinr_heatmap(const Scenario& s, const CovarianceDecomposition& d, std::size_t k, const GridSpec& grid) {
    if (k >= s.users.size()) throw ArgumentError("sinr_heatmap: user index out of range");
    const double noise = s.users[k].noise;
    return evaluate_grid(grid, [&](const Vec3& p) {
        const double v = user_sinr(nearfield_channel(s.tx, p, s.channel), d, noise, k);
        return v > 0.0 ? to_db(v) : -std::numeric_limits<double>::infinity();
    });
}

// ---- solution container -------------------------------------------------

inline constexpr const char* kSolutionFormat = "nfisac-solution";
inline constexpr int kSolutionVersion = 1;

namespace detail {

inline Json cvec_json(const CVector& v) {
    Json re = Json::array(), im = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        re.push_back(v(i).real());
        im.push_back(v(i).imag());
    }
    return {{"re", re}, {"im", im}};
}

// Row-major.
inline Json cmat_json(const CMatrix& m) {
    Json re = Json::array(), im = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            re.push_back(m(i, j).real());
            im.push_back(m(i, j).imag());
        }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

inline std::vector<double> number_list(const Json& j, const char* what) {
    if (!j.is_array()) throw ParseError(std::string("solution: ") + what + " must be an array");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ParseError(std::string("solution: ") + what + " must contain numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline CVector cvec_from(const Json& j) {
    const auto re = number_list(j.at("re"), "re");
    const auto im = number_list(j.at("im"), "im");
    if (re.size() != im.size()) throw ParseError("solution: re/im length mismatch");
    CVector v(static_cast<Eigen::Index>(re.size()));
    for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Eigen::Index>(i)) = {re[i], im[i]};
    return v;
}

inline CMatrix cmat_from(const Json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const CVector flat = cvec_from(j);
    if (rows < 0 || cols < 0 || flat.size() != rows * cols) throw ParseError("solution: matrix size mismatch");
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = flat(i * cols + k);
    return m;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream os(path);
    if (!os) throw ArgumentError("cannot open " + path.string() + " for writing");
    os << j.dump(2) << "\n";
}

}  // namespace detail

struct StoredSolution {
    Scheme scheme = Scheme::proposed;
    BeamformingSolution solution;
};

inline Json solution_to_json(Scheme scheme, const BeamformingSolution& sol, const RelaxedSolution* relaxed = nullptr) {
    Json j;
    j["format"] = kSolutionFormat;
    j["version"] = kSolutionVersion;
    j["scheme"] = to_string(scheme);
    j["objective"] = sol.objective;
    j["power_unit"] = "W";
    j["beamformers"] = Json::array();
    for (const auto& f : sol.beamformers) j["beamformers"].push_back(detail::cvec_json(f));
    j["sensing_covariance"] = detail::cmat_json(sol.sensing_covariance);
    j["total_covariance"] = detail::cmat_json(sol.total_covariance);
    if (relaxed) {
        j["solver"] = {{"status", conic::to_string(relaxed->status)},
                       {"iterations", relaxed->iterations},
                       {"duality_gap", relaxed->duality_gap},
                       {"relative_gap", relaxed->relative_gap},
                       {"primal_residual", relaxed->primal_residual},
                       {"dual_residual", relaxed->dual_residual},
                       {"subspace_dimension", relaxed->subspace_dimension}};
    }
    return j;
}

inline StoredSolution solution_from_json(const Json& j) {
    try {
        if (j.at("format").get<std::string>() != kSolutionFormat) throw ParseError("solution: wrong format tag");
        if (j.at("version").get<int>() != kSolutionVersion) throw ParseError("solution: unsupported version");
        StoredSolution s;
        s.scheme = scheme_from_string(j.at("scheme").get<std::string>());
        s.solution.objective = j.at("objective").get<double>();
        for (const auto& f : j.at("beamformers")) s.solution.beamformers.push_back(detail::cvec_from(f));
        s.solution.sensing_covariance = detail::cmat_from(j.at("sensing_covariance"));
        s.solution.total_covariance = detail::cmat_from(j.at("total_covariance"));
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("solution: ") + e.what());
    } catch (const ArgumentError& e) {
        throw ParseError(std::string("solution: ") + e.what());
    }
}

inline void write_solution(const std::filesystem::path& path, Scheme scheme, const BeamformingSolution& sol,
                           const RelaxedSolution* relaxed = nullptr) {
    detail::write_json(path, solution_to_json(scheme, sol, relaxed));
}

inline StoredSolution read_solution(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("solution: malformed JSON: " + std::string(e.what()));
    }
    return solution_from_json(j);
}

inline Json report_to_json(const ConstraintReport& r) {
    Json j;
    j["passed"] = r.passed();
    j["families"] = Json::array();
    for (const auto& f : r.families)
        j["families"].push_back(
            {{"name", f.name}, {"passed", f.passed}, {"value", f.value}, {"threshold", f.threshold}, {"detail", f.detail}});
    j["min_weighted_gain"] = r.min_weighted_gain;
    j["max_pair_ratio"] = r.max_pair_ratio;
    j["user_rate_bps_hz"] = r.user_rate;
    Json db = Json::array();
    for (double v : r.user_sinr) db.push_back(v > 0.0 ? Json(to_db(v)) : Json(nullptr));
    j["user_sinr_db"] = db;
    j["trace_w"] = r.trace;
    return j;
}

// Grid with axis metadata; values[iy][iz], null where the value is not finite.
inline Json grid_to_json(const SpatialGrid& g) {
    Json values = Json::array();
    for (Eigen::Index i = 0; i < g.values.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < g.values.cols(); ++j)
            row.push_back(std::isfinite(g.values(i, j)) ? Json(g.values(i, j)) : Json(nullptr));
        values.push_back(row);
    }
    return {{"x_m", g.spec.x},
            {"y_m", {{"min", g.spec.y_min}, {"step", g.spec.step}, {"count", g.spec.ny()}}},
            {"z_m", {{"min", g.spec.z_min}, {"step", g.spec.step}, {"count", g.spec.nz()}}},
            {"unit", g.unit},
            {"layout", "values[y_index][z_index]"},
            {"notes", g.notes},
            {"values", values}};
}

inline void write_grid_json(const std::filesystem::path& path, const SpatialGrid& g) {
    detail::write_json(path, grid_to_json(g));
}

// ---- localization -------------------------------------------------------

struct Localization {
    PeakList peaks;
    std::vector<double> target_errors;  // distance from each target to its nearest peak [m]
    bool all_resolved = false;          // every target has a peak within the radius
};

inline constexpr double kPeakSeparation = 0.05;  // metres

inline Localization localize(const SpatialGrid& g, const std::vector<TargetSpec>& targets, double radius) {
    Localization out;
    out.peaks = find_peaks(g, targets.size(), kPeakSeparation);
    out.all_resolved = !out.peaks.shortfall;
    for (const auto& t : targets) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : out.peaks.peaks) best = std::min(best, (p.position - t.position).norm());
        out.target_errors.push_back(best);
        out.all_resolved = out.all_resolved && best <= radius;
    }
    return out;
}

// ---- pipeline -----------------------------------------------------------

struct PipelineOptions {
    std::optional<std::uint64_t> seed;  // overrides the config's transmit seed; echo seed = seed + 1
    std::optional<double> grid_step;
    std::optional<double> loading;
    bool heatmaps = true;
    bool capon = true;
};

namespace detail {

// Re-raises a module error with a stage tag, keeping its type.
template <typename F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
    const std::string tag = stage + ": ";
    try {
        return f();
    } catch (const InfeasibleError& e) {
        throw InfeasibleError(tag + e.what(), e.binding_families());
    } catch (const DegenerateUserError& e) {
        throw DegenerateUserError(tag + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(tag + e.what());
    } catch (const SolverError& e) {
        throw SolverError(tag + e.what());
    } catch (const SingularityError& e) {
        throw SingularityError(tag + e.what());
    } catch (const GeometryError& e) {
        throw GeometryError(tag + e.what());
    } catch (const ArgumentError& e) {
        throw ArgumentError(tag + e.what());
    } catch (const ParseError& e) {
        throw ParseError(tag + e.what());
    }
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

inline ScenarioConfig apply_overrides(ScenarioConfig c, const PipelineOptions& o) {
    if (o.seed) {
        c.seeds.transmit = *o.seed;
        c.seeds.echo = *o.seed + 1;
    }
    if (o.grid_step) {
        c.grid.step = *o.grid_step;
        c.grid.validate();
    }
    if (o.loading) {
        if (*o.loading < 0.0) throw ArgumentError("diagonal loading must be non-negative");
        c.capon.diagonal_loading = *o.loading;
    }
    return c;
}

/// Largest common rate the scheme's design program admits, for infeasibility reports.
inline double feasibility_boundary(const Scenario& s, Scheme scheme, const SolverOptions& opt) {
    BeamformingProblem p = build_problem(s, scheme);
    double upper = 0.0;
    for (double r : p.min_rate) upper = std::max(upper, r);
    return max_feasible_common_rate(p, upper, opt);
}

struct PipelineResult {
    SchemeResult result;
    Json summary;
    std::vector<std::string> artifacts;
};

/// Runs one scheme end to end and writes its artifacts into `out_dir`:
/// solution.json, verification.json, sinr_user<k>.csv, capon.csv,
/// summary.json (or infeasibility.json when the design program is infeasible).
inline PipelineResult run_pipeline(const ScenarioConfig& cfg_in, const std::filesystem::path& out_dir,
                                   const PipelineOptions& po = {}) {
    namespace fs = std::filesystem;
    const ScenarioConfig cfg = apply_overrides(cfg_in, po);
    fs::create_directories(out_dir);
    const Scenario s = build_scenario(cfg);
    const SolverOptions sopt = solver_options(cfg);
    PipelineResult out;
    Json& sum = out.summary;
    Json timing;
    sum["scheme"] = to_string(cfg.scheme);
    sum["warnings"] = cfg.warnings;

    auto t0 = std::chrono::steady_clock::now();
    try {
        out.result = detail::staged("solve", [&] { return solve_scheme(s, cfg.scheme, sopt); });
    } catch (const InfeasibleError& e) {
        Json inf;
        inf["scheme"] = to_string(cfg.scheme);
        inf["stage"] = "solve";
        inf["message"] = e.what();
        inf["binding_families"] = e.binding_families();
        const BeamformingProblem p = build_problem(s, cfg.scheme);
        inf["requested_min_rate_bps_hz"] = p.min_rate;
        if (!p.min_rate.empty()) {
            try {
                inf["max_feasible_common_rate_bps_hz"] = feasibility_boundary(s, cfg.scheme, sopt);
            } catch (const Error& d) {
                inf["max_feasible_common_rate_bps_hz"] = nullptr;
                inf["diagnostic_error"] = d.what();
            }
        }
        detail::write_json(out_dir / "infeasibility.json", inf);
        out.artifacts.push_back((out_dir / "infeasibility.json").string());
        throw;
    }
    timing["solve_s"] = detail::seconds_since(t0);
    const SchemeResult& r = out.result;

    write_solution(out_dir / "solution.json", cfg.scheme, r.solution, &r.relaxed);
    out.artifacts.push_back((out_dir / "solution.json").string());
    Json ver{{"design", report_to_json(r.design_report)}, {"audit", report_to_json(r.audit)}};
    detail::write_json(out_dir / "verification.json", ver);
    out.artifacts.push_back((out_dir / "verification.json").string());

    sum["mu"] = r.solution.objective;
    sum["solver_iterations"] = r.relaxed.iterations;
    sum["design_passed"] = r.design_report.passed();
    sum["audit_passed"] = r.audit.passed();
    sum["user_rate_bps_hz"] = r.audit.user_rate;
    sum["user_sinr_db"] = report_to_json(r.audit)["user_sinr_db"];
    sum["max_pair_ratio"] = r.audit.max_pair_ratio;
    sum["min_weighted_gain"] = r.audit.min_weighted_gain;
    Json flagged = Json::array();
    for (const auto& f : r.audit.families)
        if (!f.passed) flagged.push_back(f.name);
    sum["audit_violations"] = flagged;

    const auto dec = r.solution.decomposition();
    if (po.heatmaps) {
        t0 = std::chrono::steady_clock::now();
        for (std::size_t k = 0; k < s.users.size(); ++k) {
            const auto g = detail::staged("heatmap", [&] { return sinr_heatmap(s, dec, k, cfg.grid); });
            const fs::path p = out_dir / ("sinr_user" + std::to_string(k + 1) + ".csv");
            write_grid_csv(p.string(), g);
            out.artifacts.push_back(p.string());
        }
        timing["heatmaps_s"] = detail::seconds_since(t0);
    }

    if (po.capon) {
        t0 = std::chrono::steady_clock::now();
        const SignalBlock x =
            detail::staged("simulate", [&] { return sample_transmit_block(dec, cfg.block_length, cfg.seeds.transmit); });
        const SignalBlock y = detail::staged("simulate", [&] {
            return simulate_echoes(x, s.roundtrip_channels(), s.sensing_noise, cfg.seeds.echo,
                                   static_cast<Eigen::Index>(s.rx.size()));
        });
        timing["simulate_s"] = detail::seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        const SpatialGrid g =
            detail::staged("capon", [&] { return capon_spectrum(x, y, s.tx, s.rx, cfg.grid, s.channel, cfg.capon); });
        timing["capon_s"] = detail::seconds_since(t0);
        write_grid_csv((out_dir / "capon.csv").string(), g);
        write_grid_json(out_dir / "capon.json", g);
        out.artifacts.push_back((out_dir / "capon.csv").string());
        out.artifacts.push_back((out_dir / "capon.json").string());
        const Localization loc = localize(g, s.targets, 1.5 * cfg.grid.step);
        Json peaks = Json::array();
        for (const auto& p : loc.peaks.peaks) peaks.push_back({{"y_m", p.position.y()}, {"z_m", p.position.z()}, {"value_db", p.value}});
        sum["capon"] = {{"peaks", peaks},
                        {"target_errors_m", loc.target_errors},
                        {"all_targets_resolved", loc.all_resolved},
                        {"notes", g.notes}};
    }
    sum["runtime"] = timing;
    sum["artifacts"] = out.artifacts;
    detail::write_json(out_dir / "summary.json", sum);
    out.artifacts.push_back((out_dir / "summary.json").string());
    return out;
}

// ---- scheme comparison --------------------------------------------------

struct ComparisonRow {
    Scheme scheme = Scheme::proposed;
    bool ok = false;
    std::string error;
    double mu = 0.0;
    double min_weighted_gain = 0.0;
    double max_pair_ratio = 0.0;
    std::vector<double> user_sinr_db;  // at the true user positions, near-field channels
    std::vector<double> target_errors; // Capon peak-to-target distance [m]
    bool targets_resolved = false;
};

/// Runs all three schemes on one configuration with shared seeds. A failing
/// scheme is recorded and the rest still run.
inline std::vector<ComparisonRow> compare_schemes(const ScenarioConfig& cfg_in, const PipelineOptions& po = {}) {
    const ScenarioConfig cfg = apply_overrides(cfg_in, po);
    const Scenario s = build_scenario(cfg);
    const SolverOptions sopt = solver_options(cfg);
    std::vector<ComparisonRow> rows;
    for (Scheme sc : {Scheme::proposed, Scheme::nccs, Scheme::ffbf}) {
        ComparisonRow row;
        row.scheme = sc;
        try {
            const SchemeResult r = solve_scheme(s, sc, sopt);
            row.mu = r.solution.objective;
            row.min_weighted_gain = r.audit.min_weighted_gain;
            row.max_pair_ratio = r.audit.max_pair_ratio;
            for (double v : r.audit.user_sinr)
                row.user_sinr_db.push_back(v > 0.0 ? to_db(v) : -std::numeric_limits<double>::infinity());
            if (po.capon) {
                const auto dec = r.solution.decomposition();
                const SignalBlock x = sample_transmit_block(dec, cfg.block_length, cfg.seeds.transmit);
                const SignalBlock y = simulate_echoes(x, s.roundtrip_channels(), s.sensing_noise, cfg.seeds.echo,
                                                      static_cast<Eigen::Index>(s.rx.size()));
                const SpatialGrid g = capon_spectrum(x, y, s.tx, s.rx, cfg.grid, s.channel, cfg.capon);
                const Localization loc = localize(g, s.targets, 1.5 * cfg.grid.step);
                row.target_errors = loc.target_errors;
                row.targets_resolved = loc.all_resolved;
            }
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

inline Json comparison_to_json(const std::vector<ComparisonRow>& rows) {
    Json out = Json::array();
    for (const auto& r : rows) {
        Json j;
        j["scheme"] = to_string(r.scheme);
        j["ok"] = r.ok;
        if (!r.ok) {
            j["error"] = r.error;
        } else {
            j["mu"] = r.mu;
            j["min_weighted_gain"] = r.min_weighted_gain;
            j["max_pair_ratio"] = r.max_pair_ratio;
            Json db = Json::array();
            for (double v : r.user_sinr_db) db.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
            j["user_sinr_db"] = db;
            Json err = Json::array();
            for (double v : r.target_errors) err.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
            j["capon_target_errors_m"] = err;
            j["targets_resolved"] = r.targets_resolved;
        }
        out.push_back(j);
    }
    return out;
}

// Fixed-width text table; SINR in dB, errors in metres.
inline std::string comparison_table(const std::vector<ComparisonRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "scheme" << std::setw(14) << "mu" << std::setw(14) << "min_gain" << std::setw(12)
       << "pair_ratio" << "user_sinr_dB / capon_err_m\n";
    for (const auto& r : rows) {
        os << std::setw(10) << to_string(r.scheme);
        if (!r.ok) {
            os << "failed: " << r.error << "\n";
            continue;
        }
        os << std::setw(14) << r.mu << std::setw(14) << r.min_weighted_gain << std::setw(12) << r.max_pair_ratio;
        for (double v : r.user_sinr_db) os << std::fixed << std::setprecision(2) << v << " ";
        os << "/ ";
        for (double v : r.target_errors) os << std::setprecision(3) << v << " ";
        os << std::defaultfloat << std::setprecision(6) << "\n";
    }
    return os.str();
}

}  // namespace nfisac

#endif  // NFISAC_PIPELINE_HPP
