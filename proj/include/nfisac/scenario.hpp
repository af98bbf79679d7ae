#ifndef NFISAC_SCENARIO_HPP
#define NFISAC_SCENARIO_HPP

// A full problem instance (arrays, users, targets, budgets) and the three
// design schemes built on it: the proposed design, the variant without
// cross-correlation suppression (nccs) and the far-field design (ffbf).

#include "nfisac/channel.hpp"
#include "nfisac/geometry.hpp"
#include "nfisac/optimizer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nfisac {

struct UserSpec {
    Vec3 position = Vec3::Zero();
    double min_rate = 0.0;  // bps/Hz; <= 0 means no rate constraint
    double noise = 1e-11;   // W
};

struct TargetSpec {
    Vec3 position = Vec3::Zero();
    Complex rcs{1.0, 0.0};
};

struct FarFieldBenchmark {
    double min_rate = 0.95;
    std::vector<TargetPair> drop_pairs{{0, 1}};
};

enum class Scheme { proposed, nccs, ffbf };

inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::proposed: return "proposed";
        case Scheme::nccs: return "nccs";
        case Scheme::ffbf: return "ffbf";
    }
    return "unknown";
}

inline Scheme scheme_from_string(const std::string& name) {
    if (name == "proposed") return Scheme::proposed;
    if (name == "nccs") return Scheme::nccs;
    if (name == "ffbf") return Scheme::ffbf;
    throw ArgumentError("unknown scheme '" + name + "' (expected proposed, nccs or ffbf)");
}

struct Scenario {
    ArrayGeometry tx;
    ArrayGeometry rx;
    ChannelModelParams channel;
    double max_power = 0.0;      // W
    double sensing_noise = 0.0;  // W
    int block_length = 1000;
    std::vector<UserSpec> users;
    std::vector<TargetSpec> targets;
    double tolerance = 0.1;
    std::optional<SensingWeights> explicit_weights;  // replaces the channel-normalised weights
    std::optional<double> aperture_override;         // metres, only used for the Rayleigh distance
    FarFieldBenchmark ffbf;

    double aperture() const { return aperture_override.value_or(tx.aperture()); }
    double rayleigh() const { return rayleigh_distance(aperture(), channel.wavelength); }

    std::vector<CVector> user_channels(bool far_field = false) const {
        std::vector<CVector> out;
        for (const auto& u : users)
            out.push_back(far_field ? farfield_channel(tx, u.position, channel) : nearfield_channel(tx, u.position, channel));
        return out;
    }
    std::vector<CVector> target_channels(bool far_field = false) const {
        std::vector<CVector> out;
        for (const auto& t : targets)
            out.push_back(far_field ? farfield_channel(tx, t.position, channel) : nearfield_channel(tx, t.position, channel));
        return out;
    }
    std::vector<RoundTripChannel> roundtrip_channels() const {
        std::vector<RoundTripChannel> out;
        for (const auto& t : targets)
            out.push_back(roundtrip_channel(nearfield_channel(tx, t.position, channel),
                                            nearfield_channel(rx, t.position, channel, Direction::incoming), t.rcs));
        return out;
    }
    std::vector<double> user_noise() const {
        std::vector<double> out;
        for (const auto& u : users) out.push_back(u.noise);
        return out;
    }
};

/// The reference configuration: 10x10 half-wavelength UPAs at 30 GHz, two
/// users and three targets in the yz-plane, 23 dBm budget, -80 dBm noise.
inline Scenario paper_scenario() {
    const double lambda = 3e8 / 30e9;
    const Vec3 normal(0, 0, 1);
    const Vec3 axis(1, 0, 0);
    Scenario s{build_upa(10, 10, lambda / 2, Vec3(0, 0, 0), normal, axis),
               build_upa(10, 10, lambda / 2, Vec3(0, 0.06, 0), normal, axis)};
    s.channel.wavelength = lambda;
    s.channel.boresight_exponent = 2.0;
    s.max_power = dbm_to_watts(23.0);
    s.sensing_noise = dbm_to_watts(-80.0);
    s.block_length = 1000;
    s.users = {{Vec3(0, 0.1, 0.1), 17.0, dbm_to_watts(-80.0)}, {Vec3(0, 0.5, 0.5), 17.0, dbm_to_watts(-80.0)}};
    s.targets = {{Vec3(0, -0.1, 0.1), 1.0}, {Vec3(0, -0.25, 0.25), 1.0}, {Vec3(0, 0, 0.4), 1.0}};
    s.tolerance = 0.1;
    s.aperture_override = 0.071;
    return s;
}

/// Design program for a scheme. The ffbf program is posed on far-field
/// channels with its own rate floor and without the dropped pairs.
inline BeamformingProblem build_problem(const Scenario& s, Scheme scheme) {
    const bool far = scheme == Scheme::ffbf;
    BeamformingProblem p;
    p.user_channels = s.user_channels(far);
    p.target_channels = s.target_channels(far);
    p.weights = s.explicit_weights ? *s.explicit_weights : assemble_scenario_weights(p.target_channels, s.tolerance);
    p.weights.tolerance = s.tolerance;
    p.max_power = s.max_power;
    p.user_noise = s.user_noise();
    for (const auto& u : s.users) p.min_rate.push_back(far ? s.ffbf.min_rate : u.min_rate);
    if (scheme != Scheme::nccs) {
        for (const auto& pr : all_target_pairs(s.targets.size())) {
            bool dropped = false;
            if (far)
                for (const auto& d : s.ffbf.drop_pairs)
                    dropped = dropped || (std::min(d.first, d.second) == pr.first && std::max(d.first, d.second) == pr.second);
            if (!dropped) p.pairs.push_back(pr);
        }
    }
    return p;
}

struct SchemeResult {
    Scheme scheme = Scheme::proposed;
    RelaxedSolution relaxed;
    BeamformingSolution solution;  // objective re-evaluated on near-field channels for ffbf
    ConstraintReport design_report;  // against the program the scheme solved
    ConstraintReport audit;          // against the proposed near-field program
};

/// Solves one scheme end to end and audits the beamformers on the true
/// near-field channels.
inline SchemeResult solve_scheme(const Scenario& s, Scheme scheme, const SolverOptions& opt = {},
                                 const VerifyTolerances& tol = {}) {
    const BeamformingProblem design = build_problem(s, scheme);
    SchemeResult r;
    r.scheme = scheme;
    r.relaxed = solve_relaxed(design, opt);
    r.solution = recover_solution(r.relaxed, design);
    r.design_report = verify_solution(r.solution, design, tol);

    const BeamformingProblem truth = build_problem(s, Scheme::proposed);
    BeamformingSolution evaluated = r.solution;
    if (scheme == Scheme::ffbf) {
        double mu = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < truth.targets(); ++l)
            mu = std::min(mu, truth.weights.target[l] *
                                  transpose_form(truth.target_channels[l], evaluated.total_covariance, truth.target_channels[l]).real());
        evaluated.objective = mu;
        r.solution.objective = mu;
    }
    r.audit = verify_solution(evaluated, truth, tol);
    return r;
}

inline SchemeResult solve_nccs(const Scenario& s, const SolverOptions& opt = {}) { return solve_scheme(s, Scheme::nccs, opt); }
inline SchemeResult solve_ffbf(const Scenario& s, const SolverOptions& opt = {}) { return solve_scheme(s, Scheme::ffbf, opt); }

}  // namespace nfisac

#endif  // NFISAC_SCENARIO_HPP
