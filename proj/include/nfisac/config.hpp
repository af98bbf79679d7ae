#ifndef NFISAC_CONFIG_HPP
#define NFISAC_CONFIG_HPP

// JSON scenario configuration: parsing, validation, defaults and the
// normalized dump. Powers are given in dBm and converted to watts when a
// Scenario is built.

#include "nfisac/capon.hpp"
#include "nfisac/scenario.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace nfisac {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigVersion = 1;

struct ArrayConfig {
    int rows = 10;
    int cols = 10;
    std::optional<double> spacing_m;  // default: half a wavelength
    Vec3 center = Vec3::Zero();
    Vec3 normal = Vec3(0, 0, 1);
    Vec3 in_plane_axis = Vec3(1, 0, 0);
    std::optional<double> aperture_override_m;
};

struct UserConfig {
    Vec3 position = Vec3::Zero();
    double min_rate_bps_hz = 0.0;
    std::optional<double> noise_power_dbm;  // default: the global noise power
};

struct TargetConfig {
    Vec3 position = Vec3::Zero();
    Complex rcs{1.0, 0.0};
};

struct WeightsConfig {
    std::string mode = "auto";  // auto | explicit
    std::vector<double> target;
    std::vector<std::vector<double>> pair;
};

struct FfbfConfig {
    std::optional<double> min_rate_bps_hz = 0.95;  // empty: inherit the users' rates
    std::vector<TargetPair> drop_pairs{{0, 1}};    // zero-based internally
};

struct SeedConfig {
    std::uint64_t transmit = 1;
    std::uint64_t echo = 2;
};

struct SolverConfig {
    double feastol = 1e-8;
    double reltol = 1e-8;
    double abstol = 1e-10;
    double infeastol = 1e-8;
    int max_iterations = 150;
    bool subspace_reduction = true;
};

struct ScenarioConfig {
    double carrier_frequency_hz = 30e9;
    double speed_of_light_mps = 3e8;
    double boresight_exponent = 2.0;
    double tx_power_dbm = 23.0;
    double noise_power_dbm = -80.0;
    std::optional<double> sensing_noise_power_dbm;  // default: noise_power_dbm
    int block_length = 1000;
    ArrayConfig tx_array;
    ArrayConfig rx_array;
    std::vector<UserConfig> users;
    std::vector<TargetConfig> targets;
    double cross_correlation_tolerance = 0.1;
    WeightsConfig weights;
    Scheme scheme = Scheme::proposed;
    FfbfConfig ffbf;
    GridSpec grid;
    CaponOptions capon;
    SeedConfig seeds;
    SolverConfig solver;

    std::vector<std::string> warnings;  // not part of the dump

    double wavelength() const { return speed_of_light_mps / carrier_frequency_hz; }
};

namespace detail {

class Reader {
public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ParseError("config: " + field(key) + " " + what);
    }
    std::string field(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }
    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }
    const Json& at(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) fail(key, "is required");
        return j_.at(key);
    }

    double number(const std::string& key) {
        const Json& v = at(key);
        if (!v.is_number()) fail(key, "must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(key, "must be finite");
        return x;
    }
    double number(const std::string& key, double def) { return has(key) ? number(key) : def; }
    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key);
    }
    long long integer(const std::string& key, long long def) {
        if (!has(key)) return def;
        const Json& v = at(key);
        if (!v.is_number_integer()) fail(key, "must be an integer");
        return v.get<long long>();
    }
    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
        if (!has(key)) return def;
        const Json& v = at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            fail(key, "must be a non-negative integer");
        return v.get<std::uint64_t>();
    }
    bool boolean(const std::string& key, bool def) {
        if (!has(key)) return def;
        const Json& v = at(key);
        if (!v.is_boolean()) fail(key, "must be true or false");
        return v.get<bool>();
    }
    std::string string(const std::string& key, const std::string& def) {
        if (!has(key)) return def;
        const Json& v = at(key);
        if (!v.is_string()) fail(key, "must be a string");
        return v.get<std::string>();
    }
    Vec3 vec3(const std::string& key) {
        const Json& v = at(key);
        if (!v.is_array() || v.size() != 3) fail(key, "must be an array of 3 numbers");
        Vec3 out;
        for (int i = 0; i < 3; ++i) {
            if (!v[static_cast<std::size_t>(i)].is_number()) fail(key, "must be an array of 3 numbers");
            out(i) = v[static_cast<std::size_t>(i)].get<double>();
        }
        if (!out.allFinite()) fail(key, "must be finite");
        return out;
    }
    Vec3 vec3(const std::string& key, const Vec3& def) { return has(key) ? vec3(key) : def; }

    Reader child(const std::string& key) { return Reader(at(key), field(key)); }
    Reader element(const std::string& key, std::size_t i) {
        return Reader(at(key).at(i), field(key) + "[" + std::to_string(i) + "]");
    }
    std::size_t array_size(const std::string& key) {
        const Json& v = at(key);
        if (!v.is_array()) fail(key, "must be an array");
        return v.size();
    }

    // Unknown keys are rejected so that typos do not silently fall back to defaults.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ParseError("config: unknown field " + field(it.key()));
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline ArrayConfig parse_array(Reader r) {
    ArrayConfig a;
    const long long rows = r.integer("rows", a.rows);
    const long long cols = r.integer("cols", a.cols);
    if (rows < 1) r.fail("rows", "must be >= 1");
    if (cols < 1) r.fail("cols", "must be >= 1");
    a.rows = static_cast<int>(rows);
    a.cols = static_cast<int>(cols);
    a.spacing_m = r.optional_number("spacing_m");
    if (a.spacing_m && !(*a.spacing_m > 0.0)) r.fail("spacing_m", "must be positive");
    a.center = r.vec3("center", a.center);
    a.normal = r.vec3("normal", a.normal);
    a.in_plane_axis = r.vec3("in_plane_axis", a.in_plane_axis);
    if (!(a.normal.norm() > 0.0)) r.fail("normal", "must be non-zero");
    if (!(a.in_plane_axis.norm() > 0.0)) r.fail("in_plane_axis", "must be non-zero");
    a.aperture_override_m = r.optional_number("aperture_override_m");
    if (a.aperture_override_m && !(*a.aperture_override_m > 0.0)) r.fail("aperture_override_m", "must be positive");
    r.finish();
    return a;
}

inline Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Json array_json(const ArrayConfig& a, double wavelength) {
    Json j;
    j["rows"] = a.rows;
    j["cols"] = a.cols;
    j["spacing_m"] = a.spacing_m.value_or(wavelength / 2.0);
    j["center"] = vec_json(a.center);
    j["normal"] = vec_json(a.normal);
    j["in_plane_axis"] = vec_json(a.in_plane_axis);
    j["aperture_override_m"] = a.aperture_override_m ? Json(*a.aperture_override_m) : Json(nullptr);
    return j;
}

}  // namespace detail

inline ArrayGeometry build_array(const ArrayConfig& a, double wavelength) {
    return build_upa(a.rows, a.cols, a.spacing_m.value_or(wavelength / 2.0), a.center, a.normal, a.in_plane_axis);
}

/// Converts a configuration into a Scenario (dBm -> W, geometry built).
inline Scenario build_scenario(const ScenarioConfig& c) {
    const double lambda = c.wavelength();
    Scenario s{build_array(c.tx_array, lambda), build_array(c.rx_array, lambda)};
    s.channel.wavelength = lambda;
    s.channel.boresight_exponent = c.boresight_exponent;
    s.max_power = dbm_to_watts(c.tx_power_dbm);
    s.sensing_noise = dbm_to_watts(c.sensing_noise_power_dbm.value_or(c.noise_power_dbm));
    s.block_length = c.block_length;
    for (const auto& u : c.users)
        s.users.push_back({u.position, u.min_rate_bps_hz, dbm_to_watts(u.noise_power_dbm.value_or(c.noise_power_dbm))});
    for (const auto& t : c.targets) s.targets.push_back({t.position, t.rcs});
    s.tolerance = c.cross_correlation_tolerance;
    if (c.weights.mode == "explicit") {
        SensingWeights w;
        w.tolerance = c.cross_correlation_tolerance;
        w.target = c.weights.target;
        const auto n = static_cast<Eigen::Index>(c.weights.pair.size());
        w.pair = RMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                w.pair(i, j) = c.weights.pair[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        s.explicit_weights = w;
    }
    s.aperture_override = c.tx_array.aperture_override_m;
    s.ffbf.drop_pairs = c.ffbf.drop_pairs;
    // Without an explicit FFBF rate the benchmark keeps the users' common rate.
    s.ffbf.min_rate = c.ffbf.min_rate_bps_hz.value_or(c.users.empty() ? 0.0 : c.users.front().min_rate_bps_hz);
    return s;
}

inline SolverOptions solver_options(const ScenarioConfig& c) {
    SolverOptions o;
    o.conic.feastol = c.solver.feastol;
    o.conic.reltol = c.solver.reltol;
    o.conic.abstol = c.solver.abstol;
    o.conic.infeastol = c.solver.infeastol;
    o.conic.max_iterations = c.solver.max_iterations;
    o.subspace_reduction = c.solver.subspace_reduction;
    return o;
}

/// Parses and validates a configuration document. Positions outside the
/// Rayleigh distance of the transmit array produce warnings, not errors.
inline ScenarioConfig parse_config_json(const Json& root) {
    using detail::Reader;
    Reader r(root, "");
    ScenarioConfig c;
    const long long version = r.integer("version", kConfigVersion);
    if (version != kConfigVersion) r.fail("version", "must be " + std::to_string(kConfigVersion));

    c.carrier_frequency_hz = r.number("carrier_frequency_hz", c.carrier_frequency_hz);
    c.speed_of_light_mps = r.number("speed_of_light_mps", c.speed_of_light_mps);
    c.boresight_exponent = r.number("boresight_exponent", c.boresight_exponent);
    if (!(c.carrier_frequency_hz > 0.0)) r.fail("carrier_frequency_hz", "must be positive");
    if (!(c.speed_of_light_mps > 0.0)) r.fail("speed_of_light_mps", "must be positive");
    if (!(c.boresight_exponent >= 0.0)) r.fail("boresight_exponent", "must be non-negative");
    c.tx_power_dbm = r.number("tx_power_dbm", c.tx_power_dbm);
    c.noise_power_dbm = r.number("noise_power_dbm", c.noise_power_dbm);
    c.sensing_noise_power_dbm = r.optional_number("sensing_noise_power_dbm");
    const long long T = r.integer("block_length", c.block_length);
    if (T < 1) r.fail("block_length", "must be a positive integer");
    c.block_length = static_cast<int>(T);

    c.tx_array = detail::parse_array(r.child("tx_array"));
    c.rx_array = detail::parse_array(r.child("rx_array"));

    const std::size_t nu = r.array_size("users");
    for (std::size_t i = 0; i < nu; ++i) {
        Reader u = r.element("users", i);
        UserConfig uc;
        uc.position = u.vec3("position");
        uc.min_rate_bps_hz = u.number("min_rate_bps_hz", 0.0);
        if (uc.min_rate_bps_hz < 0.0) u.fail("min_rate_bps_hz", "must be non-negative");
        uc.noise_power_dbm = u.optional_number("noise_power_dbm");
        u.finish();
        c.users.push_back(uc);
    }
    const std::size_t nt = r.array_size("targets");
    if (nt < 1) r.fail("targets", "must contain at least one target");
    for (std::size_t i = 0; i < nt; ++i) {
        Reader t = r.element("targets", i);
        TargetConfig tc;
        tc.position = t.vec3("position");
        if (t.has("rcs")) {
            const Json& v = t.at("rcs");
            if (v.is_number()) tc.rcs = v.get<double>();
            else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
                tc.rcs = {v[0].get<double>(), v[1].get<double>()};
            else t.fail("rcs", "must be a number or [re, im]");
        }
        t.finish();
        c.targets.push_back(tc);
    }

    c.cross_correlation_tolerance = r.number("cross_correlation_tolerance", c.cross_correlation_tolerance);
    if (!(c.cross_correlation_tolerance > 0.0)) r.fail("cross_correlation_tolerance", "must be positive");

    if (r.has("weights")) {
        Reader w = r.child("weights");
        c.weights.mode = w.string("mode", "auto");
        if (c.weights.mode == "explicit") {
            const Json& tj = w.at("target");
            const Json& pj = w.at("pair");
            try {
                c.weights.target = tj.get<std::vector<double>>();
                c.weights.pair = pj.get<std::vector<std::vector<double>>>();
            } catch (const nlohmann::json::exception&) {
                w.fail("", "target must be a number list and pair a square number matrix");
            }
            if (c.weights.target.size() != nt) w.fail("target", "must have one weight per target");
            if (c.weights.pair.size() != nt) w.fail("pair", "must be L x L");
            for (const auto& row : c.weights.pair)
                if (row.size() != nt) w.fail("pair", "must be L x L");
        } else if (c.weights.mode != "auto") {
            w.fail("mode", "must be 'auto' or 'explicit'");
        }
        w.finish();
    }

    try {
        c.scheme = scheme_from_string(r.string("scheme", "proposed"));
    } catch (const ArgumentError&) {
        r.fail("scheme", "must be one of proposed, nccs, ffbf");
    }

    if (r.has("ffbf")) {
        Reader f = r.child("ffbf");
        if (f.has("min_rate_bps_hz")) {
            const Json& v = f.at("min_rate_bps_hz");
            if (v.is_string() && v.get<std::string>() == "users") c.ffbf.min_rate_bps_hz.reset();
            else c.ffbf.min_rate_bps_hz = f.number("min_rate_bps_hz");
        }
        if (f.has("drop_pairs")) {
            c.ffbf.drop_pairs.clear();
            const Json& dp = f.at("drop_pairs");
            if (!dp.is_array()) f.fail("drop_pairs", "must be an array of [l, l'] pairs (1-based)");
            for (const auto& pr : dp) {
                if (!pr.is_array() || pr.size() != 2 || !pr[0].is_number_integer() || !pr[1].is_number_integer())
                    f.fail("drop_pairs", "must be an array of [l, l'] pairs (1-based)");
                const long long a = pr[0].get<long long>();
                const long long b = pr[1].get<long long>();
                if (a < 1 || b < 1 || a > static_cast<long long>(nt) || b > static_cast<long long>(nt) || a == b)
                    f.fail("drop_pairs", "entries must name two distinct targets (1-based)");
                c.ffbf.drop_pairs.emplace_back(static_cast<std::size_t>(std::min(a, b) - 1),
                                               static_cast<std::size_t>(std::max(a, b) - 1));
            }
        }
        f.finish();
    }

    if (r.has("grid")) {
        Reader g = r.child("grid");
        c.grid.y_min = g.number("y_min_m", c.grid.y_min);
        c.grid.y_max = g.number("y_max_m", c.grid.y_max);
        c.grid.z_min = g.number("z_min_m", c.grid.z_min);
        c.grid.z_max = g.number("z_max_m", c.grid.z_max);
        c.grid.step = g.number("step_m", c.grid.step);
        c.grid.x = g.number("x_m", c.grid.x);
        g.finish();
        try {
            c.grid.validate();
        } catch (const ArgumentError& e) {
            r.fail("grid", e.what());
        }
    }

    if (r.has("capon")) {
        Reader k = r.child("capon");
        c.capon.diagonal_loading = k.number("diagonal_loading", c.capon.diagonal_loading);
        c.capon.fallback_loading = k.number("fallback_loading", c.capon.fallback_loading);
        if (c.capon.diagonal_loading < 0.0) k.fail("diagonal_loading", "must be non-negative");
        if (c.capon.fallback_loading < 0.0) k.fail("fallback_loading", "must be non-negative");
        const std::string w = k.string("transmit_weighting", "inverse");
        if (w == "inverse") c.capon.weighting = TransmitWeighting::inverse;
        else if (w == "direct") c.capon.weighting = TransmitWeighting::direct;
        else k.fail("transmit_weighting", "must be 'inverse' or 'direct'");
        k.finish();
    }

    if (r.has("seeds")) {
        Reader s = r.child("seeds");
        c.seeds.transmit = s.unsigned_integer("transmit", c.seeds.transmit);
        c.seeds.echo = s.unsigned_integer("echo", c.seeds.echo);
        s.finish();
    }

    if (r.has("solver")) {
        Reader s = r.child("solver");
        c.solver.feastol = s.number("feastol", c.solver.feastol);
        c.solver.reltol = s.number("reltol", c.solver.reltol);
        c.solver.abstol = s.number("abstol", c.solver.abstol);
        c.solver.infeastol = s.number("infeastol", c.solver.infeastol);
        const long long it = s.integer("max_iterations", c.solver.max_iterations);
        if (it < 1) s.fail("max_iterations", "must be >= 1");
        c.solver.max_iterations = static_cast<int>(it);
        c.solver.subspace_reduction = s.boolean("subspace_reduction", c.solver.subspace_reduction);
        for (double v : {c.solver.feastol, c.solver.reltol, c.solver.abstol, c.solver.infeastol})
            if (!(v > 0.0)) s.fail("", "tolerances must be positive");
        s.finish();
    }
    r.finish();

    // Geometry is validated by building it once.
    Scenario s = [&] {
        try {
            return build_scenario(c);
        } catch (const GeometryError& e) {
            throw ParseError(std::string("config: invalid array geometry: ") + e.what());
        }
    }();
    const double rl = s.rayleigh();
    auto check = [&](const Vec3& p, const std::string& who) {
        const double d = (p - s.tx.center()).norm();
        if (d > rl) {
            std::ostringstream os;
            os << who << " at distance " << d << " m lies outside the Rayleigh distance " << rl << " m";
            c.warnings.push_back(os.str());
        }
    };
    for (std::size_t i = 0; i < c.users.size(); ++i) check(c.users[i].position, "user " + std::to_string(i + 1));
    for (std::size_t i = 0; i < c.targets.size(); ++i) check(c.targets[i].position, "target " + std::to_string(i + 1));
    return c;
}

inline ScenarioConfig parse_config_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config_json(j);
}

inline ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Normalized dump with every default filled in.
inline Json dump_config(const ScenarioConfig& c) {
    const double lambda = c.wavelength();
    Json j;
    j["version"] = kConfigVersion;
    j["carrier_frequency_hz"] = c.carrier_frequency_hz;
    j["speed_of_light_mps"] = c.speed_of_light_mps;
    j["boresight_exponent"] = c.boresight_exponent;
    j["tx_power_dbm"] = c.tx_power_dbm;
    j["noise_power_dbm"] = c.noise_power_dbm;
    j["sensing_noise_power_dbm"] = c.sensing_noise_power_dbm.value_or(c.noise_power_dbm);
    j["block_length"] = c.block_length;
    j["tx_array"] = detail::array_json(c.tx_array, lambda);
    j["rx_array"] = detail::array_json(c.rx_array, lambda);
    j["users"] = Json::array();
    for (const auto& u : c.users)
        j["users"].push_back({{"position", detail::vec_json(u.position)},
                              {"min_rate_bps_hz", u.min_rate_bps_hz},
                              {"noise_power_dbm", u.noise_power_dbm.value_or(c.noise_power_dbm)}});
    j["targets"] = Json::array();
    for (const auto& t : c.targets)
        j["targets"].push_back({{"position", detail::vec_json(t.position)}, {"rcs", Json::array({t.rcs.real(), t.rcs.imag()})}});
    j["cross_correlation_tolerance"] = c.cross_correlation_tolerance;
    if (c.weights.mode == "explicit") j["weights"] = {{"mode", "explicit"}, {"target", c.weights.target}, {"pair", c.weights.pair}};
    else j["weights"] = {{"mode", "auto"}};
    j["scheme"] = to_string(c.scheme);
    Json drops = Json::array();
    for (const auto& [a, b] : c.ffbf.drop_pairs) drops.push_back({a + 1, b + 1});
    j["ffbf"] = {{"min_rate_bps_hz", c.ffbf.min_rate_bps_hz ? Json(*c.ffbf.min_rate_bps_hz) : Json("users")}, {"drop_pairs", drops}};
    j["grid"] = {{"y_min_m", c.grid.y_min}, {"y_max_m", c.grid.y_max}, {"z_min_m", c.grid.z_min},
                 {"z_max_m", c.grid.z_max}, {"step_m", c.grid.step},   {"x_m", c.grid.x}};
    j["capon"] = {{"diagonal_loading", c.capon.diagonal_loading},
                  {"fallback_loading", c.capon.fallback_loading},
                  {"transmit_weighting", c.capon.weighting == TransmitWeighting::inverse ? "inverse" : "direct"}};
    j["seeds"] = {{"transmit", c.seeds.transmit}, {"echo", c.seeds.echo}};
    j["solver"] = {{"feastol", c.solver.feastol},     {"reltol", c.solver.reltol},
                   {"abstol", c.solver.abstol},       {"infeastol", c.solver.infeastol},
                   {"max_iterations", c.solver.max_iterations}, {"subspace_reduction", c.solver.subspace_reduction}};
    return j;
}

}  // namespace nfisac

#endif  // NFISAC_CONFIG_HPP
