#include "nfisac/nfisac.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace nfisac;

namespace {

enum Exit { ok = 0, other = 1, parse = 2, infeasible = 3, solver = 4, verification = 5 };

struct Args {
    std::string config;
    std::string scheme;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::optional<double> grid_step;
    std::optional<double> loading;
    std::string solution;
};

ScenarioConfig load(const Args& a) {
    ScenarioConfig c = parse_config(a.config);
    if (!a.scheme.empty()) {
        try {
            c.scheme = scheme_from_string(a.scheme);
        } catch (const ArgumentError& e) {
            throw ParseError(e.what());
        }
    }
    for (const auto& w : c.warnings) std::cerr << "warning: " << w << "\n";
    return c;
}

PipelineOptions options(const Args& a) {
    PipelineOptions o;
    o.seed = a.seed;
    o.grid_step = a.grid_step;
    o.loading = a.loading;
    return o;
}

void print_report(const char* title, const ConstraintReport& r) {
    std::cout << title << ": " << (r.passed() ? "PASS" : "FAIL") << "\n";
    for (const auto& f : r.families)
        std::cout << "  " << std::left << std::setw(20) << f.name << (f.passed ? "ok  " : "FAIL") << "  value=" << f.value
                  << " bound=" << f.threshold << (f.detail.empty() ? "" : "  " + f.detail) << "\n";
    for (std::size_t k = 0; k < r.user_rate.size(); ++k)
        std::cout << "  user " << k + 1 << ": rate=" << r.user_rate[k] << " bps/Hz, SINR="
                  << (r.user_sinr[k] > 0 ? to_db(r.user_sinr[k]) : -INFINITY) << " dB\n";
    std::cout << "  max pair ratio=" << r.max_pair_ratio << "\n";
}

int cmd_solve(const Args& a) {
    const ScenarioConfig cfg = apply_overrides(load(a), options(a));
    PipelineOptions po = options(a);
    po.heatmaps = false;
    po.capon = false;
    const PipelineResult res = run_pipeline(cfg, a.out, po);
    std::cout << "scheme " << to_string(cfg.scheme) << ": mu=" << res.result.solution.objective
              << " iterations=" << res.result.relaxed.iterations << "\n";
    print_report("design constraints", res.result.design_report);
    print_report("near-field audit", res.result.audit);
    std::cout << "wrote " << (fs::path(a.out) / "solution.json").string() << "\n";
    return res.result.design_report.passed() ? ok : verification;
}

int cmd_verify(const Args& a) {
    const ScenarioConfig cfg = load(a);
    const Scenario s = build_scenario(cfg);
    const std::string path = a.solution.empty() ? (fs::path(a.out) / "solution.json").string() : a.solution;
    const StoredSolution st = read_solution(path);
    const Scheme scheme = a.scheme.empty() ? st.scheme : cfg.scheme;
    const ConstraintReport design = verify_solution(st.solution, build_problem(s, scheme));
    const ConstraintReport audit = verify_solution(st.solution, build_problem(s, Scheme::proposed));
    print_report("design constraints", design);
    print_report("near-field audit", audit);
    return design.passed() ? ok : verification;
}

int cmd_heatmap(const Args& a) {
    const ScenarioConfig cfg = apply_overrides(load(a), options(a));
    const Scenario s = build_scenario(cfg);
    const SchemeResult r = solve_scheme(s, cfg.scheme, solver_options(cfg));
    fs::create_directories(a.out);
    const auto dec = r.solution.decomposition();
    for (std::size_t k = 0; k < s.users.size(); ++k) {
        const auto g = sinr_heatmap(s, dec, k, cfg.grid);
        const fs::path p = fs::path(a.out) / ("sinr_user" + std::to_string(k + 1) + ".csv");
        write_grid_csv(p.string(), g);
        std::cout << "wrote " << p.string() << "\n";
    }
    return ok;
}

int cmd_capon(const Args& a) {
    const ScenarioConfig cfg = apply_overrides(load(a), options(a));
    const Scenario s = build_scenario(cfg);
    const SchemeResult r = solve_scheme(s, cfg.scheme, solver_options(cfg));
    const auto dec = r.solution.decomposition();
    const SignalBlock x = sample_transmit_block(dec, cfg.block_length, cfg.seeds.transmit);
    const SignalBlock y = simulate_echoes(x, s.roundtrip_channels(), s.sensing_noise, cfg.seeds.echo,
                                          static_cast<Eigen::Index>(s.rx.size()));
    const SpatialGrid g = capon_spectrum(x, y, s.tx, s.rx, cfg.grid, s.channel, cfg.capon);
    fs::create_directories(a.out);
    const fs::path p = fs::path(a.out) / "capon.csv";
    write_grid_csv(p.string(), g);
    write_grid_json(fs::path(a.out) / "capon.json", g);
    for (const auto& n : g.notes) std::cerr << "note: " << n << "\n";
    const Localization loc = localize(g, s.targets, 1.5 * cfg.grid.step);
    for (const auto& pk : loc.peaks.peaks)
        std::cout << "peak y=" << pk.position.y() << " m z=" << pk.position.z() << " m  " << pk.value << " dB\n";
    for (std::size_t l = 0; l < loc.target_errors.size(); ++l)
        std::cout << "target " << l + 1 << ": nearest peak " << loc.target_errors[l] << " m\n";
    std::cout << "wrote " << p.string() << "\n";
    return ok;
}

int cmd_compare(const Args& a) {
    const ScenarioConfig cfg = load(a);
    const auto rows = compare_schemes(cfg, options(a));
    std::cout << comparison_table(rows);
    fs::create_directories(a.out);
    const fs::path p = fs::path(a.out) / "comparison.json";
    std::ofstream(p) << comparison_to_json(rows).dump(2) << "\n";
    std::cout << "wrote " << p.string() << "\n";
    return ok;
}

int cmd_dump(const Args& a) {
    const ScenarioConfig cfg = apply_overrides(load(a), options(a));
    std::cout << dump_config(cfg).dump(2) << "\n";
    return ok;
}

int cmd_run(const Args& a) {
    const ScenarioConfig cfg = load(a);
    const PipelineResult res = run_pipeline(cfg, a.out, options(a));
    std::cout << res.summary.dump(2) << "\n";
    return res.result.design_report.passed() ? ok : verification;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Near-field ISAC beamforming simulator"};
    app.require_subcommand(1);
    Args a;
    auto common = [&](CLI::App* s) {
        s->add_option("--config", a.config, "scenario JSON")->required()->check(CLI::ExistingFile);
        s->add_option("--scheme", a.scheme, "proposed | nccs | ffbf (overrides the config)");
        s->add_option("--seed", a.seed, "transmit seed; the echo seed is seed+1");
        s->add_option("--out", a.out, "output directory")->capture_default_str();
        s->add_option("--grid-step", a.grid_step, "grid step in metres")->check(CLI::PositiveNumber);
        s->add_option("--loading", a.loading, "Capon diagonal loading")->check(CLI::NonNegativeNumber);
    };
    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const Args&);
    };
    const Sub subs[] = {
        {"solve", "solve, recover beamformers and verify", cmd_solve},
        {"verify", "audit a stored solution", cmd_verify},
        {"heatmap-sinr", "per-user SINR heatmaps over the grid", cmd_heatmap},
        {"capon", "simulate echoes and compute the Capon grid", cmd_capon},
        {"compare", "run all three schemes with shared seeds", cmd_compare},
        {"dump-config", "print the normalized configuration", cmd_dump},
        {"run", "full pipeline with all artifacts", cmd_run},
    };
    int (*chosen)(const Args&) = nullptr;
    for (const auto& s : subs) {
        CLI::App* sc = app.add_subcommand(s.name, s.help);
        common(sc);
        if (std::string(s.name) == "verify")
            sc->add_option("--solution", a.solution, "solution file (default <out>/solution.json)");
        sc->callback([&chosen, fn = s.fn] { chosen = fn; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : parse;
    }
    try {
        return chosen(a);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return parse;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return infeasible;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return solver;
    } catch (const NumericalError& e) {
        std::cerr << "numerical verification failure: " << e.what() << "\n";
        return verification;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return other;
    }
}
