// Command-line front end: scenario runner and one-shot analysis subcommands.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "volterra/cesaro.hpp"
#include "volterra/expr.hpp"
#include "volterra/forcing.hpp"
#include "volterra/mean_square.hpp"
#include "volterra/scenario_io.hpp"
#include "volterra/spectral.hpp"

namespace {

using namespace volterra;

struct GlobalOptions {
    double step = 0.01;
    double horizon = 200.0;
    double tol = 1e-2;
    std::string out;
    LoadOverrides overrides;
};

GridFunction make_signal(const std::string& expr, const std::string& family, double alpha,
                         double level, double step, double horizon) {
    if (!expr.empty()) {
        Expression e = Expression::parse(expr);
        const auto n = static_cast<std::size_t>(std::llround(horizon / step)) + 1;
        return GridFunction::sample(0.0, step, n, [&e](double t) { return e(t); });
    }
    if (family == "pathological") return pathological_forcing(alpha, horizon, step);
    if (family == "constant") return reference_forcing(ReferenceKind::constant, level, horizon, step);
    if (family == "decay_osc") {
        return reference_forcing(ReferenceKind::decaying_oscillation, level, horizon, step);
    }
    if (family == "abs_sine") return reference_forcing(ReferenceKind::abs_sine, level, horizon, step);
    if (family == "ramp") return reference_forcing(ReferenceKind::ramp, level, horizon, step);
    throw ConfigError("give --expr or a known --family "
                      "(pathological, constant, decay_osc, abs_sine, ramp)");
}

ResolventBundle bundle_for(const RunConfig& cfg) {
    const Scenario& s = cfg.scenario;
    switch (s.kind) {
        case ScenarioKind::ide: return differential_resolvent(s.measure, s.step, s.horizon);
        case ScenarioKind::fde: return fde_resolvent(s.measure, s.step, s.horizon);
        default: return integral_resolvent(s.kernel, s.step, s.horizon);
    }
}

GridFunction solve_for(const RunConfig& cfg, const ResolventBundle& bundle) {
    const Scenario& s = cfg.scenario;
    switch (s.kind) {
        case ScenarioKind::ide: return solve_ide_direct(s);
        case ScenarioKind::fde: return solve_fde(s);
        default: return solve_integral_eq(s, bundle);
    }
}

int cmd_resolvent(const std::string& config, const GlobalOptions& g) {
    RunConfig cfg = load_run_config(config, g.overrides);
    ResolventBundle b = bundle_for(cfg);
    const std::filesystem::path dir = g.out.empty() ? cfg.output_dir : std::filesystem::path(g.out);
    std::filesystem::create_directories(dir);
    if (b.has_derivative()) {
        write_csv(dir / "resolvent.csv", {"t", "r", "r_prime"}, {&b.r, &b.r_prime});
    } else {
        write_csv(dir / "resolvent.csv", {"t", "r"}, {&b.r});
    }
    std::cout << "integral_r,integral_r_prime,verdict\n"
              << format_double(b.integral_r) << ',' << format_double(b.integral_r_prime) << ','
              << to_string(b.verdict) << '\n';
    return 0;
}

int cmd_solve(const std::string& config, const GlobalOptions& g) {
    RunConfig cfg = load_run_config(config, g.overrides);
    ResolventBundle b = bundle_for(cfg);
    GridFunction x = solve_for(cfg, b);
    GridFunction mean = running_mean(x);
    const std::filesystem::path dir = g.out.empty() ? cfg.output_dir : std::filesystem::path(g.out);
    std::filesystem::create_directories(dir);
    const std::filesystem::path path = dir / "solution.csv";
    if (cfg.scenario.kind != ScenarioKind::integral) {
        GridFunction xp = derivative_curve(cfg.scenario, x);
        write_csv(path, {"t", "x", "xprime"}, {&x, &xp});
    } else {
        write_csv(path, {"t", "x"}, {&x});
    }
    // footer with the running mean at the horizon
    {
        std::ofstream out(path, std::ios::binary | std::ios::app);
        out << "# running_mean_at_horizon = " << format_double(mean[mean.size() - 1]) << '\n';
    }
    std::cout << "running_mean_at_horizon = " << format_double(mean[mean.size() - 1]) << '\n';
    return 0;
}

int cmd_cesaro(const std::string& expr, const std::string& family, double alpha, double level,
               const GlobalOptions& g) {
    GridFunction f = make_signal(expr, family, alpha, level, g.step, g.horizon);
    CesaroReport rep = estimate_limit(f, g.tol);
    std::cout << "estimate = " << format_double(rep.estimate) << '\n'
              << "half_width = " << format_double(rep.half_width) << '\n'
              << "previous_half_width = " << format_double(rep.previous_half_width) << '\n'
              << "verdict = " << to_string(rep.verdict) << '\n';
    if (!g.out.empty()) {
        std::filesystem::create_directories(g.out);
        write_csv(std::filesystem::path(g.out) / "running_mean.csv", {"t", "mean"}, {&rep.curve});
    }
    return 0;
}

int cmd_decompose(const std::string& expr, const std::string& family, double alpha, double level,
                  double theta, const GlobalOptions& g) {
    GridFunction f = make_signal(expr, family, alpha, level, g.step, g.horizon);
    Decomposition d = decompose(f, theta);
    CesaroReport f1_rep = estimate_limit(d.f1, g.tol);
    CesaroReport F2_rep = estimate_limit(d.F2, g.tol);
    std::cout << "theta = " << format_double(d.theta) << '\n'
              << "f1_limit = " << format_double(f1_rep.estimate) << '\n'
              << "f1_verdict = " << to_string(f1_rep.verdict) << '\n'
              << "F2_mean_limit = " << format_double(F2_rep.estimate) << '\n'
              << "F2_mean_verdict = " << to_string(F2_rep.verdict) << '\n';
    if (!g.out.empty()) {
        std::filesystem::create_directories(g.out);
        write_csv(std::filesystem::path(g.out) / "decomposition.csv",
                  {"t", "f", "f1", "f2", "F2"}, {&f, &d.f1, &d.f2, &d.F2});
    }
    return 0;
}

int cmd_roots(const std::string& config, const std::vector<double>& rect,
              const GlobalOptions& g) {
    RunConfig cfg = load_run_config(config, g.overrides);
    if (cfg.scenario.kind != ScenarioKind::fde) {
        throw ConfigError("roots applies to fde scenarios (finite memory)");
    }
    RootSet rs;
    if (rect.size() == 4) {
        rs = locate_roots(cfg.scenario.measure, Rectangle{rect[0], rect[1], rect[2], rect[3]});
    } else {
        rs = locate_roots(cfg.scenario.measure);
    }
    std::cout << "re,im,multiplicity\n";
    for (const auto& r : rs.roots) {
        std::cout << format_double(r.location.real()) << ',' << format_double(r.location.imag())
                  << ',' << r.multiplicity << '\n';
    }
    std::cout << "v0 = " << format_double(rs.v0) << '\n'
              << "count_certified = " << (rs.count_certified ? "yes" : "no") << '\n';
    if (rs.count_certified) {
        std::cout << "integrability = " << to_string(integrability_verdict(rs)) << '\n';
    }
    if (!g.out.empty()) {
        std::filesystem::create_directories(g.out);
        std::ofstream out(std::filesystem::path(g.out) / "roots.csv", std::ios::binary);
        out << "re,im,multiplicity\n";
        for (const auto& r : rs.roots) {
            out << format_double(r.location.real()) << ',' << format_double(r.location.imag())
                << ',' << r.multiplicity << '\n';
        }
    }
    return rs.count_certified ? 0 : 2;
}

int cmd_example(const std::string& family, double alpha, double level, const GlobalOptions& g) {
    GridFunction f = make_signal("", family, alpha, level, g.step, g.horizon);
    if (g.out.empty()) {
        std::cout << "t,f\n";
        for (std::size_t i = 0; i < f.size(); ++i) {
            std::cout << format_double(f.time_at(i)) << ',' << format_double(f[i]) << '\n';
        }
    } else {
        std::filesystem::create_directories(g.out);
        write_csv(std::filesystem::path(g.out) / "example.csv", {"t", "f"}, {&f});
    }
    return 0;
}

int cmd_meansquare(const std::string& config, const GlobalOptions& g) {
    RunConfig cfg = load_run_config(config, g.overrides);
    if (cfg.scenario.kind != ScenarioKind::ide) {
        throw ConfigError("meansquare applies to ide scenarios");
    }
    if (!cfg.sigma) throw ConfigError("meansquare needs a [noise] sigma entry in the config");
    ResolventBundle b = bundle_for(cfg);
    GridFunction x = solve_for(cfg, b);
    GridFunction ms = mean_square_additive(x, b, *cfg.sigma);
    const std::filesystem::path dir = g.out.empty() ? cfg.output_dir : std::filesystem::path(g.out);
    std::filesystem::create_directories(dir);
    write_csv(dir / "meansquare.csv", {"t", "ms"}, {&ms});
    std::cout << "ms_at_horizon = " << format_double(ms[ms.size() - 1]) << '\n';
    return 0;
}

int cmd_run(const std::vector<std::string>& configs, const GlobalOptions& g, bool echo_report) {
    std::vector<RunConfig> cfgs;
    for (const auto& path : configs) {
        RunConfig cfg = load_run_config(path, g.overrides);
        if (!g.out.empty()) {
            cfg.output_dir = std::filesystem::path(g.out) / cfg.name;
        }
        cfgs.push_back(std::move(cfg));
    }
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        for (std::size_t j = i + 1; j < cfgs.size(); ++j) {
            if (cfgs[i].output_dir == cfgs[j].output_dir) {
                throw ConfigError("two scenarios share the output dir '" +
                                  cfgs[i].output_dir.string() + "'; give distinct [output] dirs");
            }
        }
    }
    // scenarios are independent pipelines; run them concurrently
    std::vector<std::future<RunOutcome>> futures;
    futures.reserve(cfgs.size());
    for (const auto& cfg : cfgs) {
        futures.push_back(std::async(std::launch::async, [&cfg] { return run_scenario(cfg); }));
    }
    int exit_code = 0;
    for (std::size_t i = 0; i < futures.size(); ++i) {
        RunOutcome outcome = futures[i].get();
        if (echo_report || cfgs.size() == 1) {
            for (const auto& line : outcome.report_lines) std::cout << line << '\n';
        } else {
            std::cout << cfgs[i].name << ": exit " << outcome.exit_code << " ("
                      << cfgs[i].output_dir.string() << ")\n";
        }
        if (outcome.exit_code == 2) {
            exit_code = 2;
        } else if (outcome.exit_code == 1 && exit_code == 0) {
            exit_code = 1;
        }
    }
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"volterra: perturbed Volterra / delay / integral convolution equations, "
                 "resolvents and Cesàro-limit analysis"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    auto* opt_step = app.add_option("--step", g.step, "grid step");
    auto* opt_horizon = app.add_option("--horizon", g.horizon, "time horizon");
    auto* opt_tol = app.add_option("--tol", g.tol, "convergence tolerance");
    app.add_option("--out", g.out, "output directory");

    std::string config;
    std::string expr, family;
    double alpha = 1.0, level = 0.0, theta = 1.0;
    std::vector<double> rect;
    std::vector<std::string> configs;

    auto* c_res = app.add_subcommand("resolvent", "compute a resolvent and its integrals");
    c_res->add_option("--config", config, "scenario/measure file")->required();

    auto* c_solve = app.add_subcommand("solve", "solve a scenario, emit t,x[,xprime]");
    c_solve->add_option("--config", config)->required();

    auto* c_ces = app.add_subcommand("cesaro", "running-mean limit diagnostics for a signal");
    c_ces->add_option("--expr", expr, "expression in t");
    c_ces->add_option("--family", family, "named forcing family");
    c_ces->add_option("--alpha", alpha);
    c_ces->add_option("--level", level);

    auto* c_dec = app.add_subcommand("decompose", "split f = f1 + f2 and report the limits");
    c_dec->add_option("--expr", expr);
    c_dec->add_option("--family", family);
    c_dec->add_option("--alpha", alpha);
    c_dec->add_option("--level", level);
    c_dec->add_option("--theta", theta, "averaging width in (0, 1]");

    auto* c_verify = app.add_subcommand("verify", "run a scenario and print the check report");
    c_verify->add_option("--config", config)->required();

    auto* c_roots = app.add_subcommand("roots", "characteristic roots of a finite-memory measure");
    c_roots->add_option("--config", config)->required();
    c_roots->add_option("--rect", rect, "re_min re_max im_min im_max")->expected(4);

    auto* c_ex = app.add_subcommand("example", "emit a named forcing family as CSV");
    c_ex->add_option("--family", family)->required();
    c_ex->add_option("--alpha", alpha);
    c_ex->add_option("--level", level);

    auto* c_ms = app.add_subcommand("meansquare", "additive-noise mean square curve");
    c_ms->add_option("--config", config)->required();

    auto* c_run = app.add_subcommand("run", "run one or more scenario files");
    c_run->add_option("configs", configs, "scenario files")->required();

    CLI11_PARSE(app, argc, argv);
    if (opt_step->count() > 0) g.overrides.step = g.step;
    if (opt_horizon->count() > 0) g.overrides.horizon = g.horizon;
    if (opt_tol->count() > 0) g.overrides.tol = g.tol;

    try {
        if (app.got_subcommand(c_res)) return cmd_resolvent(config, g);
        if (app.got_subcommand(c_solve)) return cmd_solve(config, g);
        if (app.got_subcommand(c_ces)) return cmd_cesaro(expr, family, alpha, level, g);
        if (app.got_subcommand(c_dec)) return cmd_decompose(expr, family, alpha, level, theta, g);
        if (app.got_subcommand(c_verify)) return cmd_run({config}, g, true);
        if (app.got_subcommand(c_roots)) return cmd_roots(config, rect, g);
        if (app.got_subcommand(c_ex)) return cmd_example(family, alpha, level, g);
        if (app.got_subcommand(c_ms)) return cmd_meansquare(config, g);
        if (app.got_subcommand(c_run)) return cmd_run(configs, g, false);
    } catch (const ConfigError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const ExprError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
