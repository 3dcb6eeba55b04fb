#include "volterra/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "volterra/expr.hpp"
#include "volterra/forcing.hpp"
#include "volterra/mean_square.hpp"
#include "volterra/spectral.hpp"

namespace volterra {

namespace {

std::string trim(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

std::string unquote(std::string s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse number for " + what + ": '" + s + "'");
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

// [[a, b], [c, d]] -> vector of pairs
std::vector<std::pair<double, double>> parse_pair_list(const std::string& text,
                                                       const std::string& what) {
    std::vector<std::pair<double, double>> out;
    std::vector<double> nums;
    std::string cur;
    int depth = 0;
    auto flush = [&] {
        const std::string t = trim(cur);
        cur.clear();
        if (!t.empty()) nums.push_back(to_double(t, what));
    };
    for (char c : text) {
        if (c == '[') {
            ++depth;
        } else if (c == ']') {
            flush();
            if (depth == 2 && nums.size() == 2) {
                out.emplace_back(nums[0], nums[1]);
                nums.clear();
            } else if (depth == 2) {
                throw ConfigError(what + ": each entry needs exactly two numbers");
            }
            --depth;
        } else if (c == ',') {
            flush();
        } else {
            cur.push_back(c);
        }
    }
    if (depth != 0) throw ConfigError(what + ": unbalanced brackets");
    return out;
}

std::size_t node_count(double step, double horizon) {
    return static_cast<std::size_t>(std::llround(horizon / step)) + 1;
}

GridFunction sample_expression(const std::string& text, double t0, double step,
                               std::size_t count, const std::string& what) {
    Expression e;
    try {
        e = Expression::parse(text);
    } catch (const ExprError& err) {
        throw ConfigError(what + ": " + err.what());
    }
    return GridFunction::sample(t0, step, count, [&e](double t) { return e(t); });
}

struct CheckInfo {
    const char* name;
    bool ide, fde, integral;
    double default_tol;
};

constexpr CheckInfo kChecks[] = {
    {"lemma_2_4", true, true, false, 1e-3},
    {"theorem_4_1_i", true, true, false, 2e-2},
    {"theorem_4_1_ii", true, true, false, 2e-2},
    {"theorem_4_4", false, true, false, 1e-2},
    {"prop_5_1", true, true, true, 1e-2},
    {"prop_5_2", true, true, true, 5e-3},
    {"section_6", false, false, true, 2e-2},
    {"roots", false, true, false, 1e-6},
    {"meansquare", true, false, false, 1e-9},
};

const CheckInfo* find_check(const std::string& name) {
    for (const auto& c : kChecks) {
        if (name == c.name) return &c;
    }
    return nullptr;
}

}  // namespace

bool check_name_known(const std::string& name) { return find_check(name) != nullptr; }

bool check_applicable(const std::string& name, ScenarioKind kind) {
    const CheckInfo* c = find_check(name);
    if (c == nullptr) return false;
    switch (kind) {
        case ScenarioKind::ide: return c->ide;
        case ScenarioKind::fde: return c->fde;
        default: return c->integral;
    }
}

double default_check_tolerance(const std::string& name) {
    const CheckInfo* c = find_check(name);
    return c ? c->default_tol : 1e-2;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&key](const auto& kv) { return kv.first == key; });
}

std::string ConfigFile::get(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    auto it = sections.find(section);
    if (it == sections.end()) return fallback;
    for (const auto& [k, v] : it->second) {
        if (k == key) return v;
    }
    return fallback;
}

ConfigFile ConfigFile::parse_text(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments outside quotes
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            cfg.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        if (section.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        }
        cfg.sections[section].emplace_back(trim(line.substr(0, eq)),
                                           unquote(trim(line.substr(eq + 1))));
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

GridFunction load_density_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open density CSV: " + path.string());
    std::vector<double> times, values;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ConfigError("density CSV needs two comma-separated columns: " + path.string());
        }
        const std::string a = trim(line.substr(0, comma));
        const std::string b = trim(line.substr(comma + 1));
        if (times.empty() && !a.empty() &&
            !(std::isdigit(static_cast<unsigned char>(a[0])) || a[0] == '-' || a[0] == '+' ||
              a[0] == '.')) {
            continue;  // header row
        }
        times.push_back(to_double(a, "density csv time"));
        values.push_back(to_double(b, "density csv value"));
    }
    if (times.size() < 2) throw ConfigError("density CSV needs at least two rows");
    const double h = times[1] - times[0];
    if (!(h > 0.0)) throw ConfigError("density CSV times must be increasing");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs(times[i] - times[0] - h * static_cast<double>(i)) > 1e-9 * std::max(1.0, h)) {
            throw ConfigError("density CSV grid must be uniform");
        }
    }
    return GridFunction(times[0], h, std::move(values));
}

SignedMeasure measure_from_config(const ConfigFile& cfg, ScenarioKind kind, double step,
                                  double horizon) {
    SignedMeasure m;
    if (cfg.has("measure", "atoms")) {
        for (auto [loc, w] : parse_pair_list(cfg.get("measure", "atoms"), "measure.atoms")) {
            m.atoms.push_back({loc, w});
        }
    }
    if (cfg.has("measure", "density_exp")) {
        for (auto [c, r] :
             parse_pair_list(cfg.get("measure", "density_exp"), "measure.density_exp")) {
            m.exp_density.push_back({c, r});
        }
    }
    std::optional<double> support;
    if (cfg.has("measure", "support")) {
        support = to_double(cfg.get("measure", "support"), "measure.support");
    }

    if (kind == ScenarioKind::fde) {
        if (!support) throw ConfigError("fde scenarios need measure.support (tau)");
        const double tau = *support;
        SignedMeasure past;
        past.atoms = m.atoms;
        for (const auto& a : past.atoms) {
            if (a.location > 1e-12) {
                throw ConfigError("fde measure atoms must have locations in [-tau, 0]");
            }
        }
        if (cfg.has("measure", "density")) {
            const auto n = static_cast<std::size_t>(std::llround(tau / step)) + 1;
            past.density =
                sample_expression(cfg.get("measure", "density"), -tau, step, n, "measure.density");
        } else if (cfg.has("measure", "density_csv")) {
            past.density = load_density_csv(cfg.get("measure", "density_csv"));
        }
        past.support_bound = tau;
        SignedMeasure reflected = reflect_to_halfline(past);
        reflected.exp_density = m.exp_density;  // given on the reflected variable
        reflected.validate();
        return reflected;
    }

    if (cfg.has("measure", "density")) {
        const auto n = node_count(step, horizon);
        m.density = sample_expression(cfg.get("measure", "density"), 0.0, step, n,
                                      "measure.density");
    } else if (cfg.has("measure", "density_csv")) {
        m.density = load_density_csv(cfg.get("measure", "density_csv"));
    }
    m.support_bound = support;
    m.validate();
    if (!m.is_halfline()) throw ConfigError("ide measure atoms must have locations >= 0");
    return m;
}

GridFunction forcing_from_config(const ConfigFile& cfg, double step, double horizon) {
    const auto n = node_count(step, horizon);
    if (cfg.has("forcing", "expr")) {
        return sample_expression(cfg.get("forcing", "expr"), 0.0, step, n, "forcing.expr");
    }
    if (cfg.has("forcing", "family")) {
        const std::string family = cfg.get("forcing", "family");
        const double level = cfg.has("forcing", "level")
                                 ? to_double(cfg.get("forcing", "level"), "forcing.level")
                                 : 0.0;
        if (family == "pathological") {
            const double alpha = to_double(cfg.get("forcing", "alpha", "1"), "forcing.alpha");
            try {
                return pathological_forcing(alpha, horizon, step);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        if (family == "constant") {
            return reference_forcing(ReferenceKind::constant, level, horizon, step);
        }
        if (family == "decay_osc") {
            return reference_forcing(ReferenceKind::decaying_oscillation, level, horizon, step);
        }
        if (family == "abs_sine") {
            return reference_forcing(ReferenceKind::abs_sine, level, horizon, step);
        }
        if (family == "ramp") return reference_forcing(ReferenceKind::ramp, level, horizon, step);
        throw ConfigError("unknown forcing family: " + family);
    }
    return GridFunction::zeros(0.0, step, n);
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return load_run_config(path, LoadOverrides{});
}

RunConfig load_run_config(const std::filesystem::path& path, const LoadOverrides& overrides) {
    ConfigFile cfg = ConfigFile::parse_file(path);
    RunConfig rc;
    rc.name = path.stem().string();

    const std::string kind_text = cfg.get("scenario", "kind", "ide");
    if (kind_text == "ide") {
        rc.scenario.kind = ScenarioKind::ide;
    } else if (kind_text == "fde") {
        rc.scenario.kind = ScenarioKind::fde;
    } else if (kind_text == "integral") {
        rc.scenario.kind = ScenarioKind::integral;
    } else {
        throw ConfigError("scenario.kind must be ide, fde or integral (got '" + kind_text + "')");
    }
    rc.scenario.step = overrides.step
                           ? *overrides.step
                           : to_double(cfg.get("scenario", "step", "0.01"), "scenario.step");
    rc.scenario.horizon =
        overrides.horizon ? *overrides.horizon
                          : to_double(cfg.get("scenario", "horizon", "200"), "scenario.horizon");
    if (!(rc.scenario.step > 0.0)) throw ConfigError("scenario.step must be positive");
    if (!(rc.scenario.horizon > rc.scenario.step)) {
        throw ConfigError("scenario.horizon must exceed the step");
    }
    rc.scenario.initial_value = to_double(cfg.get("scenario", "xi", "0"), "scenario.xi");

    if (rc.scenario.kind == ScenarioKind::integral) {
        if (!cfg.has("kernel", "expr")) throw ConfigError("integral scenarios need kernel.expr");
        rc.scenario.kernel =
            sample_expression(cfg.get("kernel", "expr"), 0.0, rc.scenario.step,
                              node_count(rc.scenario.step, rc.scenario.horizon), "kernel.expr");
        rc.measure_text = cfg.get("kernel", "expr");
    } else {
        rc.scenario.measure =
            measure_from_config(cfg, rc.scenario.kind, rc.scenario.step, rc.scenario.horizon);
        rc.measure_text = cfg.get("measure", "atoms");
    }

    rc.scenario.forcing = forcing_from_config(cfg, rc.scenario.step, rc.scenario.horizon);
    rc.forcing_text = cfg.has("forcing", "expr") ? cfg.get("forcing", "expr")
                                                 : cfg.get("forcing", "family", "0");

    if (rc.scenario.kind == ScenarioKind::fde && cfg.has("history", "expr")) {
        const double tau = *rc.scenario.measure.support_bound;
        if (tau > 0.0) {
            const auto n = static_cast<std::size_t>(std::llround(tau / rc.scenario.step)) + 1;
            rc.scenario.history = sample_expression(cfg.get("history", "expr"), -tau,
                                                    rc.scenario.step, n, "history.expr");
        } else {
            rc.scenario.history = sample_expression(cfg.get("history", "expr"), 0.0,
                                                    rc.scenario.step, 1, "history.expr");
        }
    }

    if (cfg.has("noise", "sigma")) {
        rc.sigma = sample_expression(cfg.get("noise", "sigma"), 0.0, rc.scenario.step,
                                     node_count(rc.scenario.step, rc.scenario.horizon),
                                     "noise.sigma");
    }

    if (cfg.has("analysis", "checks")) {
        rc.checks = split_list(cfg.get("analysis", "checks"));
    }
    for (const auto& name : rc.checks) {
        if (!check_name_known(name)) throw ConfigError("unknown check name: " + name);
        if (!check_applicable(name, rc.scenario.kind)) {
            throw ConfigError("check '" + name + "' does not apply to kind '" +
                              to_string(rc.scenario.kind) + "'");
        }
        const std::string key = "tol_" + name;
        if (cfg.has("analysis", key)) {
            rc.tolerances[name] = to_double(cfg.get("analysis", key), key);
        } else if (overrides.tol) {
            rc.tolerances[name] = *overrides.tol;
        } else {
            rc.tolerances[name] = default_check_tolerance(name);
        }
    }
    if (cfg.has("analysis", "thetas")) {
        rc.thetas.clear();
        for (const auto& item : split_list(cfg.get("analysis", "thetas"))) {
            rc.thetas.push_back(to_double(item, "analysis.thetas"));
        }
    }
    for (double theta : rc.thetas) {
        if (!(theta > 0.0) || theta > 1.0) {
            throw ConfigError("theta = " + format_double(theta) +
                              " is outside the admissible interval (0, 1]");
        }
    }
    if (std::find(rc.checks.begin(), rc.checks.end(), "meansquare") != rc.checks.end() &&
        !rc.sigma) {
        throw ConfigError("meansquare check needs a [noise] sigma entry");
    }

    if (cfg.has("output", "dir")) rc.output_dir = cfg.get("output", "dir");
    return rc;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<const GridFunction*>& columns) {
    if (columns.empty() || header.size() != columns.size() + 1) {
        throw std::invalid_argument("write_csv: header must cover time plus every column");
    }
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) out << ',';
        out << header[i];
    }
    out << '\n';
    const GridFunction& t = *columns.front();
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << format_double(t.time_at(i));
        for (const GridFunction* col : columns) {
            out << ',' << format_double(i < col->size() ? (*col)[i] : 0.0);
        }
        out << '\n';
    }
}

namespace {

struct ReportBuilder {
    std::vector<std::string> lines;
    bool any_fail = false;

    void kv(const std::string& key, const std::string& value) { lines.push_back(key + " = " + value); }
    void kv(const std::string& key, double value) { kv(key, format_double(value)); }
    void blank() { lines.emplace_back(); }
    void comment(const std::string& c) { lines.push_back("# " + c); }

    void verdict(const std::string& key, bool pass) {
        kv(key, pass ? "pass" : "fail");
        if (!pass) any_fail = true;
    }
    void verdict_panel(const std::string& key, PanelVerdict v) {
        kv(key, to_string(v));
        if (v == PanelVerdict::fail) any_fail = true;
    }
};

const char* ces_verdict(Convergence c) {
    switch (c) {
        case Convergence::converged: return "yes";
        case Convergence::not_converged: return "no";
        default: return "inconclusive";
    }
}

void run_check(ReportBuilder& rb, const RunConfig& cfg, const std::string& name,
               const ResolventBundle& bundle, const GridFunction& x, const GridFunction* xprime) {
    const Scenario& s = cfg.scenario;
    const double tol = cfg.tolerances.at(name);
    const double ces_tol = 1e-2;
    rb.blank();
    rb.comment("check " + name);
    rb.kv("check", name);
    rb.kv("tolerance", tol);
    const bool hyp = bundle.verdict == Integrability::yes;

    if (name == "lemma_2_4") {
        IdentityReport rep = check_integral_identities(bundle, s.measure, tol);
        if (!rep.defined) {
            rb.kv("check_verdict", "inconclusive");
            rb.kv("note", rep.note);
            return;
        }
        rb.kv("residual_integral_r", rep.residual_integral_r);
        rb.kv("residual_integral_r_prime", rep.residual_integral_r_prime);
        if (!hyp) {
            rb.kv("check_verdict", "inconclusive");
            rb.kv("note", "resolvent integrability not established");
        } else {
            rb.verdict("check_verdict", rep.pass);
        }
        return;
    }

    if (name == "theorem_4_1_i") {
        AdditivityReport add = check_additivity(s.forcing, cfg.thetas, ces_tol);
        CesaroReport xr = estimate_limit(x, ces_tol);
        rb.kv("interval_limit_slope", add.fitted_limit);
        rb.kv("interval_maps_converged", add.verdict == Convergence::converged ? "yes" : "no");
        const double mass = s.measure.total_mass();
        rb.kv("measure_mass", mass);
        if (add.verdict != Convergence::converged || mass == 0.0 || !hyp) {
            rb.kv("check_verdict", "inconclusive");
            rb.kv("note", !hyp ? "resolvent integrability not established"
                               : "interval route hypotheses unmet");
            return;
        }
        rb.kv("x_limit_predicted", -add.fitted_limit / mass);
        rb.kv("x_limit_measured", xr.estimate);
        rb.verdict("check_verdict", std::abs(xr.estimate + add.fitted_limit / mass) <= tol &&
                                        xr.verdict != Convergence::not_converged);
        return;
    }

    if (name == "theorem_4_1_ii") {
        CesaroReport fr = estimate_limit(s.forcing, ces_tol);
        CesaroReport xr = estimate_limit(x, ces_tol);
        rb.kv("f_limit_measured", fr.estimate);
        rb.kv("f_in_Ces", ces_verdict(fr.verdict));
        if (fr.verdict == Convergence::converged) {
            const double mass = s.measure.total_mass();
            if (mass == 0.0 || !hyp) {
                rb.kv("check_verdict", "inconclusive");
                rb.kv("note", !hyp ? "resolvent integrability not established"
                                   : "zero total mass: limit undefined");
                return;
            }
            rb.kv("x_limit_predicted", -fr.estimate / mass);
            rb.kv("x_limit_measured", xr.estimate);
            bool ok = std::abs(xr.estimate + fr.estimate / mass) <= tol;
            if (xprime != nullptr) {
                CesaroReport dxr = estimate_limit(*xprime, ces_tol);
                rb.kv("xprime_limit_measured", dxr.estimate);
                ok = ok && std::abs(dxr.estimate) <= tol;
            }
            rb.verdict("check_verdict", ok);
        } else if (fr.verdict == Convergence::not_converged) {
            // converse direction: x and x' cannot both admit limits
            bool consistent = true;
            rb.kv("x_limit_measured", xr.estimate);
            if (xprime != nullptr) {
                CesaroReport dxr = estimate_limit(*xprime, ces_tol);
                rb.kv("xprime_in_Ces", ces_verdict(dxr.verdict));
                consistent = !(xr.verdict == Convergence::converged &&
                               dxr.verdict == Convergence::converged);
            }
            rb.kv("note", "forcing has no Cesàro limit; direct route reports the converse");
            rb.verdict("check_verdict", consistent);
        } else {
            rb.kv("check_verdict", "inconclusive");
        }
        return;
    }

    if (name == "theorem_4_4") {
        RootSet rs = locate_roots(s.measure);
        Integrability integ = Integrability::inconclusive;
        if (rs.count_certified) integ = integrability_verdict(rs);
        CesaroReport xr = estimate_limit(x, tol);
        rb.kv("v0", rs.v0);
        rb.kv("r_tau_integrable", to_string(integ));
        rb.kv("x_in_Ces", ces_verdict(xr.verdict));
        rb.kv("x_mean_half_width", xr.half_width);
        if (integ == Integrability::inconclusive || xr.verdict == Convergence::inconclusive) {
            rb.kv("check_verdict", "inconclusive");
            return;
        }
        bool consistent;
        std::string note;
        if (integ == Integrability::yes) {
            consistent = xr.verdict == Convergence::converged;
            note = "integrable resolvent: the solution mean must settle";
        } else if (xr.verdict == Convergence::not_converged) {
            consistent = true;
            note = "equivalence confirmed in the negative direction";
        } else {
            consistent = true;
            note = "no counterexample witnessed by this forcing";
        }
        rb.kv("note", note);
        rb.verdict("check_verdict", consistent);
        return;
    }

    if (name == "prop_5_1") {
        AdditivityReport add = check_additivity(s.forcing, cfg.thetas, tol);
        CesaroReport fr = estimate_limit(s.forcing, tol);
        rb.kv("interval_limit_slope", add.fitted_limit);
        rb.kv("interval_maps_converged", add.verdict == Convergence::converged ? "yes" : "no");
        rb.kv("f_in_Ces", ces_verdict(fr.verdict));
        rb.kv("f_mean_half_width", fr.half_width);
        rb.verdict("check_verdict", add.pass && fr.verdict == Convergence::not_converged);
        return;
    }

    if (name == "prop_5_2") {
        PositiveEquivalenceReport rep;
        try {
            rep = positive_equivalence_check(s.forcing, tol);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("prop_5_2: ") + e.what());
        }
        rb.kv("interval_limit", rep.interval_route.fitted_limit);
        rb.kv("side_condition_value", rep.side_condition_value);
        rb.kv("side_condition_ok", rep.side_condition_ok ? "yes" : "no");
        rb.kv("direct_limit", rep.direct_route.estimate);
        rb.kv("direct_in_Ces", ces_verdict(rep.direct_route.verdict));
        rb.kv("note", rep.note);
        rb.verdict("check_verdict", rep.pass);
        return;
    }

    if (name == "section_6") {
        CesaroReport fr = estimate_limit(s.forcing, ces_tol);
        CesaroReport xr = estimate_limit(x, ces_tol);
        rb.kv("f_in_Ces", ces_verdict(fr.verdict));
        rb.kv("x_in_Ces", ces_verdict(xr.verdict));
        rb.kv("x_mean_half_width", xr.half_width);
        if (!hyp) {
            rb.kv("check_verdict", "inconclusive");
            rb.kv("note", "integral resolvent not integrable; equivalence unavailable");
            return;
        }
        if (fr.verdict == Convergence::converged) {
            const double predicted = fr.estimate * (1.0 + bundle.integral_r);
            rb.kv("x_limit_predicted", predicted);
            rb.kv("x_limit_measured", xr.estimate);
            rb.verdict("check_verdict", xr.verdict == Convergence::converged &&
                                            std::abs(xr.estimate - predicted) <= tol);
        } else if (fr.verdict == Convergence::not_converged) {
            rb.kv("note", "forcing mean diverges; solution mean must diverge with it");
            rb.verdict("check_verdict", xr.verdict == Convergence::not_converged);
        } else {
            rb.kv("check_verdict", "inconclusive");
        }
        return;
    }

    if (name == "roots") {
        RootSet rs = locate_roots(s.measure);
        rb.kv("root_count", static_cast<double>(rs.total_multiplicity()));
        rb.kv("v0", rs.v0);
        rb.kv("count_certified", rs.count_certified ? "yes" : "no");
        if (rs.count_certified) {
            rb.kv("r_tau_integrable", to_string(integrability_verdict(rs)));
        }
        std::filesystem::create_directories(cfg.output_dir);
        std::ofstream out(cfg.output_dir / "roots.csv", std::ios::binary);
        out << "re,im,multiplicity\n";
        for (const auto& root : rs.roots) {
            out << format_double(root.location.real()) << ','
                << format_double(root.location.imag()) << ',' << root.multiplicity << '\n';
        }
        rb.verdict("check_verdict", rs.count_certified);
        return;
    }

    if (name == "meansquare") {
        GridFunction ms = mean_square_additive(x, bundle, *cfg.sigma);
        double min_excess = 0.0;
        for (std::size_t i = 0; i < ms.size(); ++i) {
            min_excess = std::min(min_excess, ms[i] - x[i] * x[i]);
        }
        rb.kv("ms_at_horizon", ms[ms.size() - 1]);
        rb.kv("ms_min_excess_over_x_squared", min_excess);
        write_csv(cfg.output_dir / "meansquare.csv", {"t", "ms"}, {&ms});
        rb.verdict("check_verdict", min_excess >= -tol);
        return;
    }

    throw ConfigError("unknown check name: " + name);
}

}  // namespace

RunOutcome run_scenario(const RunConfig& cfg) {
    RunOutcome outcome;
    ReportBuilder rb;
    try {
        const Scenario& s = cfg.scenario;
        s.validate();
        std::filesystem::create_directories(cfg.output_dir);

        rb.comment("scenario");
        rb.kv("scenario", cfg.name);
        rb.kv("kind", to_string(s.kind));
        rb.kv("step", s.step);
        rb.kv("horizon", s.horizon);
        rb.kv("forcing", cfg.forcing_text);

        ResolventBundle bundle;
        GridFunction x;
        GridFunction xprime;
        bool has_xprime = false;
        switch (s.kind) {
            case ScenarioKind::ide:
                bundle = differential_resolvent(s.measure, s.step, s.horizon);
                x = solve_ide_direct(s);
                xprime = derivative_curve(s, x);
                has_xprime = true;
                break;
            case ScenarioKind::fde:
                bundle = fde_resolvent(s.measure, s.step, s.horizon);
                x = solve_fde(s);
                xprime = derivative_curve(s, x);
                has_xprime = true;
                break;
            case ScenarioKind::integral:
                bundle = integral_resolvent(s.kernel, s.step, s.horizon);
                x = solve_integral_eq(s, bundle);
                break;
        }

        rb.blank();
        rb.comment("resolvent (hypothesis before any theorem verdict)");
        rb.kv("resolvent_verdict", to_string(bundle.verdict));
        rb.kv("integral_r", bundle.integral_r);
        if (bundle.has_derivative()) rb.kv("integral_r_prime", bundle.integral_r_prime);
        rb.kv("tail_estimate", bundle.tail_estimate);
        if (s.kind != ScenarioKind::integral) {
            rb.kv("measure_mass", s.measure.total_mass());
            rb.kv("measure_total_variation", s.measure.total_variation());
        }

        GridFunction mean_curve = running_mean(x);
        rb.blank();
        rb.kv("x_mean_at_horizon", mean_curve[mean_curve.size() - 1]);

        if (has_xprime) {
            write_csv(cfg.output_dir / "solution.csv", {"t", "x", "xprime"}, {&x, &xprime});
        } else {
            write_csv(cfg.output_dir / "solution.csv", {"t", "x"}, {&x});
        }
        write_csv(cfg.output_dir / "running_mean.csv", {"t", "mean"}, {&mean_curve});

        for (const auto& name : cfg.checks) {
            run_check(rb, cfg, name, bundle, x, has_xprime ? &xprime : nullptr);
        }

        rb.blank();
        rb.kv("overall_verdict", rb.any_fail ? "fail" : "pass");
        outcome.exit_code = rb.any_fail ? 2 : 0;
    } catch (const ConfigError& e) {
        rb.kv("error", e.what());
        outcome.exit_code = 1;
    } catch (const std::invalid_argument& e) {
        rb.kv("error", e.what());
        outcome.exit_code = 1;
    } catch (const std::exception& e) {
        rb.kv("error", e.what());
        outcome.exit_code = 2;
    }
    outcome.report_lines = rb.lines;

    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    std::ofstream rep(cfg.output_dir / "report.txt", std::ios::binary);
    if (rep) {
        for (const auto& line : outcome.report_lines) rep << line << '\n';
        rep << "exit_code = " << outcome.exit_code << '\n';
    }
    return outcome;
}

}  // namespace volterra
