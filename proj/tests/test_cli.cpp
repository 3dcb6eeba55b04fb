#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "volterra/scenario_io.hpp"

using namespace volterra;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const std::string& name, const std::string& body) {
    const fs::path dir = fs::temp_directory_path() / "volterra_cli_tests";
    fs::create_directories(dir);
    const fs::path file = dir / name;
    std::ofstream out(file, std::ios::binary);
    out << body;
    return file;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string report_of(const RunOutcome& o) {
    std::string all;
    for (const auto& line : o.report_lines) all += line + "\n";
    return all;
}

const char* kSmallIde = R"(
# constant forcing against the two-part measure
[scenario]
kind = ide
step = 0.01
horizon = 400
xi = 0

[measure]
atoms = [[0, -2]]
density_exp = [[1, 1]]

[forcing]
expr = 1

[analysis]
checks = lemma_2_4, theorem_4_1_ii

[output]
dir = OUTDIR
)";

std::string with_outdir(std::string text, const fs::path& dir) {
    const auto pos = text.find("OUTDIR");
    text.replace(pos, 6, dir.string());
    return text;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing: sections, comments, quoting, lists") {
    ConfigFile cfg = ConfigFile::parse_text(
        "[a]\nx = 1 # trailing\n# full line\ny = \"quoted # not a comment\"\n[b]\nz = 1, 2, 3\n");
    CHECK(cfg.get("a", "x") == "1");
    CHECK(cfg.get("a", "y") == "quoted # not a comment");
    CHECK(cfg.get("b", "z") == "1, 2, 3");
    CHECK_FALSE(cfg.has("a", "z"));
    CHECK_THROWS_AS(ConfigFile::parse_text("key_without_section = 1\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_text("[a\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_text("[a]\nnot a kv pair\n"), ConfigError);
}

TEST_CASE("load_run_config: round trip of the measure and checks") {
    const fs::path out = fs::temp_directory_path() / "volterra_cli_tests" / "ide_out";
    const fs::path file = write_config("small_ide.cfg", with_outdir(kSmallIde, out));
    RunConfig rc = load_run_config(file);
    CHECK(rc.scenario.kind == ScenarioKind::ide);
    CHECK(rc.scenario.measure.atoms.size() == 1);
    CHECK(rc.scenario.measure.atoms[0].weight == doctest::Approx(-2.0));
    CHECK(rc.scenario.measure.exp_density.size() == 1);
    CHECK(rc.checks.size() == 2);
    CHECK(rc.tolerances.at("lemma_2_4") == doctest::Approx(1e-3));
    CHECK(rc.output_dir == out);
}

TEST_CASE("load_run_config: theta outside (0,1] names the constraint") {
    const fs::path file = write_config("bad_theta.cfg",
                                       "[scenario]\nkind = ide\nstep = 0.01\nhorizon = 200\n"
                                       "[measure]\natoms = [[0, -1]]\n"
                                       "[analysis]\nthetas = 0.5, 1.5\n");
    try {
        (void)load_run_config(file);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("(0, 1]") != std::string::npos);
    }
}

TEST_CASE("load_run_config: unknown check and kind mismatch are input errors") {
    const fs::path f1 = write_config("bad_check.cfg",
                                     "[scenario]\nkind = ide\n[measure]\natoms = [[0, -1]]\n"
                                     "[analysis]\nchecks = no_such_check\n");
    CHECK_THROWS_AS((void)load_run_config(f1), ConfigError);
    const fs::path f2 = write_config("mismatch.cfg",
                                     "[scenario]\nkind = ide\n[measure]\natoms = [[0, -1]]\n"
                                     "[analysis]\nchecks = roots\n");
    CHECK_THROWS_AS((void)load_run_config(f2), ConfigError);
    const fs::path f3 = write_config("ms_needs_sigma.cfg",
                                     "[scenario]\nkind = ide\n[measure]\natoms = [[0, -1]]\n"
                                     "[analysis]\nchecks = meansquare\n");
    CHECK_THROWS_AS((void)load_run_config(f3), ConfigError);
}

TEST_CASE("run_scenario: pipeline artifacts, verdicts and determinism") {
    const fs::path out = fs::temp_directory_path() / "volterra_cli_tests" / "run1";
    fs::remove_all(out);
    const fs::path file = write_config("run1.cfg", with_outdir(kSmallIde, out));
    RunConfig rc = load_run_config(file);
    RunOutcome outcome = run_scenario(rc);
    CHECK(outcome.exit_code == 0);
    CHECK(fs::exists(out / "solution.csv"));
    CHECK(fs::exists(out / "running_mean.csv"));
    CHECK(fs::exists(out / "report.txt"));

    const std::string report = report_of(outcome);
    CHECK(report.find("resolvent_verdict = yes") != std::string::npos);
    CHECK(report.find("x_limit_predicted = 1") != std::string::npos);
    CHECK(report.find("overall_verdict = pass") != std::string::npos);
    // hypothesis echoed before any theorem verdict
    CHECK(report.find("resolvent_verdict") < report.find("check_verdict"));

    // identical configs give byte-identical CSV
    const std::string first = slurp(out / "solution.csv");
    RunOutcome again = run_scenario(rc);
    CHECK(again.exit_code == 0);
    CHECK(slurp(out / "solution.csv") == first);

    // CSV formatting: header row, comma separated, LF endings
    const std::string head = first.substr(0, first.find('\n'));
    CHECK(head == "t,x,xprime");
    CHECK(first.find('\r') == std::string::npos);
}

TEST_CASE("run_scenario: fde roots check emits the root table") {
    const fs::path out = fs::temp_directory_path() / "volterra_cli_tests" / "run_fde";
    fs::remove_all(out);
    const std::string cfg_text =
        "[scenario]\nkind = fde\nstep = 0.001\nhorizon = 120\n"
        "[measure]\natoms = [[-1, -0.3]]\nsupport = 1\n"
        "[history]\nexpr = 1\n"
        "[forcing]\nexpr = 0.3\n"
        "[analysis]\nchecks = lemma_2_4, theorem_4_4, roots\n"
        "[output]\ndir = " + out.string() + "\n";
    const fs::path file = write_config("run_fde.cfg", cfg_text);
    RunOutcome outcome = run_scenario(load_run_config(file));
    const std::string report = report_of(outcome);
    CHECK(outcome.exit_code == 0);
    CHECK(report.find("r_tau_integrable = yes") != std::string::npos);
    CHECK(fs::exists(out / "roots.csv"));
    const std::string roots = slurp(out / "roots.csv");
    CHECK(roots.find("re,im,multiplicity") == 0);
    CHECK(roots.find("-0.4894") != std::string::npos);
}

TEST_CASE("run_scenario: failing check exits 2") {
    // claim a wrong limit by breaking the hypothesis tolerance: forcing ramp
    // has no Cesàro limit, so prop_5_1 fails (its maps diverge as well)
    const fs::path out = fs::temp_directory_path() / "volterra_cli_tests" / "run_fail";
    fs::remove_all(out);
    const std::string cfg_text =
        "[scenario]\nkind = ide\nstep = 0.01\nhorizon = 300\n"
        "[measure]\natoms = [[0, -1]]\n"
        "[forcing]\nfamily = ramp\n"
        "[analysis]\nchecks = prop_5_1\n"
        "[output]\ndir = " + out.string() + "\n";
    RunOutcome outcome = run_scenario(load_run_config(write_config("run_fail.cfg", cfg_text)));
    CHECK(outcome.exit_code == 2);
    CHECK(report_of(outcome).find("overall_verdict = fail") != std::string::npos);
}

TEST_CASE("expression errors surface as input errors") {
    const fs::path file = write_config("bad_expr.cfg",
                                       "[scenario]\nkind = ide\n[measure]\natoms = [[0, -1]]\n"
                                       "[forcing]\nexpr = sin(\n");
    CHECK_THROWS_AS((void)load_run_config(file), ConfigError);
}


TEST_CASE("density_csv round trip") {
    const fs::path dir = fs::temp_directory_path() / "volterra_cli_tests";
    fs::create_directories(dir);
    const fs::path csv = dir / "dens.csv";
    {
        std::ofstream out(csv, std::ios::binary);
        out << "s,d\n";
        for (int i = 0; i <= 4000; ++i) {
            const double s = 0.01 * i;
            out << s << "," << std::exp(-s) << "\n";
        }
    }
    const std::string cfg_text =
        "[scenario]\nkind = ide\nstep = 0.01\nhorizon = 150\n"
        "[measure]\natoms = [[0, -2]]\ndensity_csv = " + csv.string() + "\n"
        "[forcing]\nexpr = 1\n"
        "[analysis]\nchecks = lemma_2_4\n"
        "[output]\ndir = " + (dir / "dens_out").string() + "\n";
    RunConfig rc = load_run_config(write_config("dens.cfg", cfg_text));
    REQUIRE(rc.scenario.measure.density.has_value());
    CHECK(rc.scenario.measure.total_mass() == doctest::Approx(-1.0).epsilon(1e-4));
    RunOutcome outcome = run_scenario(rc);
    CHECK(outcome.exit_code == 0);

    std::ofstream bad(dir / "bad.csv", std::ios::binary);
    bad << "0,1\n0.1,2\n0.3,3\n";
    bad.close();
    CHECK_THROWS_AS(load_density_csv(dir / "bad.csv"), ConfigError);
}

}  // TEST_SUITE
