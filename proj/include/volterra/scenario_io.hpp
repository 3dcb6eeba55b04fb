#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "volterra/cesaro.hpp"
#include "volterra/solver.hpp"

namespace volterra {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parsed scenario file: the scenario itself, the requested checks with
/// per-check tolerances, and output routing. See docs/scenarios.md for the
/// format and the list of check names.
struct RunConfig {
    Scenario scenario;
    std::vector<std::string> checks;
    std::map<std::string, double> tolerances;
    std::vector<double> thetas{0.25, 0.5, 1.0};
    std::optional<GridFunction> sigma;  // meansquare check
    std::filesystem::path output_dir = ".";
    std::string name;  // basename of the config file

    // echo fields for the report
    std::string forcing_text;
    std::string measure_text;
};

/// Known check names and the scenario kinds they accept.
bool check_name_known(const std::string& name);
bool check_applicable(const std::string& name, ScenarioKind kind);
double default_check_tolerance(const std::string& name);

/// Command-line overrides applied while the config is parsed (signals are
/// sampled on the final grid).
struct LoadOverrides {
    std::optional<double> step;
    std::optional<double> horizon;
    std::optional<double> tol;  // replaces default tolerances, not explicit ones
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig load_run_config(const std::filesystem::path& path, const LoadOverrides& overrides);

/// Key-value section parser shared by load_run_config and the CLI subcommands.
struct ConfigFile {
    // section -> ordered (key, value) pairs
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback = "") const;
    static ConfigFile parse_file(const std::filesystem::path& path);
    static ConfigFile parse_text(const std::string& text);
};

SignedMeasure measure_from_config(const ConfigFile& cfg, ScenarioKind kind, double step,
                                  double horizon);
GridFunction forcing_from_config(const ConfigFile& cfg, double step, double horizon);

/// Two-column CSV (time, value) on a uniform grid; a header row is skipped.
GridFunction load_density_csv(const std::filesystem::path& path);

struct RunOutcome {
    int exit_code = 0;  // 0 pass, 1 input error, 2 check failure
    std::vector<std::string> report_lines;
};

/// Full pipeline: resolvent -> solve -> analyze. Writes solution.csv,
/// running_mean.csv and report.txt under output_dir; the report echoes the
/// resolvent integrability verdict before any theorem verdict.
RunOutcome run_scenario(const RunConfig& cfg);

/// CSV writing (header row, %.12g, comma separated, LF endings).
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<const GridFunction*>& columns);
std::string format_double(double v);

}  // namespace volterra
