#pragma once

#include "wbkit/scenarios.hpp"
#include "wbkit/tolerances.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace wb {

struct RunConfig {
    std::string scenario;
    ScenarioParams params;
    int levels = 3;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::filesystem::path out_dir = "wbkit-out";
    Tolerances tol;
    double tol_scale = 1.0;  // echoed only; `tol` is already scaled
    void validate() const;   // ConfigError
    ScenarioConfig scenario_config() const;
};

// compiler, library and build facts; nothing that varies between runs
std::string environment_stamp();

// Deterministic: keys sorted, shortest round-trip doubles, no clocks and no
// job count, so equal config + seed gives equal bytes.
std::string report_json(const ScenarioReport& rep, const RunConfig& cfg);
std::string series_csv(const Series& s);

// Each command returns the process exit code: 0 all checks hold, 1 some check
// failed. Config and input problems throw ConfigError / ParseError, which the
// front end maps to 2.
//
// verify: writes <out>/<scenario>/report.json, one CSV per series and
// timings.json, and prints one line per check to `out`.
int cmd_verify(const RunConfig& cfg, std::ostream& out);
// loop-check: summary on `out`; when out_dir is non-empty also loop_report.json there
int cmd_loop_check(const std::filesystem::path& file, const Tolerances& tol, std::ostream& out,
                   const std::filesystem::path& out_dir = {});
// solve: u.csv, flux.csv and solution.json under out_dir
int cmd_solve(const std::filesystem::path& file, const Tolerances& tol, const std::filesystem::path& out_dir,
              std::ostream& out);

// names accepted by fixture_text
const std::vector<std::string>& fixture_names();
// regenerates a bundled input file; ConfigError for unknown names
std::string fixture_text(const std::string& name);

}  // namespace wb
