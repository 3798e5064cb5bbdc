// wbkit command-line front end. Exit codes: 0 all checks hold, 1 a check
// failed, 2 bad configuration or input.

#include "wbkit/errors.hpp"
#include "wbkit/io.hpp"
#include "wbkit/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

constexpr int kConfigExit = 2;

wb::ScenarioParams parse_params(const std::vector<std::string>& raw) {
    wb::ScenarioParams out;
    for (const auto& kv : raw) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw wb::ConfigError("--param expects key=value, got '" + kv + "'");
        out[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wbkit: numerical checks for bending-energy lower bounds"};
    app.require_subcommand(1);

    wb::RunConfig cfg;
    std::vector<std::string> raw_params;
    std::string out_dir = "wbkit-out";
    auto* verify = app.add_subcommand("verify", "run a scenario's checks and write a report");
    verify->add_option("scenario", cfg.scenario, "cone, econe, dipole, cap or graph")->required();
    verify->add_option("--param", raw_params, "scenario parameter as key=value (repeatable)");
    verify->add_option("--levels", cfg.levels, "mesh refinement levels")->capture_default_str();
    verify->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    verify->add_option("--out", out_dir, "output directory")->capture_default_str();
    verify->add_option("--jobs", cfg.jobs, "worker threads")->capture_default_str();

    std::string loop_file, loop_out;
    auto* loop_check = app.add_subcommand("loop-check", "analyse a framed loop file");
    loop_check->add_option("file", loop_file, "loop JSON")->required();
    loop_check->add_option("--out", loop_out, "also write loop_report.json here");

    std::string problem_file, solve_out = "wbkit-out/solve";
    auto* solve = app.add_subcommand("solve", "solve a floating-potential problem file");
    solve->add_option("file", problem_file, "problem JSON")->required();
    solve->add_option("--out", solve_out, "output directory")->capture_default_str();

    std::string fixture_name, fixture_dest;
    auto* fixture = app.add_subcommand("fixture", "regenerate a bundled input file");
    fixture->add_option("name", fixture_name, "fixture name, or 'all'")->required();
    fixture->add_option("dest", fixture_dest, "output file (directory for 'all')")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigExit;
    }

    try {
        const double scale = wb::Tolerances::env_scale();
        const wb::Tolerances tol = wb::Tolerances{}.scaled(scale);
        if (*verify) {
            cfg.params = parse_params(raw_params);
            cfg.out_dir = out_dir;
            cfg.tol = tol;
            cfg.tol_scale = scale;
            return wb::cmd_verify(cfg, std::cout);
        }
        if (*loop_check) return wb::cmd_loop_check(loop_file, tol, std::cout, loop_out);
        if (*solve) return wb::cmd_solve(problem_file, tol, solve_out, std::cout);
        if (*fixture) {
            if (fixture_name == "all") {
                for (const auto& n : wb::fixture_names())
                    wb::write_text_file(std::filesystem::path(fixture_dest) / (n + ".json"), wb::fixture_text(n));
            } else {
                wb::write_text_file(fixture_dest, wb::fixture_text(fixture_name));
            }
            return 0;
        }
    } catch (const wb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const wb::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const wb::Error& e) {
        // scenarios turn module errors into failed checks; anything that gets here still counts as one
        std::cerr << "failed: " << e.what() << "\n";
        return 1;
    }
    return kConfigExit;
}
