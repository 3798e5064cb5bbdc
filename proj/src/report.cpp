#include "wbkit/report.hpp"

#include "wbkit/errors.hpp"
#include "wbkit/io.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace wb {

namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

json tolerances_json(const Tolerances& t) {
    return {{"curv_analytic", t.curv_analytic}, {"curv_mesh", t.curv_mesh}, {"gb", t.gb},
            {"orth", t.orth}, {"burg_analytic", t.burg_analytic}, {"burg_mesh", t.burg_mesh},
            {"ineq", t.ineq}, {"flux", t.flux}, {"coarea", t.coarea}, {"grad_floor_rel", t.grad_floor_rel}};
}

// NaN and infinities become null rather than invalid JSON
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json check_json(const Check& c) {
    return {{"name", c.name}, {"anchor", c.anchor}, {"lhs", num(c.lhs)}, {"rhs", num(c.rhs)},
            {"margin", num(c.margin)}, {"holds", c.holds}, {"informational", c.informational},
            {"detail", c.detail}};
}

const char* verdict(const Check& c) { return c.informational ? "INFO" : c.holds ? "PASS" : "FAIL"; }

void print_check(std::ostream& out, const Check& c) {
    out << fmt("%s  %-58s lhs=%-13.6g rhs=%-13.6g margin=%.3g", verdict(c), c.name.c_str(), c.lhs, c.rhs, c.margin);
    if (!c.holds && !c.detail.empty()) out << "  [" << c.detail << "]";
    out << "\n";
}

std::string safe_file_name(const std::string& s) {
    std::string out;
    for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-') ? ch : '_';
    return out.empty() ? "series" : out;
}

json vec3(const Eigen::Vector3d& v) { return {num(v.x()), num(v.y()), num(v.z())}; }

}  // namespace

void RunConfig::validate() const {
    if (levels < 1) throw ConfigError(fmt("levels must be at least 1, got %d", levels));
    if (jobs < 1) throw ConfigError(fmt("jobs must be at least 1, got %d", jobs));
    if (!(tol_scale > 0)) throw ConfigError("tolerance scale must be positive");
    for (double t : {tol.curv_analytic, tol.curv_mesh, tol.gb, tol.orth, tol.burg_analytic, tol.burg_mesh, tol.ineq,
                     tol.flux, tol.coarea, tol.grad_floor_rel})
        if (!(t > 0) || !std::isfinite(t)) throw ConfigError("tolerances must be positive and finite");
    if (out_dir.empty()) throw ConfigError("output directory must not be empty");
}

ScenarioConfig RunConfig::scenario_config() const {
    ScenarioConfig c;
    c.params = params;
    c.levels = levels;
    c.seed = seed;
    c.jobs = jobs;
    c.tol = tol;
    return c;
}

std::string environment_stamp() {
    json e;
    e["tool"] = "wbkit";
    e["version"] = "0.1.0";
#if defined(__clang__)
    e["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    e["compiler"] = std::string("gcc ") + __VERSION__;
#else
    e["compiler"] = "unknown";
#endif
    e["cxx_standard"] = static_cast<long>(__cplusplus);
    e["eigen"] = fmt("%d.%d.%d", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
#ifdef NDEBUG
    e["assertions"] = false;
#else
    e["assertions"] = true;
#endif
#if defined(__linux__)
    e["platform"] = "linux";
#elif defined(__APPLE__)
    e["platform"] = "macos";
#else
    e["platform"] = "other";
#endif
    return e.dump();
}

std::string report_json(const ScenarioReport& rep, const RunConfig& cfg) {
    json j;
    j["scenario"] = rep.scenario;
    j["environment"] = json::parse(environment_stamp());
    json params = json::object();
    for (const auto& [k, v] : cfg.params) params[k] = v;
    j["config"] = {{"scenario", cfg.scenario}, {"params", params}, {"levels", cfg.levels},
                   {"seed", cfg.seed}, {"tol_scale", cfg.tol_scale}, {"tolerances", tolerances_json(cfg.tol)}};
    int info = 0;
    json checks = json::array();
    for (const Check& c : rep.checks) {
        checks.push_back(check_json(c));
        info += c.informational;
    }
    j["checks"] = std::move(checks);
    j["summary"] = {{"checks", rep.checks.size()}, {"failed", rep.failures()}, {"informational", info},
                    {"all_hold", rep.all_hold()}};
    json series = json::array();
    for (const Series& s : rep.series)
        series.push_back({{"name", s.name}, {"file", safe_file_name(s.name) + ".csv"}, {"columns", s.columns},
                          {"rows", s.rows.size()}});
    j["series"] = std::move(series);
    return j.dump(2) + "\n";
}

std::string series_csv(const Series& s) {
    std::string out;
    for (std::size_t i = 0; i < s.columns.size(); ++i) out += (i ? "," : "") + s.columns[i];
    out += "\n";
    char buf[32];
    for (const auto& row : s.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out += (i ? "," : "") + std::string(buf);
        }
        out += "\n";
    }
    return out;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioReport rep = run_scenario(cfg.scenario, cfg.scenario_config());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto dir = cfg.out_dir / cfg.scenario;
    write_text_file(dir / "report.json", report_json(rep, cfg));
    for (const Series& s : rep.series) write_text_file(dir / (safe_file_name(s.name) + ".csv"), series_csv(s));
    json timing = {{"scenario", cfg.scenario}, {"jobs", cfg.jobs}, {"seconds", seconds}};
    write_text_file(dir / "timings.json", timing.dump(2) + "\n");

    for (const Check& c : rep.checks) print_check(out, c);
    out << fmt("%s: %zu checks, %d failed, %.2f s; report in %s\n", cfg.scenario.c_str(), rep.checks.size(),
               rep.failures(), seconds, dir.string().c_str());
    return rep.all_hold() ? 0 : 1;
}

int cmd_loop_check(const std::filesystem::path& file, const Tolerances& tol, std::ostream& out,
                   const std::filesystem::path& out_dir) {
    const FramedLoop loop = to_framed_loop(parse_loop_json(read_text_file(file)));

    const bool ext = is_extendable(loop);
    const IsoCheck iso = check_iso_inequality(loop, tol.ineq);
    const BurgersResult b = burgers_vector(loop);
    const BurgersBound bb = check_burgers_bound(loop, tol.ineq);
    const double iso_gap = iso.rhs != 0 ? std::abs(iso.lhs - iso.rhs) / std::abs(iso.rhs) : std::abs(iso.lhs);
    const double burg_gap = bb.rhs != 0 ? std::abs(bb.lhs - bb.rhs) / std::abs(bb.rhs) : std::abs(bb.lhs);
    const bool iso_eq = iso_gap < 1e-6, burg_eq = burg_gap < 1e-6;

    out << fmt("loop %s: %d samples, %s, length %.10g\n", file.filename().string().c_str(), loop.size(),
               loop.mode() == FramedLoop::Mode::Smooth ? "smooth" : "polyline", loop.length());
    out << fmt("  extendable           %s\n", ext ? "yes" : "no");
    out << fmt("  total geodesic curv  %.10g\n", iso.kappa_total);
    out << fmt("  normal turning       %.10g\n", bb.lhs);
    out << fmt("  iso inequality       %.10g >= %.10g  %s%s (relative gap %.2e)\n", iso.lhs, iso.rhs,
               iso.holds ? "holds" : "FAILS", iso_eq ? ", equality" : "", iso_gap);
    out << fmt("  Burgers vector       |B| = %.10g (dual route %.10g), coords (%.6g, %.6g)\n", b.magnitude,
               b.dual_magnitude, b.coords.x(), b.coords.y());
    out << fmt("  Burgers bound        %.10g >= |B|/L = %.10g  %s%s\n", bb.lhs, bb.rhs, bb.holds ? "holds" : "FAILS",
               burg_eq ? ", equality" : "");

    if (!out_dir.empty()) {
        json j;
        j["file"] = file.filename().string();
        j["samples"] = loop.size();
        j["mode"] = loop.mode() == FramedLoop::Mode::Smooth ? "smooth" : "polyline";
        j["length"] = num(loop.length());
        j["extendable"] = ext;
        j["kappa_total"] = num(iso.kappa_total);
        j["iso"] = {{"lhs", num(iso.lhs)}, {"rhs", num(iso.rhs)}, {"holds", iso.holds}, {"equality", iso_eq},
                    {"relative_gap", num(iso_gap)}};
        j["burgers"] = {{"vector", vec3(b.vector)}, {"magnitude", num(b.magnitude)},
                        {"dual_magnitude", num(b.dual_magnitude)}, {"coords", {num(b.coords.x()), num(b.coords.y())}}};
        j["burgers_bound"] = {{"lhs", num(bb.lhs)}, {"rhs", num(bb.rhs)}, {"holds", bb.holds}, {"equality", burg_eq}};
        j["environment"] = json::parse(environment_stamp());
        write_text_file(out_dir / "loop_report.json", j.dump(2) + "\n");
    }
    return iso.holds && bb.holds ? 0 : 1;
}

int cmd_solve(const std::filesystem::path& file, const Tolerances& tol, const std::filesystem::path& out_dir,
              std::ostream& out) {
    const ProblemFile pf = parse_problem_json(read_text_file(file));
    const PoissonProblem& p = pf.problem;
    const int holes = p.mesh.num_holes();

    std::vector<Check> checks;
    PotentialSolution sol;
    bool solved = false;
    try {
        sol = solve_floating_potential(p);
        solved = true;
    } catch (const Error& e) {
        checks.push_back(error_check("floating-potential solve", "solve", e));
    }

    json j;
    j["file"] = file.filename().string();
    j["metric"] = pf.metric_kind;
    j["vertices"] = p.mesh.num_vertices();
    j["elements"] = p.mesh.num_triangles();
    if (solved) {
        checks.push_back(boolean_check("CG converged", "solve.cg", sol.converged,
                                       fmt("%d iterations, residual %.3e", sol.iterations, sol.residual)));
        for (int i = 0; i < holes; ++i)
            checks.push_back(closeness_check(fmt("flux through hole %d equals its charge", i + 1), "solve.flux",
                                             sol.flux[i], p.charge(i), tol.flux));
        const double norm = h1mc_dual_norm(sol);
        if (pf.expect_dual_norm_sq)
            checks.push_back(closeness_check("dual norm squared matches expected", "solve.dual_norm", norm * norm,
                                             *pf.expect_dual_norm_sq,
                                             pf.expect_rel_tol * Tolerances::env_scale()));
        j["dual_norm"] = num(norm);
        j["dual_norm_sq"] = num(norm * norm);
        j["energy"] = num(sol.energy);
        j["l1mc_norm"] = num(l1mc_norm(p));
        j["iterations"] = sol.iterations;
        j["residual"] = num(sol.residual);
        j["converged"] = sol.converged;
        json hs = json::array();
        std::string flux = "hole,charge,flux,weak_flux,potential\n";
        for (int i = 0; i < holes; ++i) {
            hs.push_back({{"hole", i + 1}, {"charge", num(p.charge(i))}, {"flux", num(sol.flux[i])},
                          {"weak_flux", num(sol.weak_flux[i])}, {"potential", num(sol.c[i])}});
            flux += fmt("%d,%.17g,%.17g,%.17g,%.17g\n", i + 1, p.charge(i), sol.flux[i], sol.weak_flux[i], sol.c[i]);
        }
        j["holes"] = std::move(hs);
        j["c"] = sol.c;
        j["flux"] = sol.flux;
        write_text_file(out_dir / "u.csv", u_csv(p.mesh, sol.u));
        write_text_file(out_dir / "flux.csv", flux);
    }
    json cj = json::array();
    for (const Check& c : checks) cj.push_back(check_json(c));
    j["checks"] = std::move(cj);
    j["environment"] = json::parse(environment_stamp());
    write_text_file(out_dir / "solution.json", j.dump(2) + "\n");

    out << fmt("problem %s: %d vertices, %d elements, %d holes, %s metric\n", file.filename().string().c_str(),
               p.mesh.num_vertices(), p.mesh.num_triangles(), holes, pf.metric_kind.c_str());
    if (solved) {
        out << fmt("  dual norm %.10g (squared %.10g), CG %d iterations\n", h1mc_dual_norm(sol),
                   std::pow(h1mc_dual_norm(sol), 2), sol.iterations);
        for (int i = 0; i < holes; ++i)
            out << fmt("  hole %d: charge %.10g, flux %.10g, potential %.10g\n", i + 1, p.charge(i), sol.flux[i], sol.c[i]);
    }
    bool ok = true;
    for (const Check& c : checks) {
        print_check(out, c);
        ok = ok && (c.holds || c.informational);
    }
    out << "  output in " << out_dir.string() << "\n";
    return ok ? 0 : 1;
}

// ---- bundled inputs ----------------------------------------------------------

const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names{"cap_loop",     "trivial_loop",  "double_circle_loop",
                                                "cone_loop",    "polyline_loop", "cone_problem",
                                                "zero_problem", "dipole_pair_problem"};
    return names;
}

std::string fixture_text(const std::string& name) {
    if (name == "cap_loop") return loop_to_json(loop_samples(cap_rim_loop(kPi / 3, 1024)));
    if (name == "cone_loop") return loop_to_json(loop_samples(cone_frame_loop(0.75, 0.5, 1024)));
    if (name == "trivial_loop" || name == "double_circle_loop" || name == "polyline_loop") {
        // unit circle with the constant normal e_z; the double version wraps twice
        const int n = 256, turns = name == "double_circle_loop" ? 2 : 1;
        LoopSamples s;
        for (int k = 0; k < n; ++k) {
            double t = 2 * kPi * k / n;
            if (name == "polyline_loop") t += 0.6 * std::sin(t) / n * 2 * kPi;  // uneven spacing
            s.phi.push_back(t);
            s.gamma.emplace_back(std::cos(turns * t), std::sin(turns * t), 0.0);
            s.normal.emplace_back(0.0, 0.0, 1.0);
        }
        return loop_to_json(s);
    }
    if (name == "cone_problem") {
        const double a = kPi / 2, c = 1 - a / (2 * kPi);
        json j;
        j["mesh"] = {{"generator", "annulus"}, {"r_in", 0.05}, {"r_out", 1.0}, {"n_r", 32}, {"grading", "log"}};
        j["metric"] = {{"kind", "cone"}, {"alpha", a}};
        j["hole_charges"] = {a};
        j["expect"] = {{"dual_norm_sq", a * a / (2 * kPi * c) * std::log(20.0)}, {"rel_tol", 1e-2}};
        return j.dump(1) + "\n";
    }
    if (name == "zero_problem") {
        json j;
        j["mesh"] = json::parse(mesh_to_json(meshgen::annulus({0, 0}, 0.2, 1.0, 4, 16, RadialGrading::Uniform)));
        j["metric"] = {{"kind", "euclidean"}};
        j["source"] = 0.0;
        j["hole_charges"] = {0.0};
        j["expect"] = {{"dual_norm_sq", 0.0}, {"rel_tol", 1e-12}};
        return j.dump(1) + "\n";
    }
    if (name == "dipole_pair_problem") {
        const double r0 = 1, eps = 0.5, a = 2 * std::asin(eps / (4 * r0));
        json j;
        j["mesh"] = {{"generator", "perforated_disc"},
                     {"R", 20.0},
                     {"holes", {{{"center", {-r0, 0.0}}, {"radius", r0 / 2}}, {{"center", {r0, 0.0}}, {"radius", r0 / 2}}}},
                     {"h_min", r0 / 192},
                     {"h_max", 20.0 / 16}};
        j["metric"] = {{"kind", "euclidean"}};
        j["hole_charges"] = {a, -a};
        return j.dump(1) + "\n";
    }
    throw ConfigError("unknown fixture '" + name + "'");
}

}  // namespace wb
