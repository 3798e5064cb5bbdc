#include <doctest.h>

#include "wbkit/errors.hpp"
#include "wbkit/io.hpp"
#include "wbkit/report.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

using namespace wb;
using std::numbers::pi;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kFixtures = WBKIT_FIXTURE_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wbkit_unit_" + name);
    fs::remove_all(p);
    return p;
}

json load(const fs::path& p) { return json::parse(read_text_file(p)); }

}  // namespace

TEST_CASE("bundled fixtures match their generators") {
    for (const auto& name : fixture_names()) {
        CAPTURE(name);
        CHECK(read_text_file(kFixtures / (name + ".json")) == fixture_text(name));
    }
    CHECK_THROWS_AS(fixture_text("nope"), ConfigError);
}

TEST_CASE("loop files") {
    SUBCASE("malformed JSON is a ParseError") {
        CHECK_THROWS_AS(parse_loop_json("{\"gamma\": [1, 2"), ParseError);
        CHECK_THROWS_AS(parse_loop_json("[1, 2]"), ParseError);
        CHECK_THROWS_AS(parse_loop_json("{\"gamma\": [[1,0,0]]}"), ParseError);
        CHECK_THROWS_AS(parse_loop_json("{\"gamma\": [[1,0]], \"normal\": [[0,0,1]]}"), ParseError);
    }
    SUBCASE("invariant violations are listed per field") {
        LoopSamples s;
        for (int k = 0; k < 8; ++k) {
            const double t = 2 * pi * k / 8;
            s.phi.push_back(t);
            s.gamma.emplace_back(std::cos(t), std::sin(t), 0);
            s.normal.emplace_back(0, 0, k == 3 ? 2.0 : 1.0);
        }
        s.phi[5] = s.phi[4];
        try {
            to_framed_loop(s);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            const std::string what = e.what();
            CHECK(what.find("normal[3]") != std::string::npos);
            CHECK(what.find("phi[5]") != std::string::npos);
        }
    }
    SUBCASE("round trip keeps every sample") {
        const LoopSamples a = parse_loop_json(fixture_text("cone_loop"));
        const LoopSamples b = parse_loop_json(loop_to_json(a));
        REQUIRE(a.gamma.size() == b.gamma.size());
        for (std::size_t k = 0; k < a.gamma.size(); ++k) {
            CHECK(a.gamma[k] == b.gamma[k]);
            CHECK(a.normal[k] == b.normal[k]);
            CHECK(a.phi[k] == b.phi[k]);
        }
    }
}

TEST_CASE("loop-check on bundled loops") {
    const fs::path out = scratch("loop");
    std::ostringstream log;
    SUBCASE("cap rim attains the iso inequality") {
        CHECK(cmd_loop_check(kFixtures / "cap_loop.json", Tolerances{}, log, out) == 0);
        const json r = load(out / "loop_report.json");
        CHECK(r["extendable"] == true);
        CHECK(r["iso"]["equality"] == true);
        // 2 sinθ|sin(π cosθ)|/cosθ at θ = π/3
        CHECK(r["burgers"]["magnitude"].get<double>() == doctest::Approx(2 * std::sqrt(3.0)).epsilon(1e-9));
    }
    SUBCASE("trivial frame is extendable") {
        CHECK(cmd_loop_check(kFixtures / "trivial_loop.json", Tolerances{}, log, out) == 0);
        CHECK(load(out / "loop_report.json")["extendable"] == true);
    }
    SUBCASE("doubled circle is not") {
        CHECK(cmd_loop_check(kFixtures / "double_circle_loop.json", Tolerances{}, log, out) == 0);
        CHECK(load(out / "loop_report.json")["extendable"] == false);
    }
    SUBCASE("unevenly sampled circle goes through the polyline path") {
        CHECK(cmd_loop_check(kFixtures / "polyline_loop.json", Tolerances{}, log, out) == 0);
        const json r = load(out / "loop_report.json");
        CHECK(r["mode"] == "polyline");
        CHECK(r["extendable"] == true);
    }
    SUBCASE("missing and malformed files") {
        CHECK_THROWS_AS(cmd_loop_check(out / "absent.json", Tolerances{}, log), ConfigError);
        write_text_file(out / "bad.json", "{\"gamma\": ");
        CHECK_THROWS_AS(cmd_loop_check(out / "bad.json", Tolerances{}, log), ParseError);
    }
}

TEST_CASE("mesh files") {
    const FCDomainMesh m = meshgen::annulus({0, 0}, 0.3, 1.0, 3, 12);
    const FCDomainMesh r = parse_mesh_json(mesh_to_json(m));
    CHECK(r.vertices() == m.vertices());
    CHECK(r.triangles() == m.triangles());
    CHECK(r.boundary_loops() == m.boundary_loops());

    const FCDomainMesh g = parse_mesh_json(R"({"generator": "annulus", "r_in": 0.3, "r_out": 1, "n_r": 3, "n_phi": 12})");
    CHECK(g.num_vertices() == m.num_vertices());
    CHECK_THROWS_AS(parse_mesh_json(R"({"generator": "torus"})"), ParseError);
    CHECK_THROWS_AS(parse_mesh_json(R"({"vertices": [[0,0],[1,0],[0,1]], "triangles": [[0,1,7]]})"), ParseError);
    // a mesh that fails validation is reported as bad input
    CHECK_THROWS_AS(parse_mesh_json(R"({"vertices": [[0,0],[1,0],[2,0]], "triangles": [[0,1,2]]})"), ParseError);
}

TEST_CASE("problem files") {
    const std::string annulus = R"("mesh": {"generator": "annulus", "r_in": 0.2, "r_out": 1, "n_r": 4, "n_phi": 16})";
    CHECK_THROWS_AS(parse_problem_json("{" + annulus + R"(, "source": [1, 2]})"), ParseError);
    CHECK_THROWS_AS(parse_problem_json("{" + annulus + R"(, "metric": {"kind": "hyperbolic"}})"), ParseError);
    CHECK_THROWS_AS(parse_problem_json("{" + annulus + R"(, "hole_charges": [1, 2]})"), ParseError);
    CHECK_THROWS_AS(parse_problem_json("{" + annulus + R"(, "source": "analytic:nope"})"), ParseError);
    CHECK_THROWS_AS(
        parse_problem_json(R"({"mesh": {"generator": "disc", "radius": 1, "n_r": 3, "n_phi": 12}, "metric": {"kind": "cone", "alpha": 1}})"),
        ParseError);
    CHECK_THROWS_AS(parse_problem_json("{" + annulus + R"(, "metric": {"kind": "cone", "alpha": 7}})"), ParseError);

    const ProblemFile f = parse_problem_json("{" + annulus + R"(, "source": "analytic:bump", "hole_charges": [0.5]})");
    CHECK(f.metric_kind == "euclidean");
    REQUIRE(f.problem.source.size() == static_cast<std::size_t>(f.problem.mesh.num_triangles()));
    CHECK(f.problem.source[0] == doctest::Approx(std::exp(-f.problem.mesh.barycenter(0).squaredNorm())));
    CHECK(f.problem.charge(0) == 0.5);
}

TEST_CASE("solve on bundled problems") {
    const fs::path out = scratch("solve");
    std::ostringstream log;
    SUBCASE("cone problem: dual norm within 1% of the closed form") {
        CHECK(cmd_solve(kFixtures / "cone_problem.json", Tolerances{}, out, log) == 0);
        const json r = load(out / "solution.json");
        const double a = pi / 2, c = 0.75;
        CHECK(std::abs(r["dual_norm_sq"].get<double>() / (a * a / (2 * pi * c) * std::log(20.0)) - 1) < 1e-2);
        CHECK(fs::exists(out / "u.csv"));
        CHECK(fs::exists(out / "flux.csv"));
    }
    SUBCASE("zero problem: zero outputs") {
        CHECK(cmd_solve(kFixtures / "zero_problem.json", Tolerances{}, out, log) == 0);
        const json r = load(out / "solution.json");
        CHECK(r["dual_norm"].get<double>() == 0.0);
        CHECK(r["flux"][0].get<double>() == 0.0);
        std::istringstream u(read_text_file(out / "u.csv"));
        std::string line;
        std::getline(u, line);
        CHECK(line == "x,y,u");
        int rows = 0;
        while (std::getline(u, line)) {
            CHECK(std::stod(line.substr(line.rfind(',') + 1)) == 0.0);
            ++rows;
        }
        CHECK(rows == 80);
    }
    SUBCASE("two-hole pair: fluxes return the prescribed charges") {
        CHECK(cmd_solve(kFixtures / "dipole_pair_problem.json", Tolerances{}, out, log) == 0);
        const json r = load(out / "solution.json");
        const double a = 2 * std::asin(0.125);
        CHECK(std::abs(r["flux"][0].get<double>() - a) <= 1e-2 * a);
        CHECK(std::abs(r["flux"][1].get<double>() + a) <= 1e-2 * a);
    }
}

TEST_CASE("verify command") {
    const fs::path out = scratch("verify");
    std::ostringstream log;
    RunConfig cfg;
    cfg.out_dir = out;
    SUBCASE("negative inner radius is a ConfigError") {
        cfg.scenario = "cone";
        cfg.params = {{"r0", "-1"}};
        CHECK_THROWS_AS(cmd_verify(cfg, log), ConfigError);
    }
    SUBCASE("bad run settings are ConfigErrors") {
        cfg.scenario = "econe";
        cfg.levels = 0;
        CHECK_THROWS_AS(cmd_verify(cfg, log), ConfigError);
        cfg.levels = 1;
        cfg.tol.flux = -1;
        CHECK_THROWS_AS(cmd_verify(cfg, log), ConfigError);
    }
    SUBCASE("levels 3 gives a three-row convergence table") {
        cfg.scenario = "cone";
        cfg.params = {{"alpha", "0.7853981633974483"}, {"n_r", "12"}, {"chain_n_r", "16"}};
        cfg.levels = 3;
        cmd_verify(cfg, log);
        const std::string csv = read_text_file(out / "cone" / "cone_convergence.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
        CHECK(csv.rfind("alpha,level,n_r", 0) == 0);
    }
    SUBCASE("reports are byte-identical and exit codes follow the checks") {
        cfg.scenario = "econe";
        CHECK(cmd_verify(cfg, log) == 0);
        const std::string first = read_text_file(out / "econe" / "report.json");
        CHECK(fs::exists(out / "econe" / "timings.json"));
        CHECK(fs::exists(out / "econe" / "econe.csv"));
        cfg.jobs = 3;
        CHECK(cmd_verify(cfg, log) == 0);
        CHECK(read_text_file(out / "econe" / "report.json") == first);
        const json r = json::parse(first);
        CHECK(r["summary"]["failed"] == 0);
        CHECK(r["config"]["scenario"] == "econe");
        CHECK_FALSE(r["checks"].empty());
        CHECK(r["checks"][0].contains("anchor"));

        cfg.tol = Tolerances{}.scaled(1e-14);
        CHECK(cmd_verify(cfg, log) == 1);
    }
    SUBCASE("module errors surface as failed named checks") {
        cfg.scenario = "graph";
        cfg.params = {{"u", "tip"}};
        CHECK(cmd_verify(cfg, log) == 1);
        const json r = load(out / "graph" / "report.json");
        bool named = false;
        for (const auto& c : r["checks"])
            if (!c["holds"].get<bool>() && c["detail"].get<std::string>().find("NotC2") != std::string::npos) named = true;
        CHECK(named);
    }
}

TEST_CASE("report serialisation") {
    ScenarioReport rep;
    rep.scenario = "x";
    rep.checks.push_back(error_check("broken", "k", std::runtime_error("boom")));
    rep.checks.push_back(inequality_check("fine", "k", 2, 1, 1e-3));
    rep.series.push_back({"a b", {"p", "q"}, {{1.0, 0.1}, {2.0, 1e-300}}});
    RunConfig cfg;
    cfg.scenario = "x";
    const json j = json::parse(report_json(rep, cfg));
    CHECK(j["checks"][0]["lhs"].is_null());
    CHECK(j["summary"]["failed"] == 1);
    CHECK(j["series"][0]["file"] == "a_b.csv");
    CHECK(series_csv(rep.series[0]) == "p,q\n1,0.10000000000000001\n2,1e-300\n");
    CHECK(report_json(rep, cfg) == report_json(rep, cfg));
}
