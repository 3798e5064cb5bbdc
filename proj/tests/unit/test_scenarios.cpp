#include <doctest.h>

#include "wbkit/errors.hpp"
#include "wbkit/scenarios.hpp"

#include <cmath>
#include <numbers>

using namespace wb;
using std::numbers::pi;

namespace {

ConeSpec cone(double alpha, int n_r = 16) {
    ConeSpec s;
    s.alpha = alpha;
    s.n_r = n_r;
    return s;
}

const Check* find(const ScenarioReport& r, const std::string& needle) {
    for (const Check& c : r.checks)
        if (c.name.find(needle) != std::string::npos) return &c;
    return nullptr;
}

}  // namespace

TEST_CASE("cone geometry") {
    SUBCASE("zero deficit is the flat annulus") {
        const ConeGeometry g = build_cone(cone(0.0));
        CHECK_FALSE(g.embedded.has_value());
        for (const Vec2& p : {Vec2(0.3, 0.2), Vec2(-0.7, 0.1)})
            CHECK((g.metric.eval(p) - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("quarter deficit has eigenvalues 1 and (3r/4)^2 in polar form") {
        const ConeGeometry g = build_cone(cone(pi / 2));
        for (double r : {0.1, 0.5, 0.9}) {
            // on the x axis, ∂φ = r ∂y
            const Mat2 m = g.metric.eval(Vec2(r, 0));
            CHECK(m(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(r * r * m(1, 1) == doctest::Approx(0.75 * r * 0.75 * r).epsilon(1e-14));
            CHECK(std::abs(m(0, 1)) < 1e-14);
        }
        REQUIRE(g.embedded.has_value());
        // the embedded immersion pulls back to the same metric
        const Vec2 p(0.31, -0.42);
        CHECK((g.embedded->geometry_at(p).g - g.metric.eval(p)).cwiseAbs().maxCoeff() < 1e-13);
        CHECK(std::abs(g.embedded->geometry_at(p).K) < 1e-12);
    }
    SUBCASE("invalid specs") {
        CHECK_THROWS_AS(build_cone(cone(2 * pi)), ConfigError);
        ConeSpec s = cone(1.0);
        s.r0 = -0.05;
        CHECK_THROWS_AS(build_cone(s), ConfigError);
        s.r0 = 2.0;
        CHECK_THROWS_AS(build_cone(s), ConfigError);
    }
}

TEST_CASE("cone bounds in closed form") {
    const double L = std::log(20.0);
    const ConeSpec q = cone(pi / 2);
    // (4π − π/2)(π/2)/(3π/2) = 7π/6
    CHECK(cone_curvature_bound(q) == doctest::Approx(7 * pi / 6 * L).epsilon(1e-14));
    // sin²(π/4) = 1/2
    CHECK(cone_burgers_bound(q) == doctest::Approx(4 * 0.5 / std::pow(1.5 * pi, 3) * L).epsilon(1e-14));
    // the embedded cone: principal curvature √(1−c²)/(c r) along the circles
    CHECK(cone_bending_exact(q) == doctest::Approx(2 * pi * (7.0 / 16) / 0.75 * L).epsilon(1e-14));
    // every embedded cone meets the curvature bound with equality
    for (double a : {0.3, pi / 4, pi, 5.0}) CHECK(cone_bending_exact(cone(a)) == doctest::Approx(cone_curvature_bound(cone(a))));
    const ConeSpec z = cone(0.0);
    CHECK(cone_curvature_bound(z) == 0.0);
    CHECK(cone_burgers_bound(z) == 0.0);
    CHECK(cone_h1_exact(z) == 0.0);
    CHECK(cone_bending_exact(z) == 0.0);
}

TEST_CASE("cone frames carry the closed-form Burgers vector") {
    for (double alpha : {-pi, -pi / 3, pi / 2}) {
        const double c = 1 - alpha / (2 * pi);
        for (double r : {0.1, 0.7}) {
            const FramedLoop L = cone_frame_loop(c, r);
            const double expect = 2 * r * std::abs(std::sin(pi * c));
            CAPTURE(alpha);
            CHECK(std::abs(burgers_vector(L).magnitude - expect) < 1e-7 * expect);
            CHECK(std::abs(burgers_vector(L).dual_magnitude - expect) < 1e-7 * expect);
            // an isometric immersion of the cone: circumference 2πcr, geodesic curvature 1/r
            CHECK(L.length() == doctest::Approx(2 * pi * c * r).epsilon(1e-10));
            CHECK(total_geodesic_curvature(L) == doctest::Approx(2 * pi * c).epsilon(1e-9));
        }
    }
}

TEST_CASE("cone scenario on a coarse mesh") {
    ConeSpec s = cone(pi / 2, 16);
    s.chain_n_r = 48;
    Tolerances tol;
    const ScenarioReport r = run_cone_verification(s, {pi / 2}, 2, tol, 2);
    for (const Check& c : r.checks) {
        CAPTURE(c.name);
        CAPTURE(c.detail);
        CHECK(c.holds);
    }
    REQUIRE(r.series.size() == 2);
    CHECK(r.series[0].rows.size() == 2);  // one row per level
    CHECK(find(r, "chain step 6") != nullptr);
    CHECK(find(r, "primal route") != nullptr);
}

TEST_CASE("E-cones") {
    SUBCASE("k = 1 is isometric to the -2pi cone with zero bending") {
        const ImmersedChart f = build_econe(1, 0.05, 1.0, 12);
        const Vec2 p(0.4, 0.3);
        const Mat2 g = f.geometry_at(p).g;
        // polar components: g_rr = 1, g_φφ = (2r)²
        const double r = p.norm();
        const Vec2 er = p / r, ephi(-p.y(), p.x());
        CHECK(er.dot(g * er) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(ephi.dot(g * ephi) == doctest::Approx(4 * r * r).epsilon(1e-13));
        CHECK(bending_energy(f, Quadrature::Polar) < 1e-20);
    }
    SUBCASE("parity of extendability") {
        const ScenarioReport r = run_econe_verification({0, 1, 2, 3}, 0.05, 1.0, Tolerances{});
        for (const Check& c : r.checks) {
            CAPTURE(c.name);
            CAPTURE(c.detail);
            CHECK(c.holds);
        }
        const Series& s = r.series.at(0);
        REQUIRE(s.rows.size() == 4);
        CHECK(s.rows[0][3] == 1.0);
        CHECK(s.rows[1][3] == 0.0);
        CHECK(s.rows[2][3] == 1.0);
        CHECK(s.rows[3][3] == 0.0);
    }
}

TEST_CASE("dipole metric") {
    DipoleSpec s;
    SUBCASE("Burgers magnitude and perimeter") {
        const DipoleGeometry g = build_dipole(s);
        for (double r : {2 * s.r0, s.R / 2, 0.9 * s.R}) {
            const CurveInChart c = CurveInChart::circle({0, 0}, r, 1024);
            CHECK(std::abs(burgers_intrinsic(g.metric, c).magnitude - s.eps) < 1e-6 * s.eps);
            CHECK(curve_length(g.metric, c) == doctest::Approx(2 * pi * r).epsilon(1e-12));
        }
    }
    SUBCASE("zero dislocation is the flat annulus") {
        s.eps = 0.0;
        const DipoleGeometry g = build_dipole(s);
        CHECK((g.metric.eval(Vec2(3.0, -4.0)) - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(dipole_improved_bound(s) < 1e-25);
        CHECK(dipole_naive_bound(s) < 1e-25);
    }
    SUBCASE("invalid specs") {
        s.eps = 1.5;
        CHECK_THROWS_AS(build_dipole(s), ConfigError);
        s.eps = 0.5;
        s.r0 = -1;
        CHECK_THROWS_AS(build_dipole(s), ConfigError);
    }
    SUBCASE("candidate frames match the intrinsic data") {
        for (double r : {2.0, 7.0}) {
            const FramedLoop L = dipole_candidate_loop(s, r);
            CHECK(L.length() == doctest::Approx(2 * pi * r).epsilon(1e-12));
            CHECK(burgers_vector(L).magnitude == doctest::Approx(s.eps).epsilon(1e-6));
            CHECK(normal_turning(L) >= s.eps / (2 * pi * r));
            CHECK(is_extendable(L) == is_extendable(dipole_candidate_loop(s, r, 1024)));
        }
    }
}

TEST_CASE("dipole bounds") {
    DipoleSpec s;
    // both leaves are exact circles of length 2πr with |B| = ε, so the improved
    // bound is ε²/(64π³r0²)·log(R/2r0) and the naive one ε²/(16π³)(1/r0² − 1/R²)
    for (double q : {10.0, 20.0, 40.0}) {
        s.R = q * s.r0;
        const double k = s.eps * s.eps / (64 * pi * pi * pi * s.r0 * s.r0);
        CHECK(dipole_improved_bound(s) == doctest::Approx(k * std::log(q / 2)).epsilon(1e-8));
        CHECK(dipole_naive_bound(s) ==
              doctest::Approx(s.eps * s.eps / (16 * pi * pi * pi) * (1 / (s.r0 * s.r0) - 1 / (s.R * s.R))).epsilon(1e-6));
    }
    CHECK(dipole_scaling_slope(s) == doctest::Approx(0.25 / (64 * pi * pi * pi)));
}

TEST_CASE("dipole pair energy stays bounded") {
    const double r0 = 1.0, alpha = 2 * std::asin(0.5 / 4);
    const double e10 = dipole_pair_h1(alpha, r0, 10, r0 / 12);
    const double e20 = dipole_pair_h1(alpha, r0, 20, r0 / 12);
    const double e40 = dipole_pair_h1(alpha, r0, 40, r0 / 12);
    CHECK(e40 / e20 < 1.1);
    // a grounded dipole loses energy like 1/R², so successive increments shrink
    CHECK(std::abs(e40 - e20) < std::abs(e20 - e10));
    // compare a single charge, whose energy grows like log R
    CHECK(e40 / e10 < 1.05);
}

TEST_CASE("spherical caps") {
    CapSpec s;
    s.theta0 = 2.0;
    CHECK_THROWS_AS(build_cap(s), ConfigError);
    s.theta0 = pi / 3;
    const ImmersedChart f = build_cap(s);
    CHECK(f.geometry_at(Vec2(0.2, 0.1)).K == doctest::Approx(1.0).epsilon(1e-12));
    const IsoCheck iso = check_iso_inequality(cap_rim_loop(s.theta0), 1e-3);
    CHECK(iso.lhs == doctest::Approx(4 * pi * pi * 0.75).epsilon(1e-12));
    CHECK(iso.rhs == doctest::Approx(iso.lhs).epsilon(1e-10));
    const ScenarioReport r = run_cap_verification({pi / 6, pi / 2}, 4000, 5, Tolerances{}, 2);
    for (const Check& c : r.checks) {
        CAPTURE(c.name);
        CHECK(c.holds);
    }
}

TEST_CASE("linearized inequality on closed-form graphs") {
    const auto bowl = linearized_inequality(graph_bowl(), 1e-3);
    // |D²u| = √2 on the circle, det D²u = 1 on the disc
    CHECK(bowl.lhs == doctest::Approx(8 * pi * pi).epsilon(1e-12));
    CHECK(bowl.rhs == doctest::Approx(4 * pi * pi).epsilon(1e-12));
    CHECK(bowl.holds);
    const auto lin = linearized_inequality(graph_linear(), 1e-3);
    CHECK(lin.lhs == 0.0);
    CHECK(lin.rhs == 0.0);
    CHECK(lin.holds);
    const auto sad = linearized_inequality(graph_saddle(), 1e-3);
    // det D²u = −1 over area π
    CHECK(sad.lhs == doctest::Approx(std::pow(2 * pi * std::sqrt(2.0), 2)).epsilon(1e-12));
    CHECK(sad.det_integral == doctest::Approx(-pi).epsilon(1e-12));
    CHECK(sad.rhs == doctest::Approx(4 * pi * pi).epsilon(1e-12));
    CHECK(sad.holds);
    CHECK_THROWS_AS(linearized_inequality(graph_cone_tip(), 1e-3), NotC2);
}

TEST_CASE("expansion orders of the graph linearization") {
    const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
    const auto fit = expansion_fit(graph_bowl(), eps);
    REQUIRE_FALSE(fit.degenerate);
    // bowl: K Vol = ε(1+εr²)^{-3/2}, so the remainder is (3/2)ε²∫r² + O(ε³) = (3π/4)ε²
    CHECK(fit.area_error.back() == doctest::Approx(0.75 * pi * 1e-8).epsilon(1e-3));
    CHECK(std::abs(fit.area_slope - 2.0) < 0.05);
    CHECK(std::abs(fit.boundary_slope - 1.5) < 0.05);
    CHECK(expansion_fit(graph_linear(), eps).degenerate);
    CHECK_THROWS_AS(expansion_fit(graph_cone_tip(), eps), NotC2);
}

TEST_CASE("degree and winding on graph patches") {
    const ScenarioReport r = run_degree_winding({graph_bowl(), graph_saddle(), graph_random_cubic(3)}, 30, 11);
    for (const Check& c : r.checks) {
        CAPTURE(c.name);
        CAPTURE(c.detail);
        CHECK(c.holds);
    }
}

TEST_CASE("scenario dispatch") {
    ScenarioConfig cfg;
    CHECK_THROWS_AS(run_scenario("torus", cfg), ConfigError);
    cfg.params["r0"] = "-0.05";
    CHECK_THROWS_AS(run_scenario("cone", cfg), ConfigError);
    cfg.params = {{"colour", "red"}};
    CHECK_THROWS_AS(run_scenario("cap", cfg), ConfigError);
    cfg.params = {{"theta", "abc"}};
    CHECK_THROWS_AS(run_scenario("cap", cfg), ConfigError);
    cfg.params = {};
    cfg.levels = 0;
    CHECK_THROWS_AS(run_scenario("cone", cfg), ConfigError);

    // a module error becomes a failed check, not an exception
    ScenarioConfig tip;
    tip.params = {{"u", "tip"}};
    const ScenarioReport t = run_scenario("graph", tip);
    CHECK_FALSE(t.all_hold());
    const Check* c = find(t, "linearized inequality");
    REQUIRE(c != nullptr);
    CHECK(c->detail.find("NotC2") != std::string::npos);

    // same config, same seed: identical numbers
    ScenarioConfig a;
    a.params = {{"theta", "0.7"}, {"n_mc", "3000"}};
    a.seed = 9;
    const ScenarioReport r1 = run_scenario("cap", a), r2 = run_scenario("cap", a);
    REQUIRE(r1.checks.size() == r2.checks.size());
    for (std::size_t i = 0; i < r1.checks.size(); ++i) {
        CHECK(r1.checks[i].lhs == r2.checks[i].lhs);
        CHECK(r1.checks[i].detail == r2.checks[i].detail);
    }
    CHECK(scenario_ids().size() == 5);
}
