#include <doctest.h>

#include "wbkit/errors.hpp"
#include "wbkit/foliation.hpp"

#include <cmath>
#include <numbers>

using namespace wb;
using std::numbers::pi;

namespace {

using T2 = Taylor2;
using Map = ImmersedChart::AnalyticMap;

MetricField cone_metric(double c) {
    return MetricField::from_taylor(
        [c](const T2& x, const T2& y) {
            const T2 r2 = x * x + y * y;
            return std::array<T2, 3>{(x * x + c * c * y * y) / r2, (1.0 - c * c) * x * y / r2,
                                     (y * y + c * c * x * x) / r2};
        },
        {Vec2(0.5, 0), Vec2(0, 1), Vec2(-0.05, 0)}, 2.0);
}

int n_phi_for(int n_r, double r0, double R) { return static_cast<int>(std::lround(2 * pi * n_r / std::log(R / r0))); }

PoissonProblem cone_problem(double alpha, double r0, double R, int n_r) {
    PoissonProblem p;
    p.mesh = meshgen::annulus({0, 0}, r0, R, n_r, n_phi_for(n_r, r0, R));
    p.metric = cone_metric(1 - alpha / (2 * pi));
    p.hole_charges = {alpha};
    return p;
}

Map cone_map(double c) {
    const double s = std::sqrt(1 - c * c);
    return [c, s](const T2& x, const T2& y) { return std::array<T2, 3>{c * x, c * y, s * sqrt(x * x + y * y)}; };
}

ImmersedChart embedded_cone(double alpha, double r0, double R, int n_r) {
    return ImmersedChart::analytic(meshgen::annulus({0, 0}, r0, R, n_r, n_phi_for(n_r, r0, R)),
                                   cone_map(1 - alpha / (2 * pi)), ImmersedChart::PolarDomain{{0, 0}, r0, R});
}

ImmersedChart flat_annulus(double r0, double R, int n_r) {
    Map f = [](const T2& x, const T2& y) { return std::array<T2, 3>{x, y, T2(0.0)}; };
    return ImmersedChart::analytic(meshgen::annulus({0, 0}, r0, R, n_r, n_phi_for(n_r, r0, R)), f,
                                   ImmersedChart::PolarDomain{{0, 0}, r0, R});
}

ImmersedChart cap(double theta0, int n_r, int n_phi) {
    const double Rc = std::tan(theta0 / 2);
    Map f = [](const T2& x, const T2& y) {
        const T2 D = 1.0 + x * x + y * y;
        return std::array<T2, 3>{2.0 * x / D, 2.0 * y / D, 2.0 / D - 1.0};
    };
    return ImmersedChart::analytic(meshgen::disc({0, 0}, Rc, n_r, n_phi), f, ImmersedChart::PolarDomain{{0, 0}, 0.0, Rc});
}

}  // namespace

TEST_CASE("cone levels are coordinate circles") {
    const double alpha = pi / 2, c = 1 - alpha / (2 * pi), r0 = 0.05, R = 1.0;
    const auto p = cone_problem(alpha, r0, R, 48);
    const auto s = solve_floating_potential(p);
    const LevelSetField F(p, s);
    for (double frac : {0.1, 0.37, 0.8}) {
        const double lam = frac * s.c[0];
        const auto loops = F.extract(lam);
        REQUIRE(loops.size() == 1);
        const LevelLoop& L = loops[0];
        const double r_exact = R * std::exp(-2 * pi * c * lam / alpha);
        double worst = 0.0;
        for (const Vec2& x : L.curve.points) worst = std::max(worst, std::abs(x.norm() - r_exact) / r_exact);
        CAPTURE(frac);
        CHECK(worst < 1e-2);
        CHECK(L.enclosed_holes == std::vector<int>{1});
        CHECK(L.inside_above);
        CHECK(L.enclosed_total == doctest::Approx(alpha).epsilon(1e-12));
        CHECK(L.curve.orientation() == 1);
        const LeafFlux lf = leaf_flux_identity(F, L, 1e-2);
        CHECK(lf.holds);
        CHECK(lf.bounded);
        CHECK(std::abs(lf.flux - alpha) < 1e-2 * alpha);
    }
    CHECK_THROWS_AS(F.extract(-0.1), LevelOutOfRange);
    CHECK_THROWS_AS(F.extract(s.c[0] + 1), LevelOutOfRange);
    CHECK_THROWS_AS(F.extract(s.c[0]), LevelOutOfRange);
}

TEST_CASE("flat annulus levels are concentric circles") {
    PoissonProblem p;
    p.mesh = meshgen::annulus({0, 0}, 0.1, 1.0, 32, n_phi_for(32, 0.1, 1.0));
    p.metric = MetricField::euclidean();
    p.hole_charges = {1.0};
    const auto s = solve_floating_potential(p);
    const LevelSetField F(p, s);
    for (double lam : {0.05, 0.2, 0.3}) {
        const auto loops = F.extract(lam);
        REQUIRE(loops.size() == 1);
        double lo = 1e9, hi = 0;
        for (const Vec2& x : loops[0].curve.points) {
            lo = std::min(lo, x.norm());
            hi = std::max(hi, x.norm());
        }
        CHECK((hi - lo) / hi < 5e-3);
        CHECK(std::abs(hi - std::exp(-2 * pi * lam)) < 1e-2);
    }
}

TEST_CASE("leaf flux against a negative curvature patch") {
    // hole charge +1, K = −d on the elements with barycenter in 0.4 < r < 0.6
    PoissonProblem p;
    p.mesh = meshgen::annulus({0, 0}, 0.1, 1.0, 40, n_phi_for(40, 0.1, 1.0));
    p.metric = MetricField::euclidean();
    p.hole_charges = {1.0};
    p.source.assign(p.mesh.num_triangles(), 0.0);
    double patch = 0.0;
    for (int e = 0; e < p.mesh.num_triangles(); ++e) {
        const double r = p.mesh.barycenter(e).norm();
        if (r > 0.4 && r < 0.6) patch += p.mesh.area(e);
    }
    const double d = 0.5 / patch;
    for (int e = 0; e < p.mesh.num_triangles(); ++e) {
        const double r = p.mesh.barycenter(e).norm();
        if (r > 0.4 && r < 0.6) p.source[e] = -d;
    }
    const auto s = solve_floating_potential(p);
    const LevelSetField F(p, s);
    const auto bins = level_bins(s.u, 40, F.critical_values());
    int checked = 0;
    for (size_t i = 0; i < bins.size(); i += 3) {
        const auto loops = F.extract(bins[i].lambda);
        for (const LevelLoop& L : loops) {
            // independent oracle: element area by barycenter winding, no clipping
            double oracle = 1.0;
            for (int e = 0; e < p.mesh.num_triangles(); ++e)
                if (p.source[e] != 0.0 && polygon_winding(L.curve.points, p.mesh.barycenter(e)) != 0)
                    oracle += p.source[e] * p.mesh.area(e);
            const double h = p.mesh.max_edge();
            CHECK(std::abs(L.enclosed_total - oracle) < 2 * d * h * 2 * pi * 0.6);
            const LeafFlux lf = leaf_flux_identity(F, L, 1e-2);
            CAPTURE(L.lambda);
            CHECK(lf.holds);
            CHECK(lf.bounded);
            ++checked;
        }
    }
    CHECK(checked >= 10);
}

TEST_CASE("nested leaves conserve flux") {
    const auto mesh = meshgen::perforated_disc(1.0, {{{-0.4, 0}, 0.12}, {{0.4, 0}, 0.12}}, 0.015, 0.06);
    PoissonProblem p;
    p.mesh = mesh;
    p.metric = MetricField::euclidean();
    p.hole_charges = {1.0, 1.0};
    const auto s = solve_floating_potential(p);
    const LevelSetField F(p, s);
    // low level: one loop around both holes; high level: one around each
    const auto low = F.extract(0.2 * s.c[0]);
    REQUIRE(low.size() == 1);
    CHECK(low[0].enclosed_holes == std::vector<int>{1, 2});
    const double outer = leaf_integrals(F, low[0]).flux;
    CHECK(std::abs(outer - 2.0) < 2e-2);
    const auto high = F.extract(0.85 * std::min(s.c[0], s.c[1]));
    REQUIRE(high.size() == 2);
    double sum = 0.0;
    for (const LevelLoop& L : high) {
        CHECK(L.enclosed_holes.size() == 1);
        sum += leaf_integrals(F, L).flux;
    }
    CHECK(std::abs(sum - outer) < 2e-2 * outer);
}

TEST_CASE("coarea identity") {
    SUBCASE("u = r on a flat annulus") {
        const auto m = meshgen::annulus({0, 0}, 0.2, 1.0, 24, 96, RadialGrading::Uniform);
        std::vector<double> u(m.num_vertices());
        for (int v = 0; v < m.num_vertices(); ++v) u[v] = m.vertices()[v].norm();
        const auto r = coarea_check(m, MetricField::euclidean(), u);
        const double exact = pi * (1.0 - 0.04);
        CHECK(r.levels >= 24);
        CHECK(std::abs(r.volume_side - exact) / exact < 1e-2);
        CHECK(std::abs(r.level_side - exact) / exact < 1e-2);
        CHECK(r.residual < 1e-3);
    }
    SUBCASE("zero field") {
        const auto m = meshgen::annulus({0, 0}, 0.2, 1.0, 6, 24);
        const auto r = coarea_check(m, MetricField::euclidean(), std::vector<double>(m.num_vertices(), 0.0));
        CHECK(r.volume_side == 0.0);
        CHECK(r.level_side == 0.0);
        CHECK(r.residual == 0.0);
        CHECK(level_bins(std::vector<double>(5, 0.0), 10).empty());
    }
    SUBCASE("cone potential") {
        const double alpha = pi / 2, r0 = 0.05, R = 1.0;
        double last = 0.0;
        for (int n_r : {16, 32, 64}) {
            const auto p = cone_problem(alpha, r0, R, n_r);
            const auto s = solve_floating_potential(p);
            const auto r = coarea_check(p, s);
            CHECK(r.residual < 1e-2);
            last = std::abs(r.volume_side - alpha * (R - r0)) / (alpha * (R - r0));
        }
        CHECK(last < 1e-2);
    }
}

TEST_CASE("level bins avoid critical values") {
    std::vector<double> u;
    for (int k = 0; k <= 100; ++k) u.push_back(k / 100.0);
    const auto bins = level_bins(u, 10, {0.05});
    REQUIRE(bins.size() == 10);
    CHECK(bins[0].lo == 0.0);
    CHECK(bins.back().hi == 1.0);
    CHECK(std::abs(bins[0].lambda - 0.05) > 1e-3);
    CHECK(bins[1].lambda == doctest::Approx(0.15));
}

TEST_CASE("main inequality on a flat annulus is trivial") {
    const auto rep = verify_main_theorem(flat_annulus(0.1, 1.0, 12));
    CHECK(std::abs(rep.l1) < 1e-8);
    CHECK(std::abs(rep.rhs) < 1e-8);
    CHECK(rep.holds);
    CHECK(rep.chain_holds);
    CHECK_FALSE(rep.vacuous);
}

TEST_CASE("main inequality chain on the embedded cone") {
    const double alpha = pi / 2, r0 = 0.05, R = 1.0;
    ChainOptions opt;
    opt.jobs = 2;
    const auto rep = verify_main_theorem(embedded_cone(alpha, r0, R, 48), opt);
    const double rhs = (4 * pi - alpha) * alpha / (2 * pi - alpha) * std::log(R / r0);
    for (const ChainStep& st : rep.steps) {
        CAPTURE(st.name);
        CAPTURE(st.lhs);
        CAPTURE(st.rhs);
        CHECK(st.holds);
    }
    CHECK(rep.generator_extendable == std::vector<bool>{true, true});
    CHECK(rep.l1 == doctest::Approx(alpha).epsilon(1e-8));
    CHECK(std::abs(rep.rhs - rhs) / rhs < 1e-2);
    CHECK(rep.holds);
    CHECK(rep.leaf_iso_failed == 0);
    CHECK(rep.leaves >= 200);
    CHECK(rep.leaf_iso_checked == rep.leaves);
    CHECK(rep.leaf_flux_failed == 0);
    CHECK(rep.skipped_levels == 0);
    CHECK(rep.chain_holds);
    CHECK(rep.coarea_residual < 1e-2);
}

TEST_CASE("main inequality chain on a spherical cap") {
    const double th = 1.0;
    const auto rep = verify_main_theorem(cap(th, 24, 96));
    CHECK(rep.l1 == doctest::Approx(2 * pi * (1 - std::cos(th))).epsilon(2e-3));
    CHECK(rep.bending == doctest::Approx(4 * pi * (1 - std::cos(th))).epsilon(1e-6));
    CHECK(rep.holds);
    CHECK(rep.chain_holds);
    // latitude leaves: Cauchy-Schwarz is an equality, |dN|² = 2|D_s N|² on the
    // unit sphere, and each leaf is an equality case of the loop inequality
    CHECK(rep.steps[2].discrepancy < 2e-3);
    CHECK(rep.steps[3].lhs == doctest::Approx(2 * rep.steps[3].rhs).epsilon(5e-3));
    CHECK(rep.leaf_iso_checked > 100);
    CHECK(rep.leaf_iso_min_ratio > 1 - 1e-3);
    CHECK(rep.leaf_iso_max_ratio < 1.03);  // small loops near the peak are coarse
}

TEST_CASE("Burgers foliation bound") {
    const double alpha = pi / 2, c = 1 - alpha / (2 * pi), r0 = 0.05, R = 1.0;
    std::vector<CurveInChart> loops;
    std::vector<double> t;
    for (int k = 0; k <= 96; ++k) {
        const double r = r0 * std::pow(R / r0, k / 96.0);
        loops.push_back(CurveInChart::circle({0, 0}, r, 256));
        t.push_back(r);
    }
    const auto fb = burgers_foliation_bound(embedded_cone(alpha, r0, R, 16), loops, t, 1e-3);
    const double closed = std::pow(std::sin(pi * c), 2) / (2 * std::pow(pi, 3) * std::pow(c, 3)) * std::log(R / r0);
    CHECK(fb.bound >= closed * (1 - 1e-3));
    CHECK(fb.bound == doctest::Approx(closed).epsilon(1e-3));
    CHECK(fb.holds);
    for (size_t k = 0; k < t.size(); ++k) CHECK(fb.burgers[k] == doctest::Approx(2 * t[k] * std::sin(pi * c)).epsilon(1e-6));

    const auto flat = burgers_foliation_bound(flat_annulus(r0, R, 8), loops, t, 1e-3);
    CHECK(flat.bound < 1e-12);
    CHECK(flat.holds);

    std::vector<CurveInChart> crossing{CurveInChart::circle({0, 0}, 0.3, 64), CurveInChart::circle({0.2, 0}, 0.3, 64)};
    CHECK_THROWS_AS(burgers_foliation_bound(embedded_cone(alpha, r0, R, 8), crossing, {0.3, 0.4}, 1e-3),
                    LoopsNotDisjoint);
}
