#include <doctest.h>

#include "wbkit/errors.hpp"
#include "wbkit/poisson.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace wb;
using std::numbers::pi;

namespace {

using T2 = Taylor2;

// dr² + (c r)² dφ² written in Cartesian components
MetricField cone_metric(double c) {
    return MetricField::from_taylor(
        [c](const T2& x, const T2& y) {
            const T2 r2 = x * x + y * y;
            return std::array<T2, 3>{(x * x + c * c * y * y) / r2, (1.0 - c * c) * x * y / r2,
                                     (y * y + c * c * x * x) / r2};
        },
        {Vec2(0.5, 0), Vec2(0, 1), Vec2(-0.05, 0)}, 2.0);
}

PoissonProblem annulus_problem(const MetricField& g, double r0, double R, int n_r, double charge) {
    const int n_phi = static_cast<int>(std::lround(2 * pi * n_r / std::log(R / r0)));
    PoissonProblem p;
    p.mesh = meshgen::annulus({0, 0}, r0, R, n_r, n_phi);
    p.metric = g;
    p.hole_charges = {charge};
    return p;
}

double max_nodal_error(const PoissonProblem& p, const PotentialSolution& s, const std::function<double(double)>& exact) {
    double e = 0.0;
    for (int v = 0; v < p.mesh.num_vertices(); ++v)
        e = std::max(e, std::abs(s.u[v] - exact(p.mesh.vertices()[v].norm())));
    return e;
}

}  // namespace

TEST_CASE("zero data gives the zero potential") {
    auto p = annulus_problem(MetricField::euclidean(), 0.1, 1.0, 8, 0.0);
    const auto s = solve_floating_potential(p);
    for (double v : s.u) CHECK(v == 0.0);
    CHECK(s.energy == 0.0);
    CHECK(h1mc_dual_norm(s) == 0.0);
    CHECK(l1mc_norm(p) == 0.0);
    const auto li = linfty_report(p, s);
    CHECK(li.u_inf == 0.0);
    CHECK(li.ratio == 0.0);
}

TEST_CASE("flat annulus with a unit charge") {
    const double r0 = 0.1, R = 1.0;
    auto p = annulus_problem(MetricField::euclidean(), r0, R, 32, 1.0);
    const auto s = solve_floating_potential(p);
    CHECK(s.converged);
    auto exact = [&](double r) { return -std::log(r / R) / (2 * pi); };
    CHECK(max_nodal_error(p, s, exact) < 2e-3);
    CHECK(std::abs(s.c[0] - exact(r0)) < 2e-3);
    CHECK(std::abs(s.energy - std::log(R / r0) / (2 * pi)) / (std::log(R / r0) / (2 * pi)) < 1e-2);
    CHECK(std::abs(s.weak_flux[0] - 1.0) < 1e-8);
    CHECK(std::abs(s.flux[0] - 1.0) < 1e-2);
    // hole vertices share one value, outer vertices are pinned
    for (int v = 0; v < p.mesh.num_vertices(); ++v) {
        if (p.mesh.boundary_label(v) == 0) CHECK(s.u[v] == 0.0);
        if (p.mesh.boundary_label(v) == 1) CHECK(s.u[v] == s.c[0]);
    }
    CHECK(l1mc_norm(p) == doctest::Approx(1.0));
}

TEST_CASE("cone potential converges to the closed form") {
    const double r0 = 0.05, R = 1.0;
    for (double alpha : {-pi, pi / 4, pi / 2, pi}) {
        const double c = 1 - alpha / (2 * pi);
        auto exact = [&](double r) { return -alpha / (2 * pi * c) * std::log(r / R); };
        const double energy = alpha * alpha / (2 * pi * c) * std::log(R / r0);
        std::vector<double> err;
        double last_rel = 0.0;
        for (int n_r : {32, 64, 128}) {
            auto p = annulus_problem(cone_metric(c), r0, R, n_r, alpha);
            const auto s = solve_floating_potential(p);
            CHECK(s.converged);
            err.push_back(max_nodal_error(p, s, exact));
            last_rel = std::abs(s.energy - energy) / energy;
            CHECK(std::abs(s.flux[0] - alpha) < 1e-2 * std::abs(alpha));
        }
        CAPTURE(alpha);
        CHECK(err[1] < err[0]);
        CHECK(err[2] < err[1]);
        CHECK(std::log(err[1] / err[2]) / std::log(2.0) >= 1.0);
        CHECK(last_rel < 1e-2);
    }
}

TEST_CASE("dual norm is homogeneous and the maximum principle holds") {
    auto p = annulus_problem(MetricField::euclidean(), 0.2, 1.0, 12, 0.7);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    p.source.resize(p.mesh.num_triangles());
    for (double& k : p.source) k = U(rng);
    const auto s1 = solve_floating_potential(p);
    for (double v : s1.u) CHECK(v >= -1e-12);

    auto q = p;
    for (double& k : q.source) k *= -3;
    q.hole_charges = {-2.1};
    const auto s3 = solve_floating_potential(q);
    CHECK(h1mc_dual_norm(s3) == doctest::Approx(3 * h1mc_dual_norm(s1)).epsilon(1e-8));
    CHECK(l1mc_norm(q) == doctest::Approx(3 * l1mc_norm(p)).epsilon(1e-12));
}

TEST_CASE("Riesz representer attains the dual supremum") {
    auto p = annulus_problem(MetricField::euclidean(), 0.2, 1.0, 12, 1.3);
    p.source.assign(p.mesh.num_triangles(), 0.5);
    const auto s = solve_floating_potential(p);

    std::vector<std::vector<double>> trials{s.u};
    std::vector<double> scaled = s.u;
    for (double& v : scaled) v *= -4.5;
    trials.push_back(scaled);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> G;
    for (int k = 0; k < 6; ++k) {
        std::vector<double> phi(p.mesh.num_vertices(), 0.0);
        const double hole_value = G(rng);
        for (int v = 0; v < p.mesh.num_vertices(); ++v) {
            const int lab = p.mesh.boundary_label(v);
            phi[v] = lab == 0 ? 0.0 : lab == 1 ? hole_value : G(rng);
        }
        trials.push_back(phi);
    }
    const auto rep = dual_sup_property_check(p, s, trials, 1e-3);
    CHECK(rep.holds);
    CHECK(rep.ratio[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rep.ratio[1] == doctest::Approx(-1.0).epsilon(1e-8));
    for (size_t j = 2; j < rep.ratio.size(); ++j) CHECK(rep.ratio[j] < 1.0 - 1e-3);

    std::vector<double> bad = s.u;
    for (int v = 0; v < p.mesh.num_vertices(); ++v)
        if (p.mesh.boundary_label(v) == 0) bad[v] = 1.0;
    CHECK_THROWS_AS(dual_sup_property_check(p, s, {bad}, 1e-3), InadmissibleTrial);
    std::vector<double> bad2 = s.u;
    for (int v = 0; v < p.mesh.num_vertices(); ++v)
        if (p.mesh.boundary_label(v) == 1) {
            bad2[v] += 0.1;
            break;
        }
    CHECK_THROWS_AS(dual_sup_property_check(p, s, {bad2}, 1e-3), InadmissibleTrial);
    CHECK_THROWS_AS(dual_sup_property_check(p, s, {std::vector<double>(p.mesh.num_vertices(), 0.0)}, 1e-3),
                    InadmissibleTrial);
}

TEST_CASE("L1 norm of a cap disc and the sup-norm proxy") {
    // unit-sphere cap in stereographic coordinates: g = 4/D² I, K = 1
    const double th = 1.0, Rc = std::tan(th / 2);
    PoissonProblem p;
    p.mesh = meshgen::disc({0, 0}, Rc, 32, 128);
    p.metric = MetricField::from_taylor(
        [](const T2& x, const T2& y) {
            const T2 D = 1.0 + x * x + y * y;
            const T2 s = 4.0 / (D * D);
            return std::array<T2, 3>{s, T2(0.0), s};
        },
        {Vec2(0, 0), Vec2(Rc, 0)}, 2 * Rc);
    p.source.assign(p.mesh.num_triangles(), 1.0);
    CHECK(std::abs(l1mc_norm(p) - 2 * pi * (1 - std::cos(th))) < 1e-3);

    // cone family: ‖u‖∞ / |α| is log(R/r0)/(2π c), bounded for c away from 0
    for (double alpha : {pi / 4, pi / 2, pi}) {
        const double c = 1 - alpha / (2 * pi);
        auto q = annulus_problem(cone_metric(c), 0.05, 1.0, 32, alpha);
        const auto s = solve_floating_potential(q);
        const auto li = linfty_report(q, s);
        CHECK(li.ratio == doctest::Approx(std::log(20.0) / (2 * pi * c)).epsilon(1e-2));
    }
}

TEST_CASE("bad problems are rejected") {
    auto p = annulus_problem(MetricField::euclidean(), 0.2, 1.0, 4, 1.0);
    p.source.assign(3, 1.0);
    CHECK_THROWS_AS(solve_floating_potential(p), SingularSystem);
    // positive at the probe, indefinite on the left half of the annulus
    auto q = annulus_problem(
        MetricField::from_function([](const Vec2& x) { return Mat2(Eigen::Vector2d(1.0, x.x()).asDiagonal()); },
                                   {Vec2(0.5, 0)}, 2.0, MetricField::DerivativeMode::None),
        0.2, 1.0, 4, 1.0);
    CHECK_THROWS_AS(solve_floating_potential(q), NonSPDMetric);
}
