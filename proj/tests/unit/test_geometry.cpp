#include <doctest.h>

#include "wbkit/errors.hpp"
#include "wbkit/immersion.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace wb;
using std::numbers::pi;

namespace {

using T2 = Taylor2;
using Map = ImmersedChart::AnalyticMap;

Map plane() {
    return [](const T2& x, const T2& y) { return std::array<T2, 3>{x, y, T2(0.0)}; };
}

// stereographic chart of the sphere of radius rho, north pole at the origin
Map sphere(double rho) {
    return [rho](const T2& x, const T2& y) {
        const T2 D = 1.0 + x * x + y * y;
        return std::array<T2, 3>{rho * 2.0 * x / D, rho * 2.0 * y / D, rho * (2.0 / D - 1.0)};
    };
}

// radius-1 cylinder over the annulus 1 <= r <= 2, height r - 1
Map cylinder() {
    return [](const T2& x, const T2& y) {
        const T2 r = sqrt(x * x + y * y);
        return std::array<T2, 3>{x / r, y / r, r - 1.0};
    };
}

Map cone(double c) {
    const double s = std::sqrt(1 - c * c);
    return [c, s](const T2& x, const T2& y) {
        return std::array<T2, 3>{c * x, c * y, s * sqrt(x * x + y * y)};
    };
}

Map graph(double eps, std::function<T2(const T2&, const T2&)> u) {
    const double se = std::sqrt(eps);
    return [se, u](const T2& x, const T2& y) { return std::array<T2, 3>{x, y, se * u(x, y)}; };
}

ImmersedChart hemisphere(int n_r = 24, int n_phi = 96) {
    return ImmersedChart::analytic(meshgen::disc({0, 0}, 1.0, n_r, n_phi), sphere(1.0),
                                   ImmersedChart::PolarDomain{{0, 0}, 0.0, 1.0});
}

}  // namespace

TEST_CASE("pullback metric of the plane is the identity") {
    const auto m = meshgen::rectangle({0, 0}, {1, 1}, 8, 8);
    std::vector<Vec3> pos;
    for (const Vec2& v : m.vertices()) pos.emplace_back(v.x(), v.y(), 0.0);
    const auto f = ImmersedChart::meshed(m, pos);
    for (const Vec2 p : {Vec2(0.3, 0.4), Vec2(0.77, 0.12)})
        CHECK((f.pullback_metric().eval(p) - Mat2::Identity()).norm() < 1e-12);
}

TEST_CASE("pullback of the embedded cone is dr^2 + (c r)^2 dphi^2") {
    const double c = 0.75;
    const auto f = ImmersedChart::analytic(meshgen::annulus({0, 0}, 0.05, 1.0, 8, 32), cone(c));
    for (const Vec2 p : {Vec2(0.3, 0.1), Vec2(-0.2, 0.6)}) {
        const double r = p.norm();
        const Vec2 er = p / r, ep(-er.y(), er.x());
        const Mat2 g = f.pullback_metric().eval(p);
        CHECK(std::abs(er.dot(g * er) - 1.0) < 1e-13);
        CHECK(std::abs(ep.dot(g * ep) - c * c) < 1e-13);  // g(∂φ,∂φ) = (c r)² with |∂φ| = r
        CHECK(std::abs(er.dot(g * ep)) < 1e-13);
    }
}

TEST_CASE("pullback of a graph is I + eps grad u grad u^T") {
    const double eps = 0.3;
    const auto f = ImmersedChart::analytic(meshgen::disc({0, 0}, 1.0, 4, 16),
                                           graph(eps, [](const T2& x, const T2& y) { return x * x * y + sin(y); }));
    const Vec2 p(0.2, -0.4);
    const Vec2 du(2 * p.x() * p.y(), p.x() * p.x() + std::cos(p.y()));
    CHECK((f.pullback_metric().eval(p) - (Mat2::Identity() + eps * du * du.transpose())).norm() < 1e-13);
}

TEST_CASE("curvature fields of plane, sphere and cylinder") {
    SUBCASE("plane") {
        const auto f = ImmersedChart::analytic(meshgen::disc({0, 0}, 1, 4, 16), plane());
        const auto cf = curvature_fields(f, true);
        for (size_t e = 0; e < cf.K.size(); ++e) {
            CHECK(std::abs(cf.K[e]) < 1e-14);
            CHECK(std::abs(cf.H[e]) < 1e-14);
            CHECK(std::abs(cf.dN2[e]) < 1e-14);
            CHECK(std::abs(cf.K_intrinsic[e]) < 1e-6);
        }
    }
    SUBCASE("sphere") {
        const double rho = 2.0;
        const auto f = ImmersedChart::analytic(meshgen::disc({0, 0}, 0.9, 6, 24), sphere(rho));
        const auto cf = curvature_fields(f, true);
        for (size_t e = 0; e < cf.K.size(); ++e) {
            CHECK(std::abs(cf.K[e] - 1 / (rho * rho)) < 1e-12);
            CHECK(std::abs(std::abs(cf.H[e]) - 1 / rho) < 1e-12);
            CHECK(std::abs(cf.dN2[e] - 2 / (rho * rho)) < 1e-12);
            CHECK(std::abs(cf.K_intrinsic[e] - 1 / (rho * rho)) < 1e-6);
        }
        CHECK(cf.max_identity_residual < 1e-12);
    }
    SUBCASE("cylinder") {
        const auto f = ImmersedChart::analytic(meshgen::annulus({0, 0}, 1, 2, 6, 32), cylinder());
        const auto cf = curvature_fields(f, true);
        for (size_t e = 0; e < cf.K.size(); ++e) {
            CHECK(std::abs(cf.K[e]) < 1e-12);
            CHECK(std::abs(std::abs(cf.H[e]) - 0.5) < 1e-12);
            CHECK(std::abs(cf.dN2[e] - 1.0) < 1e-12);
            CHECK(std::abs(cf.K_intrinsic[e]) < 1e-6);
        }
    }
}

TEST_CASE("intrinsic curvature needs second metric derivatives") {
    const auto m = meshgen::disc({0, 0}, 1, 3, 12);
    const auto g = MetricField::from_function([](const Vec2&) { return Mat2::Identity().eval(); },
                                              {Vec2(0, 0)}, 2.0, MetricField::DerivativeMode::None);
    CHECK_THROWS_AS(brioschi_curvature(g, Vec2(0.1, 0.1)), DerivativeUnavailable);
}

TEST_CASE("meshed sphere curvature converges to 1/rho^2") {
    double prev = 1e9;
    for (int n : {8, 16, 32}) {
        const auto m = meshgen::disc({0, 0}, 0.8, n, 4 * n);
        std::vector<Vec3> pos;
        for (const Vec2& v : m.vertices()) {
            const double D = 1 + v.squaredNorm();
            pos.emplace_back(2 * v.x() / D, 2 * v.y() / D, 2 / D - 1);
        }
        const auto f = ImmersedChart::meshed(m, pos);
        const auto cf = curvature_fields(f, true);
        double l1 = 0, l1_int = 0, area = 0;
        for (size_t e = 0; e < cf.K.size(); ++e) {
            l1 += std::abs(cf.K[e] - 1) * cf.vol[e];
            l1_int += std::abs(cf.K_intrinsic[e] - cf.K[e]) * cf.vol[e];
            area += cf.vol[e];
        }
        if (n == 32) CHECK(l1 / area < 1e-2);  // mesh tolerance applies at the finest level
        CHECK(l1_int < prev);
        prev = l1_int;
    }
}

TEST_CASE("bending energy") {
    SUBCASE("flat disc") {
        const auto f = ImmersedChart::analytic(meshgen::disc({0, 0}, 1, 4, 16), plane());
        CHECK(bending_energy(f) == doctest::Approx(0.0));
    }
    SUBCASE("unit hemisphere gives twice its area") {
        CHECK(std::abs(bending_energy(hemisphere(), Quadrature::Polar) - 4 * pi) < 1e-9);
        CHECK(std::abs(bending_energy(hemisphere(32, 128)) - 4 * pi) < 1e-2);
    }
    SUBCASE("unit cylinder of height 1") {
        const auto f = ImmersedChart::analytic(meshgen::annulus({0, 0}, 1, 2, 16, 64), cylinder(),
                                               ImmersedChart::PolarDomain{{0, 0}, 1.0, 2.0});
        CHECK(std::abs(bending_energy(f, Quadrature::Polar) - 2 * pi) < 1e-9);
    }
    SUBCASE("rigid motions") {
        const auto f = hemisphere(12, 48);
        Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
        const auto g = f.transformed(R, Vec3(5, -1, 2));
        CHECK(std::abs(bending_energy(f) - bending_energy(g)) < 1e-11);
    }
}

TEST_CASE("pointwise AGM margin") {
    CHECK(std::abs(pointwise_AGM_check(hemisphere(8, 32), 1e-6).worst_margin) < 1e-12);
    const auto cyl = ImmersedChart::analytic(meshgen::annulus({0, 0}, 1, 2, 6, 32), cylinder());
    CHECK(std::abs(pointwise_AGM_check(cyl, 1e-6).worst_margin - 1.0) < 1e-12);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int trial = 0; trial < 5; ++trial) {
        const double a = U(rng), b = U(rng), c = U(rng), d = U(rng);
        const auto f = ImmersedChart::analytic(meshgen::disc({0, 0}, 1, 6, 24),
                                               graph(1.0, [=](const T2& x, const T2& y) {
                                                   return a * x * x + b * x * y + c * y * y * y + d * x * y * y;
                                               }));
        const auto rep = pointwise_AGM_check(f, 1e-6);
        // brute force: principal curvatures from the generalized eigenproblem h v = k g v
        double worst = 1e9;
        for (int e = 0; e < f.mesh().num_triangles(); ++e) {
            const auto& pg = f.element_geometry(e);
            Eigen::GeneralizedSelfAdjointEigenSolver<Mat2> es(pg.h, pg.g);
            const double k1 = es.eigenvalues()[0], k2 = es.eigenvalues()[1];
            worst = std::min(worst, k1 * k1 + k2 * k2 - 2 * std::abs(k1 * k2));
        }
        CHECK(rep.worst_margin >= -1e-6);
        CHECK(std::abs(rep.worst_margin - worst) < 1e-9);
    }
}

TEST_CASE("AGM check reports violations") {
    // real immersions never violate it; a negative tolerance demands a margin the umbilic sphere lacks
    const auto f = hemisphere(4, 16);
    CHECK_NOTHROW(pointwise_AGM_check(f, 1e-12));
    CHECK_THROWS_AS(pointwise_AGM_check(f, -1.0), ViolationFound);
}

TEST_CASE("geodesic curvature of chart curves") {
    SUBCASE("planar circle") {
        const auto f = ImmersedChart::analytic(meshgen::disc({0, 0}, 1, 8, 32), plane());
        const auto r = geodesic_curvature(f, CurveInChart::circle({0.1, 0}, 0.5, 256));
        for (double k : r.kappa) CHECK(std::abs(k - 2.0) < 1e-10);
        CHECK(std::abs(r.integral - 2 * pi) < 1e-10);
    }
    SUBCASE("constant-r loop on the cone") {
        const double alpha = pi / 2, c = 1 - alpha / (2 * pi);
        const auto f = ImmersedChart::analytic(meshgen::annulus({0, 0}, 0.05, 1, 8, 32), cone(c));
        const auto r = geodesic_curvature(f, CurveInChart::circle({0, 0}, 0.4, 256));
        CHECK(std::abs(r.integral - (2 * pi - alpha)) < 1e-9);
    }
    SUBCASE("colatitude circle on the unit sphere") {
        const auto f = hemisphere(8, 32);
        const double th = pi / 3;
        const auto r = geodesic_curvature(f, CurveInChart::circle({0, 0}, std::tan(th / 2), 256));
        for (double k : r.kappa) CHECK(std::abs(k - 1 / std::tan(th)) < 1e-9);
    }
    SUBCASE("curves leaving the chart are rejected") {
        const auto f = ImmersedChart::analytic(meshgen::disc({0, 0}, 1, 8, 32), plane());
        CHECK_THROWS_AS(geodesic_curvature(f, CurveInChart::circle({0.5, 0}, 0.7, 64)), BoundaryTooRough);
    }
}

TEST_CASE("enclosed curvature of a hole") {
    SUBCASE("flat annulus") {
        const auto f = ImmersedChart::analytic(meshgen::annulus({0, 0}, 0.2, 1, 16, 64), plane());
        CHECK(std::abs(enclosed_curvature(f, 1).K_i) < 1e-6);
    }
    SUBCASE("truncated cone") {
        const double alpha = pi / 2, c = 1 - alpha / (2 * pi);
        const auto f = ImmersedChart::analytic(meshgen::annulus({0, 0}, 0.05, 1, 16, 64), cone(c));
        CHECK(std::abs(enclosed_curvature(f, 1).K_i - alpha) < 1e-6);
    }
    SUBCASE("test curve around two holes is rejected") {
        const auto m = meshgen::perforated_disc(1.0, {{{-0.3, 0}, 0.1}, {{0.3, 0}, 0.1}}, 0.03, 0.1);
        const auto f = ImmersedChart::analytic(m, plane());
        CHECK_THROWS_AS(enclosed_curvature(f, 1, CurveInChart::circle({0, 0}, 0.6, 128)),
                        HomotopyClassAmbiguous);
        CHECK(std::abs(enclosed_curvature(f, 1).K_i) < 1e-6);
    }
}

TEST_CASE("Gauss-Bonnet residual") {
    SUBCASE("planar disc") {
        const auto f = ImmersedChart::analytic(meshgen::disc({0, 0}, 1, 8, 32), plane());
        CHECK(gauss_bonnet_residual(f, CurveInChart::circle({0, 0}, 0.5, 256)) < 1e-9);
    }
    SUBCASE("spherical cap") {
        const double th = pi / 4, a = std::tan(th / 2);
        const auto f = hemisphere(32, 128);
        const auto c = CurveInChart::circle({0, 0}, a, 512);
        const double kg = geodesic_curvature(f, c).integral;
        CHECK(std::abs(kg - 2 * pi * std::cos(th)) < 1e-9);
        CHECK(std::abs(enclosed_K_integral(f, c.points) - 2 * pi * (1 - std::cos(th))) < 1e-3);
        CHECK(gauss_bonnet_residual(f, c) < 1e-3);
    }
    SUBCASE("meshed graph, decreasing under refinement") {
        double prev = 1e9;
        for (int n : {8, 16, 32}) {
            const auto m = meshgen::disc({0, 0}, 1, n, 4 * n);
            std::vector<Vec3> pos;
            for (const Vec2& v : m.vertices())
                pos.emplace_back(v.x(), v.y(), 0.3 * (v.x() * v.x() - 0.5 * v.y() * v.y() + v.x() * v.y() * v.y()));
            const auto f = ImmersedChart::meshed(m, pos);
            const double r = gauss_bonnet_residual(f, CurveInChart::circle({0.05, 0.02}, 0.6, 512));
            CHECK(r < 1e-2);
            CHECK(r < prev);
            prev = r;
        }
    }
}
