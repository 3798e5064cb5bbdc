#include <doctest.h>

#include "wbkit/errors.hpp"
#include "wbkit/sphere.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace wb;
using std::numbers::pi;

namespace {

using T2 = Taylor2;
using Map = ImmersedChart::AnalyticMap;

SphereCurve equator(int n, int turns = 1) {
    Vec3List pts;
    for (int k = 0; k < n * turns; ++k) {
        const double t = 2 * pi * k / n;
        pts.emplace_back(std::cos(t), std::sin(t), 0.0);
    }
    return SphereCurve::make(pts);
}

SphereCurve latitude(double theta, int n) {
    Vec3List pts;
    for (int k = 0; k < n; ++k) {
        const double t = 2 * pi * k / n;
        pts.emplace_back(std::sin(theta) * std::cos(t), std::sin(theta) * std::sin(t), std::cos(theta));
    }
    return SphereCurve::make(pts);
}

Vec3 unit(double x, double y, double z) { return Vec3(x, y, z).normalized(); }

// stereographic chart of the unit sphere, north pole at the origin
Map sphere() {
    return [](const T2& x, const T2& y) {
        const T2 D = 1.0 + x * x + y * y;
        return std::array<T2, 3>{2.0 * x / D, 2.0 * y / D, 2.0 / D - 1.0};
    };
}

ImmersedChart cap(double theta0, int n_r = 24, int n_phi = 96) {
    const double R = std::tan(theta0 / 2);
    return ImmersedChart::analytic(meshgen::disc({0, 0}, R, n_r, n_phi), sphere(),
                                   ImmersedChart::PolarDomain{{0, 0}, 0.0, R});
}

ImmersedChart graph_chart(std::function<T2(const T2&, const T2&)> u, bool polar = true, int n_r = 20,
                          int n_phi = 80) {
    Map f = [u](const T2& x, const T2& y) { return std::array<T2, 3>{x, y, u(x, y)}; };
    std::optional<ImmersedChart::PolarDomain> pd;
    if (polar) pd = ImmersedChart::PolarDomain{{0, 0}, 0.0, 1.0};
    return ImmersedChart::analytic(meshgen::disc({0, 0}, 1.0, n_r, n_phi), f, pd);
}

ImmersedChart flat_disc() {
    return graph_chart([](const T2&, const T2&) { return T2(0.0); });
}

// random cubic height function with small coefficients
std::function<T2(const T2&, const T2&)> random_cubic(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-0.6, 0.6);
    std::array<double, 7> a;
    for (double& c : a) c = U(rng);
    return [a](const T2& x, const T2& y) {
        return a[0] * x * x + a[1] * x * y + a[2] * y * y + a[3] * x * x * x + a[4] * x * x * y + a[5] * x * y * y +
               a[6] * y * y * y;
    };
}

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> G;
    return Vec3(G(rng), G(rng), G(rng)).normalized();
}

}  // namespace

TEST_CASE("winding numbers against the equator") {
    const SphereCurve eq = equator(64);
    const Vec3 N(0, 0, 1), S = unit(0.001, 0.0013, -1.0);
    CHECK(winding_number(eq, N, S) == 1);
    CHECK(winding_number(eq, S, N) == -1);
    CHECK(winding_number(eq, unit(0.3, 0.2, 0.5), unit(-0.7, 0.1, 0.2)) == 0);
    CHECK(winding_number(equator(64, 2), N, S) == 2);

    // reversing the curve flips the sign
    Vec3List rev(eq.points.rbegin(), eq.points.rend());
    CHECK(winding_number(SphereCurve::make(rev), N, S) == -1);

    CHECK_THROWS_AS(winding_number(eq, N, Vec3(0, 0, -1)), DegenerateConfiguration);
    CHECK_THROWS_AS(winding_number(eq, Vec3(1, 0, 0), N), DegenerateConfiguration);
    CHECK_THROWS_AS(SphereCurve::make({Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0)}), InvalidLoop);
    CHECK_THROWS_AS(SphereCurve::make({Vec3(2, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}), InvalidLoop);
}

TEST_CASE("winding number is additive and matches a crossing count") {
    std::mt19937_64 rng(11);
    const SphereCurve a = latitude(0.7, 40), b = latitude(2.1, 40);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p = random_unit(rng), q = random_unit(rng);
        const int wa = winding_number(a, p, q), wb = winding_number(b, p, q);
        CHECK(winding_number(std::vector<SphereCurve>{a, b}, p, q) == wa + wb);
        // a latitude circle separates by polar angle: ±1 when p, q sit on opposite sides
        const double za = std::cos(0.7);
        const int expect = (p.z() > za) - (q.z() > za);
        // the polygon cuts the cap slightly; skip points in that sliver
        if (std::abs(p.z() - za) > 0.01 && std::abs(q.z() - za) > 0.01) CHECK(wa == expect);
    }
}

TEST_CASE("degree of Gauss images") {
    // stereographic chart over a large disc covers the sphere except a small southern cap
    const auto big = ImmersedChart::analytic(meshgen::disc({0, 0}, 10.0, 40, 160), sphere());
    const GaussImage gbig = GaussImage::from_chart(big);
    CHECK(degree_at(gbig, unit(0.2, -0.4, 0.5)) == 1);
    CHECK(degree_at(gbig, unit(0.3, 0.8, -0.6)) == 1);
    CHECK(degree_at(gbig, unit(0.01, 0.02, -1.0)) == 0);

    // u = r²/2: N(x, y) ∝ (−x, −y, 1), so p has a preimage iff x = −p_x/p_z, y = −p_y/p_z lies in the disc
    const auto paraboloid = graph_chart([](const T2& x, const T2& y) { return 0.5 * (x * x + y * y); }, true, 24, 96);
    const GaussImage gp = GaussImage::from_chart(paraboloid);
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        const Vec3 p = random_unit(rng);
        double r = 2.0;
        if (p.z() > 0) r = std::hypot(p.x(), p.y()) / p.z();
        // mesh image vs true image differ in a thin band near the boundary
        if (std::abs(r - 1.0) < 0.02) continue;
        CHECK(degree_at(gp, p) == (r < 1.0 ? 1 : 0));
        ++checked;
    }
    CHECK(checked > 250);
    CHECK_THROWS_AS(degree_at(gp, gp.normals[5]), NotRegularValue);
}

TEST_CASE("degree and winding number agree on regular pairs") {
    const auto paraboloid = graph_chart([](const T2& x, const T2& y) { return 0.5 * (x * x + y * y); });
    const GaussImage gp = GaussImage::from_chart(paraboloid);
    const auto r = check_degree_winding_relation(gp, unit(0.13, 0.07, 1.0), unit(1.0, 0.0, 0.2));
    CHECK(r.Qp == 1);
    CHECK(r.Qq == 0);
    CHECK(r.w == 1);
    CHECK(r.holds);
    const auto same = check_degree_winding_relation(gp, unit(0.13, 0.07, 1.0), unit(-0.11, 0.23, 1.0));
    CHECK(same.w == 0);
    CHECK(same.Qp - same.Qq == 0);

    std::mt19937_64 rng(99);
    int pairs = 0;
    for (int s = 0; s < 10; ++s) {
        const auto chart = graph_chart(random_cubic(rng), false, 10, 40);
        const GaussImage g = GaussImage::from_chart(chart);
        for (int i = 0; i < 40; ++i) {
            Vec3 p = random_unit(rng), q = random_unit(rng);
            // concentrate some pairs near the image where Q is nontrivial
            if (i % 2 == 0) p = (p + 3 * Vec3::UnitZ()).normalized();
            try {
                const auto rr = check_degree_winding_relation(g, p, q);
                CHECK(rr.holds);
                ++pairs;
            } catch (const NotRegularValue&) {
            } catch (const DegenerateConfiguration&) {
            }
        }
    }
    CHECK(pairs > 350);
}

TEST_CASE("Weiner estimate on equators") {
    const auto r1 = weiner_check(equator(64), 100000, 7);
    CHECK(std::abs(r1.lhs - 4 * pi * pi) < 1e-9);
    CHECK(std::abs(r1.estimate - 4 * pi * pi) < 3 * r1.stderr_);
    CHECK(r1.holds);
    CHECK(r1.n_mc == 100000);

    const auto r2 = weiner_check(equator(64, 2), 100000, 7);
    CHECK(std::abs(r2.lhs - 16 * pi * pi) < 1e-9);
    CHECK(std::abs(r2.estimate - 16 * pi * pi) < 3 * r2.stderr_);
    CHECK(r2.holds);

    // small circle: both sides tiny
    const auto r3 = weiner_check(latitude(0.01, 64), 20000, 3);
    CHECK(r3.lhs < 4e-3);
    CHECK(r3.estimate < 0.05);
    CHECK(r3.holds);
}

TEST_CASE("Weiner estimate is deterministic and converges at the MC rate") {
    const SphereCurve c = latitude(1.0, 128);
    const auto a = weiner_check(c, 30000, 42, 1);
    const auto b = weiner_check(c, 30000, 42, 3);
    CHECK(a.estimate == b.estimate);
    CHECK(a.stderr_ == b.stderr_);
    const auto small = weiner_check(c, 20000, 1);
    const auto large = weiner_check(c, 320000, 1);
    CHECK(small.stderr_ / large.stderr_ == doctest::Approx(4.0).epsilon(0.1));
    // exact value for a latitude circle: w² = 1 when p, q are on opposite sides
    const double a_cap = 2 * pi * (1 - std::cos(1.0));
    const double exact = 0.5 * 2 * a_cap * (4 * pi - a_cap);
    CHECK(std::abs(large.estimate - exact) < 3 * large.stderr_);
    CHECK(large.lhs >= large.estimate - 3 * large.stderr_);
}

TEST_CASE("disc inequalities on spherical caps are equalities") {
    for (double th : {0.4, 1.0, pi / 2, 2.2}) {
        const auto f = cap(th);
        const double A = 2 * pi * (1 - std::cos(th));
        const auto l7 = check_lemma7(f, 1e-3);
        CHECK(std::abs(l7.L - 2 * pi * std::sin(th)) < 1e-8);
        CHECK(std::abs(l7.QK - A) < 1e-7);
        CHECK(std::abs(l7.K_total - A) < 1e-8);
        CHECK(std::abs(l7.lhs - l7.rhs) < 1e-6 * l7.lhs);
        CHECK(l7.holds);
        const auto l10 = check_lemma10(f, 1e-3);
        CHECK(std::abs(l10.lhs - l10.rhs) < 1e-7);
        CHECK(l10.holds);
        const auto iso = check_disc_isoperimetric(f, 1e-3);
        CHECK(std::abs(iso.lhs - iso.rhs) < 1e-6 * iso.lhs);
        CHECK(iso.holds);
    }
}

TEST_CASE("disc inequalities on flat, saddle and random patches") {
    const auto flat = check_lemma7(flat_disc(), 1e-3);
    CHECK(flat.lhs == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(flat.rhs) < 1e-12);
    CHECK(flat.holds);
    CHECK(check_lemma10(flat_disc(), 1e-3).holds);

    // saddle-then-dome: K changes sign across r = 1/√3 or so
    const auto mixed =
        graph_chart([](const T2& x, const T2& y) { return 0.3 * (x * x - y * y) + 0.4 * (x * x + y * y) * (x * x + y * y); });
    const auto l10 = check_lemma10(mixed, 1e-3);
    CHECK(l10.holds);
    CHECK(l10.lhs >= l10.rhs - 1e-6);

    std::mt19937_64 rng(2024);
    for (int s = 0; s < 4; ++s) {
        const auto f = graph_chart(random_cubic(rng));
        const auto l7 = check_lemma7(f, 1e-3);
        CHECK(l7.holds);
        const auto l10r = check_lemma10(f, 1e-3);
        CHECK(l10r.holds);
        CHECK(check_disc_isoperimetric(f, 1e-3).holds);
        // mesh route agrees with the polar route to discretization accuracy
        const auto fm = ImmersedChart::meshed(f.mesh(), [&] {
            std::vector<Vec3> pos;
            for (int v = 0; v < f.mesh().num_vertices(); ++v) pos.push_back(f.vertex_position(v));
            return pos;
        }());
        const auto m7 = check_lemma7(fm, 1e-3);
        CHECK(std::abs(m7.K_total - l7.K_total) < 2e-2);
        CHECK(std::abs(m7.L - l7.L) < 2e-2 * l7.L + 1e-3);
    }
}

TEST_CASE("pushforward identity") {
    const double th = 1.0;
    const auto f = cap(th, 32, 128);
    const double A = 2 * pi * (1 - std::cos(th));
    const auto one = pushforward_identity_check(f, [](const Vec3&) { return 1.0; });
    CHECK(std::abs(one.chart_side - A) < 1e-8);
    CHECK(std::abs(one.sphere_side - A) < 1e-3);
    // ∫_cap z dA = π sin²θ0
    const auto z = pushforward_identity_check(f, [](const Vec3& p) { return p.z(); });
    CHECK(std::abs(z.chart_side - pi * std::sin(th) * std::sin(th)) < 1e-8);
    CHECK(z.residual < 1e-3);

    const auto flat = pushforward_identity_check(flat_disc(), [](const Vec3&) { return 1.0; });
    CHECK(std::abs(flat.chart_side) < 1e-12);
    CHECK(std::abs(flat.sphere_side) < 1e-12);

    std::mt19937_64 rng(8);
    const auto g = graph_chart(random_cubic(rng), true, 32, 128);
    const std::vector<SphereFunction> family{
        [](const Vec3&) { return 1.0; },
        [](const Vec3& p) { return p.x(); },
        [](const Vec3& p) { return p.y(); },
        [](const Vec3& p) { return p.x() * p.y(); },
        [](const Vec3& p) { return p.y() * p.z(); },
        [](const Vec3& p) { return p.x() * p.x() - p.y() * p.y(); },
        [](const Vec3& p) { return 3 * p.z() * p.z() - 1; },
    };
    for (const auto& h : family) CHECK(pushforward_identity_check(g, h).residual < 1e-2);
}
