#include "wbkit/scenarios.hpp"

#include "wbkit/errors.hpp"
#include "wbkit/quadrature.hpp"
#include "wbkit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <set>

namespace wb {

namespace {

constexpr double kPi = std::numbers::pi;
using T2 = Taylor2;
using Map = ImmersedChart::AnalyticMap;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

bool finite(double x) { return std::isfinite(x); }

// metric dr² + (r·q)² dφ² in Cartesian components, q given as a function of (r, x)
MetricField polar_metric(std::function<T2(const T2& r, const T2& x)> q_of, double r_in, double r_out) {
    return MetricField::from_taylor(
        [q_of](const T2& x, const T2& y) {
            const T2 r2 = x * x + y * y;
            const T2 q = q_of(sqrt(r2), x);
            const T2 q2 = q * q;
            return std::array<T2, 3>{(x * x + q2 * y * y) / r2, (1.0 - q2) * x * y / r2, (y * y + q2 * x * x) / r2};
        },
        {Vec2(0.5 * (r_in + r_out), 0), Vec2(0, r_out), Vec2(-r_in, 0), Vec2(0, -0.5 * (r_in + r_out))}, 2 * r_out);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n, my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    return sxy / sxx;
}

template <class F>
void guarded(ScenarioReport& rep, const std::string& name, const std::string& anchor, F&& body) {
    try {
        body();
    } catch (const std::exception& e) {
        rep.checks.push_back(error_check(name, anchor, e));
    }
}

}  // namespace

// ---- checks ----------------------------------------------------------------

Check inequality_check(std::string name, std::string anchor, double lhs, double rhs, double tol) {
    Check c;
    c.name = std::move(name);
    c.anchor = std::move(anchor);
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = lhs - rhs + tol * std::abs(rhs) + 1e-12;
    c.holds = finite(lhs) && finite(rhs) && c.margin >= 0.0;
    c.detail = fmt("lhs - rhs = %.6e, relative %.3e", lhs - rhs,
                   rhs != 0.0 ? (lhs - rhs) / std::abs(rhs) : lhs - rhs);
    return c;
}

Check closeness_check(std::string name, std::string anchor, double value, double target, double tol) {
    Check c;
    c.name = std::move(name);
    c.anchor = std::move(anchor);
    c.lhs = value;
    c.rhs = target;
    const double scale = target != 0.0 ? std::abs(target) : 1.0;
    const double err = std::abs(value - target);
    c.margin = tol * scale - err;
    c.holds = finite(value) && finite(target) && c.margin >= 0.0;
    c.detail = target != 0.0 ? fmt("relative error %.3e, tolerance %.1e", err / scale, tol)
                             : fmt("absolute error %.3e, tolerance %.1e", err, tol);
    return c;
}

Check boolean_check(std::string name, std::string anchor, bool ok, std::string detail) {
    Check c;
    c.name = std::move(name);
    c.anchor = std::move(anchor);
    c.lhs = ok ? 1.0 : 0.0;
    c.rhs = 1.0;
    c.margin = ok ? 0.0 : -1.0;
    c.holds = ok;
    c.detail = std::move(detail);
    return c;
}

Check error_check(std::string name, std::string anchor, const std::exception& e) {
    Check c = boolean_check(std::move(name), std::move(anchor), false, e.what());
    c.lhs = std::numeric_limits<double>::quiet_NaN();
    return c;
}

bool ScenarioReport::all_hold() const { return failures() == 0; }

int ScenarioReport::failures() const {
    int n = 0;
    for (const Check& c : checks)
        if (!c.informational && !c.holds) ++n;
    return n;
}

void ScenarioReport::append(const ScenarioReport& o) {
    checks.insert(checks.end(), o.checks.begin(), o.checks.end());
    series.insert(series.end(), o.series.begin(), o.series.end());
}

// ---- cones -------------------------------------------------------------------

double ConeSpec::c() const { return 1.0 - alpha / (2 * kPi); }

void ConeSpec::validate() const {
    if (!(finite(alpha) && alpha < 2 * kPi)) throw ConfigError(fmt("cone angle deficit %g must be below 2pi", alpha));
    if (!(r0 > 0.0)) throw ConfigError(fmt("inner radius %g must be positive", r0));
    if (!(R > r0)) throw ConfigError(fmt("outer radius %g must exceed the inner radius %g", R, r0));
    if (n_r < 2) throw ConfigError(fmt("cone mesh needs at least 2 rings, got %d", n_r));
}

MetricField cone_metric(double alpha, double r_in, double r_out) {
    const double c = 1 - alpha / (2 * kPi);
    if (!(c > 0)) throw ConfigError(fmt("cone angle deficit %g must be below 2pi", alpha));
    if (!(r_in > 0 && r_out > r_in)) throw ConfigError(fmt("cone metric needs 0 < r_in < r_out, got %g, %g", r_in, r_out));
    return polar_metric([c](const T2&, const T2&) { return T2(c); }, r_in, r_out);
}

MetricField dipole_metric(double eps, double r_in, double r_out) {
    if (!(eps >= 0 && eps < r_in && r_out > r_in))
        throw ConfigError(fmt("dipole metric needs 0 <= eps < r_in < r_out, got %g, %g, %g", eps, r_in, r_out));
    const double e = eps / kPi;
    return polar_metric([e](const T2& r, const T2& x) { return 1.0 + e * x / (r * r); }, r_in, r_out);
}

int cone_ring_points(int n_r, double r0, double R) {
    return std::max(8, static_cast<int>(std::lround(2 * kPi * n_r / std::log(R / r0))));
}

ConeGeometry build_cone(const ConeSpec& s) {
    s.validate();
    const double c = s.c();
    ConeGeometry g{cone_metric(s.alpha, s.r0, s.R),
                   meshgen::annulus({0, 0}, s.r0, s.R, s.n_r, cone_ring_points(s.n_r, s.r0, s.R)),
                   std::nullopt};
    if (s.alpha > 0.0) {
        const double sn = std::sqrt(1 - c * c);
        Map f = [c, sn](const T2& x, const T2& y) { return std::array<T2, 3>{c * x, c * y, sn * sqrt(x * x + y * y)}; };
        g.embedded = ImmersedChart::analytic(g.mesh, f, ImmersedChart::PolarDomain{{0, 0}, s.r0, s.R},
                                             fmt("embedded cone, alpha %.6g", s.alpha));
    }
    return g;
}

double cone_bending_exact(const ConeSpec& s) {
    const double c = s.c();
    return s.alpha > 0.0 ? 2 * kPi * (1 - c * c) / c * std::log(s.R / s.r0) : 0.0;
}

double cone_curvature_bound(const ConeSpec& s) {
    const double a = std::abs(s.alpha);
    return (4 * kPi - a) * a / (2 * kPi - s.alpha) * std::log(s.R / s.r0);
}

double cone_burgers_bound(const ConeSpec& s) {
    const double sn = std::sin(s.alpha / 2);
    return 4 * sn * sn / std::pow(2 * kPi - s.alpha, 3) * std::log(s.R / s.r0);
}

double cone_h1_exact(const ConeSpec& s) { return s.alpha * s.alpha / (2 * kPi * s.c()) * std::log(s.R / s.r0); }

FramedLoop cone_frame_loop(double c, double r, int n) {
    Vec3List g, N;
    if (c <= 1.0) {
        const double sn = std::sqrt(1 - c * c);
        for (int k = 0; k < n; ++k) {
            const double p = 2 * kPi * k / n;
            g.emplace_back(c * r * std::cos(p), c * r * std::sin(p), sn * r);
            N.emplace_back(-sn * std::cos(p), -sn * std::sin(p), c);
        }
        return FramedLoop::smooth(g, N);
    }
    // spherical curve of length 2πc: latitude θ = a sin 2t, a by bisection
    const int m = 2, nq = 4096;
    auto length = [&](double a) {
        std::vector<double> v(nq);
        for (int k = 0; k < nq; ++k) {
            const double t = 2 * kPi * k / nq, th = a * std::sin(m * t), dth = a * m * std::cos(m * t);
            v[k] = std::sqrt(std::cos(th) * std::cos(th) + dth * dth);
        }
        return spectral::periodic_trapezoid(v, 2 * kPi);
    };
    double lo = 0.0, hi = 1.5;
    if (length(hi) < 2 * kPi * c) throw ConfigError(fmt("no wavy cone of total angle 2pi*%g", c));
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (length(mid) < 2 * kPi * c ? lo : hi) = mid;
    }
    const double a = 0.5 * (lo + hi);
    for (int k = 0; k < n; ++k) {
        const double t = 2 * kPi * k / n, th = a * std::sin(m * t), dth = a * m * std::cos(m * t);
        const Vec3 gm(std::cos(th) * std::cos(t), std::cos(th) * std::sin(t), std::sin(th));
        const Vec3 dg(-std::sin(th) * dth * std::cos(t) - std::cos(th) * std::sin(t),
                      -std::sin(th) * dth * std::sin(t) + std::cos(th) * std::cos(t), std::cos(th) * dth);
        g.push_back(r * gm);
        N.push_back(gm.cross(dg).normalized());
    }
    return FramedLoop::smooth(g, N);
}

namespace {

ScenarioReport cone_one(const ConeSpec& base, int levels, const Tolerances& tol, int jobs) {
    ScenarioReport rep;
    const double alpha = base.alpha, c = base.c();
    const std::string tag = fmt("cone alpha=%.6g", alpha);
    const double h1 = cone_h1_exact(base);

    Series conv{"cone_convergence",
                {"alpha", "level", "n_r", "vertices", "h1_sq", "h1_rel_error", "nodal_max_error", "flux"},
                {}};
    std::vector<double> err, hsz;
    double last_energy = 0.0, last_flux = 0.0, l1 = 0.0;
    bool converged = true;
    guarded(rep, tag + ": potential", "cone.potential", [&] {
        for (int lv = 0; lv < levels; ++lv) {
            ConeSpec s = base;
            s.n_r = base.n_r << lv;
            const ConeGeometry geo = build_cone(s);
            PoissonProblem p;
            p.mesh = geo.mesh;
            p.metric = geo.metric;
            p.hole_charges = {alpha};
            const PotentialSolution sol = solve_floating_potential(p);
            converged = converged && sol.converged;
            double e = 0.0;
            for (int v = 0; v < p.mesh.num_vertices(); ++v) {
                const double r = p.mesh.vertices()[v].norm();
                e = std::max(e, std::abs(sol.u[v] + alpha / (2 * kPi * c) * std::log(r / base.R)));
            }
            err.push_back(e);
            hsz.push_back(1.0 / s.n_r);
            last_energy = sol.energy;
            last_flux = sol.flux.at(0);
            l1 = l1mc_norm(p);
            conv.rows.push_back({alpha, double(lv), double(s.n_r), double(p.mesh.num_vertices()), sol.energy,
                                 h1 != 0.0 ? std::abs(sol.energy - h1) / h1 : sol.energy, e, sol.flux.at(0)});
        }
        rep.checks.push_back(boolean_check(tag + ": conjugate gradients converged", "solver", converged));
        rep.checks.push_back(
            closeness_check(tag + ": H^-1 norm squared at the finest level", "cone.h1_norm", last_energy, h1, 1e-2));
        if (levels >= 2) {
            bool mono = true;
            for (std::size_t i = 1; i < err.size(); ++i) mono = mono && err[i] < err[i - 1];
            if (alpha == 0.0) mono = err.back() < 1e-12;
            rep.checks.push_back(boolean_check(tag + ": nodal error decreases under refinement",
                                               "cone.potential_convergence", mono,
                                               fmt("errors %.3e .. %.3e", err.front(), err.back())));
            if (alpha != 0.0) {
                const std::size_t k = err.size() - 1;
                const double order = std::log(err[k - 1] / err[k]) / std::log(hsz[k - 1] / hsz[k]);
                rep.checks.push_back(
                    inequality_check(tag + ": observed order of the nodal error", "cone.potential_convergence",
                                     order, 1.0, 0.0));
            }
        }
        rep.checks.push_back(closeness_check(tag + ": hole flux equals the charge", "flux", last_flux, alpha,
                                             alpha != 0.0 ? tol.flux : 1e-10));
        rep.checks.push_back(closeness_check(tag + ": L1 norm of the curvature", "cone.l1_norm", l1, std::abs(alpha),
                                             1e-12));
    });
    rep.series.push_back(conv);

    // Burgers magnitude 2r|sin πc| by the frame, its dual and the metric
    const double radii[3] = {2 * base.r0, 0.5 * (base.r0 + base.R), 0.9 * base.R};
    guarded(rep, tag + ": Burgers vectors", "cone.burgers", [&] {
        const MetricField g = polar_metric([c](const T2&, const T2&) { return T2(c); }, base.r0, base.R);
        for (double r : radii) {
            double expect = 2 * r * std::abs(std::sin(kPi * c));
            if (expect < 1e-12) expect = 0.0;
            const double t = tol.burg_analytic;
            const FramedLoop L = cone_frame_loop(c, r);
            const BurgersResult b = burgers_vector(L);
            const BurgersResult bi = burgers_intrinsic(g, CurveInChart::circle({0, 0}, r, 1024));
            rep.checks.push_back(closeness_check(fmt("%s: |B| at r=%.4g, primal route", tag.c_str(), r),
                                                 "cone.burgers", b.magnitude, expect, t));
            rep.checks.push_back(closeness_check(fmt("%s: |B| at r=%.4g, dual route", tag.c_str(), r),
                                                 "cone.burgers", b.dual_magnitude, expect, t));
            rep.checks.push_back(closeness_check(fmt("%s: |B| at r=%.4g, from the metric", tag.c_str(), r),
                                                 "cone.burgers", bi.magnitude, expect, t));
            const BurgersBound bb = check_burgers_bound(L, tol.ineq);
            rep.checks.push_back(inequality_check(fmt("%s: leaf Burgers bound at r=%.4g", tag.c_str(), r),
                                                  "burgers_bound", bb.lhs, bb.rhs, tol.ineq));
        }
    });

    const double rhs1 = cone_curvature_bound(base), rhs2 = cone_burgers_bound(base);
    if (alpha > 0.0) {
        double bend = 0.0;
        guarded(rep, tag + ": embedded cone bending", "cone.bending", [&] {
            const ConeGeometry geo = build_cone(base);
            bend = bending_energy(*geo.embedded, Quadrature::Polar, 96, 512);
            rep.checks.push_back(closeness_check(tag + ": bending energy of the embedded cone", "cone.bending", bend,
                                                 cone_bending_exact(base), 1e-6));
            rep.checks.push_back(inequality_check(tag + ": bending >= (4pi-|a|)|a|/(2pi-a) log(R/r0)",
                                                  "cone.bound_curvature", bend, rhs1, tol.ineq));
            rep.checks.push_back(inequality_check(tag + ": bending >= 4 sin^2(a/2)/(2pi-a)^3 log(R/r0)",
                                                  "cone.bound_burgers", bend, rhs2, tol.ineq));
            if (l1 > 0.0 && last_energy > 0.0)
                rep.checks.push_back(inequality_check(tag + ": bending >= (4pi-L1)/L1 times the FEM H^-1 norm",
                                                      "main.inequality", bend,
                                                      (4 * kPi - l1) * last_energy / l1, tol.ineq));
        });
        guarded(rep, tag + ": chain on the embedded cone", "main.chain", [&] {
            ConeSpec s = base;
            s.n_r = base.chain_n_r;
            const ConeGeometry geo = build_cone(s);
            ChainOptions opt;
            opt.tol_ineq = tol.ineq;
            opt.tol_flux = tol.flux;
            opt.tol_coarea = tol.coarea;
            opt.jobs = jobs;
            const ChainReport ch = verify_main_theorem(*geo.embedded, opt);
            for (std::size_t i = 0; i < ch.steps.size(); ++i) {
                const ChainStep& st = ch.steps[i];
                rep.checks.push_back(inequality_check(fmt("%s: chain step %zu, %s", tag.c_str(), i + 1, st.name.c_str()),
                                                      "main.chain", st.lhs, st.rhs, tol.ineq));
            }
            rep.checks.push_back(inequality_check(tag + ": main inequality from the chain", "main.inequality", ch.lhs,
                                                  ch.rhs, tol.ineq));
            rep.checks.push_back(boolean_check(
                tag + ": isoperimetric inequality on every leaf", "loop.iso",
                ch.leaf_iso_checked > 0 && ch.leaf_iso_failed == 0,
                fmt("%d leaves, %d checked, %d failed, ratios %.6f .. %.6f", ch.leaves, ch.leaf_iso_checked,
                    ch.leaf_iso_failed, ch.leaf_iso_min_ratio, ch.leaf_iso_max_ratio)));
            rep.checks.push_back(boolean_check(tag + ": leaf flux identity on every leaf", "foliation.flux",
                                               ch.leaf_flux_failed == 0,
                                               fmt("worst residual %.3e", ch.worst_leaf_flux_residual)));
            rep.checks.push_back(closeness_check(tag + ": coarea residual", "foliation.coarea", ch.coarea_residual, 0.0,
                                                 tol.coarea));
        });
        guarded(rep, tag + ": Burgers foliation bound", "cone.bound_burgers", [&] {
            const ConeGeometry geo = build_cone(base);
            std::vector<CurveInChart> loops;
            std::vector<double> t;
            const int n = 97;
            for (int i = 0; i < n; ++i) {
                const double r = base.r0 * std::pow(base.R / base.r0, double(i) / (n - 1));
                loops.push_back(CurveInChart::circle({0, 0}, r, 512));
                t.push_back(r);
            }
            const FoliationBound fb = burgers_foliation_bound(*geo.embedded, loops, t, tol.ineq);
            rep.checks.push_back(closeness_check(tag + ": Burgers bound over the constant-r foliation",
                                                 "cone.bound_burgers", fb.bound, rhs2, 1e-3));
            if (bend > 0.0)
                rep.checks.push_back(inequality_check(tag + ": bending >= foliation Burgers bound", "burgers_bound",
                                                      bend, fb.bound, tol.ineq));
        });
    }
    return rep;
}

}  // namespace

ScenarioReport run_cone_verification(const ConeSpec& base, const std::vector<double>& alphas, int levels,
                                     const Tolerances& tol, int jobs) {
    if (levels < 1) throw ConfigError(fmt("levels must be at least 1, got %d", levels));
    std::vector<ConeSpec> specs;
    for (double a : alphas) {
        ConeSpec s = base;
        s.alpha = a;
        s.validate();
        specs.push_back(s);
    }
    std::vector<ScenarioReport> parts(specs.size());
    if (jobs > 1 && specs.size() > 1) {
        std::vector<std::future<ScenarioReport>> fut;
        for (const ConeSpec& s : specs)
            fut.push_back(std::async(std::launch::async, [&tol, levels, s] { return cone_one(s, levels, tol, 1); }));
        for (std::size_t i = 0; i < fut.size(); ++i) parts[i] = fut[i].get();
    } else {
        for (std::size_t i = 0; i < specs.size(); ++i) parts[i] = cone_one(specs[i], levels, tol, jobs);
    }
    ScenarioReport rep;
    rep.scenario = "cone";
    Series conv{"cone_convergence", {}, {}}, bounds{"cone_bounds",
                                                     {"alpha", "log_R_over_r0", "curvature_bound", "burgers_bound",
                                                      "embedded_bending", "h1_sq"},
                                                     {}};
    for (std::size_t i = 0; i < parts.size(); ++i) {
        rep.checks.insert(rep.checks.end(), parts[i].checks.begin(), parts[i].checks.end());
        for (const Series& s : parts[i].series) {
            conv.columns = s.columns;
            conv.rows.insert(conv.rows.end(), s.rows.begin(), s.rows.end());
        }
        for (double ratio : {10.0, 20.0, 40.0, 80.0}) {
            ConeSpec s = specs[i];
            s.R = s.r0 * ratio;
            bounds.rows.push_back({s.alpha, std::log(ratio), cone_curvature_bound(s), cone_burgers_bound(s),
                                   cone_bending_exact(s), cone_h1_exact(s)});
        }
    }
    rep.series = {conv, bounds};
    return rep;
}

// ---- E-cones -----------------------------------------------------------------

ImmersedChart build_econe(int k, double r0, double R, int n_r) {
    if (k < 0) throw ConfigError(fmt("E-cone order must be non-negative, got %d", k));
    ConeSpec chk;
    chk.r0 = r0;
    chk.R = R;
    chk.n_r = n_r;
    chk.validate();
    Map f = [k](const T2& x, const T2& y) {
        T2 re = x, im = y;
        for (int j = 0; j < k; ++j) {
            const T2 nr = re * x - im * y;
            im = re * y + im * x;
            re = nr;
        }
        const T2 s = pow(x * x + y * y, 0.5 * k);
        return std::array<T2, 3>{re / s, im / s, T2(0.0)};
    };
    return ImmersedChart::analytic(meshgen::annulus({0, 0}, r0, R, n_r, (k + 1) * cone_ring_points(n_r, r0, R)), f,
                                   ImmersedChart::PolarDomain{{0, 0}, r0, R}, fmt("E-cone, k=%d", k));
}

ScenarioReport run_econe_verification(const std::vector<int>& ks, double r0, double R, const Tolerances& tol) {
    ScenarioReport rep;
    rep.scenario = "econe";
    guarded(rep, "trivial frame", "loop.extendable", [&] {
        rep.checks.push_back(boolean_check("trivial frame (planar circle, constant normal) is extendable",
                                           "loop.extendable", is_extendable(cone_frame_loop(1.0, 1.0))));
    });
    Series ser{"econe", {"k", "alpha", "bending", "extendable", "hole_curvature"}, {}};
    for (int k : ks) {
        const std::string tag = fmt("E-cone k=%d", k);
        guarded(rep, tag, "econe", [&] {
            const ImmersedChart f = build_econe(k, r0, R, 16);
            const double c = k + 1.0, alpha = -2 * kPi * k;
            double worst = 0.0;
            for (const Vec2& p : {Vec2(0.3, 0.4), Vec2(-0.7, 0.1), Vec2(0.05, -0.5)}) {
                const Mat2 g = f.geometry_at(p).g;
                const double r2 = p.squaredNorm();
                Mat2 e;
                e << (p.x() * p.x() + c * c * p.y() * p.y()) / r2, (1 - c * c) * p.x() * p.y() / r2,
                    (1 - c * c) * p.x() * p.y() / r2, (p.y() * p.y() + c * c * p.x() * p.x()) / r2;
                worst = std::max(worst, (g - e).cwiseAbs().maxCoeff());
            }
            rep.checks.push_back(closeness_check(tag + ": pullback metric is dr^2 + ((k+1) r)^2 dphi^2", "econe.metric",
                                                 worst, 0.0, tol.curv_analytic));
            const double bend = bending_energy(f, Quadrature::Polar, 48, 256 * (k + 1));
            rep.checks.push_back(closeness_check(tag + ": zero bending", "econe.bending", bend, 0.0, 1e-12));
            const FramedLoop loop = restrict_frame(f, CurveInChart::circle({0, 0}, 0.5 * (r0 + R), 1024 * (k + 1)));
            const bool ext = is_extendable(loop);
            rep.checks.push_back(boolean_check(tag + (k % 2 == 0 ? ": boundary loop extendable (even k)"
                                                                 : ": boundary loop not extendable (odd k)"),
                                               "econe.parity", ext == (k % 2 == 0),
                                               fmt("total rotation class %s", ext ? "nontrivial" : "trivial")));
            const double Ki = enclosed_curvature(f, 1).K_i;
            rep.checks.push_back(closeness_check(tag + ": hole curvature equals -2 pi k", "econe.hole_curvature", Ki,
                                                 alpha, k ? tol.curv_analytic : 1e-9));
            if (k % 2 == 1) {
                bool refused = false;
                std::string what;
                try {
                    (void)verify_main_theorem(f);
                } catch (const NotExtendable& e) {
                    refused = true;
                    what = e.what();
                }
                rep.checks.push_back(boolean_check(tag + ": main inequality is not asserted on a non-extendable loop",
                                                   "main.extendability", refused, what));
            } else if (k >= 2) {
                Check v = inequality_check(tag + ": L1 norm reaches 4 pi, main inequality vacuous", "main.vacuous",
                                           std::abs(alpha), 4 * kPi, 0.0);
                v.informational = true;
                rep.checks.push_back(v);
            }
            ser.rows.push_back({double(k), alpha, bend, ext ? 1.0 : 0.0, Ki});
        });
    }
    rep.series.push_back(ser);
    return rep;
}

// ---- dipole ------------------------------------------------------------------

void DipoleSpec::validate() const {
    if (!(r0 > 0.0)) throw ConfigError(fmt("inner radius %g must be positive", r0));
    if (!(eps >= 0.0 && eps < r0)) throw ConfigError(fmt("dislocation size %g must lie in [0, r0)", eps));
    if (!(R > 2 * r0)) throw ConfigError(fmt("outer radius %g must exceed twice the inner radius", R));
    if (n_r < 2) throw ConfigError(fmt("dipole mesh needs at least 2 rings, got %d", n_r));
}

DipoleGeometry build_dipole(const DipoleSpec& s) {
    s.validate();
    return {dipole_metric(s.eps, s.r0, s.R),
            meshgen::annulus({0, 0}, s.r0, s.R, s.n_r, cone_ring_points(s.n_r, s.r0, s.R))};
}

FramedLoop dipole_candidate_loop(const DipoleSpec& s, double r, int n, int wiggles, double amplitude) {
    s.validate();
    const double e = s.eps / kPi;
    if (!(r > e)) throw ConfigError(fmt("radius %g too small for the dipole metric", r));
    // unit-sphere curve θ = a sin(m t), scaled so its length is 2πr
    auto unit_curve = [&](double t) {
        const T2 T = T2::var(t, 0);
        const T2 th = amplitude * sin(double(wiggles) * T);
        return std::array<T2, 3>{cos(th) * cos(T), cos(th) * sin(T), sin(th)};
    };
    std::vector<double> speed(n);
    std::vector<std::array<T2, 3>> raw(n);
    for (int k = 0; k < n; ++k) {
        raw[k] = unit_curve(2 * kPi * k / n);
        speed[k] = Vec3(raw[k][0].d[0], raw[k][1].d[0], raw[k][2].d[0]).norm();
    }
    const double lam = spectral::periodic_trapezoid(speed, 2 * kPi);
    const double rho = 2 * kPi * r / lam;
    if (!(1.0 / rho > 1.0 / (r - e)))
        throw ConfigError("candidate sphere too large for the geodesic curvature of the loop");
    for (double& v : speed) v *= rho;
    const std::vector<double> S = spectral::cumulative_integral(speed, 2 * kPi);
    Vec3List gamma(n), N(n);
    for (int k = 0; k < n; ++k) {
        const Vec3 g(raw[k][0].v, raw[k][1].v, raw[k][2].v);
        const Vec3 d1 = rho * Vec3(raw[k][0].d[0], raw[k][1].d[0], raw[k][2].d[0]);
        const Vec3 d2 = rho * Vec3(raw[k][0].h[0], raw[k][1].h[0], raw[k][2].h[0]);
        const double v = d1.norm();
        const Vec3 tau = d1 / v;
        const Vec3 css = (d2 - d2.dot(tau) * tau) / (v * v);
        const Vec3 nu = g.normalized(), side = nu.cross(tau);
        const double ks = css.dot(side);
        // arclength s ↦ φ on the constant-r loop: rφ + e sin φ = s
        double phi = S[k] / r;
        for (int it = 0; it < 50; ++it) {
            const double dphi = (r * phi + e * std::sin(phi) - S[k]) / (r + e * std::cos(phi));
            phi -= dphi;
            if (std::abs(dphi) < 1e-16) break;
        }
        const double kg = 1.0 / (r + e * std::cos(phi));
        const double A = std::hypot(ks, 1.0 / rho), beta = std::atan2(ks, 1.0 / rho);
        const double psi = std::asin(kg / A) - beta;
        gamma[k] = rho * g;
        N[k] = std::cos(psi) * nu + std::sin(psi) * side;
    }
    return FramedLoop::smooth(gamma, N);
}

double dipole_scaling_slope(const DipoleSpec& s) { return s.eps * s.eps / (64 * kPi * kPi * kPi * s.r0 * s.r0); }

namespace {

// Simpson in log r of f(r)·r over [a, b]
double log_simpson(double a, double b, int n, const std::function<double(double)>& f) {
    if (n % 2 == 0) ++n;
    const double h = std::log(b / a) / (n - 1);
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        const double r = a * std::exp(h * i);
        v[i] = f(r) * r;
    }
    return quad::simpson(v, h);
}

}  // namespace

double dipole_improved_bound(const DipoleSpec& s, int n_radii) {
    const DipoleGeometry geo = build_dipole(s);
    const auto circ = [](double r) { return CurveInChart::circle({0, 0}, r, 1024); };
    const double r1 = 2 * s.r0;
    const double T = burgers_intrinsic(geo.metric, circ(r1)).magnitude / (std::sqrt(2.0) * curve_length(geo.metric, circ(r1)));
    return log_simpson(r1, s.R, n_radii, [&](double r) { return T * T / curve_length(geo.metric, circ(r)); });
}

double dipole_naive_bound(const DipoleSpec& s, int n_radii) {
    const DipoleGeometry geo = build_dipole(s);
    return log_simpson(s.r0, s.R, n_radii, [&](double r) {
        const CurveInChart c = CurveInChart::circle({0, 0}, r, 1024);
        const double L = curve_length(geo.metric, c), B = burgers_intrinsic(geo.metric, c).magnitude;
        return B * B / (L * L * L);
    });
}

double dipole_pair_h1(double alpha, double r0, double R, double h_min) {
    PoissonProblem p;
    p.mesh = meshgen::perforated_disc(R, {{Vec2(-r0, 0), 0.5 * r0}, {Vec2(r0, 0), 0.5 * r0}}, h_min, R / 16);
    p.metric = MetricField::euclidean();
    p.hole_charges = {alpha, -alpha};
    const PotentialSolution sol = solve_floating_potential(p);
    if (!sol.converged) throw SingularSystem("conjugate gradients did not converge on the dipole pair");
    return sol.energy;
}

ScenarioReport run_dipole_verification(const DipoleSpec& s, const std::vector<double>& ratios, const Tolerances& tol) {
    s.validate();
    ScenarioReport rep;
    rep.scenario = "dipole";
    const DipoleGeometry geo = build_dipole(s);
    guarded(rep, "dipole metric is flat", "dipole.flat", [&] {
        double worst = 0.0;
        for (int i = 0; i <= 8; ++i)
            for (int j = 0; j < 16; ++j) {
                const double r = s.r0 * std::pow(s.R / s.r0, (i + 0.5) / 9.0), t = 2 * kPi * (j + 0.3) / 16;
                worst = std::max(worst, std::abs(brioschi_curvature(geo.metric, Vec2(r * std::cos(t), r * std::sin(t)))));
            }
        rep.checks.push_back(closeness_check("dipole metric is flat", "dipole.flat", worst, 0.0, tol.curv_analytic));
    });
    const double radii[3] = {2 * s.r0, 0.5 * s.R, 0.9 * s.R};
    guarded(rep, "dipole Burgers vectors", "dipole.burgers", [&] {
        double lo = 1e300, hi = -1e300;
        for (double r : radii) {
            const CurveInChart c = CurveInChart::circle({0, 0}, r, 1024);
            const double B = burgers_intrinsic(geo.metric, c).magnitude;
            lo = std::min(lo, B), hi = std::max(hi, B);
            rep.checks.push_back(
                closeness_check(fmt("dipole: |B| = eps at r=%.4g", r), "dipole.burgers", B, s.eps, tol.burg_analytic));
            rep.checks.push_back(closeness_check(fmt("dipole: perimeter of the constant-r loop at r=%.4g", r),
                                                 "dipole.perimeter", curve_length(geo.metric, c), 2 * kPi * r, 1e-10));
        }
        rep.checks.push_back(closeness_check("dipole: |B| is independent of r", "dipole.burgers", hi - lo, 0.0,
                                             tol.burg_analytic * std::max(s.eps, 1e-300)));
    });
    guarded(rep, "dipole candidate frames", "dipole.naive_leaf", [&] {
        for (double r : radii) {
            const FramedLoop L = dipole_candidate_loop(s, r);
            const double turn = normal_turning(L);
            rep.checks.push_back(closeness_check(fmt("dipole candidate at r=%.4g: length 2 pi r", r), "dipole.perimeter",
                                                 L.length(), 2 * kPi * r, 1e-9));
            rep.checks.push_back(closeness_check(fmt("dipole candidate at r=%.4g: total geodesic curvature 2 pi", r),
                                                 "dipole.candidate", total_geodesic_curvature(L), 2 * kPi, 1e-9));
            rep.checks.push_back(closeness_check(fmt("dipole candidate at r=%.4g: |B| = eps", r), "dipole.burgers",
                                                 burgers_vector(L).magnitude, s.eps, s.eps > 0 ? 1e-6 : 1e-9));
            rep.checks.push_back(inequality_check(fmt("dipole candidate at r=%.4g: normal turning >= eps/(2 pi r)", r),
                                                  "dipole.naive_leaf", turn, s.eps / (2 * kPi * r), tol.ineq));
        }
    });
    Series ser{"dipole_bounds", {"R_over_r0", "log_R_over_r0", "improved_bound", "naive_bound", "pair_h1_sq"}, {}};
    guarded(rep, "dipole scaling", "dipole.scaling", [&] {
        const double alpha = 2 * std::asin(s.eps / (4 * s.r0));
        std::vector<double> x, y, naive, pair;
        for (double q : ratios) {
            DipoleSpec t = s;
            t.R = q * s.r0;
            x.push_back(std::log(q));
            y.push_back(dipole_improved_bound(t));
            naive.push_back(dipole_naive_bound(t));
            pair.push_back(dipole_pair_h1(alpha, s.r0, t.R, s.r0 / 12));
            ser.rows.push_back({q, x.back(), y.back(), naive.back(), pair.back()});
        }
        const double slope_expect = dipole_scaling_slope(s);
        if (x.size() >= 2) {
            const double slope = ls_slope(x, y);
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / x.size(), my += y[i] / x.size();
            double resid = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) resid = std::max(resid, std::abs(y[i] - my - slope * (x[i] - mx)));
            const double span = std::abs(y.back() - y.front());
            if (s.eps > 0) {
                rep.checks.push_back(closeness_check("dipole: slope of the improved bound in log(R/r0)", "dipole.scaling",
                                                     slope, slope_expect, 0.25));
                rep.checks.push_back(closeness_check("dipole: improved bound is affine in log(R/r0)", "dipole.scaling",
                                                     resid / span, 0.0, 1e-3));
                for (std::size_t i = 1; i < x.size(); ++i)
                    if (std::abs(x[i] - x[i - 1] - std::log(2.0)) < 1e-12) {
                        Check c = closeness_check(fmt("dipole: doubling R/r0 from %g adds eps^2/(64 pi^3 r0^2) log 2",
                                                      std::exp(x[i - 1])),
                                                  "dipole.scaling", y[i] - y[i - 1], slope_expect * std::log(2.0), 0.25);
                        rep.checks.push_back(c);
                    }
                const double lo = *std::min_element(pair.begin(), pair.end()),
                             hi = *std::max_element(pair.begin(), pair.end());
                rep.checks.push_back(closeness_check("dipole pair: H^-1 norm varies by less than 10% over R/r0",
                                                     "dipole.h1_bounded", (hi - lo) / lo, 0.0, 0.1));
                Check nv = closeness_check("dipole: naive foliation bound saturates", "dipole.naive_bound",
                                           naive.back() / naive[naive.size() - 2] - 1.0, 0.0, 0.01);
                nv.informational = true;
                rep.checks.push_back(nv);
            } else {
                rep.checks.push_back(closeness_check("dipole: zero dislocation gives a zero bound", "dipole.scaling",
                                                     *std::max_element(y.begin(), y.end()), 0.0, 1e-12));
            }
        }
    });
    rep.series.push_back(ser);
    return rep;
}

// ---- caps --------------------------------------------------------------------

void CapSpec::validate() const {
    if (!(theta0 > 0.0 && theta0 <= kPi / 2 + 1e-15))
        throw ConfigError(fmt("cap angle %g must lie in (0, pi/2]", theta0));
    if (n_r < 2 || n_phi < 8) throw ConfigError("cap mesh too coarse");
}

ImmersedChart build_cap(const CapSpec& s) {
    s.validate();
    const double R = std::tan(s.theta0 / 2);
    Map f = [](const T2& x, const T2& y) {
        const T2 D = 1.0 + x * x + y * y;
        return std::array<T2, 3>{2.0 * x / D, 2.0 * y / D, 2.0 / D - 1.0};
    };
    return ImmersedChart::analytic(meshgen::disc({0, 0}, R, s.n_r, s.n_phi), f, ImmersedChart::PolarDomain{{0, 0}, 0.0, R},
                                   fmt("spherical cap, theta %.6g", s.theta0));
}

FramedLoop cap_rim_loop(double th, int n) {
    Vec3List g;
    for (int k = 0; k < n; ++k) {
        const double p = 2 * kPi * k / n;
        g.emplace_back(std::sin(th) * std::cos(p), std::sin(th) * std::sin(p), std::cos(th));
    }
    return FramedLoop::smooth(g, g);
}

SphereCurve equator_curve(int n, int turns) {
    Vec3List pts;
    for (int k = 0; k < n * turns; ++k) {
        const double t = 2 * kPi * k / n;
        pts.emplace_back(std::cos(t), std::sin(t), 0.0);
    }
    return SphereCurve::make(pts);
}

ScenarioReport run_cap_verification(const std::vector<double>& thetas, std::int64_t n_mc, std::uint64_t seed,
                                    const Tolerances& tol, int jobs) {
    ScenarioReport rep;
    rep.scenario = "cap";
    Series ser{"cap", {"theta0", "iso_lhs", "iso_rhs", "gauss_image_length", "QK", "K_total"}, {}};
    for (double th : thetas) {
        const std::string tag = fmt("cap theta=%.6g", th);
        guarded(rep, tag, "cap", [&] {
            CapSpec cs;
            cs.theta0 = th;
            const ImmersedChart f = build_cap(cs);
            const IsoCheck iso = check_iso_inequality(cap_rim_loop(th), tol.ineq);
            rep.checks.push_back(boolean_check(tag + ": rim loop is extendable", "loop.extendable", iso.extendable));
            rep.checks.push_back(closeness_check(tag + ": rim loop isoperimetric inequality is an equality", "loop.iso",
                                                 iso.lhs, iso.rhs, 1e-6));
            rep.checks.push_back(closeness_check(tag + ": normal turning squared is 4 pi^2 sin^2", "loop.iso", iso.lhs,
                                                 4 * kPi * kPi * std::sin(th) * std::sin(th), 1e-6));
            const LemmaReport l7 = check_lemma7(f, tol.ineq);
            const LemmaReport l10 = check_lemma10(f, tol.ineq);
            const LemmaReport di = check_disc_isoperimetric(f, tol.ineq);
            rep.checks.push_back(closeness_check(tag + ": L^2 = 4 pi int(Q o N)K - (int K)^2", "disc.weiner_step",
                                                 l7.lhs, l7.rhs, 1e-6));
            rep.checks.push_back(
                closeness_check(tag + ": int(Q o N)K = |int K|", "disc.degree_step", l10.lhs, l10.rhs, 1e-6));
            rep.checks.push_back(closeness_check(tag + ": L^2 = (4 pi - |int K|)|int K|", "disc.isoperimetric", di.lhs,
                                                 di.rhs, 1e-6));
            ser.rows.push_back({th, iso.lhs, iso.rhs, l7.L, l7.QK, l7.K_total});
        });
    }
    rep.series.push_back(ser);
    Series w{"weiner", {"turns", "lhs", "estimate", "stderr", "n_mc"}, {}};
    for (int turns : {1, 2}) {
        const std::string tag = turns == 1 ? "equator" : "doubled equator";
        guarded(rep, tag, "weiner", [&] {
            const WeinerReport r = weiner_check(equator_curve(64, turns), n_mc, seed, jobs);
            const double target = 4 * kPi * kPi * turns * turns;
            rep.checks.push_back(closeness_check(tag + ": squared length", "weiner", r.lhs, target, 1e-9));
            Check c = closeness_check(tag + ": Monte Carlo estimate within 3 standard errors", "weiner", r.estimate,
                                      target, 3 * r.stderr_ / target);
            c.detail += fmt(", standard error %.4g", r.stderr_);
            rep.checks.push_back(c);
            w.rows.push_back({double(turns), r.lhs, r.estimate, r.stderr_, double(r.n_mc)});
        });
    }
    rep.series.push_back(w);
    return rep;
}

// ---- graphs ------------------------------------------------------------------

GraphSpec graph_bowl() {
    return {"bowl", [](const T2& x, const T2& y) { return 0.5 * (x * x + y * y); }};
}
GraphSpec graph_saddle() {
    return {"saddle", [](const T2& x, const T2& y) { return x * y; }};
}
GraphSpec graph_linear() {
    return {"linear", [](const T2& x, const T2& y) { return 0.3 * x - 0.7 * y + 0.1; }};
}
GraphSpec graph_random_cubic(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-0.6, 0.6);
    std::array<double, 7> a;
    for (double& c : a) c = U(rng);
    return {fmt("cubic seed %llu", static_cast<unsigned long long>(seed)), [a](const T2& x, const T2& y) {
                return a[0] * x * x + a[1] * x * y + a[2] * y * y + a[3] * x * x * x + a[4] * x * x * y +
                       a[5] * x * y * y + a[6] * y * y * y;
            }};
}
GraphSpec graph_cone_tip() {
    return {"cone tip", [](const T2& x, const T2& y) { return sqrt(x * x + y * y); }};
}

ImmersedChart graph_chart(const GraphSpec& g, double eps, bool polar, int n_r, int n_phi) {
    const double s = std::sqrt(eps);
    HeightFunction u = g.u;
    Map f = [u, s](const T2& x, const T2& y) { return std::array<T2, 3>{x, y, s * u(x, y)}; };
    std::optional<ImmersedChart::PolarDomain> pd;
    if (polar) pd = ImmersedChart::PolarDomain{{0, 0}, 0.0, 1.0};
    return ImmersedChart::analytic(meshgen::disc({0, 0}, 1.0, n_r, n_phi), f, pd, "graph of " + g.name);
}

namespace {

T2 eval_u(const GraphSpec& g, double x, double y) { return g.u(T2::var(x, 0), T2::var(y, 1)); }

bool finite_jet(const T2& t) {
    return finite(t.v) && finite(t.d[0]) && finite(t.d[1]) && finite(t.h[0]) && finite(t.h[1]) && finite(t.h[2]);
}

double hess_norm(const T2& t) { return std::sqrt(t.h[0] * t.h[0] + 2 * t.h[1] * t.h[1] + t.h[2] * t.h[2]); }
double hess_det(const T2& t) { return t.h[0] * t.h[2] - t.h[1] * t.h[1]; }

SurfaceJet graph_jet(const T2& u, double x, double y, double s) {
    SurfaceJet j;
    j.f = Vec3(x, y, s * u.v);
    j.fu = Vec3(1, 0, s * u.d[0]);
    j.fv = Vec3(0, 1, s * u.d[1]);
    j.fuu = Vec3(0, 0, s * u.h[0]);
    j.fuv = Vec3(0, 0, s * u.h[1]);
    j.fvv = Vec3(0, 0, s * u.h[2]);
    return j;
}

constexpr int kBoundarySamples = 1024;

}  // namespace

void require_c2(const GraphSpec& g) {
    std::vector<Vec2> pts{Vec2(0, 0)};
    for (int i = 1; i <= 16; ++i)
        for (int j = 0; j < 32; ++j) {
            const double r = i / 16.0, t = 2 * kPi * j / 32;
            pts.emplace_back(r * std::cos(t), r * std::sin(t));
        }
    for (const Vec2& p : pts)
        if (!finite_jet(eval_u(g, p.x(), p.y())))
            throw NotC2(fmt("%s: second derivatives are not finite at (%.4g, %.4g)", g.name.c_str(), p.x(), p.y()));
}

LinearizedInequality linearized_inequality(const GraphSpec& g, double tol_ineq) {
    require_c2(g);
    LinearizedInequality out;
    std::vector<double> b(kBoundarySamples);
    for (int k = 0; k < kBoundarySamples; ++k) {
        const double t = 2 * kPi * k / kBoundarySamples;
        b[k] = hess_norm(eval_u(g, std::cos(t), std::sin(t)));
    }
    out.boundary_hessian = spectral::periodic_trapezoid(b, 2 * kPi);
    const quad::PolarRule pr = quad::polar({0, 0}, 0.0, 1.0, 48, 192);
    for (std::size_t i = 0; i < pr.nodes.size(); ++i)
        out.det_integral += pr.weights[i] * hess_det(eval_u(g, pr.nodes[i].x(), pr.nodes[i].y()));
    out.lhs = out.boundary_hessian * out.boundary_hessian;
    out.rhs = 4 * kPi * std::abs(out.det_integral);
    out.holds = out.lhs >= out.rhs * (1 - tol_ineq) - 1e-12;
    return out;
}

ExpansionFit expansion_fit(const GraphSpec& g, const std::vector<double>& eps) {
    require_c2(g);
    ExpansionFit fit;
    fit.eps = eps;
    const quad::PolarRule pr = quad::polar({0, 0}, 0.0, 1.0, 48, 192);
    std::vector<T2> interior, rim;
    for (const Vec2& p : pr.nodes) interior.push_back(eval_u(g, p.x(), p.y()));
    for (int k = 0; k < kBoundarySamples; ++k) {
        const double t = 2 * kPi * k / kBoundarySamples;
        rim.push_back(eval_u(g, std::cos(t), std::sin(t)));
    }
    for (double e : eps) {
        const double s = std::sqrt(e);
        double ea = 0.0;
        for (std::size_t i = 0; i < pr.nodes.size(); ++i) {
            const PointGeometry G = point_geometry(graph_jet(interior[i], pr.nodes[i].x(), pr.nodes[i].y(), s));
            ea += pr.weights[i] * std::abs(G.K * G.area_density - e * hess_det(interior[i]));
        }
        std::vector<double> eb(kBoundarySamples);
        for (int k = 0; k < kBoundarySamples; ++k) {
            const double t = 2 * kPi * k / kBoundarySamples, x = std::cos(t), y = std::sin(t);
            const PointGeometry G = point_geometry(graph_jet(rim[k], x, y, s));
            const double ut = -y * rim[k].d[0] + x * rim[k].d[1];
            const double dl = std::sqrt(1 + e * ut * ut);
            eb[k] = std::abs(std::sqrt(std::max(G.dN2, 0.0)) * dl - s * hess_norm(rim[k]));
        }
        fit.area_error.push_back(ea);
        fit.boundary_error.push_back(spectral::periodic_trapezoid(eb, 2 * kPi));
    }
    auto tiny = [](const std::vector<double>& v) {
        return std::any_of(v.begin(), v.end(), [](double x) { return !(x > 1e-300); });
    };
    fit.degenerate = tiny(fit.area_error) || tiny(fit.boundary_error);
    if (!fit.degenerate) {
        std::vector<double> lx, la, lb;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            lx.push_back(std::log(eps[i]));
            la.push_back(std::log(fit.area_error[i]));
            lb.push_back(std::log(fit.boundary_error[i]));
        }
        fit.area_slope = ls_slope(lx, la);
        fit.boundary_slope = ls_slope(lx, lb);
    }
    return fit;
}

ScenarioReport run_olbermann_linearization(const std::vector<GraphSpec>& graphs, const std::vector<double>& eps,
                                           const Tolerances& tol) {
    ScenarioReport rep;
    rep.scenario = "graph";
    Series ser{"graph_expansion", {"graph", "eps", "area_error", "boundary_error"}, {}};
    Series lin{"graph_inequality", {"graph", "boundary_hessian", "det_integral", "lhs", "rhs"}, {}};
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const GraphSpec& g = graphs[gi];
        const std::string tag = "graph " + g.name;
        guarded(rep, tag + ": linearized inequality", "graph.linearized", [&] {
            const LinearizedInequality li = linearized_inequality(g, tol.ineq);
            rep.checks.push_back(inequality_check(tag + ": (int |D^2u| ds)^2 >= 4 pi |int det D^2u|", "graph.linearized",
                                                  li.lhs, li.rhs, tol.ineq));
            lin.rows.push_back({double(gi), li.boundary_hessian, li.det_integral, li.lhs, li.rhs});
        });
        guarded(rep, tag + ": expansion orders", "graph.expansion", [&] {
            const ExpansionFit fit = expansion_fit(g, eps);
            for (std::size_t i = 0; i < eps.size(); ++i)
                ser.rows.push_back({double(gi), eps[i], fit.area_error[i], fit.boundary_error[i]});
            if (fit.degenerate) {
                Check c = boolean_check(tag + ": leading terms vanish, no orders to fit", "graph.expansion", true);
                c.informational = true;
                rep.checks.push_back(c);
                return;
            }
            rep.checks.push_back(closeness_check(tag + ": order of the area density remainder", "graph.expansion",
                                                 fit.area_slope, 2.0, 0.25 / 2.0));
            rep.checks.push_back(closeness_check(tag + ": order of the boundary density remainder", "graph.expansion",
                                                 fit.boundary_slope, 1.5, 0.25 / 1.5));
        });
        guarded(rep, tag + ": nonlinear inequality", "disc.isoperimetric", [&] {
            require_c2(g);
            const LemmaReport di = check_disc_isoperimetric(graph_chart(g, eps.front()), tol.ineq);
            rep.checks.push_back(inequality_check(fmt("%s: L^2 >= (4 pi - |int K|)|int K| at eps=%g", tag.c_str(),
                                                      eps.front()),
                                                  "disc.isoperimetric", di.lhs, di.rhs, tol.ineq));
        });
    }
    rep.series = {lin, ser};
    return rep;
}

ScenarioReport run_degree_winding(const std::vector<GraphSpec>& graphs, int pairs_per_patch, std::uint64_t seed) {
    ScenarioReport rep;
    rep.scenario = "graph";
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> G;
    auto random_unit = [&] { return Vec3(G(rng), G(rng), G(rng)).normalized(); };
    int total = 0, failed = 0, skipped = 0;
    std::string first_failure;
    for (const GraphSpec& g : graphs) {
        guarded(rep, "degree/winding on " + g.name, "sphere.degree_winding", [&] {
            require_c2(g);
            const GaussImage img = GaussImage::from_chart(graph_chart(g, 1.0, false, 10, 40));
            for (int i = 0; i < pairs_per_patch; ++i) {
                Vec3 p = random_unit(), q = random_unit();
                // half the pairs near the image, where Q is nontrivial
                if (i % 2 == 0) p = (p + 3 * Vec3::UnitZ()).normalized();
                try {
                    const DegreeWindingCheck r = check_degree_winding_relation(img, p, q);
                    ++total;
                    if (!r.holds) {
                        ++failed;
                        if (first_failure.empty())
                            first_failure = fmt("%s: Q(p)=%d Q(q)=%d w=%d", g.name.c_str(), r.Qp, r.Qq, r.w);
                    }
                } catch (const NotRegularValue&) {
                    ++skipped;
                } catch (const DegenerateConfiguration&) {
                    ++skipped;
                }
            }
        });
    }
    const int need = 20 * static_cast<int>(graphs.size());
    rep.checks.push_back(inequality_check(fmt("degree/winding: regular pairs checked over %zu patches", graphs.size()),
                                          "sphere.degree_winding", total, need, 0.0));
    rep.checks.push_back(boolean_check("degree/winding: Q(p) - Q(q) = w(p, q) on every regular pair",
                                       "sphere.degree_winding", failed == 0 && total > 0,
                                       failed ? first_failure : fmt("%d pairs, %d skipped as irregular", total, skipped)));
    return rep;
}

// ---- dispatch ----------------------------------------------------------------

const std::vector<std::string>& scenario_ids() {
    static const std::vector<std::string> ids{"cone", "econe", "dipole", "cap", "graph"};
    return ids;
}

namespace {

class Params {
public:
    Params(const ScenarioParams& p, std::set<std::string> allowed, const std::string& scenario) : p_(p) {
        for (const auto& [k, v] : p)
            if (!allowed.count(k)) throw ConfigError(fmt("unknown parameter '%s' for scenario %s", k.c_str(), scenario.c_str()));
    }
    bool has(const std::string& k) const { return p_.count(k) > 0; }
    double num(const std::string& k, double def) const {
        auto it = p_.find(k);
        if (it == p_.end()) return def;
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(fmt("parameter %s=%s is not a number", k.c_str(), it->second.c_str()));
        }
    }
    int integer(const std::string& k, int def) const {
        const double v = num(k, def);
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(fmt("parameter %s must be an integer", k.c_str()));
        return static_cast<int>(v);
    }
    std::string str(const std::string& k, const std::string& def) const {
        auto it = p_.find(k);
        return it == p_.end() ? def : it->second;
    }

private:
    const ScenarioParams& p_;
};

}  // namespace

ScenarioReport run_scenario(const std::string& id, const ScenarioConfig& cfg) {
    if (cfg.levels < 1) throw ConfigError(fmt("levels must be at least 1, got %d", cfg.levels));
    if (cfg.jobs < 1) throw ConfigError(fmt("jobs must be at least 1, got %d", cfg.jobs));
    ScenarioReport rep;
    if (id == "cone") {
        const Params P(cfg.params, {"alpha", "r0", "R", "n_r", "chain_n_r"}, id);
        ConeSpec s;
        s.r0 = P.num("r0", 0.05);
        s.R = P.num("R", 1.0);
        s.n_r = P.integer("n_r", 32);
        s.chain_n_r = P.integer("chain_n_r", 64);
        if (s.chain_n_r < 8) throw ConfigError("chain_n_r must be at least 8");
        std::vector<double> alphas{-kPi, kPi / 4, kPi / 2, kPi};
        if (P.has("alpha")) alphas = {P.num("alpha", 0.0)};
        rep = run_cone_verification(s, alphas, cfg.levels, cfg.tol, cfg.jobs);
    } else if (id == "econe") {
        const Params P(cfg.params, {"k", "r0", "R"}, id);
        std::vector<int> ks{1, 2};
        if (P.has("k")) ks = {P.integer("k", 1)};
        for (int k : ks)
            if (k < 0 || k > 8) throw ConfigError(fmt("E-cone order %d outside 0..8", k));
        const double r0 = P.num("r0", 0.05), R = P.num("R", 1.0);
        ConeSpec chk;
        chk.r0 = r0;
        chk.R = R;
        chk.validate();
        rep = run_econe_verification(ks, r0, R, cfg.tol);
    } else if (id == "dipole") {
        const Params P(cfg.params, {"eps", "r0", "R", "n_r"}, id);
        DipoleSpec s;
        s.r0 = P.num("r0", 1.0);
        s.eps = P.num("eps", 0.5 * s.r0);
        s.R = P.num("R", 20.0 * s.r0);
        s.n_r = P.integer("n_r", 32);
        s.validate();
        rep = run_dipole_verification(s, {10.0, 20.0, 40.0}, cfg.tol);
    } else if (id == "cap") {
        const Params P(cfg.params, {"theta", "n_mc"}, id);
        std::vector<double> th{kPi / 6, kPi / 4, kPi / 3, kPi / 2};
        if (P.has("theta")) {
            CapSpec c;
            c.theta0 = P.num("theta", 1.0);
            c.validate();
            th = {c.theta0};
        }
        const double n_mc = P.num("n_mc", 1e5);
        if (!(n_mc >= 100 && n_mc <= 1e9)) throw ConfigError("n_mc must lie in [100, 1e9]");
        rep = run_cap_verification(th, static_cast<std::int64_t>(n_mc), cfg.seed, cfg.tol, cfg.jobs);
    } else if (id == "graph") {
        const Params P(cfg.params, {"u", "n_random", "pairs"}, id);
        const std::string u = P.str("u", "all");
        const int n_random = P.integer("n_random", 3), pairs = P.integer("pairs", 40);
        if (n_random < 0 || n_random > 100) throw ConfigError("n_random must lie in 0..100");
        if (pairs < 1) throw ConfigError("pairs must be positive");
        std::vector<GraphSpec> gs;
        if (u == "all") {
            gs = {graph_bowl(), graph_saddle()};
            for (int i = 0; i < n_random; ++i) gs.push_back(graph_random_cubic(cfg.seed * 1000 + i));
        } else if (u == "bowl") {
            gs = {graph_bowl()};
        } else if (u == "saddle") {
            gs = {graph_saddle()};
        } else if (u == "linear") {
            gs = {graph_linear()};
        } else if (u == "random") {
            gs = {graph_random_cubic(cfg.seed)};
        } else if (u == "tip") {
            gs = {graph_cone_tip()};
        } else {
            throw ConfigError("graph u must be one of all, bowl, saddle, linear, random, tip; got " + u);
        }
        rep = run_olbermann_linearization(gs, {1e-1, 1e-2, 1e-3, 1e-4}, cfg.tol);
        rep.append(run_degree_winding(gs, pairs, cfg.seed));
    } else {
        std::string known;
        for (const auto& s : scenario_ids()) known += (known.empty() ? "" : ", ") + s;
        throw ConfigError("unknown scenario '" + id + "' (known: " + known + ")");
    }
    rep.scenario = id;
    return rep;
}

}  // namespace wb
