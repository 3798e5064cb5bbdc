#include "wbkit/metric.hpp"

#include "wbkit/errors.hpp"
#include "wbkit/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace wb {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Mat2 sym(double a, double b, double c) {
    Mat2 m;
    m << a, b, b, c;
    return m;
}

std::array<Taylor2, 3> taylor_at(const MetricField::TaylorForm& f, const Vec2& p) {
    return f(Taylor2::var(p.x(), 0), Taylor2::var(p.y(), 1));
}

}  // namespace

MetricField MetricField::from_taylor(TaylorForm form, const std::vector<Vec2>& probes, double diameter) {
    MetricField m;
    m.eval_ = [form](const Vec2& p) {
        const auto t = form(Taylor2(p.x()), Taylor2(p.y()));
        return sym(t[0].v, t[1].v, t[2].v);
    };
    m.d1_ = [form](const Vec2& p) {
        const auto t = taylor_at(form, p);
        return std::array<Mat2, 2>{sym(t[0].d[0], t[1].d[0], t[2].d[0]), sym(t[0].d[1], t[1].d[1], t[2].d[1])};
    };
    m.d2_ = [form](const Vec2& p) {
        const auto t = taylor_at(form, p);
        std::array<Mat2, 3> out;
        for (int k = 0; k < 3; ++k) out[k] = sym(t[0].h[k], t[1].h[k], t[2].h[k]);
        return out;
    };
    m.first_mode_ = m.second_mode_ = DerivativeMode::Analytic;
    m.h1_ = std::cbrt(kEps) * diameter;
    m.h2_ = m.h1_;
    m.record_bounds(probes);
    return m;
}

MetricField MetricField::from_function(Eval eval, const std::vector<Vec2>& probes, double diameter,
                                       DerivativeMode mode) {
    if (mode == DerivativeMode::Analytic)
        throw DerivativeUnavailable("from_function cannot provide analytic derivatives");
    MetricField m;
    m.eval_ = std::move(eval);
    m.first_mode_ = m.second_mode_ = mode;
    m.h1_ = std::cbrt(kEps) * diameter;
    // differencing twice amplifies round-off, hence the larger step
    m.h2_ = std::pow(kEps, 0.25) * diameter;
    m.record_bounds(probes);
    return m;
}

MetricField MetricField::from_first_derivatives(Eval eval, Deriv1 d1, const std::vector<Vec2>& probes,
                                                double diameter) {
    MetricField m;
    m.eval_ = std::move(eval);
    m.d1_ = std::move(d1);
    m.first_mode_ = DerivativeMode::Analytic;
    m.second_mode_ = DerivativeMode::FiniteDifference;
    m.h1_ = m.h2_ = std::cbrt(kEps) * diameter;
    m.record_bounds(probes);
    return m;
}

MetricField MetricField::from_derivatives(Eval eval, Deriv1 d1, Deriv2 d2, const std::vector<Vec2>& probes,
                                          double diameter) {
    MetricField m;
    m.eval_ = std::move(eval);
    m.d1_ = std::move(d1);
    m.d2_ = std::move(d2);
    m.first_mode_ = m.second_mode_ = DerivativeMode::Analytic;
    m.h1_ = m.h2_ = std::cbrt(kEps) * diameter;
    m.record_bounds(probes);
    return m;
}

MetricField MetricField::euclidean() {
    return from_taylor([](const Taylor2&, const Taylor2&) { return std::array<Taylor2, 3>{1.0, 0.0, 1.0}; },
                       {Vec2::Zero()}, 1.0);
}

void MetricField::record_bounds(const std::vector<Vec2>& probes) {
    lambda_min_ = std::numeric_limits<double>::infinity();
    lambda_max_ = 0.0;
    for (const Vec2& p : probes) {
        const Mat2 g = eval_(p);
        if (!g.allFinite()) throw NonSPDMetric("metric is not finite at a probe point");
        if (std::abs(g(0, 1) - g(1, 0)) > 1e-12 * g.norm()) throw NonSPDMetric("metric is not symmetric");
        Eigen::SelfAdjointEigenSolver<Mat2> es(g);
        const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
        if (!(lo > 0.0))
            throw NonSPDMetric("eigenvalue " + std::to_string(lo) + " at (" + std::to_string(p.x()) + ", " +
                               std::to_string(p.y()) + ")");
        lambda_min_ = std::min(lambda_min_, lo);
        lambda_max_ = std::max(lambda_max_, hi);
    }
    if (probes.empty()) lambda_min_ = lambda_max_ = 1.0;
}

std::array<Mat2, 2> MetricField::deriv(const Vec2& p) const {
    switch (first_mode_) {
        case DerivativeMode::Analytic:
            return d1_(p);
        case DerivativeMode::FiniteDifference: {
            std::array<Mat2, 2> out;
            for (int i = 0; i < 2; ++i) {
                Vec2 e = Vec2::Zero();
                e[i] = h1_;
                out[i] = (eval_(p + e) - eval_(p - e)) / (2 * h1_);
            }
            return out;
        }
        case DerivativeMode::None:
            break;
    }
    throw DerivativeUnavailable("metric has no first derivatives");
}

std::array<Mat2, 3> MetricField::second_deriv(const Vec2& p) const {
    if (second_mode_ == DerivativeMode::Analytic) return d2_(p);
    if (second_mode_ == DerivativeMode::None) throw DerivativeUnavailable("metric has no second derivatives");
    const double h = h2_;
    const Vec2 ex(h, 0.0), ey(0.0, h);
    if (first_mode_ == DerivativeMode::Analytic) {
        const auto px = d1_(p + ex), mx = d1_(p - ex), py = d1_(p + ey), my = d1_(p - ey);
        std::array<Mat2, 3> out;
        out[0] = (px[0] - mx[0]) / (2 * h);
        // symmetrize the mixed partial
        out[1] = 0.5 * ((px[1] - mx[1]) / (2 * h) + (py[0] - my[0]) / (2 * h));
        out[2] = (py[1] - my[1]) / (2 * h);
        return out;
    }
    const Mat2 g0 = eval_(p);
    std::array<Mat2, 3> out;
    out[0] = (eval_(p + ex) - 2 * g0 + eval_(p - ex)) / (h * h);
    out[2] = (eval_(p + ey) - 2 * g0 + eval_(p - ey)) / (h * h);
    out[1] = (eval_(p + ex + ey) - eval_(p + ex - ey) - eval_(p - ex + ey) + eval_(p - ex - ey)) / (4 * h * h);
    return out;
}

std::array<Mat2, 2> christoffel(const MetricField& g, const Vec2& p) {
    const Mat2 G = g.eval(p);
    const Mat2 Gi = G.inverse();
    const auto dg = g.deriv(p);
    // first-kind symbols [ij,l] = ½(∂_i g_lj + ∂_j g_li − ∂_l g_ij)
    std::array<Mat2, 2> out;
    for (int k = 0; k < 2; ++k) {
        Mat2 m = Mat2::Zero();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double s = 0.0;
                for (int l = 0; l < 2; ++l)
                    s += Gi(k, l) * 0.5 * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
                m(i, j) = s;
            }
        out[k] = m;
    }
    return out;
}

double brioschi_curvature(const MetricField& g, const Vec2& p) {
    const Mat2 G = g.eval(p);
    const auto d1 = g.deriv(p);
    const auto d2 = g.second_deriv(p);
    const double E = G(0, 0), F = G(0, 1), Gg = G(1, 1);
    const double Eu = d1[0](0, 0), Ev = d1[1](0, 0);
    const double Fu = d1[0](0, 1), Fv = d1[1](0, 1);
    const double Gu = d1[0](1, 1), Gv = d1[1](1, 1);
    const double Evv = d2[2](0, 0), Fuv = d2[1](0, 1), Guu = d2[0](1, 1);
    Eigen::Matrix3d M1, M2;
    M1 << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,
          Fv - 0.5 * Gu, E, F,
          0.5 * Gv, F, Gg;
    M2 << 0.0, 0.5 * Ev, 0.5 * Gu,
          0.5 * Ev, E, F,
          0.5 * Gu, F, Gg;
    const double det = E * Gg - F * F;
    return (M1.determinant() - M2.determinant()) / (det * det);
}

CurveInChart CurveInChart::circle(const Vec2& center, double radius, int n, bool ccw) {
    CurveInChart c;
    c.kind = Kind::SmoothPeriodic;
    for (int k = 0; k < n; ++k) {
        const double t = 2 * std::numbers::pi * k / n * (ccw ? 1.0 : -1.0);
        c.points.push_back(center + radius * Vec2(std::cos(t), std::sin(t)));
    }
    return c;
}

CurveInChart CurveInChart::polyline(std::vector<Vec2> pts, bool closed) {
    CurveInChart c;
    c.kind = Kind::Polyline;
    c.closed = closed;
    c.points = std::move(pts);
    return c;
}

CurveInChart CurveInChart::reversed() const {
    CurveInChart c = *this;
    std::reverse(c.points.begin(), c.points.end());
    if (kind == Kind::SmoothPeriodic && !c.points.empty())
        std::rotate(c.points.begin(), c.points.end() - 1, c.points.end());  // keep sample 0 in place
    return c;
}

int CurveInChart::orientation() const { return polygon_signed_area(points) >= 0 ? 1 : -1; }

void CurveInChart::validate() const {
    if (points.size() < 3) throw BoundaryTooRough("curve needs at least 3 samples");
    const size_t n = points.size();
    for (size_t i = 0; i + (closed ? 0 : 1) < n; ++i)
        if ((points[(i + 1) % n] - points[i]).norm() == 0.0) throw BoundaryTooRough("repeated curve sample");
}

namespace {

std::vector<Eigen::Vector3d> lift(const std::vector<Vec2>& p) {
    std::vector<Eigen::Vector3d> out(p.size());
    for (size_t i = 0; i < p.size(); ++i) out[i] = Eigen::Vector3d(p[i].x(), p[i].y(), 0.0);
    return out;
}

}  // namespace

GeodesicCurvatureResult geodesic_curvature(const MetricField& g, const CurveInChart& c) {
    c.validate();
    GeodesicCurvatureResult r;
    const size_t n = c.points.size();
    if (c.kind == CurveInChart::Kind::SmoothPeriodic) {
        const double period = 2 * std::numbers::pi;
        const auto p3 = lift(c.points);
        const auto d1 = spectral::derivative(p3, period, 1);
        const auto d2 = spectral::derivative(p3, period, 2);
        r.kappa.resize(n);
        r.speed.resize(n);
        std::vector<double> dens(n);
        for (size_t k = 0; k < n; ++k) {
            const Vec2 p = c.points[k];
            const Vec2 v(d1[k].x(), d1[k].y());
            const Vec2 a0(d2[k].x(), d2[k].y());
            const Mat2 G = g.eval(p);
            const auto gam = christoffel(g, p);
            const Vec2 a(a0.x() + v.dot(gam[0] * v), a0.y() + v.dot(gam[1] * v));
            const double speed = std::sqrt(v.dot(G * v));
            if (!(speed > 0)) throw BoundaryTooRough("curve speed vanishes");
            const double kg = std::sqrt(G.determinant()) * (v.x() * a.y() - v.y() * a.x()) / (speed * speed * speed);
            r.kappa[k] = kg;
            r.speed[k] = speed;
            dens[k] = kg * speed;
        }
        r.integral = spectral::periodic_trapezoid(dens, period);
        r.length = spectral::periodic_trapezoid(r.speed, period);
        return r;
    }
    // polyline: metric turning angles at vertices plus the chords' own curvature
    const bool has_gamma = g.first_mode() != MetricField::DerivativeMode::None;
    const size_t segs = c.closed ? n : n - 1;
    r.speed.resize(segs);
    std::vector<double> chord_turn(segs, 0.0);
    for (size_t i = 0; i < segs; ++i) {
        const Vec2 a = c.points[i], b = c.points[(i + 1) % n];
        const Vec2 d = b - a, m = 0.5 * (a + b);
        const Mat2 G = g.eval(m);
        const double len2 = d.dot(G * d);
        r.speed[i] = std::sqrt(len2);
        if (has_gamma) {
            const auto gam = christoffel(g, m);
            chord_turn[i] = std::sqrt(G.determinant()) * (d.x() * d.dot(gam[1] * d) - d.y() * d.dot(gam[0] * d)) / len2;
        }
        r.length += r.speed[i];
        r.integral += chord_turn[i];
    }
    r.chord_turn = chord_turn;
    r.kappa.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        if (!c.closed && (i == 0 || i == n - 1)) continue;
        const Vec2 din = c.points[i] - c.points[(i + n - 1) % n];
        const Vec2 dout = c.points[(i + 1) % n] - c.points[i];
        const Mat2 G = g.eval(c.points[i]);
        const double s = std::sqrt(G.determinant()) * (din.x() * dout.y() - din.y() * dout.x());
        const double co = din.dot(G * dout);
        r.kappa[i] = std::atan2(s, co);
        r.integral += r.kappa[i];
    }
    return r;
}

double curve_length(const MetricField& g, const CurveInChart& c) {
    if (c.kind == CurveInChart::Kind::SmoothPeriodic) return geodesic_curvature(g, c).length;
    double len = 0.0;
    const size_t n = c.points.size();
    const size_t segs = c.closed ? n : n - 1;
    for (size_t i = 0; i < segs; ++i) {
        const Vec2 d = c.points[(i + 1) % n] - c.points[i];
        len += std::sqrt(d.dot(g.eval(0.5 * (c.points[i] + c.points[(i + 1) % n])) * d));
    }
    return len;
}

}  // namespace wb
