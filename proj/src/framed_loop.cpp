#include "wbkit/framed_loop.hpp"

#include "wbkit/errors.hpp"
#include "wbkit/quadrature.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace wb {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
// equality cases with both sides zero only differ by rounding
constexpr double kRoundoffFloor = 1e-10;

// rotate v by the minimal rotation taking unit a to unit b
Vec3 rotate_between(const Vec3& a, const Vec3& b, const Vec3& v) {
    const Vec3 ax = a.cross(b);
    const double s2 = ax.squaredNorm(), c = a.dot(b);
    if (s2 < 1e-300) return v;
    return v * c + ax.cross(v) + ax * (ax.dot(v) * (1 - c) / s2);
}

Vec3 slerp(const Vec3& a, const Vec3& b, double s) {
    const double c = std::clamp(a.dot(b), -1.0, 1.0);
    const double th = std::acos(c);
    if (th < 1e-12) return ((1 - s) * a + s * b).normalized();
    return ((std::sin((1 - s) * th) * a + std::sin(s * th) * b) / std::sin(th)).normalized();
}

bool is_uniform(const std::vector<double>& phi) {
    const size_t n = phi.size();
    for (size_t k = 0; k < n; ++k)
        if (std::abs(phi[k] - kTwoPi * k / n) > 1e-9) return false;
    return true;
}

}  // namespace

Vec3List cyclic_difference(const std::vector<double>& phi, const Vec3List& f) {
    const size_t n = f.size();
    Vec3List d(n);
    for (size_t k = 0; k < n; ++k) {
        const size_t km = (k + n - 1) % n, kp = (k + 1) % n;
        double hm = phi[k] - phi[km], hp = phi[kp] - phi[k];
        if (k == 0) hm += kTwoPi;
        if (k == n - 1) hp += kTwoPi;
        d[k] = (hm * hm * f[kp] - hp * hp * f[km] + (hp * hp - hm * hm) * f[k]) / (hp * hm * (hp + hm));
    }
    return d;
}

std::vector<std::string> FramedLoop::violations(const std::vector<double>& phi, const Vec3List& gamma,
                                                const Vec3List& normal, double tol_orth) {
    std::vector<std::string> out;
    auto add = [&](const std::string& field, const std::string& msg) { out.push_back(field + ": " + msg); };
    const size_t n = gamma.size();
    if (normal.size() != n) add("normal", "expected " + std::to_string(n) + " samples, got " + std::to_string(normal.size()));
    if (phi.size() != n) add("phi", "expected " + std::to_string(n) + " samples, got " + std::to_string(phi.size()));
    if (n < 4) add("gamma", "need at least 4 samples");
    if (!out.empty()) return out;
    for (size_t k = 0; k < n; ++k) {
        if (!gamma[k].allFinite()) add("gamma[" + std::to_string(k) + "]", "not finite");
        if (!normal[k].allFinite()) add("normal[" + std::to_string(k) + "]", "not finite");
        if (!std::isfinite(phi[k])) add("phi[" + std::to_string(k) + "]", "not finite");
    }
    if (!out.empty()) return out;
    for (size_t k = 0; k < n; ++k) {
        if (phi[k] < 0 || phi[k] >= kTwoPi) add("phi[" + std::to_string(k) + "]", "outside [0, 2pi)");
        if (k > 0 && !(phi[k] > phi[k - 1])) add("phi[" + std::to_string(k) + "]", "not increasing");
        if ((gamma[(k + 1) % n] - gamma[k]).norm() == 0.0)
            add("gamma[" + std::to_string(k) + "]", "repeats the next sample");
        const double nn = normal[k].norm();
        if (std::abs(nn - 1) > tol_orth) {
            std::ostringstream m;
            m << "|N| = " << nn << " is not 1";
            add("normal[" + std::to_string(k) + "]", m.str());
        }
    }
    if (!out.empty()) return out;
    const Vec3List dg = is_uniform(phi) ? spectral::derivative(gamma, kTwoPi, 1) : cyclic_difference(phi, gamma);
    for (size_t k = 0; k < n; ++k) {
        const double sp = dg[k].norm();
        if (!(sp > 0)) {
            add("gamma[" + std::to_string(k) + "]", "zero velocity");
            continue;
        }
        const double ip = std::abs(dg[k].dot(normal[k])) / sp;
        if (ip > tol_orth) {
            std::ostringstream m;
            m << "<gamma', N>/|gamma'| = " << ip << " exceeds " << tol_orth;
            add("normal[" + std::to_string(k) + "]", m.str());
        }
    }
    return out;
}

namespace {

void throw_if_invalid(const std::vector<double>& phi, const Vec3List& gamma, const Vec3List& normal, double tol) {
    const auto v = FramedLoop::violations(phi, gamma, normal, tol);
    if (v.empty()) return;
    std::string msg = v.front();
    for (size_t i = 1; i < v.size() && i < 8; ++i) msg += "; " + v[i];
    if (v.size() > 8) msg += "; ... (" + std::to_string(v.size()) + " problems)";
    throw InvalidLoop(msg);
}

}  // namespace

FramedLoop FramedLoop::smooth(Vec3List gamma, Vec3List normal, double tol_orth) {
    std::vector<double> phi(gamma.size());
    for (size_t k = 0; k < phi.size(); ++k) phi[k] = kTwoPi * k / phi.size();
    throw_if_invalid(phi, gamma, normal, tol_orth);
    FramedLoop L;
    L.mode_ = Mode::Smooth;
    L.phi_ = std::move(phi);
    L.gamma_ = std::move(gamma);
    L.N_ = std::move(normal);
    L.tol_orth_ = tol_orth;
    L.derive();
    return L;
}

FramedLoop FramedLoop::polyline(std::vector<double> phi, Vec3List gamma, Vec3List normal, double tol_orth) {
    throw_if_invalid(phi, gamma, normal, tol_orth);
    FramedLoop L;
    L.mode_ = Mode::Polyline;
    L.phi_ = std::move(phi);
    L.gamma_ = std::move(gamma);
    L.N_ = std::move(normal);
    L.tol_orth_ = tol_orth;
    L.derive();
    return L;
}

FramedLoop FramedLoop::from_samples(std::vector<double> phi, Vec3List gamma, Vec3List normal, double tol_orth) {
    if (phi.size() == gamma.size() && phi.size() >= 4 && is_uniform(phi))
        return smooth(std::move(gamma), std::move(normal), tol_orth);
    return polyline(std::move(phi), std::move(gamma), std::move(normal), tol_orth);
}

void FramedLoop::derive() {
    const size_t n = gamma_.size();
    if (mode_ == Mode::Smooth) {
        dgamma_ = spectral::derivative(gamma_, kTwoPi, 1);
        dN_ = spectral::derivative(N_, kTwoPi, 1);
    } else {
        dgamma_ = cyclic_difference(phi_, gamma_);
        dN_ = cyclic_difference(phi_, N_);
    }
    t_.resize(n);
    n_.resize(n);
    speed_.resize(n);
    for (size_t k = 0; k < n; ++k) {
        speed_[k] = dgamma_[k].norm();
        t_[k] = (dgamma_[k] - N_[k] * N_[k].dot(dgamma_[k])).normalized();
        n_[k] = N_[k].cross(t_[k]);
    }
    if (mode_ == Mode::Smooth) {
        length_ = spectral::periodic_trapezoid(speed_, kTwoPi);
    } else {
        length_ = 0.0;
        for (size_t k = 0; k < n; ++k) length_ += (gamma_[(k + 1) % n] - gamma_[k]).norm();
    }
}

FramedLoop FramedLoop::resampled(int n) const {
    if (mode_ != Mode::Smooth) throw std::logic_error("only smooth loops can be resampled");
    if (n == size()) return *this;
    Vec3List g = spectral::resample(gamma_, n);
    Vec3List N = spectral::resample(N_, n);
    const Vec3List dg = spectral::derivative(g, kTwoPi, 1);
    for (int k = 0; k < n; ++k) {
        const Vec3 t = dg[k].normalized();
        N[k] = (N[k] - t * t.dot(N[k])).normalized();
    }
    return smooth(std::move(g), std::move(N), tol_orth_);
}

FramedLoop FramedLoop::rebased(int k) const {
    const int n = size();
    k = ((k % n) + n) % n;
    Vec3List g(n), N(n);
    std::vector<double> phi(n);
    for (int j = 0; j < n; ++j) {
        g[j] = gamma_[(j + k) % n];
        N[j] = N_[(j + k) % n];
        phi[j] = std::fmod(phi_[(j + k) % n] - phi_[k] + 2 * kTwoPi, kTwoPi);
    }
    if (mode_ == Mode::Smooth) return smooth(std::move(g), std::move(N), tol_orth_);
    return polyline(std::move(phi), std::move(g), std::move(N), tol_orth_);
}

namespace {

TrihedronPath lift(const FramedLoop& L) {
    TrihedronPath P;
    const int n = L.size();
    P.samples = n;
    for (int k = 0; k < n; ++k) {
        Eigen::Matrix3d R;
        R.col(0) = L.tangent()[k];
        R.col(1) = L.conormal()[k];
        R.col(2) = L.normal()[k].normalized();
        P.R.push_back(R);
        Eigen::Quaterniond q(R);
        q.normalize();
        if (k > 0) {
            if (q.dot(P.q.back()) < 0) q.coeffs() *= -1;
            const double ang = 2 * std::acos(std::min(1.0, std::abs(q.dot(P.q.back()))));
            P.max_step_angle = std::max(P.max_step_angle, ang);
            P.total_rotation += ang;
        }
        P.q.push_back(q);
    }
    const double close = P.q.back().dot(P.q.front());
    const double ang = 2 * std::acos(std::min(1.0, std::abs(close)));
    P.max_step_angle = std::max(P.max_step_angle, ang);
    P.total_rotation += ang;
    P.antiperiodic = close < 0;
    return P;
}

}  // namespace

TrihedronPath build_trihedron(const FramedLoop& loop) {
    TrihedronPath P = lift(loop);
    if (loop.mode() == FramedLoop::Mode::Smooth) {
        const int target =
            std::max(256, 32 * static_cast<int>(std::ceil(P.total_rotation / std::numbers::pi - 1e-12)));
        if (loop.size() < target) P = lift(loop.resampled(target));
    }
    if (P.max_step_angle >= std::numbers::pi / 2)
        throw SamplingTooCoarse("consecutive trihedra rotate by " + std::to_string(P.max_step_angle) + " rad");
    return P;
}

bool is_extendable(const FramedLoop& loop) { return build_trihedron(loop).antiperiodic; }

double total_geodesic_curvature(const FramedLoop& L) {
    const int n = L.size();
    if (L.mode() == FramedLoop::Mode::Smooth) {
        const Vec3List d2 = spectral::derivative(L.gamma(), kTwoPi, 2);
        std::vector<double> dens(n);
        for (int k = 0; k < n; ++k) dens[k] = d2[k].dot(L.conormal()[k]) / L.speed()[k];
        return spectral::periodic_trapezoid(dens, kTwoPi);
    }
    // signed turning of consecutive chords, seen in the plane ⟂ N_k
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        const Vec3& N = L.normal()[k];
        Vec3 din = L.gamma()[k] - L.gamma()[(k + n - 1) % n];
        Vec3 dout = L.gamma()[(k + 1) % n] - L.gamma()[k];
        din -= N * N.dot(din);
        dout -= N * N.dot(dout);
        s += std::atan2(N.dot(din.cross(dout)), din.dot(dout));
    }
    return s;
}

double normal_turning(const FramedLoop& L) {
    const int n = L.size();
    if (L.mode() == FramedLoop::Mode::Smooth) {
        std::vector<double> d(n);
        for (int k = 0; k < n; ++k) d[k] = L.d_normal()[k].norm();
        return spectral::periodic_trapezoid(d, kTwoPi);
    }
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        const Vec3& a = L.normal()[k];
        const Vec3& b = L.normal()[(k + 1) % n];
        s += std::atan2(a.cross(b).norm(), a.dot(b));
    }
    return s;
}

IsoCheck check_iso_inequality(const FramedLoop& loop, double tol_ineq) {
    IsoCheck c;
    c.extendable = is_extendable(loop);
    c.kappa_total = total_geodesic_curvature(loop);
    const double turn = normal_turning(loop);
    c.lhs = turn * turn;
    const double d = c.extendable ? std::abs(2 * std::numbers::pi - c.kappa_total) : std::abs(c.kappa_total);
    c.rhs = (4 * std::numbers::pi - d) * d;
    c.holds = c.lhs >= c.rhs * (1 - tol_ineq) - kRoundoffFloor;
    return c;
}

namespace {

// RK4 step of X' = −⟨X, N'⟩N given N, N' at the start, midpoint and end
Vec3 rk4_transport(const Vec3& X, double h, const Vec3 N[3], const Vec3 dN[3]) {
    auto f = [&](int i, const Vec3& x) -> Vec3 { return -x.dot(dN[i]) * N[i]; };
    const Vec3 k1 = f(0, X);
    const Vec3 k2 = f(1, X + 0.5 * h * k1);
    const Vec3 k3 = f(1, X + 0.5 * h * k2);
    const Vec3 k4 = f(2, X + h * k3);
    return X + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

// N along a polyline loop: great-circle interpolation between samples
Vec3 polyline_normal(const FramedLoop& L, double phi) {
    const auto& ph = L.phi();
    const int n = L.size();
    phi = std::fmod(std::fmod(phi, kTwoPi) + kTwoPi, kTwoPi);
    const int k = static_cast<int>(std::upper_bound(ph.begin(), ph.end(), phi) - ph.begin()) - 1;
    const int k0 = k < 0 ? n - 1 : k;
    const int k1 = (k0 + 1) % n;
    double a = ph[k0], b = ph[k1];
    double x = phi;
    if (k < 0) a -= kTwoPi;
    if (k1 == 0) b += kTwoPi;
    return slerp(L.normal()[k0], L.normal()[k1], (x - a) / (b - a));
}

}  // namespace

Vec3 parallel_transport(const FramedLoop& L, double phi1, double phi2, const Vec3& v, double tol_orth) {
    const double d = std::fmod(std::fmod(phi1 - phi2, kTwoPi) + kTwoPi, kTwoPi);
    if (L.mode() == FramedLoop::Mode::Smooth) {
        const spectral::TrigInterpolant Ni(L.normal(), kTwoPi);
        const Vec3 N1 = Ni(phi1).normalized();
        if (std::abs(v.dot(N1)) > tol_orth * v.norm())
            throw NotTangent("vector has normal component " + std::to_string(v.dot(N1)));
        // one RK4 step per spacing drifts ~1e-8 off isometry when N turns fast, so substep 4x
        const int steps = std::max(1, static_cast<int>(std::ceil(4 * d / (kTwoPi / L.size()) - 1e-9)));
        const double h = -d / steps;
        Vec3 X = v;
        for (int s = 0; s < steps; ++s) {
            const double p = phi1 + s * h;
            const Vec3 N[3] = {Ni(p), Ni(p + 0.5 * h), Ni(p + h)};
            const Vec3 dN[3] = {Ni.derivative(p), Ni.derivative(p + 0.5 * h), Ni.derivative(p + h)};
            X = rk4_transport(X, h, N, dN);
        }
        return X;
    }
    Vec3 Ncur = polyline_normal(L, phi1);
    if (std::abs(v.dot(Ncur)) > tol_orth * v.norm())
        throw NotTangent("vector has normal component " + std::to_string(v.dot(Ncur)));
    // sample nodes passed on the way back, in unwrapped coordinates
    std::vector<double> nodes;
    for (int m = -2; m <= 1; ++m)
        for (double p : L.phi()) {
            const double u = p + m * kTwoPi;
            if (u < phi1 && u > phi1 - d) nodes.push_back(u);
        }
    std::sort(nodes.rbegin(), nodes.rend());
    Vec3 X = v;
    for (double u : nodes) {
        const Vec3 Nn = polyline_normal(L, u);
        X = rotate_between(Ncur, Nn, X);
        Ncur = Nn;
    }
    return rotate_between(Ncur, polyline_normal(L, phi2), X);
}

namespace {

struct FrameSweep {
    Vec3List E1, E2;                 // parallel frame at samples 0..K (K is the wrap)
    std::vector<Eigen::Vector2d> C;  // accumulated velocity components
};

FrameSweep sweep(const FramedLoop& L) {
    const int n = L.size();
    FrameSweep S;
    S.E1.resize(n + 1);
    S.E2.resize(n + 1);
    S.C.resize(n + 1);
    S.E1[0] = L.tangent()[0];
    S.E2[0] = L.conormal()[0];
    S.C[0].setZero();
    if (L.mode() == FramedLoop::Mode::Smooth) {
        const double h = kTwoPi / n;
        const Vec3List Nh = spectral::shifted(L.normal(), 0.5);
        const Vec3List dNh = spectral::shifted(L.d_normal(), 0.5);
        const Vec3List dgh = spectral::shifted(L.d_gamma(), 0.5);
        for (int k = 0; k < n; ++k) {
            const int k1 = (k + 1) % n;
            const Vec3 N[3] = {L.normal()[k], Nh[k], L.normal()[k1]};
            const Vec3 dN[3] = {L.d_normal()[k], dNh[k], L.d_normal()[k1]};
            const Vec3 dg[3] = {L.d_gamma()[k], dgh[k], L.d_gamma()[k1]};
            // augmented RK4: frame and C share stages
            Vec3 e1 = S.E1[k], e2 = S.E2[k];
            auto fe = [&](int i, const Vec3& x) -> Vec3 { return -x.dot(dN[i]) * N[i]; };
            const Vec3 a1 = fe(0, e1), b1 = fe(0, e2);
            const Eigen::Vector2d c1(dg[0].dot(e1), dg[0].dot(e2));
            const Vec3 e1b = e1 + 0.5 * h * a1, e2b = e2 + 0.5 * h * b1;
            const Vec3 a2 = fe(1, e1b), b2 = fe(1, e2b);
            const Eigen::Vector2d c2(dg[1].dot(e1b), dg[1].dot(e2b));
            const Vec3 e1c = e1 + 0.5 * h * a2, e2c = e2 + 0.5 * h * b2;
            const Vec3 a3 = fe(1, e1c), b3 = fe(1, e2c);
            const Eigen::Vector2d c3(dg[1].dot(e1c), dg[1].dot(e2c));
            const Vec3 e1d = e1 + h * a3, e2d = e2 + h * b3;
            const Vec3 a4 = fe(2, e1d), b4 = fe(2, e2d);
            const Eigen::Vector2d c4(dg[2].dot(e1d), dg[2].dot(e2d));
            S.E1[k + 1] = e1 + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
            S.E2[k + 1] = e2 + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
            S.C[k + 1] = S.C[k] + h / 6 * (c1 + 2 * c2 + 2 * c3 + c4);
        }
        return S;
    }
    for (int k = 0; k < n; ++k) {
        const int k1 = (k + 1) % n;
        const Vec3 &Na = L.normal()[k], &Nb = L.normal()[k1];
        const Vec3 Nm = (Na + Nb).normalized();
        const Vec3 chord = L.gamma()[k1] - L.gamma()[k];
        const Vec3 m1 = rotate_between(Na, Nm, S.E1[k]), m2 = rotate_between(Na, Nm, S.E2[k]);
        S.C[k + 1] = S.C[k] + Eigen::Vector2d(chord.dot(m1), chord.dot(m2));
        S.E1[k + 1] = rotate_between(Na, Nb, S.E1[k]);
        S.E2[k + 1] = rotate_between(Na, Nb, S.E2[k]);
    }
    return S;
}

}  // namespace

BurgersResult burgers_vector(const FramedLoop& loop, int base) {
    const FramedLoop L = base == 0 ? loop : loop.rebased(base);
    const int n = L.size();
    const FrameSweep S = sweep(L);
    BurgersResult r;
    r.base = base;
    r.coords = S.C[n];
    r.vector = r.coords.x() * S.E1[0] + r.coords.y() * S.E2[0];
    r.magnitude = r.coords.norm();
    // dual route: L(φ) = Π[C(2π) − C(φ)], B = ∫⟨L, N'⟩N
    std::vector<Vec3> F(n + 1);
    for (int k = 0; k <= n; ++k) {
        const Eigen::Vector2d rem = S.C[n] - S.C[k];
        const Vec3 Lk = rem.x() * S.E1[k] + rem.y() * S.E2[k];
        const int kk = k % n;
        F[k] = Lk.dot(L.d_normal()[kk]) * L.normal()[kk];
    }
    if (L.mode() == FramedLoop::Mode::Smooth) {
        for (int c = 0; c < 3; ++c) {
            std::vector<double> comp(n + 1);
            for (int k = 0; k <= n; ++k) comp[k] = F[k][c];
            r.dual_vector[c] = quad::simpson(comp, kTwoPi / n);
        }
    } else {
        for (int k = 0; k < n; ++k) {
            const double h = (k + 1 < n ? L.phi()[k + 1] : kTwoPi) - L.phi()[k];
            r.dual_vector += 0.5 * h * (F[k] + F[k + 1]);
        }
    }
    r.dual_magnitude = r.dual_vector.norm();
    return r;
}

BurgersResult burgers_intrinsic(const MetricField& g, const CurveInChart& c) {
    if (!c.closed) throw InvalidLoop("intrinsic Burgers vector needs a closed curve");
    const GeodesicCurvatureResult gc = geodesic_curvature(g, c);
    BurgersResult r;
    const int n = static_cast<int>(c.points.size());
    if (c.kind == CurveInChart::Kind::SmoothPeriodic) {
        std::vector<double> dens(n);
        for (int k = 0; k < n; ++k) dens[k] = gc.kappa[k] * gc.speed[k];
        const std::vector<double> theta = spectral::cumulative_integral(dens, kTwoPi);
        std::vector<double> bx(n + 1), by(n + 1);
        for (int k = 0; k <= n; ++k) {
            const double s = gc.speed[k % n];
            bx[k] = s * std::cos(theta[k]);
            by[k] = s * std::sin(theta[k]);
        }
        r.coords = Eigen::Vector2d(quad::simpson(bx, kTwoPi / n), quad::simpson(by, kTwoPi / n));
    } else {
        // chord i leaves vertex i; its own turning is spread along it
        double start = 0.0;
        for (int i = 0; i < n; ++i) {
            if (i > 0) start += gc.chord_turn[i - 1] + gc.kappa[i];
            const double th = start + 0.5 * gc.chord_turn[i];
            r.coords += gc.speed[i] * Eigen::Vector2d(std::cos(th), std::sin(th));
        }
    }
    r.vector = Vec3(r.coords.x(), r.coords.y(), 0.0);
    r.magnitude = r.coords.norm();
    r.dual_vector = r.vector;
    r.dual_magnitude = r.magnitude;
    return r;
}

BurgersBound check_burgers_bound(const FramedLoop& loop, double tol_ineq) {
    BurgersBound b;
    b.lhs = normal_turning(loop);
    b.burgers = burgers_vector(loop).magnitude;
    b.length = loop.length();
    b.rhs = b.burgers / b.length;
    b.holds = b.lhs >= b.rhs * (1 - tol_ineq) - kRoundoffFloor;
    return b;
}

}  // namespace wb
