#include "wbkit/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wb::quad {

Rule1D gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre needs n >= 1");
    Rule1D r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double pn = n == 1 ? x : p1;
            const double pnm1 = n == 1 ? 1.0 : p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.x[i] = x;
        r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

PolarRule polar(const Eigen::Vector2d& center, double r_in, double r_out, int n_r, int n_phi) {
    PolarRule out;
    const Rule1D gl = gauss_legendre(n_r);
    const double dphi = 2.0 * std::numbers::pi / n_phi;
    for (int i = 0; i < n_r; ++i) {
        double r, wr;
        if (r_in > 0) {
            const double a = std::log(r_in), b = std::log(r_out);
            const double t = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[i];
            r = std::exp(t);
            wr = 0.5 * (b - a) * gl.w[i] * r * r;  // r dr = r² dt
        } else {
            r = 0.5 * r_out * (1.0 + gl.x[i]);
            wr = 0.5 * r_out * gl.w[i] * r;
        }
        for (int k = 0; k < n_phi; ++k) {
            const double phi = (k + 0.5) * dphi;
            out.nodes.push_back(center + r * Eigen::Vector2d(std::cos(phi), std::sin(phi)));
            out.weights.push_back(wr * dphi);
        }
    }
    return out;
}

const TriangleRule& dunavant5() {
    static const TriangleRule rule = [] {
        TriangleRule t;
        const double a1 = 0.059715871789770, b1 = 0.470142064105115;
        const double a2 = 0.797426985353087, b2 = 0.101286507323456;
        const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
        t.bary.emplace_back(1.0 / 3, 1.0 / 3, 1.0 / 3);
        t.w.push_back(w0);
        for (int k = 0; k < 3; ++k) {
            Eigen::Vector3d v = Eigen::Vector3d::Constant(b1);
            v[k] = a1;
            t.bary.push_back(v);
            t.w.push_back(w1);
        }
        for (int k = 0; k < 3; ++k) {
            Eigen::Vector3d v = Eigen::Vector3d::Constant(b2);
            v[k] = a2;
            t.bary.push_back(v);
            t.w.push_back(w2);
        }
        return t;
    }();
    return rule;
}

double simpson(const std::vector<double>& f, double h) {
    const size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    auto simpson_even = [&](size_t lo, size_t hi) {  // hi - lo even
        double s = f[lo] + f[hi];
        for (size_t i = lo + 1; i < hi; ++i) s += (i - lo) % 2 ? 4 * f[i] : 2 * f[i];
        return s * h / 3.0;
    };
    const size_t intervals = n - 1;
    if (intervals % 2 == 0) return simpson_even(0, n - 1);
    if (intervals < 3) return 0.5 * h * (f[0] + f[1]);
    // Simpson 3/8 on the last three intervals
    const double tail = 3.0 * h / 8.0 * (f[n - 4] + 3 * f[n - 3] + 3 * f[n - 2] + f[n - 1]);
    return (intervals == 3 ? 0.0 : simpson_even(0, n - 4)) + tail;
}

}  // namespace wb::quad
