#include "wbkit/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace wb::spectral {

namespace {

using cplx = std::complex<double>;

std::vector<cplx> forward(const std::vector<double>& f) {
    Eigen::FFT<double> fft;
    std::vector<cplx> in(f.begin(), f.end()), out;
    fft.fwd(out, in);
    return out;
}

std::vector<double> backward(const std::vector<cplx>& c) {
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.inv(out, c);
    std::vector<double> r(out.size());
    for (size_t i = 0; i < out.size(); ++i) r[i] = out[i].real();
    return r;
}

// signed wavenumber of FFT bin k
int wavenumber(int k, int n) { return k <= n / 2 ? k : k - n; }

template <class F>
Vec3List per_component(const Vec3List& v, F&& fn) {
    Vec3List out;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> comp(v.size());
        for (size_t i = 0; i < v.size(); ++i) comp[i] = v[i][c];
        std::vector<double> r = fn(comp);
        if (out.empty()) out.assign(r.size(), Eigen::Vector3d::Zero());
        for (size_t i = 0; i < r.size(); ++i) out[i][c] = r[i];
    }
    return out;
}

}  // namespace

std::vector<double> derivative(const std::vector<double>& f, double period, int order) {
    const int n = static_cast<int>(f.size());
    if (n < 3) throw std::invalid_argument("spectral derivative needs >= 3 samples");
    auto c = forward(f);
    const double w = 2.0 * std::numbers::pi / period;
    for (int k = 0; k < n; ++k) {
        const int m = wavenumber(k, n);
        if (n % 2 == 0 && k == n / 2 && order % 2 == 1) {
            c[k] = 0.0;  // Nyquist mode has no consistent odd derivative
            continue;
        }
        cplx factor = std::pow(cplx(0.0, w * m), order);
        c[k] *= factor;
    }
    return backward(c);
}

Vec3List derivative(const Vec3List& f, double period, int order) {
    return per_component(f, [&](const std::vector<double>& x) { return derivative(x, period, order); });
}

std::vector<double> shifted(const std::vector<double>& f, double shift) {
    const int n = static_cast<int>(f.size());
    auto c = forward(f);
    for (int k = 0; k < n; ++k) {
        const int m = wavenumber(k, n);
        const double ph = 2.0 * std::numbers::pi * m * shift / n;
        if (n % 2 == 0 && k == n / 2)
            c[k] *= std::cos(ph);
        else
            c[k] *= cplx(std::cos(ph), std::sin(ph));
    }
    return backward(c);
}

Vec3List shifted(const Vec3List& f, double shift) {
    return per_component(f, [&](const std::vector<double>& x) { return shifted(x, shift); });
}

std::vector<double> resample(const std::vector<double>& f, int n) {
    const int m = static_cast<int>(f.size());
    if (n < m) throw std::invalid_argument("resample only refines");
    if (n == m) return f;
    auto c = forward(f);
    std::vector<cplx> d(n, 0.0);
    for (int k = 0; k < m; ++k) {
        const int w = wavenumber(k, m);
        if (m % 2 == 0 && k == m / 2) {
            d[m / 2] += 0.5 * c[k];
            d[n - m / 2] += 0.5 * c[k];
            continue;
        }
        d[w >= 0 ? w : n + w] += c[k];
    }
    const double scale = static_cast<double>(n) / m;
    for (auto& x : d) x *= scale;
    return backward(d);
}

Vec3List resample(const Vec3List& f, int n) {
    return per_component(f, [&](const std::vector<double>& x) { return resample(x, n); });
}

double periodic_trapezoid(const std::vector<double>& f, double period) {
    double s = 0.0;
    for (double x : f) s += x;
    return s * period / static_cast<double>(f.size());
}

std::vector<double> cumulative_integral(const std::vector<double>& f, double period) {
    const int n = static_cast<int>(f.size());
    auto c = forward(f);
    const double mean = c[0].real() / n;
    const double w = 2.0 * std::numbers::pi / period;
    std::vector<double> out(n + 1, 0.0);
    // antiderivative of the zero-mean part, Nyquist dropped (it integrates to zero at nodes)
    std::vector<cplx> a(n, 0.0);
    for (int k = 1; k < n; ++k) {
        if (n % 2 == 0 && k == n / 2) continue;
        a[k] = c[k] / cplx(0.0, w * wavenumber(k, n));
    }
    const std::vector<double> F = backward(a);
    for (int k = 0; k < n; ++k) out[k] = F[k] - F[0] + mean * period * k / n;
    out[n] = mean * period;
    return out;
}

TrigInterpolant::TrigInterpolant(const Vec3List& f, double period) : n_(static_cast<int>(f.size())), period_(period) {
    const int half = n_ / 2;
    re_.assign(half + 1, Eigen::Vector3d::Zero());
    im_.assign(half + 1, Eigen::Vector3d::Zero());
    for (int comp = 0; comp < 3; ++comp) {
        std::vector<double> x(n_);
        for (int i = 0; i < n_; ++i) x[i] = f[i][comp];
        const auto c = forward(x);
        for (int m = 0; m <= half; ++m) {
            // real form: a_m cos + b_m sin, Nyquist split evenly
            double scale = (m == 0 || (n_ % 2 == 0 && m == half)) ? 1.0 : 2.0;
            re_[m][comp] = scale * c[m].real() / n_;
            im_[m][comp] = -scale * c[m].imag() / n_;
        }
    }
}

Eigen::Vector3d TrigInterpolant::operator()(double t) const {
    const double w = 2.0 * std::numbers::pi / period_;
    Eigen::Vector3d s = re_[0];
    for (size_t m = 1; m < re_.size(); ++m) s += re_[m] * std::cos(w * m * t) + im_[m] * std::sin(w * m * t);
    return s;
}

Eigen::Vector3d TrigInterpolant::derivative(double t) const {
    const double w = 2.0 * std::numbers::pi / period_;
    Eigen::Vector3d s = Eigen::Vector3d::Zero();
    const int half = n_ / 2;
    for (int m = 1; m < static_cast<int>(re_.size()); ++m) {
        if (n_ % 2 == 0 && m == half) continue;
        s += w * m * (-re_[m] * std::sin(w * m * t) + im_[m] * std::cos(w * m * t));
    }
    return s;
}

}  // namespace wb::spectral
