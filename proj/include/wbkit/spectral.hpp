#pragma once

// Trigonometric tools for uniformly sampled periodic signals.

#include <Eigen/Core>
#include <vector>

namespace wb::spectral {

using Vec3List = std::vector<Eigen::Vector3d>;

// d^order f / dt^order for samples f(t_k), t_k = k·period/N.
std::vector<double> derivative(const std::vector<double>& f, double period, int order = 1);
Vec3List derivative(const Vec3List& f, double period, int order = 1);

// trig interpolant evaluated at t_k + shift·(period/N)
std::vector<double> shifted(const std::vector<double>& f, double shift);
Vec3List shifted(const Vec3List& f, double shift);

// trig interpolant resampled on n >= N uniform points
std::vector<double> resample(const std::vector<double>& f, int n);
Vec3List resample(const Vec3List& f, int n);

// ∫_0^{t_k} f for k = 0..N (N+1 values, the last is the full-period integral);
// exact for trigonometric polynomials
std::vector<double> cumulative_integral(const std::vector<double>& f, double period);

// evaluates the trig interpolant (and its derivative) at arbitrary t; O(N) per call
class TrigInterpolant {
public:
    TrigInterpolant() = default;
    TrigInterpolant(const Vec3List& f, double period);
    Eigen::Vector3d operator()(double t) const;
    Eigen::Vector3d derivative(double t) const;
    int size() const { return n_; }

private:
    int n_ = 0;
    double period_ = 1.0;
    std::vector<Eigen::Vector3d> re_, im_;  // coefficients per wavenumber 0..n/2
};

// periodic trapezoid rule, which is spectrally accurate for smooth data
double periodic_trapezoid(const std::vector<double>& f, double period);

}  // namespace wb::spectral
