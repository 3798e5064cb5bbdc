#pragma once

#include "wbkit/metric.hpp"
#include "wbkit/spectral.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <string>
#include <vector>

namespace wb {

using Vec3 = Eigen::Vector3d;
using spectral::Vec3List;

// f' at every sample of a cyclic sequence on a nonuniform grid over [0, 2π)
Vec3List cyclic_difference(const std::vector<double>& phi, const Vec3List& f);

// A closed curve γ with a unit field N ⟂ γ'. Smooth loops are sampled
// uniformly in φ and differentiated spectrally; polylines carry arbitrary
// increasing φ and use one-sided/central differences, with N interpolated
// along great circles between samples.
class FramedLoop {
public:
    enum class Mode { Smooth, Polyline };

    static FramedLoop smooth(Vec3List gamma, Vec3List normal, double tol_orth = 1e-8);
    static FramedLoop polyline(std::vector<double> phi, Vec3List gamma, Vec3List normal, double tol_orth = 1e-8);
    // smooth when φ is uniform on [0, 2π), polyline otherwise
    static FramedLoop from_samples(std::vector<double> phi, Vec3List gamma, Vec3List normal,
                                   double tol_orth = 1e-8);
    // every invariant violation, one line per offending field; empty when valid
    static std::vector<std::string> violations(const std::vector<double>& phi, const Vec3List& gamma,
                                               const Vec3List& normal, double tol_orth = 1e-8);

    Mode mode() const { return mode_; }
    int size() const { return static_cast<int>(gamma_.size()); }
    const std::vector<double>& phi() const { return phi_; }
    const Vec3List& gamma() const { return gamma_; }
    const Vec3List& normal() const { return N_; }
    const Vec3List& d_gamma() const { return dgamma_; }   // γ'
    const Vec3List& d_normal() const { return dN_; }      // N'
    const Vec3List& tangent() const { return t_; }        // t, re-orthogonalized against N
    const Vec3List& conormal() const { return n_; }       // n = N × t
    const std::vector<double>& speed() const { return speed_; }
    double length() const { return length_; }

    // trig-interpolated onto n uniform samples (smooth loops only)
    FramedLoop resampled(int n) const;
    // same loop with sample k as the new base point
    FramedLoop rebased(int k) const;

private:
    void derive();

    Mode mode_ = Mode::Smooth;
    std::vector<double> phi_;
    Vec3List gamma_, N_, dgamma_, dN_, t_, n_;
    std::vector<double> speed_;
    double length_ = 0.0;
    double tol_orth_ = 1e-8;
};

struct TrihedronPath {
    std::vector<Eigen::Matrix3d> R;      // columns (t, n, N)
    std::vector<Eigen::Quaterniond> q;   // continuous lift
    bool antiperiodic = false;           // lift closes up with a sign flip
    double max_step_angle = 0.0;
    double total_rotation = 0.0;
    int samples = 0;
};
// smooth loops are first upsampled to max(256, 32·⌈rotation/π⌉) points
TrihedronPath build_trihedron(const FramedLoop& loop);
bool is_extendable(const FramedLoop& loop);

double total_geodesic_curvature(const FramedLoop& loop);  // ∫⟨t', n⟩ dφ
double normal_turning(const FramedLoop& loop);            // ∫|D_s N| dℓ

struct IsoCheck {
    double lhs = 0.0, rhs = 0.0;
    double kappa_total = 0.0;
    bool extendable = false;
    bool holds = false;
};
IsoCheck check_iso_inequality(const FramedLoop& loop, double tol_ineq);

// Transport of v ⟂ N(φ1) to φ2 along the loop, running against the
// parametrization (the short way back when φ2 < φ1).
Vec3 parallel_transport(const FramedLoop& loop, double phi1, double phi2, const Vec3& v, double tol_orth = 1e-8);

struct BurgersResult {
    Vec3 vector = Vec3::Zero();        // in R³, lies in span{t, n} at the base point
    Eigen::Vector2d coords = Eigen::Vector2d::Zero();  // components along (t, n) at the base
    double magnitude = 0.0;
    int base = 0;
    Vec3 dual_vector = Vec3::Zero();   // from ∫⟨L, N'⟩N
    double dual_magnitude = 0.0;
};
BurgersResult burgers_vector(const FramedLoop& loop, int base = 0);
// from the geodesic curvature of a chart curve alone; coords relative to the
// initial unit tangent and its left normal
BurgersResult burgers_intrinsic(const MetricField& g, const CurveInChart& c);

struct BurgersBound {
    double lhs = 0.0, rhs = 0.0;
    double burgers = 0.0, length = 0.0;
    bool holds = false;
};
BurgersBound check_burgers_bound(const FramedLoop& loop, double tol_ineq);

}  // namespace wb
