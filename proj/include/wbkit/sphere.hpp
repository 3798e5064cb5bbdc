#pragma once

#include "wbkit/immersion.hpp"
#include "wbkit/spectral.hpp"

#include <Eigen/Geometry>

#include <cstdint>
#include <functional>
#include <vector>

namespace wb {

using spectral::Vec3List;

// Closed polyline on S² with geodesic segments.
struct SphereCurve {
    Vec3List points;
    // bounding caps over runs of kBlock segments, filled by make(); used to
    // skip most of a long curve in crossing counts
    static constexpr int kBlock = 32;
    Vec3List block_center;
    std::vector<double> block_radius;

    // unit within tol, consecutive points not antipodal
    static SphereCurve make(Vec3List pts, double tol = 1e-8);
    double length() const;  // sum of geodesic segment lengths
};

constexpr double kDeltaGeo = 1e-9;

// Signed number of crossings of the minor arc p→q with the curve. Positive
// when the curve passes p on its left, so the CCW equator has w(north, south) = +1.
// DegenerateConfiguration when a crossing is within δ of tangential or of a
// curve vertex, or when p, q are (nearly) antipodal.
int winding_number(const SphereCurve& c, const Vec3& p, const Vec3& q, double delta = kDeltaGeo);
int winding_number(const std::vector<SphereCurve>& cs, const Vec3& p, const Vec3& q, double delta = kDeltaGeo);

// Piecewise spherical-triangle image of a Gauss map: vertex normals joined by
// geodesic triangles, plus the images of the boundary loops.
struct GaussImage {
    Vec3List normals;
    std::vector<Tri> triangles;
    std::vector<std::vector<int>> boundary;  // vertex cycles, positively oriented for the domain
    static GaussImage from_chart(const ImmersedChart& f);
    std::vector<SphereCurve> boundary_curves() const;
};

// signed count of image triangles covering p; NotRegularValue within δ of an edge
int degree_at(const GaussImage& g, const Vec3& p, double delta = kDeltaGeo);

struct DegreeWindingCheck {
    int Qp = 0, Qq = 0, w = 0;
    bool holds = false;
};
DegreeWindingCheck check_degree_winding_relation(const GaussImage& g, const Vec3& p, const Vec3& q,
                                                 double delta = kDeltaGeo);

// Q on S² for an analytic chart: the mesh image fixes Q at one reference
// point, the finely sampled analytic boundary image carries it everywhere else.
class DegreeField {
public:
    explicit DegreeField(const ImmersedChart& f, int boundary_samples = 16384);
    int operator()(const Vec3& p) const;
    const std::vector<SphereCurve>& boundary() const { return gamma_; }
    // spectral length on polar domains, polyline length otherwise
    double boundary_length() const { return length_; }
    // ∫_{S²} g(Q) dA: exact along each meridian (Q only jumps where the
    // meridian crosses the boundary image), trapezoid across meridians
    double sphere_integral(const std::function<double(int)>& g, int n_meridians = 2048) const;

private:
    std::vector<SphereCurve> gamma_;
    Vec3 ref_ = Vec3::UnitZ();
    int q_ref_ = 0;
    double length_ = 0.0;
};

struct WeinerReport {
    double lhs = 0.0;       // L²
    double estimate = 0.0;  // ½∬ w²
    double stderr_ = 0.0;
    std::int64_t n_mc = 0;
    std::int64_t jittered = 0;
    bool holds = false;
};
// deterministic for a given seed regardless of `jobs`
WeinerReport weiner_check(const SphereCurve& c, std::int64_t n_mc, std::uint64_t seed, int jobs = 1);

struct LemmaReport {
    double L = 0.0;             // length of N(∂D)
    double QK = 0.0;            // ∫ (Q∘N) K Vol_g
    double K_total = 0.0;       // ∫ K Vol_g
    double lhs = 0.0, rhs = 0.0;
    bool holds = false;
};
// L² ≥ 4π∫(Q∘N)K − (∫K)²; analytic charts with a polar domain use polar
// quadrature and the analytic boundary, meshes use elements and vertex normals
LemmaReport check_lemma7(const ImmersedChart& f, double tol_ineq);
// ∫(Q∘N)K ≥ |∫K|
LemmaReport check_lemma10(const ImmersedChart& f, double tol_ineq);
// L² ≥ (4π − |∫K|)|∫K|
LemmaReport check_disc_isoperimetric(const ImmersedChart& f, double tol_ineq);

using SphereFunction = std::function<double(const Vec3&)>;
struct PushforwardResult {
    double chart_side = 0.0;   // ∫_D (h∘N) K Vol_g
    double sphere_side = 0.0;  // ∫_{S²} Q h
    double residual = 0.0;
};
PushforwardResult pushforward_identity_check(const ImmersedChart& f, const SphereFunction& h);
// ∫ over the signed image triangles of h, by a 7-point rule on each flat triangle
double integrate_over_image(const GaussImage& g, const SphereFunction& h);

}  // namespace wb
