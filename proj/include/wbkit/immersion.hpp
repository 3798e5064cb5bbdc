#pragma once

#include "wbkit/mesh.hpp"
#include "wbkit/metric.hpp"
#include "wbkit/taylor.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wb {

using Vec3 = Eigen::Vector3d;

// Derivatives of f: R² → R³ at one chart point.
struct SurfaceJet {
    Vec3 f = Vec3::Zero(), fu = Vec3::Zero(), fv = Vec3::Zero();
    Vec3 fuu = Vec3::Zero(), fuv = Vec3::Zero(), fvv = Vec3::Zero();
    bool has_third = false;
    Vec3 fuuu = Vec3::Zero(), fuuv = Vec3::Zero(), fuvv = Vec3::Zero(), fvvv = Vec3::Zero();
};

// Everything pointwise that follows from a second-order jet.
struct PointGeometry {
    Mat2 g;                 // first fundamental form
    Vec3 N;                 // unit normal fu × fv / |fu × fv|
    Vec3 Nu, Nv;            // partials of N
    Mat2 h;                 // second fundamental form h_ij = f_ij · N
    Mat2 S;                 // shape operator g⁻¹ h
    double K = 0.0;         // Gauss-map Jacobian N·(Nu × Nv) / |fu × fv|
    double K_shape = 0.0;   // det S
    double H = 0.0;         // tr S / 2
    double dN2 = 0.0;       // |dN|²_g = tr S²
    double area_density = 0.0;  // √det g
};

PointGeometry point_geometry(const SurfaceJet& j);
// ∂g and, when the jet has third derivatives, ∂²g
std::array<Mat2, 2> metric_first_partials(const SurfaceJet& j);
std::array<Mat2, 3> metric_second_partials(const SurfaceJet& j);

// Least-squares polynomial through scattered samples, centered and scaled.
struct LocalPoly {
    Vec2 center = Vec2::Zero();
    double scale = 1.0;
    int degree = 2;
    Eigen::Matrix<double, Eigen::Dynamic, 3> coef;
    SurfaceJet jet(const Vec2& p) const;
};
// throws DegenerateElement if the samples do not determine the polynomial
LocalPoly fit_local_poly(const std::vector<Vec2>& pts, const std::vector<Vec3>& vals, const Vec2& center,
                         int degree);

// A map f: Ω → R³ over a triangulated chart, given either by a closed-form
// Taylor2 expression or by vertex positions (curvature then comes from local
// polynomial fits). Cheap to copy; the data are shared and immutable.
class ImmersedChart {
public:
    using AnalyticMap = std::function<std::array<Taylor2, 3>(const Taylor2&, const Taylor2&)>;
    struct PolarDomain {
        Vec2 center = Vec2::Zero();
        double r_in = 0.0;  // 0 for a disc
        double r_out = 1.0;
    };

    static ImmersedChart analytic(FCDomainMesh mesh, AnalyticMap f, std::optional<PolarDomain> polar = {},
                                  std::string label = {});
    static ImmersedChart meshed(FCDomainMesh mesh, std::vector<Vec3> positions, std::string label = {});

    // x ↦ R x + t applied to the image
    ImmersedChart transformed(const Eigen::Matrix3d& R, const Vec3& t) const;

    const FCDomainMesh& mesh() const;
    bool is_analytic() const;
    const std::optional<PolarDomain>& polar_domain() const;
    const std::string& label() const;

    SurfaceJet jet_at(const Vec2& p) const;
    PointGeometry geometry_at(const Vec2& p) const;
    const SurfaceJet& element_jet(int e) const;
    const PointGeometry& element_geometry(int e) const;
    Vec3 vertex_position(int v) const;
    Vec3 vertex_normal(int v) const;
    const MetricField& pullback_metric() const;
    // Gaussian curvature at the element barycenter from the metric alone
    double element_intrinsic_K(int e) const;
    bool contains(const Vec2& p) const;
    std::optional<std::pair<int, Eigen::Vector3d>> locate(const Vec2& p) const;

    struct Data;

private:
    std::shared_ptr<const Data> d_;
};

struct CurvatureFields {
    std::vector<double> K;            // route (a): Gauss-map Jacobian
    std::vector<double> K_intrinsic;  // route (b): Brioschi on the pullback metric
    std::vector<double> K_shape, H, dN2, vol;
    double max_identity_residual = 0.0;  // max |4H² − 2K − |dN|²|
    bool intrinsic_available = false;
};
// throws DerivativeUnavailable only if `require_intrinsic` and route (b) cannot run
CurvatureFields curvature_fields(const ImmersedChart& f, bool require_intrinsic = false);

enum class Quadrature { Element, Polar };
// ∫ |dN|²_g Vol_g. Polar needs an analytic chart with a polar domain.
double bending_energy(const ImmersedChart& f, Quadrature q = Quadrature::Element, int n_r = 48, int n_phi = 256);
// generic integral of a pointwise quantity over the chart
double integrate(const ImmersedChart& f, const std::function<double(const PointGeometry&)>& fn,
                 Quadrature q = Quadrature::Element, int n_r = 48, int n_phi = 256);

struct AGMReport {
    double worst_margin = 0.0;
    int worst_element = -1;
};
// margin |dN|² − 2|K| per element; ViolationFound below −tol
AGMReport pointwise_AGM_check(const ImmersedChart& f, double tol);

GeodesicCurvatureResult geodesic_curvature(const ImmersedChart& f, const CurveInChart& c);

// ∫ K Vol_g over the part of the chart enclosed by a closed chart polygon
double enclosed_K_integral(const ImmersedChart& f, const std::vector<Vec2>& polygon, int subdiv_levels = 2);
// same from a bare metric, K by Brioschi
double enclosed_K_integral(const MetricField& g, const FCDomainMesh& m, const std::vector<Vec2>& polygon,
                           int subdiv_levels = 2);

struct EnclosedCurvature {
    double K_i = 0.0;
    double kappa_integral = 0.0;
    double region_integral = 0.0;
    CurveInChart curve;
};
// default test curve: a circle around the hole seed, a fraction of the way to
// the nearest other boundary
CurveInChart default_hole_curve(const FCDomainMesh& mesh, int hole_index, double fraction = 0.3, int n = 512);
EnclosedCurvature enclosed_curvature(const ImmersedChart& f, int hole_index,
                                     std::optional<CurveInChart> curve = std::nullopt);
EnclosedCurvature enclosed_curvature(const MetricField& g, const FCDomainMesh& m, int hole_index,
                                     std::optional<CurveInChart> curve = std::nullopt);

// |∫_inside K Vol_g + ∫ κ_g dℓ − 2π| for a CCW curve bounding a disc
double gauss_bonnet_residual(const ImmersedChart& f, const CurveInChart& c);

}  // namespace wb
