#pragma once

#include "wbkit/mesh.hpp"
#include "wbkit/taylor.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <vector>

namespace wb {

using Mat2 = Eigen::Matrix2d;

// Riemannian metric on a planar chart. First and second partials are either
// analytic or central differences; `None` makes derivative queries throw.
class MetricField {
public:
    enum class DerivativeMode { Analytic, FiniteDifference, None };
    using Eval = std::function<Mat2(const Vec2&)>;
    using Deriv1 = std::function<std::array<Mat2, 2>(const Vec2&)>;
    using Deriv2 = std::function<std::array<Mat2, 3>(const Vec2&)>;
    // (g11, g12, g22) as Taylor2 expressions of the chart coordinates
    using TaylorForm = std::function<std::array<Taylor2, 3>(const Taylor2&, const Taylor2&)>;

    MetricField() = default;

    // exact derivatives of every order we need
    static MetricField from_taylor(TaylorForm form, const std::vector<Vec2>& probes, double diameter);
    // values only; derivatives by central differences, or unavailable
    static MetricField from_function(Eval eval, const std::vector<Vec2>& probes, double diameter,
                                     DerivativeMode mode = DerivativeMode::FiniteDifference);
    // analytic first partials, second partials by differencing them
    static MetricField from_first_derivatives(Eval eval, Deriv1 d1, const std::vector<Vec2>& probes,
                                              double diameter);
    // analytic first and second partials
    static MetricField from_derivatives(Eval eval, Deriv1 d1, Deriv2 d2, const std::vector<Vec2>& probes,
                                        double diameter);
    static MetricField euclidean();

    Mat2 eval(const Vec2& p) const { return eval_(p); }
    std::array<Mat2, 2> deriv(const Vec2& p) const;         // ∂_x g, ∂_y g
    std::array<Mat2, 3> second_deriv(const Vec2& p) const;  // ∂_xx, ∂_xy, ∂_yy

    DerivativeMode first_mode() const { return first_mode_; }
    DerivativeMode second_mode() const { return second_mode_; }
    double lambda_min() const { return lambda_min_; }
    double lambda_max() const { return lambda_max_; }
    double fd_step() const { return h1_; }

private:
    void record_bounds(const std::vector<Vec2>& probes);

    Eval eval_;
    Deriv1 d1_;
    Deriv2 d2_;
    DerivativeMode first_mode_ = DerivativeMode::None;
    DerivativeMode second_mode_ = DerivativeMode::None;
    double h1_ = 0.0, h2_ = 0.0;
    double lambda_min_ = 0.0, lambda_max_ = 0.0;
};

// Γ^k_ij, returned as gamma[k](i, j)
std::array<Mat2, 2> christoffel(const MetricField& g, const Vec2& p);
// Gaussian curvature from the metric alone (Brioschi formula)
double brioschi_curvature(const MetricField& g, const Vec2& p);

// Ordered chart points. Smooth curves are closed and uniformly sampled in a
// hidden parameter t ∈ [0, 2π) so derivatives can be taken spectrally;
// polylines carry no parametrization beyond their vertices.
struct CurveInChart {
    enum class Kind { SmoothPeriodic, Polyline };
    std::vector<Vec2> points;
    Kind kind = Kind::SmoothPeriodic;
    bool closed = true;

    static CurveInChart circle(const Vec2& center, double radius, int n, bool ccw = true);
    static CurveInChart polyline(std::vector<Vec2> pts, bool closed = true);
    CurveInChart reversed() const;
    // +1 if counterclockwise in the chart
    int orientation() const;
    void validate() const;
};

struct GeodesicCurvatureResult {
    std::vector<double> kappa;   // per sample (smooth) or per vertex turning density (polyline)
    std::vector<double> speed;   // |c'|_g per sample; chord lengths for polylines
    std::vector<double> chord_turn;  // polylines: turning of each chord itself (zero for flat metrics)
    double integral = 0.0;       // ∫ κ_g dℓ
    double length = 0.0;
};

// intrinsic geodesic curvature of a chart curve (left normal convention)
GeodesicCurvatureResult geodesic_curvature(const MetricField& g, const CurveInChart& c);
double curve_length(const MetricField& g, const CurveInChart& c);

}  // namespace wb
