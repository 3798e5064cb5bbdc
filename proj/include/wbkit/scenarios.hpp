#pragma once

#include "wbkit/foliation.hpp"
#include "wbkit/immersion.hpp"
#include "wbkit/poisson.hpp"
#include "wbkit/sphere.hpp"
#include "wbkit/tolerances.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wb {

// One named comparison. Inequalities read lhs ≥ rhs; closeness checks put the
// computed value in lhs and the target in rhs. margin > 0 means it passed.
struct Check {
    std::string name;
    std::string anchor;  // short key for the statement being exercised
    double lhs = 0.0, rhs = 0.0, margin = 0.0;
    bool holds = false;
    bool informational = false;  // reported, never fails a run
    std::string detail;
};

Check inequality_check(std::string name, std::string anchor, double lhs, double rhs, double tol);
// |value − target| ≤ tol·|target| (absolute when target is 0)
Check closeness_check(std::string name, std::string anchor, double value, double target, double tol);
Check boolean_check(std::string name, std::string anchor, bool ok, std::string detail = {});
// a module error turned into a failed check
Check error_check(std::string name, std::string anchor, const std::exception& e);

struct Series {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ScenarioReport {
    std::string scenario;
    std::vector<Check> checks;
    std::vector<Series> series;
    bool all_hold() const;  // informational checks excluded
    int failures() const;
    void append(const ScenarioReport& other);
};

using ScenarioParams = std::map<std::string, std::string>;

struct ScenarioConfig {
    ScenarioParams params;
    int levels = 3;
    std::uint64_t seed = 1;
    int jobs = 1;
    Tolerances tol;
};

// ---- cones ---------------------------------------------------------------

// dr² + (c r)² dφ² with c = 1 − α/2π, on r_in ≤ r ≤ r_out around the origin
MetricField cone_metric(double alpha, double r_in, double r_out);
// dr² + (r + (ε/π) cos φ)² dφ²
MetricField dipole_metric(double eps, double r_in, double r_out);

struct ConeSpec {
    double alpha = 0.0;  // angle deficit, < 2π
    double r0 = 0.05, R = 1.0;
    int n_r = 32;        // rings; ring points follow from a square-ish aspect
    int chain_n_r = 64;  // mesh for the end-to-end chain on the embedded cone
    double c() const;    // 1 − α/2π
    void validate() const;  // ConfigError
};

struct ConeGeometry {
    MetricField metric;  // dr² + (c r)² dφ² in Cartesian components
    FCDomainMesh mesh;
    std::optional<ImmersedChart> embedded;  // for 0 < α < 2π
};
ConeGeometry build_cone(const ConeSpec& s);
int cone_ring_points(int n_r, double r0, double R);
// 2π(1 − c²)/c · log(R/r0)
double cone_bending_exact(const ConeSpec& s);
// (4π − |α|)|α|/(2π − α) · log(R/r0)
double cone_curvature_bound(const ConeSpec& s);
// 4 sin²(α/2)/(2π − α)³ · log(R/r0)
double cone_burgers_bound(const ConeSpec& s);
// α²/(2πc) · log(R/r0)
double cone_h1_exact(const ConeSpec& s);
// Darboux frame of the constant-r loop on an isometric immersion of the cone
// (the embedded cone for c < 1, a wavy cone over a spherical curve for c > 1)
FramedLoop cone_frame_loop(double c, double r, int n = 1024);

ScenarioReport run_cone_verification(const ConeSpec& base, const std::vector<double>& alphas, int levels,
                                     const Tolerances& tol, int jobs = 1);

// E-cone with α = −2πk: r(cos(k+1)φ, sin(k+1)φ, 0)
ImmersedChart build_econe(int k, double r0, double R, int n_r);
ScenarioReport run_econe_verification(const std::vector<int>& ks, double r0, double R, const Tolerances& tol);

// ---- dipole --------------------------------------------------------------

struct DipoleSpec {
    double eps = 0.5;
    double r0 = 1.0, R = 20.0;
    int n_r = 32;
    void validate() const;  // ConfigError unless 0 ≤ ε < r0 < R
};
struct DipoleGeometry {
    MetricField metric;  // dr² + (r + (ε/π)cos φ)² dφ²
    FCDomainMesh mesh;
};
DipoleGeometry build_dipole(const DipoleSpec& s);
// a closed space curve of length 2πr with geodesic curvature matching the
// constant-r loop, framed so the Darboux data agree; spherical wiggles keep
// the curvature above what the frame needs
FramedLoop dipole_candidate_loop(const DipoleSpec& s, double r, int n = 2048, int wiggles = 3,
                                 double amplitude = 0.5);
// ε²/(64π³ r0²)
double dipole_scaling_slope(const DipoleSpec& s);
// ∫_{2r0}^R T²/L(r) dr with T = |B(2r0)|/(√2 L(2r0)), all from the metric
double dipole_improved_bound(const DipoleSpec& s, int n_radii = 257);
// the same from the naive per-leaf bound |B(r)|/L(r), over (r0, R)
double dipole_naive_bound(const DipoleSpec& s, int n_radii = 257);
// ‖K‖²_H⁻¹ for holes of radius r0/2 at (±r0, 0) carrying ±α in a flat disc of radius R
double dipole_pair_h1(double alpha, double r0, double R, double h_min);

ScenarioReport run_dipole_verification(const DipoleSpec& s, const std::vector<double>& ratios,
                                       const Tolerances& tol);

// ---- spherical caps ------------------------------------------------------

struct CapSpec {
    double theta0 = 1.0;  // polar angle of the rim
    int n_r = 24, n_phi = 96;
    void validate() const;
};
ImmersedChart build_cap(const CapSpec& s);
FramedLoop cap_rim_loop(double theta0, int n = 1024);
SphereCurve equator_curve(int n, int turns = 1);

ScenarioReport run_cap_verification(const std::vector<double>& thetas, std::int64_t n_mc, std::uint64_t seed,
                                    const Tolerances& tol, int jobs = 1);

// ---- graphs --------------------------------------------------------------

using HeightFunction = std::function<Taylor2(const Taylor2&, const Taylor2&)>;
struct GraphSpec {
    std::string name;
    HeightFunction u;
};
GraphSpec graph_bowl();
GraphSpec graph_saddle();
GraphSpec graph_linear();
GraphSpec graph_random_cubic(std::uint64_t seed);
// √(x² + y²): fails at the center, used to exercise NotC2
GraphSpec graph_cone_tip();

// (x, y, √ε u) over the unit disc
ImmersedChart graph_chart(const GraphSpec& g, double eps = 1.0, bool polar = true, int n_r = 20,
                          int n_phi = 80);
// NotC2 when the Hessian is not finite somewhere on a sample of the closed disc
void require_c2(const GraphSpec& g);

struct LinearizedInequality {
    double boundary_hessian = 0.0;  // ∫_{∂D} |D²u| ds
    double det_integral = 0.0;      // ∫_D det D²u dx
    double lhs = 0.0, rhs = 0.0;
    bool holds = false;
};
LinearizedInequality linearized_inequality(const GraphSpec& g, double tol_ineq);

struct ExpansionFit {
    std::vector<double> eps, area_error, boundary_error;
    double area_slope = 0.0, boundary_slope = 0.0;
    bool degenerate = false;  // both errors vanish, nothing to fit
};
// L¹ deviations of K_ε Vol and of the boundary density from their leading
// terms, with log-log least-squares slopes
ExpansionFit expansion_fit(const GraphSpec& g, const std::vector<double>& eps);

ScenarioReport run_olbermann_linearization(const std::vector<GraphSpec>& graphs, const std::vector<double>& eps,
                                           const Tolerances& tol);
// Q(p) − Q(q) = w(p, q) on random regular pairs over the Gauss maps of the graphs
ScenarioReport run_degree_winding(const std::vector<GraphSpec>& graphs, int pairs_per_patch, std::uint64_t seed);

// ---- dispatch ------------------------------------------------------------

const std::vector<std::string>& scenario_ids();
// ConfigError for unknown ids or parameters
ScenarioReport run_scenario(const std::string& id, const ScenarioConfig& cfg);

}  // namespace wb
