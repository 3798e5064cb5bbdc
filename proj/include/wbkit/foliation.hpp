#pragma once

#include "wbkit/framed_loop.hpp"
#include "wbkit/immersion.hpp"
#include "wbkit/poisson.hpp"

#include <string>
#include <vector>

namespace wb {

// One closed component of {u = λ}.
struct LevelLoop {
    double lambda = 0.0;
    int component = 0;
    CurveInChart curve;            // closed polyline, counterclockwise in the chart
    std::vector<int> seg_elem;     // element holding the segment from point k to k+1
    std::vector<std::array<int, 2>> edge;  // mesh edge (a, b) carrying point k
    std::vector<double> edge_t;            // point k = (1−t)·x_a + t·x_b
    std::vector<int> enclosed_holes;       // 1-based
    bool inside_above = true;      // u > λ on the enclosed side
    double region_integral = 0.0;  // ∫ K Vol_g over the enclosed part of Ω
    double enclosed_total = 0.0;   // region_integral plus the enclosed K_i
    double min_grad = 0.0;         // smallest |du|_g over the points
};

// Level-set machinery for one solved problem. Holds pointers; the problem
// and solution must outlive it.
class LevelSetField {
public:
    LevelSetField(const PoissonProblem& p, const PotentialSolution& s);

    const PoissonProblem& problem() const { return *p_; }
    const PotentialSolution& solution() const { return *s_; }
    const RecoveredGradient& gradient() const { return grad_; }
    double u_min() const { return u_min_; }
    double u_max() const { return u_max_; }
    double default_grad_floor() const;  // 1e-6 of the range per unit chart length

    // |du|_g at a point of element e
    double grad_norm(int e, const Vec2& x, const Eigen::Vector3d& bary) const;
    // LevelOutOfRange unless u_min < λ < u_max; NearCriticalLevel if a point
    // has |du|_g < grad_floor (negative means the default)
    std::vector<LevelLoop> extract(double lambda, double grad_floor = -1.0) const;

    // P1 critical values: interior extrema and saddles, plus the boundary values
    const std::vector<double>& critical_values() const { return critical_; }

private:
    const PoissonProblem* p_;
    const PotentialSolution* s_;
    RecoveredGradient grad_;
    std::vector<std::array<int, 3>> nbr_;  // neighbour across the edge opposite vertex k
    std::vector<double> elem_charge_;      // K·Vol_g of the element
    std::vector<double> critical_;
    double u_min_ = 0.0, u_max_ = 0.0;
};

std::vector<LevelLoop> extract_level_loops(const PoissonProblem& p, const PotentialSolution& s, double lambda,
                                           double grad_floor = -1.0);

// Quantile bins of nodal values, split further so none is wider than range/n.
// λ is the bin midpoint, moved within the bin when it falls within
// 1e-6·range of a critical value.
struct LevelBin {
    double lambda = 0.0, lo = 0.0, hi = 0.0;
};
std::vector<LevelBin> level_bins(const std::vector<double>& u, int n, const std::vector<double>& critical = {});

// Per-leaf sums along a level loop (trapezoid on the polyline, metric lengths).
struct LeafIntegrals {
    double length = 0.0;
    double flux = 0.0;      // ∫ |du| dℓ
    double dN_over_du = 0.0;  // ∫ |dN|² / |du| dℓ
    double dN = 0.0;        // ∫ |dN| dℓ
};
// f supplies |dN|; without it only length and flux are filled
LeafIntegrals leaf_integrals(const LevelSetField& F, const LevelLoop& loop, const ImmersedChart* f = nullptr);

struct LeafFlux {
    double flux = 0.0;
    double enclosed = 0.0;  // |∫ K + Σ K_i| over the enclosed region
    double residual = 0.0;
    double l1 = 0.0;
    bool holds = false;     // |flux − enclosed| ≤ tol·max(enclosed, L1)
    bool bounded = false;   // flux ≤ L1 within the same tolerance
};
LeafFlux leaf_flux_identity(const LevelSetField& F, const LevelLoop& loop, double tol_flux);

struct CoareaReport {
    double volume_side = 0.0;  // ∫ |du| Vol_g
    double level_side = 0.0;   // ∫ Length_g(u = λ) dλ
    double residual = 0.0;     // relative; absolute when both sides vanish
    int levels = 0;
    std::vector<double> lambda, length;
};
// P1 gradient and element-constant metric, so the identity is exact up to the
// λ quadrature (midpoint rule on quantile bins)
CoareaReport coarea_check(const FCDomainMesh& m, const MetricField& g, const std::vector<double>& u,
                          int n_levels = 200);
CoareaReport coarea_check(const PoissonProblem& p, const PotentialSolution& s, int n_levels = 200);

// (f, N) restricted to a chart curve. Smooth curves give smooth loops with the
// exact normal; polylines give polyline loops with N re-orthogonalized.
FramedLoop restrict_frame(const ImmersedChart& f, const CurveInChart& c);

struct ChainStep {
    std::string name;
    double lhs = 0.0, rhs = 0.0;
    bool equality = false;  // an identity in the continuum; still checked as lhs ≥ rhs
    double discrepancy = 0.0;  // |lhs − rhs| / max(|lhs|, |rhs|)
    bool holds = false;
};

struct LevelRow {
    double lambda = 0.0, weight = 0.0;
    int leaves = 0;
    double length = 0.0, flux = 0.0, enclosed = 0.0;
};

struct ChainOptions {
    int n_levels = 200;
    double tol_ineq = 1e-3;
    double tol_flux = 1e-2;
    double tol_coarea = 1e-2;
    int jobs = 1;
    bool nonextendable_annulus = false;
    int boundary_samples = 512;
};

struct ChainReport {
    double bending = 0.0;
    double l1 = 0.0;         // ‖K‖_{L¹_MC}
    double h1_sq = 0.0;      // ‖K‖²_{H⁻¹_MC}
    double lhs = 0.0, rhs = 0.0;
    std::vector<double> hole_charges;
    std::vector<bool> generator_extendable;
    std::vector<ChainStep> steps;
    std::vector<LevelRow> levels;
    int leaves = 0;
    int leaf_iso_checked = 0, leaf_iso_failed = 0, leaf_iso_skipped = 0;
    double leaf_iso_min_ratio = 0.0, leaf_iso_max_ratio = 0.0;  // (∫|D_s N|)² over the bound
    int leaf_flux_failed = 0;
    double worst_leaf_flux_residual = 0.0;
    int skipped_levels = 0;
    double coarea_residual = 0.0;
    bool vacuous = false;     // ‖K‖_{L¹_MC} ≥ 4π: flagged, not failed
    bool asserted = true;     // false for the non-extendable annulus variant
    bool converged = true;
    bool holds = false;       // main inequality
    bool chain_holds = false; // every step and every leaf check
};
// NotExtendable unless every boundary generator is extendable, or the
// annulus variant is requested
ChainReport verify_main_theorem(const ImmersedChart& f, const ChainOptions& opt = {});

struct FoliationBound {
    std::vector<double> t, burgers, length, turning;
    double bound = 0.0;
    double bending = 0.0;
    bool holds = false;
};
// Loops are level sets of a transverse coordinate t with |dt|_g = 1 (constant-r
// circles in the cone and dipole charts); the bound is ∫ (|B|/L)² / L dt.
// LoopsNotDisjoint if consecutive loops meet.
FoliationBound burgers_foliation_bound(const ImmersedChart& f, const std::vector<CurveInChart>& loops,
                                       const std::vector<double>& t, double tol_ineq);
// the same from given per-leaf Burgers magnitudes and lengths
double foliation_bound_from_leaves(const std::vector<double>& t, const std::vector<double>& burgers,
                                   const std::vector<double>& length);

}  // namespace wb
