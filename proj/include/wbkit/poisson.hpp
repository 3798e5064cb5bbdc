#pragma once

#include "wbkit/mesh.hpp"
#include "wbkit/metric.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <vector>

namespace wb {

// -Δ_g u = K in Ω, u = 0 on Γ0, u ≡ c_i on Γi with ∫_{Γi} ∂u/∂ν dℓ = K_i,
// ν pointing out of Ω.
struct PoissonProblem {
    FCDomainMesh mesh;
    MetricField metric;
    std::vector<double> source;        // K per element; empty means zero
    std::vector<double> hole_charges;  // K_i per hole; empty falls back to the mesh's charges

    double charge(int hole) const;  // 0-based hole index
};

// P1 system with Γ0 eliminated and every Γi tied to one unknown.
struct FloatingSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    std::vector<int> dof;          // per vertex; -1 on Γ0
    std::vector<int> hole_dof;     // per hole
    std::vector<double> elem_vol;  // area·√det g per element
    std::vector<Mat2> elem_ginv;
};
// throws SingularSystem, NonSPDMetric
FloatingSystem assemble_floating(const PoissonProblem& p);

struct PotentialSolution {
    std::vector<double> u;     // nodal
    std::vector<double> c;     // u on each hole
    double energy = 0.0;       // ‖u‖²_{Ḣ¹(Ω,g)} = uᵀAu
    std::vector<double> flux;  // ∫_{Γi} ∂u/∂ν dℓ by boundary integration
    std::vector<double> weak_flux;  // the same from the discrete residual
    int iterations = 0;
    double residual = 0.0;
    bool converged = true;
};

PotentialSolution solve_floating_potential(const PoissonProblem& p);

// ‖u_K‖_{Ḣ¹}, which is ‖K‖ in the dual of the admissible class
double h1mc_dual_norm(const PotentialSolution& s);
// ∫|K| Vol_g + Σ|K_i|
double l1mc_norm(const PoissonProblem& p);

struct DualSupReport {
    std::vector<double> ratio;  // pairing / (‖K‖·‖φ‖) per trial
    double max_ratio = 0.0;
    bool holds = false;
};
// trials are nodal P1 functions; InadmissibleTrial unless zero on Γ0,
// constant on every Γi and nonzero
DualSupReport dual_sup_property_check(const PoissonProblem& p, const PotentialSolution& s,
                                      const std::vector<std::vector<double>>& trials, double tol_ineq);

struct LinftyReport {
    double u_inf = 0.0;
    double proxy = 0.0;  // ‖K‖_{L^{3/2}} + Σ|K_i|
    double ratio = 0.0;  // 0 when both vanish
};
LinftyReport linfty_report(const PoissonProblem& p, const PotentialSolution& s);

// Gradient of a nodal field recovered by quadratic least squares over each
// vertex's 2-ring, linearly interpolated inside elements.
class RecoveredGradient {
public:
    RecoveredGradient(const FCDomainMesh& m, const std::vector<double>& u);
    Vec2 at_vertex(int v) const { return grad_[v]; }
    Vec2 at(int e, const Eigen::Vector3d& bary) const;

private:
    const FCDomainMesh* mesh_;
    std::vector<Vec2> grad_;
};

// ∫_{Γi} ∂u/∂ν dℓ for every hole, two-point Gauss on each boundary edge
std::vector<double> boundary_flux(const FCDomainMesh& m, const MetricField& g, const RecoveredGradient& du);

}  // namespace wb
