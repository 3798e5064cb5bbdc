#pragma once

#include <Eigen/Core>

#include <vector>

namespace wb::quad {

struct Rule1D {
    std::vector<double> x, w;  // on [-1, 1]
};
Rule1D gauss_legendre(int n);

// nodes (x, y) with weights already including the polar Jacobian r dr dφ.
// For r_in > 0 the radial rule runs in log r, which keeps 1/r-type
// integrands smooth.
struct PolarRule {
    std::vector<Eigen::Vector2d> nodes;
    std::vector<double> weights;
};
PolarRule polar(const Eigen::Vector2d& center, double r_in, double r_out, int n_r, int n_phi);

// symmetric 7-point rule on the reference triangle, exact for degree 5;
// barycentric coordinates and weights summing to 1
struct TriangleRule {
    std::vector<Eigen::Vector3d> bary;
    std::vector<double> w;
};
const TriangleRule& dunavant5();

// composite Simpson on uniformly spaced samples (any count >= 2)
double simpson(const std::vector<double>& f, double h);

}  // namespace wb::quad
