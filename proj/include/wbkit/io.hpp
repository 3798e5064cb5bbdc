#pragma once

#include "wbkit/framed_loop.hpp"
#include "wbkit/mesh.hpp"
#include "wbkit/poisson.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wb {

// ConfigError when the file cannot be opened
std::string read_text_file(const std::filesystem::path& p);
// creates missing parent directories; ConfigError on failure
void write_text_file(const std::filesystem::path& p, const std::string& text);

// Loop file:
//   {"gamma": [[x,y,z], …], "normal": [[x,y,z], …], "phi": [φ0, …]?, "tol_orth": t?}
// Without "phi" the samples are taken as uniform on [0, 2π).
struct LoopSamples {
    std::vector<double> phi;
    Vec3List gamma, normal;
    double tol_orth = 1e-8;
};
LoopSamples parse_loop_json(const std::string& text);  // ParseError
std::string loop_to_json(const LoopSamples& s);
LoopSamples loop_samples(const FramedLoop& loop);
// ParseError carrying one line per violated invariant
FramedLoop to_framed_loop(const LoopSamples& s);

// Mesh object, either explicit
//   {"vertices": [[x,y], …], "triangles": [[a,b,c], …], "boundary_loops": [[…], …]?, "hole_charges": […]?}
// or generated
//   {"generator": "annulus", "r_in", "r_out", "n_r", "n_phi", "grading": "log" | "uniform"}
//   {"generator": "disc", "radius", "n_r", "n_phi"}
//   {"generator": "perforated_disc", "R", "holes": [{"center": [x,y], "radius": r}, …], "h_min", "h_max", "growth"?}
FCDomainMesh parse_mesh_json(const std::string& text);  // ParseError
std::string mesh_to_json(const FCDomainMesh& m);

// Problem file:
//   {"mesh": {…}, "metric": {"kind": "euclidean" | "cone" (alpha) | "dipole" (eps)},
//    "source": K | [K per element] | "analytic:zero" | "analytic:one" | "analytic:bump", "hole_charges": […],
//    "expect": {"dual_norm_sq": v, "rel_tol": t}?}
// cone and dipole metrics are centred at the origin, which must lie outside the mesh
struct ProblemFile {
    PoissonProblem problem;
    std::string metric_kind;
    std::optional<double> expect_dual_norm_sq;
    double expect_rel_tol = 1e-2;
};
ProblemFile parse_problem_json(const std::string& text);  // ParseError

// x,y,u per vertex
std::string u_csv(const FCDomainMesh& m, const std::vector<double>& u);

}  // namespace wb
