#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <vector>

namespace wb {

using Vec2 = Eigen::Vector2d;
using Tri = std::array<int, 3>;

// Triangulation of a disc with m holes. Loop 0 is the outer boundary (CCW),
// loops 1..m are the holes (CW). Immutable after construction; adjacency is
// built eagerly so concurrent readers never race.
class FCDomainMesh {
public:
    FCDomainMesh() = default;
    // loops are given explicitly and validated
    FCDomainMesh(std::vector<Vec2> vertices, std::vector<Tri> triangles,
                 std::vector<std::vector<int>> boundary_loops,
                 std::vector<double> hole_charges = {});
    // loops are recovered from the boundary edges and labeled by area
    static FCDomainMesh from_triangles(std::vector<Vec2> vertices, std::vector<Tri> triangles,
                                       std::vector<double> hole_charges = {});

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<Tri>& triangles() const { return triangles_; }
    const std::vector<std::vector<int>>& boundary_loops() const { return loops_; }
    const std::vector<double>& hole_charges() const { return hole_charges_; }
    const std::vector<Vec2>& hole_seeds() const { return hole_seeds_; }

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    int num_holes() const { return static_cast<int>(loops_.size()) - 1; }

    double area(int e) const;
    Vec2 barycenter(int e) const;
    double diameter() const { return diameter_; }
    double max_edge() const { return max_edge_; }
    double total_area() const;

    // -1 if interior, otherwise the loop index the vertex belongs to
    int boundary_label(int v) const { return vertex_loop_[v]; }
    const std::vector<int>& vertex_triangles(int v) const { return vertex_tris_[v]; }
    const std::vector<int>& vertex_neighbors(int v) const { return vertex_nbrs_[v]; }
    // vertices within `rings` edge hops of the given seeds, seeds first
    std::vector<int> patch(const std::vector<int>& seeds, int rings) const;

    FCDomainMesh with_hole_charges(std::vector<double> charges) const;

private:
    void finalize();

    std::vector<Vec2> vertices_;
    std::vector<Tri> triangles_;
    std::vector<std::vector<int>> loops_;
    std::vector<double> hole_charges_;
    std::vector<Vec2> hole_seeds_;
    std::vector<int> vertex_loop_;
    std::vector<std::vector<int>> vertex_tris_;
    std::vector<std::vector<int>> vertex_nbrs_;
    double diameter_ = 0.0;
    double max_edge_ = 0.0;
};

// Finds the triangle containing a chart point via a bucket grid.
class ElementLocator {
public:
    explicit ElementLocator(const FCDomainMesh& mesh, int cells_per_side = 0);
    // element index and barycentric coordinates, or nullopt when outside
    std::optional<std::pair<int, Eigen::Vector3d>> locate(const Vec2& p) const;

private:
    const FCDomainMesh* mesh_;
    Vec2 lo_, hi_;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> buckets_;
};

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);
double polygon_signed_area(const std::vector<Vec2>& poly);
// winding number of a closed polygon around p
int polygon_winding(const std::vector<Vec2>& poly, const Vec2& p);

enum class RadialGrading { Uniform, Logarithmic };

namespace meshgen {

// concentric rings between r_in and r_out, n_phi points per ring
FCDomainMesh annulus(const Vec2& center, double r_in, double r_out, int n_r, int n_phi,
                     RadialGrading grading = RadialGrading::Logarithmic);
// rings at radius·i/n_r with about n_phi·i/n_r points, plus the center vertex
FCDomainMesh disc(const Vec2& center, double radius, int n_r, int n_phi);
FCDomainMesh rectangle(const Vec2& lo, const Vec2& hi, int nx, int ny);

struct CircleHole {
    Vec2 center;
    double radius;
};
// Delaunay mesh of a disc of radius R (centered at the origin) minus circular
// holes. Spacing is h_min on the holes, growing linearly with distance at
// rate `growth` up to h_max.
FCDomainMesh perforated_disc(double R, const std::vector<CircleHole>& holes, double h_min,
                             double h_max, double growth = 0.25);

// plain Delaunay triangulation of a point set (Bowyer-Watson)
std::vector<Tri> delaunay(const std::vector<Vec2>& points);

}  // namespace meshgen

}  // namespace wb
