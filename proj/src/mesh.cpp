#include "wbkit/mesh.hpp"

#include "wbkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <unordered_map>

namespace wb {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t edge_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

}  // namespace

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double polygon_signed_area(const std::vector<Vec2>& poly) {
    double s = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        s += a.x() * b.y() - a.y() * b.x();
    }
    return 0.5 * s;
}

int polygon_winding(const std::vector<Vec2>& poly, const Vec2& p) {
    // crossing-number form of the winding number
    int w = 0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        const double side = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
        if (a.y() <= p.y()) {
            if (b.y() > p.y() && side > 0) ++w;
        } else if (b.y() <= p.y() && side < 0) {
            --w;
        }
    }
    return w;
}

FCDomainMesh::FCDomainMesh(std::vector<Vec2> vertices, std::vector<Tri> triangles,
                           std::vector<std::vector<int>> boundary_loops,
                           std::vector<double> hole_charges)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      loops_(std::move(boundary_loops)),
      hole_charges_(std::move(hole_charges)) {
    finalize();
}

FCDomainMesh FCDomainMesh::from_triangles(std::vector<Vec2> vertices, std::vector<Tri> triangles,
                                          std::vector<double> hole_charges) {
    std::unordered_map<std::uint64_t, int> directed;
    for (const Tri& t : triangles)
        for (int k = 0; k < 3; ++k) directed[edge_key(t[k], t[(k + 1) % 3])]++;
    std::map<int, int> next;  // boundary successor
    for (const Tri& t : triangles)
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            if (directed.count(edge_key(b, a))) continue;
            if (next.count(a)) throw InvalidMesh("boundary pinches at vertex " + std::to_string(a));
            next[a] = b;
        }
    std::vector<std::vector<int>> loops;
    std::map<int, bool> used;
    for (const auto& [start, _] : next) {
        if (used[start]) continue;
        std::vector<int> loop;
        int v = start;
        while (!used[v]) {
            used[v] = true;
            loop.push_back(v);
            auto it = next.find(v);
            if (it == next.end()) throw InvalidMesh("open boundary chain");
            v = it->second;
        }
        if (v != start) throw InvalidMesh("boundary chain does not close");
        loops.push_back(std::move(loop));
    }
    std::vector<std::vector<int>> holes;
    std::vector<int> outer;
    for (auto& loop : loops) {
        std::vector<Vec2> poly;
        for (int v : loop) poly.push_back(vertices[v]);
        if (polygon_signed_area(poly) > 0) {
            if (!outer.empty()) throw InvalidMesh("more than one positively oriented loop");
            outer = loop;
        } else {
            holes.push_back(loop);
        }
    }
    if (outer.empty()) throw InvalidMesh("no outer boundary");
    auto centroid = [&](const std::vector<int>& loop) {
        Vec2 c = Vec2::Zero();
        for (int v : loop) c += vertices[v];
        return Vec2(c / static_cast<double>(loop.size()));
    };
    std::sort(holes.begin(), holes.end(), [&](const auto& a, const auto& b) {
        const Vec2 ca = centroid(a), cb = centroid(b);
        return ca.x() != cb.x() ? ca.x() < cb.x() : ca.y() < cb.y();
    });
    std::vector<std::vector<int>> labeled{outer};
    for (auto& h : holes) labeled.push_back(h);
    return FCDomainMesh(std::move(vertices), std::move(triangles), std::move(labeled),
                        std::move(hole_charges));
}

void FCDomainMesh::finalize() {
    const int nv = num_vertices();
    if (nv < 3 || triangles_.empty()) throw InvalidMesh("empty mesh");
    if (loops_.empty()) throw InvalidMesh("no boundary loops");
    if (!hole_charges_.empty() && static_cast<int>(hole_charges_.size()) != num_holes())
        throw InvalidMesh("hole_charges has " + std::to_string(hole_charges_.size()) +
                          " entries for " + std::to_string(num_holes()) + " holes");

    std::unordered_map<std::uint64_t, int> directed;
    for (int e = 0; e < num_triangles(); ++e) {
        const Tri& t = triangles_[e];
        for (int k = 0; k < 3; ++k) {
            if (t[k] < 0 || t[k] >= nv) throw InvalidMesh("triangle index out of range");
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw InvalidMesh("repeated vertex");
        if (area(e) <= 0.0)
            throw InvalidMesh("triangle " + std::to_string(e) + " is not positively oriented");
        for (int k = 0; k < 3; ++k)
            if (directed[edge_key(t[k], t[(k + 1) % 3])]++ > 0)
                throw InvalidMesh("edge used twice with the same orientation");
    }
    // directed boundary edges must be exactly the loop edges
    std::unordered_map<std::uint64_t, int> bedges;
    int n_undirected = 0;
    for (const auto& [key, cnt] : directed) {
        const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
        if (!directed.count(edge_key(b, a))) {
            bedges[key] = 0;
            ++n_undirected;
        } else if (a < b) {
            ++n_undirected;
        }
    }
    vertex_loop_.assign(nv, -1);
    size_t loop_edges = 0;
    for (size_t l = 0; l < loops_.size(); ++l) {
        const auto& loop = loops_[l];
        if (loop.size() < 3) throw InvalidMesh("boundary loop with fewer than 3 vertices");
        std::vector<Vec2> poly;
        for (size_t i = 0; i < loop.size(); ++i) {
            const int a = loop[i], b = loop[(i + 1) % loop.size()];
            if (a < 0 || a >= nv) throw InvalidMesh("loop index out of range");
            auto it = bedges.find(edge_key(a, b));
            if (it == bedges.end() || it->second++ > 0)
                throw InvalidMesh("loop " + std::to_string(l) + " edge is not a boundary edge");
            if (vertex_loop_[a] != -1) throw InvalidMesh("vertex on two boundary loops");
            vertex_loop_[a] = static_cast<int>(l);
            poly.push_back(vertices_[a]);
            ++loop_edges;
        }
        const double sa = polygon_signed_area(poly);
        if (l == 0 && sa <= 0) throw InvalidMesh("outer loop must be positively oriented");
        if (l > 0 && sa >= 0) throw InvalidMesh("hole loops must be negatively oriented");
    }
    if (loop_edges != bedges.size()) throw InvalidMesh("boundary edge not covered by any loop");
    const int chi = nv - n_undirected + num_triangles();
    if (chi != 1 - num_holes())
        throw InvalidMesh("Euler characteristic " + std::to_string(chi) + " but " +
                          std::to_string(num_holes()) + " holes");

    vertex_tris_.assign(nv, {});
    vertex_nbrs_.assign(nv, {});
    for (int e = 0; e < num_triangles(); ++e)
        for (int k = 0; k < 3; ++k) {
            vertex_tris_[triangles_[e][k]].push_back(e);
            for (int j = 1; j < 3; ++j) vertex_nbrs_[triangles_[e][k]].push_back(triangles_[e][(k + j) % 3]);
        }
    for (auto& nb : vertex_nbrs_) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    for (int v = 0; v < nv; ++v)
        if (vertex_tris_[v].empty()) throw InvalidMesh("isolated vertex " + std::to_string(v));

    Vec2 lo = vertices_[0], hi = vertices_[0];
    for (const Vec2& p : vertices_) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    diameter_ = (hi - lo).norm();
    max_edge_ = 0.0;
    for (const Tri& t : triangles_)
        for (int k = 0; k < 3; ++k)
            max_edge_ = std::max(max_edge_, (vertices_[t[k]] - vertices_[t[(k + 1) % 3]]).norm());

    hole_seeds_.clear();
    for (size_t l = 1; l < loops_.size(); ++l) {
        std::vector<Vec2> poly;
        for (int v : loops_[l]) poly.push_back(vertices_[v]);
        Vec2 c = Vec2::Zero();
        for (const Vec2& p : poly) c += p;
        c /= static_cast<double>(poly.size());
        bool found = polygon_winding(poly, c) != 0;
        for (size_t i = 0; i < poly.size() && !found; ++i) {
            const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
            const Vec2 d = b - a;
            const Vec2 right(d.y(), -d.x());  // hole interior is to the right of a CW loop
            const Vec2 q = 0.5 * (a + b) + 1e-3 * right;
            if (polygon_winding(poly, q) != 0) {
                c = q;
                found = true;
            }
        }
        if (!found) throw InvalidMesh("could not place a seed inside hole " + std::to_string(l));
        hole_seeds_.push_back(c);
    }
}

double FCDomainMesh::area(int e) const {
    const Tri& t = triangles_[e];
    return signed_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

Vec2 FCDomainMesh::barycenter(int e) const {
    const Tri& t = triangles_[e];
    return (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
}

double FCDomainMesh::total_area() const {
    double s = 0.0;
    for (int e = 0; e < num_triangles(); ++e) s += area(e);
    return s;
}

std::vector<int> FCDomainMesh::patch(const std::vector<int>& seeds, int rings) const {
    std::vector<int> out(seeds);
    std::vector<char> seen(vertices_.size(), 0);
    for (int s : seeds) seen[s] = 1;
    size_t begin = 0;
    for (int r = 0; r < rings; ++r) {
        const size_t end = out.size();
        for (size_t i = begin; i < end; ++i)
            for (int nb : vertex_nbrs_[out[i]])
                if (!seen[nb]) {
                    seen[nb] = 1;
                    out.push_back(nb);
                }
        begin = end;
    }
    return out;
}

FCDomainMesh FCDomainMesh::with_hole_charges(std::vector<double> charges) const {
    FCDomainMesh m = *this;
    if (static_cast<int>(charges.size()) != num_holes())
        throw InvalidMesh("hole charge count does not match hole count");
    m.hole_charges_ = std::move(charges);
    return m;
}

ElementLocator::ElementLocator(const FCDomainMesh& mesh, int cells_per_side) : mesh_(&mesh) {
    lo_ = hi_ = mesh.vertices()[0];
    for (const Vec2& p : mesh.vertices()) {
        lo_ = lo_.cwiseMin(p);
        hi_ = hi_.cwiseMax(p);
    }
    const Vec2 pad = 1e-9 * (hi_ - lo_) + Vec2::Constant(1e-300);
    lo_ -= pad;
    hi_ += pad;
    if (cells_per_side <= 0)
        cells_per_side = std::max(1, static_cast<int>(std::sqrt(mesh.num_triangles() / 2.0)));
    nx_ = ny_ = cells_per_side;
    buckets_.assign(static_cast<size_t>(nx_) * ny_, {});
    auto cell = [&](double v, double lo, double hi, int n) {
        return std::clamp(static_cast<int>((v - lo) / (hi - lo) * n), 0, n - 1);
    };
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        Vec2 a = mesh.vertices()[mesh.triangles()[e][0]], b = a;
        for (int k = 1; k < 3; ++k) {
            a = a.cwiseMin(mesh.vertices()[mesh.triangles()[e][k]]);
            b = b.cwiseMax(mesh.vertices()[mesh.triangles()[e][k]]);
        }
        const int i0 = cell(a.x(), lo_.x(), hi_.x(), nx_), i1 = cell(b.x(), lo_.x(), hi_.x(), nx_);
        const int j0 = cell(a.y(), lo_.y(), hi_.y(), ny_), j1 = cell(b.y(), lo_.y(), hi_.y(), ny_);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) buckets_[static_cast<size_t>(j) * nx_ + i].push_back(e);
    }
}

std::optional<std::pair<int, Eigen::Vector3d>> ElementLocator::locate(const Vec2& p) const {
    if (p.x() < lo_.x() || p.y() < lo_.y() || p.x() > hi_.x() || p.y() > hi_.y()) return std::nullopt;
    const int i = std::clamp(static_cast<int>((p.x() - lo_.x()) / (hi_.x() - lo_.x()) * nx_), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>((p.y() - lo_.y()) / (hi_.y() - lo_.y()) * ny_), 0, ny_ - 1);
    int best = -1;
    double best_min = -1e-10;
    Eigen::Vector3d best_bc;
    for (int e : buckets_[static_cast<size_t>(j) * nx_ + i]) {
        const Tri& t = mesh_->triangles()[e];
        const Vec2& a = mesh_->vertices()[t[0]];
        const Vec2& b = mesh_->vertices()[t[1]];
        const Vec2& c = mesh_->vertices()[t[2]];
        const double A = signed_area(a, b, c);
        Eigen::Vector3d bc(signed_area(p, b, c) / A, signed_area(a, p, c) / A, signed_area(a, b, p) / A);
        const double m = bc.minCoeff();
        if (m > best_min) {
            best_min = m;
            best = e;
            best_bc = bc;
        }
    }
    if (best < 0) return std::nullopt;
    return std::make_pair(best, best_bc);
}

namespace meshgen {

namespace {

// Triangulates the band between two closed rings (both CCW by angle).
void zip_rings(const std::vector<int>& inner, const std::vector<double>& ang_in,
               const std::vector<int>& outer, const std::vector<double>& ang_out,
               const std::vector<Vec2>& verts, std::vector<Tri>& tris) {
    const size_t ni = inner.size(), no = outer.size();
    // unwrap angles so both sequences increase from a common start
    auto unwrapped = [](const std::vector<double>& a) {
        std::vector<double> u(a);
        for (size_t k = 1; k < u.size(); ++k)
            while (u[k] <= u[k - 1]) u[k] += 2 * kPi;
        return u;
    };
    std::vector<double> ai = unwrapped(ang_in), ao = unwrapped(ang_out);
    while (ao[0] < ai[0] - kPi) for (double& x : ao) x += 2 * kPi;
    while (ao[0] > ai[0] + kPi) for (double& x : ao) x -= 2 * kPi;
    size_t i = 0, j = 0;
    auto push = [&](int a, int b, int c) {
        Tri t{a, b, c};
        if (signed_area(verts[a], verts[b], verts[c]) < 0) std::swap(t[1], t[2]);
        tris.push_back(t);
    };
    while (i < ni || j < no) {
        const double next_i = i < ni ? (i + 1 < ni ? ai[i + 1] : ai[0] + 2 * kPi) : 1e300;
        const double next_o = j < no ? (j + 1 < no ? ao[j + 1] : ao[0] + 2 * kPi) : 1e300;
        const int a = inner[i % ni], b = outer[j % no];
        if (next_i <= next_o && i < ni) {
            push(a, inner[(i + 1) % ni], b);
            ++i;
        } else {
            push(a, outer[(j + 1) % no], b);
            ++j;
        }
    }
}

}  // namespace

FCDomainMesh annulus(const Vec2& center, double r_in, double r_out, int n_r, int n_phi,
                     RadialGrading grading) {
    if (!(r_in > 0 && r_out > r_in) || n_r < 1 || n_phi < 3)
        throw InvalidMesh("annulus parameters out of range");
    std::vector<Vec2> verts;
    std::vector<Tri> tris;
    std::vector<std::vector<int>> rings;
    std::vector<std::vector<double>> angs;
    for (int i = 0; i <= n_r; ++i) {
        const double s = static_cast<double>(i) / n_r;
        const double r = grading == RadialGrading::Logarithmic ? r_in * std::pow(r_out / r_in, s)
                                                                : r_in + s * (r_out - r_in);
        const double offset = (i % 2) * kPi / n_phi;  // stagger alternate rings
        std::vector<int> ring;
        std::vector<double> ang;
        for (int k = 0; k < n_phi; ++k) {
            const double a = offset + 2 * kPi * k / n_phi;
            ring.push_back(static_cast<int>(verts.size()));
            ang.push_back(a);
            verts.push_back(center + r * Vec2(std::cos(a), std::sin(a)));
        }
        rings.push_back(ring);
        angs.push_back(ang);
    }
    for (int i = 0; i < n_r; ++i) zip_rings(rings[i], angs[i], rings[i + 1], angs[i + 1], verts, tris);
    std::vector<int> outer = rings[n_r];
    std::vector<int> hole(rings[0].rbegin(), rings[0].rend());
    return FCDomainMesh(std::move(verts), std::move(tris), {outer, hole});
}

FCDomainMesh disc(const Vec2& center, double radius, int n_r, int n_phi) {
    if (!(radius > 0) || n_r < 1 || n_phi < 6) throw InvalidMesh("disc parameters out of range");
    std::vector<Vec2> verts{center};
    std::vector<Tri> tris;
    std::vector<int> prev{0};
    std::vector<double> prev_ang{0.0};
    for (int i = 1; i <= n_r; ++i) {
        const double r = radius * i / n_r;
        const int count = std::max(6, static_cast<int>(std::lround(static_cast<double>(n_phi) * i / n_r)));
        const double offset = (i % 2) * kPi / count;
        std::vector<int> ring;
        std::vector<double> ang;
        for (int k = 0; k < count; ++k) {
            const double a = offset + 2 * kPi * k / count;
            ring.push_back(static_cast<int>(verts.size()));
            ang.push_back(a);
            verts.push_back(center + r * Vec2(std::cos(a), std::sin(a)));
        }
        if (i == 1) {
            for (int k = 0; k < count; ++k) tris.push_back({0, ring[k], ring[(k + 1) % count]});
        } else {
            zip_rings(prev, prev_ang, ring, ang, verts, tris);
        }
        prev = ring;
        prev_ang = ang;
    }
    return FCDomainMesh(std::move(verts), std::move(tris), {prev});
}

FCDomainMesh rectangle(const Vec2& lo, const Vec2& hi, int nx, int ny) {
    if (nx < 1 || ny < 1 || !(hi.x() > lo.x() && hi.y() > lo.y()))
        throw InvalidMesh("rectangle parameters out of range");
    std::vector<Vec2> verts;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            verts.emplace_back(lo.x() + (hi.x() - lo.x()) * i / nx, lo.y() + (hi.y() - lo.y()) * j / ny);
    auto id = [&](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Tri> tris;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if ((i + j) % 2 == 0) {
                tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    std::vector<int> outer;
    for (int i = 0; i < nx; ++i) outer.push_back(id(i, 0));
    for (int j = 0; j < ny; ++j) outer.push_back(id(nx, j));
    for (int i = nx; i > 0; --i) outer.push_back(id(i, ny));
    for (int j = ny; j > 0; --j) outer.push_back(id(0, j));
    return FCDomainMesh(std::move(verts), std::move(tris), {outer});
}

}  // namespace meshgen

}  // namespace wb
