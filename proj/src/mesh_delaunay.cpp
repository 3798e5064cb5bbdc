// Bowyer-Watson Delaunay triangulation and the perforated-disc generator
// built on it.

#include "wbkit/errors.hpp"
#include "wbkit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace wb::meshgen {

namespace {

constexpr double kPi = std::numbers::pi;

struct DTri {
    int v[3];
    int nb[3];  // nb[k] is across the edge opposite v[k]
    bool alive = true;
};

long double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (static_cast<long double>(b.x()) - a.x()) * (static_cast<long double>(c.y()) - a.y()) -
           (static_cast<long double>(b.y()) - a.y()) * (static_cast<long double>(c.x()) - a.x());
}

// > 0 when d is strictly inside the circumcircle of CCW triangle abc
long double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const long double adx = a.x() - static_cast<long double>(d.x()), ady = a.y() - static_cast<long double>(d.y());
    const long double bdx = b.x() - static_cast<long double>(d.x()), bdy = b.y() - static_cast<long double>(d.y());
    const long double cdx = c.x() - static_cast<long double>(d.x()), cdy = c.y() - static_cast<long double>(d.y());
    const long double ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

class Triangulator {
public:
    explicit Triangulator(const std::vector<Vec2>& pts) : pts_(pts) {
        Vec2 lo = pts[0], hi = pts[0];
        for (const Vec2& p : pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Vec2 c = 0.5 * (lo + hi);
        const double s = 1000.0 * std::max((hi - lo).maxCoeff(), 1e-12);
        n_ = static_cast<int>(pts.size());
        pts_.push_back(c + Vec2(-s, -s));
        pts_.push_back(c + Vec2(s, -s));
        pts_.push_back(c + Vec2(0.0, s));
        tris_.push_back(DTri{{n_, n_ + 1, n_ + 2}, {-1, -1, -1}});
    }

    void insert(int p) {
        int t = locate(pts_[p]);
        // grow the cavity from the containing triangle
        std::vector<int> cavity{t};
        mark_.resize(tris_.size(), 0);
        mark_[t] = 1;
        for (size_t i = 0; i < cavity.size(); ++i) {
            const DTri& tr = tris_[cavity[i]];
            for (int k = 0; k < 3; ++k) {
                const int nb = tr.nb[k];
                if (nb < 0 || mark_[nb]) continue;
                const DTri& o = tris_[nb];
                if (incircle(pts_[o.v[0]], pts_[o.v[1]], pts_[o.v[2]], pts_[p]) > 0) {
                    mark_[nb] = 1;
                    cavity.push_back(nb);
                }
            }
        }
        // boundary edges of the cavity, each as (a, b, outside neighbor)
        struct Edge {
            int a, b, out;
        };
        std::vector<Edge> edges;
        for (int c : cavity) {
            const DTri& tr = tris_[c];
            for (int k = 0; k < 3; ++k) {
                const int nb = tr.nb[k];
                if (nb >= 0 && mark_[nb]) continue;
                edges.push_back({tr.v[(k + 1) % 3], tr.v[(k + 2) % 3], nb});
            }
        }
        for (int c : cavity) {
            tris_[c].alive = false;
            mark_[c] = 0;
        }
        // fan from p; reuse dead slots first
        std::vector<int> created;
        std::unordered_map<int, int> by_start, by_end;  // vertex -> new triangle
        for (const Edge& e : edges) {
            int id;
            if (!cavity.empty() && created.size() < cavity.size()) {
                id = cavity[created.size()];
                tris_[id] = DTri{{e.a, e.b, p}, {-1, -1, -1}};
            } else {
                id = static_cast<int>(tris_.size());
                tris_.push_back(DTri{{e.a, e.b, p}, {-1, -1, -1}});
                mark_.push_back(0);
            }
            if (orient(pts_[e.a], pts_[e.b], pts_[p]) <= 0)
                throw InvalidMesh("Delaunay cavity is not star-shaped (degenerate input)");
            tris_[id].nb[2] = e.out;  // edge ab is opposite p
            if (e.out >= 0) {
                DTri& o = tris_[e.out];
                for (int k = 0; k < 3; ++k)
                    if (o.v[k] != e.a && o.v[k] != e.b) o.nb[k] = id;
            }
            by_start[e.a] = id;
            by_end[e.b] = id;
            created.push_back(id);
        }
        for (int id : created) {
            DTri& tr = tris_[id];
            // edge (b, p) is opposite a; the neighbor starts at b
            tr.nb[0] = by_start.at(tr.v[1]);
            // edge (p, a) is opposite b; the neighbor ends at a
            tr.nb[1] = by_end.at(tr.v[0]);
        }
        last_ = created.front();
    }

    std::vector<Tri> result() const {
        std::vector<Tri> out;
        for (const DTri& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] >= n_ || t.v[1] >= n_ || t.v[2] >= n_) continue;
            out.push_back({t.v[0], t.v[1], t.v[2]});
        }
        return out;
    }

private:
    int locate(const Vec2& p) {
        int t = last_;
        if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[t].alive) {
            t = 0;
            while (!tris_[t].alive) ++t;
        }
        for (int steps = 0; steps < 4 * static_cast<int>(tris_.size()) + 16; ++steps) {
            const DTri& tr = tris_[t];
            int move = -1;
            // rotate the starting edge to avoid cycling on degenerate walks
            const int start = steps % 3;
            for (int j = 0; j < 3; ++j) {
                const int k = (start + j) % 3;
                const Vec2& a = pts_[tr.v[(k + 1) % 3]];
                const Vec2& b = pts_[tr.v[(k + 2) % 3]];
                if (orient(a, b, p) < 0) {
                    move = tr.nb[k];
                    break;
                }
            }
            if (move < 0) return t;
            t = move;
        }
        throw InvalidMesh("point location failed");
    }

    std::vector<Vec2> pts_;
    std::vector<DTri> tris_;
    std::vector<char> mark_;
    int n_ = 0;
    int last_ = 0;
};

// cheap deterministic hash in [-1, 1]
double hash_unit(std::uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return static_cast<double>(k >> 11) / static_cast<double>(1ULL << 52) - 1.0;
}

}  // namespace

std::vector<Tri> delaunay(const std::vector<Vec2>& points) {
    if (points.size() < 3) throw InvalidMesh("Delaunay needs at least 3 points");
    // snake order over a coarse grid keeps the walks short
    Vec2 lo = points[0], hi = points[0];
    for (const Vec2& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const int g = std::max(1, static_cast<int>(std::sqrt(points.size() / 4.0)));
    std::vector<int> order(points.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    auto key = [&](int i) {
        const Vec2& p = points[i];
        const int row = std::clamp(static_cast<int>((p.y() - lo.y()) / (hi.y() - lo.y() + 1e-300) * g), 0, g - 1);
        const double x = (p.x() - lo.x()) / (hi.x() - lo.x() + 1e-300);
        return std::make_pair(row, row % 2 ? -x : x);
    };
    std::sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
    Triangulator tr(points);
    for (int i : order) tr.insert(i);
    return tr.result();
}

FCDomainMesh perforated_disc(double R, const std::vector<CircleHole>& holes, double h_min,
                             double h_max, double growth) {
    if (!(R > 0 && h_min > 0 && h_max >= h_min && growth > 0))
        throw InvalidMesh("perforated_disc parameters out of range");
    for (const auto& h : holes)
        if (h.radius <= 0 || h.center.norm() + h.radius >= R)
            throw InvalidMesh("hole does not fit inside the disc");

    auto hole_dist = [&](const Vec2& p) {
        double d = 1e300;
        for (const auto& h : holes) d = std::min(d, (p - h.center).norm() - h.radius);
        return d;
    };
    auto spacing = [&](const Vec2& p) {
        if (holes.empty()) return h_max;
        return std::min(h_max, h_min + growth * std::max(0.0, hole_dist(p)));
    };

    std::vector<Vec2> pts;
    std::uint64_t salt = 1;
    // tiny radial jitter breaks exact cocircularity of boundary samples
    auto jitter = [&](double scale) { return 1e-9 * scale * hash_unit(salt++); };
    auto add_circle = [&](const Vec2& c, double r, double h) {
        const int n = std::max(8, static_cast<int>(std::ceil(2 * kPi * r / h)));
        for (int k = 0; k < n; ++k) {
            const double a = 2 * kPi * k / n;
            pts.push_back(c + (r + jitter(h)) * Vec2(std::cos(a), std::sin(a)));
        }
        return 2 * kPi * r / n;
    };
    const double h_outer = spacing(Vec2(R, 0.0));
    add_circle(Vec2::Zero(), R, h_outer);
    for (const auto& h : holes) add_circle(h.center, h.radius, h_min);

    // candidate interior points: rings around each hole, then a polar far field
    std::vector<Vec2> cand;
    for (const auto& h : holes) {
        double rho = h.radius + h_min;
        while (true) {
            const Vec2 probe = h.center + Vec2(rho, 0.0);
            const double s = spacing(probe);
            if (s >= h_max * 0.999 || rho > 2 * R) break;
            const int n = std::max(8, static_cast<int>(std::ceil(2 * kPi * rho / s)));
            for (int k = 0; k < n; ++k) {
                const double a = 2 * kPi * (k + 0.5 * (cand.size() % 2)) / n;
                cand.push_back(h.center + rho * Vec2(std::cos(a), std::sin(a)));
            }
            rho += s;
        }
    }
    for (double rho = R - h_outer; rho > 0.5 * h_max; rho -= h_max) {
        const int n = std::max(6, static_cast<int>(std::ceil(2 * kPi * rho / h_max)));
        for (int k = 0; k < n; ++k) {
            const double a = 2 * kPi * (k + 0.5) / n;
            cand.push_back(rho * Vec2(std::cos(a), std::sin(a)));
        }
    }
    cand.emplace_back(0.0, 0.0);
    // fine points first so the greedy filter keeps the graded layers
    std::stable_sort(cand.begin(), cand.end(),
                     [&](const Vec2& a, const Vec2& b) { return spacing(a) < spacing(b); });

    // greedy thinning against a hierarchy of bucket grids; a query of radius r
    // uses the level whose cells are at least r wide, and since the spacing
    // is Lipschitz only a handful of points share those cells
    std::vector<double> cells{h_min};
    while (cells.back() < h_max) cells.push_back(2 * cells.back());
    std::vector<std::unordered_map<std::int64_t, std::vector<int>>> grids(cells.size());
    auto cell_of = [&](const Vec2& p, std::size_t lv) {
        return std::make_pair(static_cast<std::int64_t>(std::floor((p.x() + R) / cells[lv])),
                              static_cast<std::int64_t>(std::floor((p.y() + R) / cells[lv])));
    };
    auto gkey = [&](std::int64_t i, std::int64_t j) { return (j << 32) ^ (i & 0xffffffff); };
    auto add_to_grid = [&](int idx) {
        for (std::size_t lv = 0; lv < cells.size(); ++lv) {
            auto [i, j] = cell_of(pts[idx], lv);
            grids[lv][gkey(i, j)].push_back(idx);
        }
    };
    for (size_t i = 0; i < pts.size(); ++i) add_to_grid(static_cast<int>(i));
    auto too_close = [&](const Vec2& p, double r) {
        std::size_t lv = 0;
        while (lv + 1 < cells.size() && cells[lv] < r) ++lv;
        auto [ci, cj] = cell_of(p, lv);
        const std::int64_t span = static_cast<std::int64_t>(std::ceil(r / cells[lv]));
        for (std::int64_t j = cj - span; j <= cj + span; ++j)
            for (std::int64_t i = ci - span; i <= ci + span; ++i) {
                auto it = grids[lv].find(gkey(i, j));
                if (it == grids[lv].end()) continue;
                for (int q : it->second)
                    if ((pts[q] - p).squaredNorm() < r * r) return true;
            }
        return false;
    };
    for (const Vec2& c : cand) {
        if (c.norm() > R - 0.8 * h_outer) continue;
        const double s = spacing(c);
        if (hole_dist(c) < 0.8 * h_min) continue;
        if (too_close(c, 0.75 * s)) continue;
        pts.push_back(c + Vec2(jitter(s), jitter(s)));
        add_to_grid(static_cast<int>(pts.size()) - 1);
    }

    std::vector<Tri> all = delaunay(pts);
    std::vector<Tri> kept;
    for (const Tri& t : all) {
        const Vec2 c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
        if (c.norm() >= R) continue;
        bool in_hole = false;
        for (const auto& h : holes)
            if ((c - h.center).norm() <= h.radius) in_hole = true;
        if (!in_hole) kept.push_back(t);
    }
    return FCDomainMesh::from_triangles(std::move(pts), std::move(kept));
}

}  // namespace wb::meshgen
