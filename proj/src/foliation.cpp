#include "wbkit/foliation.hpp"

#include "wbkit/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <thread>

namespace wb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRoundoffFloor = 1e-10;

double metric_norm_sq(const Mat2& g, const Vec2& v) { return v.dot(g * v); }

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

Eigen::Vector3d edge_bary(const Tri& t, int a, int b, double s) {
    Eigen::Vector3d w = Eigen::Vector3d::Zero();
    for (int k = 0; k < 3; ++k) {
        if (t[k] == a) w[k] += 1 - s;
        if (t[k] == b) w[k] += s;
    }
    return w;
}

bool ge_tol(double lhs, double rhs, double tol) { return lhs >= rhs - tol * std::abs(rhs) - kRoundoffFloor; }

double rel_gap(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s > 0 ? std::abs(a - b) / s : 0.0;
}

}  // namespace

LevelSetField::LevelSetField(const PoissonProblem& p, const PotentialSolution& s)
    : p_(&p), s_(&s), grad_(p.mesh, s.u) {
    const FCDomainMesh& m = p.mesh;
    const int nt = m.num_triangles();
    if (static_cast<int>(s.u.size()) != m.num_vertices()) throw std::invalid_argument("solution does not match mesh");

    std::map<std::pair<int, int>, std::pair<int, int>> edges;  // edge → (triangle, local vertex opposite)
    nbr_.assign(nt, {-1, -1, -1});
    for (int e = 0; e < nt; ++e) {
        const Tri& t = m.triangles()[e];
        for (int k = 0; k < 3; ++k) {
            const int a = t[(k + 1) % 3], b = t[(k + 2) % 3];
            const auto key = std::minmax(a, b);
            auto it = edges.find(key);
            if (it == edges.end()) {
                edges.emplace(key, std::make_pair(e, k));
            } else {
                nbr_[e][k] = it->second.first;
                nbr_[it->second.first][it->second.second] = e;
            }
        }
    }

    elem_charge_.assign(nt, 0.0);
    if (!p.source.empty())
        for (int e = 0; e < nt; ++e)
            if (p.source[e] != 0.0)
                elem_charge_[e] = p.source[e] * m.area(e) * std::sqrt(p.metric.eval(m.barycenter(e)).determinant());

    u_min_ = *std::min_element(s.u.begin(), s.u.end());
    u_max_ = *std::max_element(s.u.begin(), s.u.end());

    // sign changes around the link: 0 at an extremum, 4 or more at a saddle
    std::vector<int> changes(m.num_vertices(), 0);
    for (const Tri& t : m.triangles())
        for (int k = 0; k < 3; ++k) {
            const int v = t[k], a = t[(k + 1) % 3], b = t[(k + 2) % 3];
            if ((s.u[a] > s.u[v]) != (s.u[b] > s.u[v])) ++changes[v];
        }
    for (int v = 0; v < m.num_vertices(); ++v)
        if (m.boundary_label(v) >= 0 || changes[v] == 0 || changes[v] >= 4) critical_.push_back(s.u[v]);
    std::sort(critical_.begin(), critical_.end());
    critical_.erase(std::unique(critical_.begin(), critical_.end()), critical_.end());
}

double LevelSetField::default_grad_floor() const {
    return 1e-6 * (u_max_ - u_min_) / std::max(p_->mesh.diameter(), 1e-300);
}

double LevelSetField::grad_norm(int e, const Vec2& x, const Eigen::Vector3d& bary) const {
    const Vec2 du = grad_.at(e, bary);
    return std::sqrt(std::max(0.0, du.dot(p_->metric.eval(x).inverse() * du)));
}

std::vector<LevelLoop> LevelSetField::extract(double lambda, double grad_floor) const {
    if (!(lambda > u_min_ && lambda < u_max_))
        throw LevelOutOfRange("level " + std::to_string(lambda) + " is not inside (" + std::to_string(u_min_) + ", " +
                              std::to_string(u_max_) + ")");
    if (grad_floor < 0) grad_floor = default_grad_floor();
    const FCDomainMesh& m = p_->mesh;
    const std::vector<double>& u = s_->u;
    const int nt = m.num_triangles();
    auto above = [&](int v) { return u[v] >= lambda; };

    // per cut triangle: the local edge (opposite vertex) where the segment
    // enters and where it leaves, with {u ≥ λ} on the left
    std::vector<std::array<int, 2>> seg(nt, {-1, -1});
    for (int e = 0; e < nt; ++e) {
        const Tri& t = m.triangles()[e];
        int crossed[2], n = 0;
        for (int k = 0; k < 3; ++k)
            if (above(t[(k + 1) % 3]) != above(t[(k + 2) % 3])) crossed[n++] = k;
        if (n != 2) continue;
        // the vertex shared by both crossed edges is alone on its side; in a
        // counterclockwise triangle (L, A, B) with L above, the segment runs
        // from edge LA to edge BL
        const int lone = 3 - crossed[0] - crossed[1];
        const bool ccw = signed_area(m.vertices()[t[0]], m.vertices()[t[1]], m.vertices()[t[2]]) > 0;
        const int from_LA = (lone + 2) % 3, from_BL = (lone + 1) % 3;
        seg[e] = (ccw == above(t[lone])) ? std::array<int, 2>{from_LA, from_BL} : std::array<int, 2>{from_BL, from_LA};
    }

    std::vector<char> used(nt, 0);
    std::vector<LevelLoop> loops;
    for (int start = 0; start < nt; ++start) {
        if (seg[start][0] < 0 || used[start]) continue;
        LevelLoop L;
        L.lambda = lambda;
        std::vector<Vec2> pts;
        int e = start;
        bool closed = false;
        while (true) {
            used[e] = 1;
            const Tri& t = m.triangles()[e];
            const int k = seg[e][0];
            const int a = t[(k + 1) % 3], b = t[(k + 2) % 3];
            const double s = (lambda - u[a]) / (u[b] - u[a]);
            L.edge.push_back({a, b});
            L.edge_t.push_back(s);
            L.seg_elem.push_back(e);
            pts.push_back((1 - s) * m.vertices()[a] + s * m.vertices()[b]);
            const int next = nbr_[e][seg[e][1]];
            if (next < 0) break;  // only possible if u is not constant on a boundary loop
            if (next == start) {
                closed = true;
                break;
            }
            if (used[next]) break;
            e = next;
        }
        if (!closed) throw NearCriticalLevel("level " + std::to_string(lambda) + " gives an open contour");

        // drop repeated points (a vertex sitting exactly on the level)
        {
            std::vector<Vec2> p2;
            std::vector<std::array<int, 2>> e2;
            std::vector<double> t2;
            std::vector<int> s2;
            for (size_t i = 0; i < pts.size(); ++i) {
                const size_t j = (i + 1) % pts.size();
                if ((pts[j] - pts[i]).norm() <= 1e-14 * m.diameter()) continue;
                p2.push_back(pts[i]);
                e2.push_back(L.edge[i]);
                t2.push_back(L.edge_t[i]);
                s2.push_back(L.seg_elem[i]);
            }
            pts.swap(p2);
            L.edge.swap(e2);
            L.edge_t.swap(t2);
            L.seg_elem.swap(s2);
        }
        if (pts.size() < 3) continue;

        // left side is {u ≥ λ}; make the loop counterclockwise and remember
        // which side ended up inside
        L.inside_above = polygon_signed_area(pts) > 0;
        if (!L.inside_above) {
            std::reverse(pts.begin(), pts.end());
            std::reverse(L.edge.begin(), L.edge.end());
            std::reverse(L.edge_t.begin(), L.edge_t.end());
            // segment k now runs from point k to k+1, which is old segment n−2−k
            std::vector<int> se(L.seg_elem.size());
            const size_t n = se.size();
            for (size_t k = 0; k < n; ++k) se[k] = L.seg_elem[(2 * n - 2 - k) % n];
            L.seg_elem.swap(se);
        }

        // regularity
        L.min_grad = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < pts.size(); ++k) {
            const int el = L.seg_elem[k];
            const double gn =
                grad_norm(el, pts[k], edge_bary(m.triangles()[el], L.edge[k][0], L.edge[k][1], L.edge_t[k]));
            L.min_grad = std::min(L.min_grad, gn);
        }
        if (L.min_grad < grad_floor)
            throw NearCriticalLevel("|du| = " + std::to_string(L.min_grad) + " on level " + std::to_string(lambda));

        // enclosed region: clipped parts of the cut triangles, then a flood
        // fill through triangles this loop does not cut
        std::vector<char> cut(nt, 0), seen(nt, 0);
        for (int el : L.seg_elem) cut[el] = 1;
        double region = 0.0;
        std::vector<int> stack;
        for (int el = 0; el < nt; ++el) {
            if (!cut[el]) continue;
            const Tri& t = m.triangles()[el];
            std::vector<Vec2> poly;
            for (int k = 0; k < 3; ++k) {
                const int a = t[k], b = t[(k + 1) % 3];
                if (above(a) == L.inside_above) poly.push_back(m.vertices()[a]);
                if (above(a) != above(b)) {
                    const double s = (lambda - u[a]) / (u[b] - u[a]);
                    poly.push_back((1 - s) * m.vertices()[a] + s * m.vertices()[b]);
                }
            }
            region += elem_charge_[el] * std::abs(polygon_signed_area(poly)) / m.area(el);
            for (int k = 0; k < 3; ++k) {
                const int a = t[(k + 1) % 3], b = t[(k + 2) % 3];
                const int nb = nbr_[el][k];
                if (nb < 0 || cut[nb] || seen[nb]) continue;
                if (above(a) == L.inside_above && above(b) == L.inside_above) {
                    seen[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }
        while (!stack.empty()) {
            const int el = stack.back();
            stack.pop_back();
            region += elem_charge_[el];
            for (int nb : nbr_[el])
                if (nb >= 0 && !cut[nb] && !seen[nb]) {
                    seen[nb] = 1;
                    stack.push_back(nb);
                }
        }
        L.region_integral = region;
        L.enclosed_total = region;
        for (int h = 0; h < m.num_holes(); ++h)
            if (polygon_winding(pts, m.hole_seeds()[h]) != 0) {
                L.enclosed_holes.push_back(h + 1);
                L.enclosed_total += p_->charge(h);
            }
        L.curve = CurveInChart::polyline(std::move(pts), true);
        L.component = static_cast<int>(loops.size());
        loops.push_back(std::move(L));
    }
    return loops;
}

std::vector<LevelLoop> extract_level_loops(const PoissonProblem& p, const PotentialSolution& s, double lambda,
                                           double grad_floor) {
    return LevelSetField(p, s).extract(lambda, grad_floor);
}

std::vector<LevelBin> level_bins(const std::vector<double>& u, int n, const std::vector<double>& critical) {
    std::vector<LevelBin> out;
    if (u.empty() || n < 1) return out;
    std::vector<double> v = u;
    std::sort(v.begin(), v.end());
    const double range = v.back() - v.front();
    if (!(range > 0)) return out;
    const double near = 1e-6 * range;
    auto dist_to_critical = [&](double x) {
        if (critical.empty()) return std::numeric_limits<double>::infinity();
        auto it = std::lower_bound(critical.begin(), critical.end(), x);
        double d = std::numeric_limits<double>::infinity();
        if (it != critical.end()) d = std::min(d, *it - x);
        if (it != critical.begin()) d = std::min(d, x - *std::prev(it));
        return d;
    };
    const size_t N = v.size();
    const double narrow = 1e-9 * range;  // nodal values that differ by roundoff only
    double prev = v.front();
    for (int k = 1; k <= n; ++k) {
        const double hi = k == n ? v.back() : v[static_cast<size_t>(std::llround(double(k) * (N - 1) / n))];
        if (hi - prev > narrow || (k == n && hi > prev)) {
            // clustered values leave gaps; split so no bin is wider than range/n
            const int pieces = std::max(1, static_cast<int>(std::ceil((hi - prev) / (range / n) - 1e-9)));
            for (int j = 0; j < pieces; ++j) {
                const double lo_j = prev + (hi - prev) * j / pieces;
                const double hi_j = j + 1 == pieces ? hi : prev + (hi - prev) * (j + 1) / pieces;
                LevelBin b{0.5 * (lo_j + hi_j), lo_j, hi_j};
                if (dist_to_critical(b.lambda) < near) {
                    const double a = lo_j + 0.25 * (hi_j - lo_j), c = lo_j + 0.75 * (hi_j - lo_j);
                    b.lambda = dist_to_critical(a) >= dist_to_critical(c) ? a : c;
                }
                out.push_back(b);
            }
            prev = hi;
        }
    }
    return out;
}

LeafIntegrals leaf_integrals(const LevelSetField& F, const LevelLoop& loop, const ImmersedChart* f) {
    const PoissonProblem& p = F.problem();
    const FCDomainMesh& m = p.mesh;
    const std::vector<Vec2>& x = loop.curve.points;
    const size_t n = x.size();
    std::vector<double> seg(n), grad(n), dn2(n, 0.0);
    for (size_t k = 0; k < n; ++k) {
        const Vec2 d = x[(k + 1) % n] - x[k];
        seg[k] = std::sqrt(metric_norm_sq(p.metric.eval(0.5 * (x[k] + x[(k + 1) % n])), d));
        const int el = loop.seg_elem[k];
        grad[k] = F.grad_norm(el, x[k], edge_bary(m.triangles()[el], loop.edge[k][0], loop.edge[k][1], loop.edge_t[k]));
        if (f) {
            if (f->is_analytic()) {
                dn2[k] = f->geometry_at(x[k]).dN2;
            } else {
                const int prev = loop.seg_elem[(k + n - 1) % n];
                dn2[k] = 0.5 * (f->element_geometry(el).dN2 + f->element_geometry(prev).dN2);
            }
        }
    }
    LeafIntegrals r;
    for (size_t k = 0; k < n; ++k) {
        const double w = 0.5 * (seg[k] + seg[(k + n - 1) % n]);
        r.length += seg[k];
        r.flux += w * grad[k];
        if (f) {
            r.dN_over_du += w * dn2[k] / grad[k];
            r.dN += w * std::sqrt(std::max(0.0, dn2[k]));
        }
    }
    return r;
}

LeafFlux leaf_flux_identity(const LevelSetField& F, const LevelLoop& loop, double tol_flux) {
    LeafFlux r;
    r.flux = leaf_integrals(F, loop).flux;
    r.enclosed = std::abs(loop.enclosed_total);
    r.l1 = l1mc_norm(F.problem());
    r.residual = std::abs(r.flux - r.enclosed);
    const double scale = std::max(r.enclosed, r.l1);
    r.holds = r.residual <= tol_flux * scale + kRoundoffFloor;
    r.bounded = r.flux <= r.l1 * (1 + tol_flux) + kRoundoffFloor;
    return r;
}

CoareaReport coarea_check(const FCDomainMesh& m, const MetricField& g, const std::vector<double>& u, int n_levels) {
    CoareaReport r;
    const int nt = m.num_triangles();
    std::vector<Mat2> ge(nt);
    for (int e = 0; e < nt; ++e) {
        ge[e] = g.eval(m.barycenter(e));
        const Tri& t = m.triangles()[e];
        const Vec2 a = m.vertices()[t[0]], b = m.vertices()[t[1]], c = m.vertices()[t[2]];
        // P1 gradient: ∇u·(b−a) = u_b − u_a, ∇u·(c−a) = u_c − u_a
        Mat2 J;
        J.row(0) = (b - a).transpose();
        J.row(1) = (c - a).transpose();
        const Vec2 du = J.inverse() * Vec2(u[t[1]] - u[t[0]], u[t[2]] - u[t[0]]);
        r.volume_side += std::sqrt(std::max(0.0, du.dot(ge[e].inverse() * du))) * std::sqrt(ge[e].determinant()) * m.area(e);
    }
    for (const LevelBin& b : level_bins(u, n_levels)) {
        double len = 0.0;
        for (int e = 0; e < nt; ++e) {
            const Tri& t = m.triangles()[e];
            Vec2 pts[2];
            int n = 0;
            for (int k = 0; k < 3 && n < 2; ++k) {
                const int i = t[k], j = t[(k + 1) % 3];
                if ((u[i] >= b.lambda) != (u[j] >= b.lambda)) {
                    const double s = (b.lambda - u[i]) / (u[j] - u[i]);
                    pts[n++] = (1 - s) * m.vertices()[i] + s * m.vertices()[j];
                }
            }
            if (n == 2) len += std::sqrt(metric_norm_sq(ge[e], pts[1] - pts[0]));
        }
        r.level_side += (b.hi - b.lo) * len;
        r.lambda.push_back(b.lambda);
        r.length.push_back(len);
    }
    r.levels = static_cast<int>(r.lambda.size());
    const double s = std::max(std::abs(r.volume_side), std::abs(r.level_side));
    r.residual = s > 0 ? std::abs(r.volume_side - r.level_side) / s : 0.0;
    return r;
}

CoareaReport coarea_check(const PoissonProblem& p, const PotentialSolution& s, int n_levels) {
    return coarea_check(p.mesh, p.metric, s.u, n_levels);
}

FramedLoop restrict_frame(const ImmersedChart& f, const CurveInChart& c) {
    const size_t n = c.points.size();
    Vec3List gamma(n), N(n);
    const FCDomainMesh& m = f.mesh();
    for (size_t k = 0; k < n; ++k) {
        const Vec2& x = c.points[k];
        if (f.is_analytic()) {
            const PointGeometry g = f.geometry_at(x);
            gamma[k] = f.jet_at(x).f;
            N[k] = g.N;
        } else {
            const auto loc = f.locate(x);
            if (!loc) throw std::out_of_range("curve leaves the chart");
            const Tri& t = m.triangles()[loc->first];
            gamma[k].setZero();
            N[k].setZero();
            for (int j = 0; j < 3; ++j) {
                gamma[k] += loc->second[j] * f.vertex_position(t[j]);
                N[k] += loc->second[j] * f.vertex_normal(t[j]);
            }
        }
    }
    std::vector<double> phi(n);
    Vec3List dg;
    const bool smooth = c.kind == CurveInChart::Kind::SmoothPeriodic && f.is_analytic();
    if (smooth) {
        for (size_t k = 0; k < n; ++k) phi[k] = 2 * kPi * k / n;
        dg = spectral::derivative(gamma, 2 * kPi, 1);
    } else {
        std::vector<double> s(n + 1, 0.0);
        for (size_t k = 0; k < n; ++k) s[k + 1] = s[k] + (gamma[(k + 1) % n] - gamma[k]).norm();
        for (size_t k = 0; k < n; ++k) phi[k] = 2 * kPi * s[k] / s[n];
        dg = cyclic_difference(phi, gamma);
    }
    for (size_t k = 0; k < n; ++k) {
        const Vec3 t = dg[k].normalized();
        N[k] = (N[k] - t * t.dot(N[k])).normalized();
    }
    if (smooth) return FramedLoop::smooth(std::move(gamma), std::move(N));
    return FramedLoop::polyline(std::move(phi), std::move(gamma), std::move(N));
}

namespace {

struct LeafResult {
    LeafIntegrals I;
    double enclosed = 0.0;
    bool flux_ok = true;
    double flux_residual = 0.0;
    int iso = 0;  // 1 passed, −1 failed, 0 skipped
    double iso_ratio = 0.0;
};

struct LevelResult {
    bool ok = false;
    double lambda = 0.0;
    std::vector<LeafResult> leaves;
};

LevelResult process_level(const LevelSetField& F, const ImmersedChart& f, const LevelBin& b, double l1,
                          const ChainOptions& opt) {
    LevelResult out;
    std::vector<LevelLoop> loops;
    const double tries[3] = {b.lambda, b.lo + 0.3 * (b.hi - b.lo), b.lo + 0.7 * (b.hi - b.lo)};
    for (double lam : tries) {
        try {
            loops = F.extract(lam);
            out.ok = true;
            out.lambda = lam;
            break;
        } catch (const NearCriticalLevel&) {
        } catch (const LevelOutOfRange&) {
        }
    }
    if (!out.ok) return out;
    for (const LevelLoop& L : loops) {
        LeafResult r;
        r.I = leaf_integrals(F, L, &f);
        r.enclosed = std::abs(L.enclosed_total);
        r.flux_residual = std::abs(r.I.flux - r.enclosed);
        r.flux_ok = r.flux_residual <= opt.tol_flux * std::max(r.enclosed, l1) + kRoundoffFloor;
        if (L.curve.points.size() >= 16) {
            try {
                const IsoCheck c = check_iso_inequality(restrict_frame(f, L.curve), opt.tol_ineq);
                r.iso = c.holds ? 1 : -1;
                r.iso_ratio = c.rhs > 0 ? c.lhs / c.rhs : 0.0;
            } catch (const Error&) {
                // too coarse to carry a trihedron, or degenerate; counted as skipped
            }
        }
        out.leaves.push_back(r);
    }
    return out;
}

}  // namespace

ChainReport verify_main_theorem(const ImmersedChart& f, const ChainOptions& opt) {
    ChainReport rep;
    const FCDomainMesh& m = f.mesh();

    // extendability of every boundary generator
    bool all_ext = true;
    for (int l = 0; l <= m.num_holes(); ++l) {
        CurveInChart c;
        if (const auto& pd = f.polar_domain(); pd && f.is_analytic() && (l == 0 || pd->r_in > 0)) {
            c = CurveInChart::circle(pd->center, l == 0 ? pd->r_out : pd->r_in, opt.boundary_samples, true);
        } else {
            std::vector<Vec2> pts;
            for (int v : m.boundary_loops()[l]) pts.push_back(m.vertices()[v]);
            c = CurveInChart::polyline(std::move(pts), true);
        }
        const bool ext = is_extendable(restrict_frame(f, c));
        rep.generator_extendable.push_back(ext);
        all_ext = all_ext && ext;
    }

    PoissonProblem p;
    p.mesh = m;
    p.metric = f.pullback_metric();
    p.source.resize(m.num_triangles());
    for (int e = 0; e < m.num_triangles(); ++e) p.source[e] = f.element_geometry(e).K;
    for (int h = 1; h <= m.num_holes(); ++h) p.hole_charges.push_back(enclosed_curvature(f, h).K_i);
    if (!all_ext) {
        if (!(opt.nonextendable_annulus && m.num_holes() == 1))
            throw NotExtendable("a boundary generator of the chart is not extendable");
        p.hole_charges[0] -= 2 * kPi;
        rep.asserted = false;
    }
    rep.hole_charges = p.hole_charges;

    const PotentialSolution s = solve_floating_potential(p);
    rep.converged = s.converged;
    rep.l1 = l1mc_norm(p);
    rep.h1_sq = s.energy;
    const bool polar = f.is_analytic() && f.polar_domain().has_value();
    rep.bending = bending_energy(f, polar ? Quadrature::Polar : Quadrature::Element, 96, 512);
    rep.lhs = rep.bending;
    rep.vacuous = rep.l1 >= 4 * kPi;
    rep.rhs = rep.l1 > 0 ? (4 * kPi - rep.l1) / rep.l1 * rep.h1_sq : 0.0;
    rep.holds = rep.vacuous || ge_tol(rep.lhs, rep.rhs, opt.tol_ineq);

    double S0 = 0, S1 = 0, S2 = 0, S3 = 0, S4 = 0;
    if (s.energy > 0 && rep.l1 > 0) {
        const LevelSetField F(p, s);
        const std::vector<LevelBin> bins = level_bins(s.u, opt.n_levels, F.critical_values());
        std::vector<LevelResult> res(bins.size());
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t i = next++; i < bins.size(); i = next++) {
                try {
                    res[i] = process_level(F, f, bins[i], rep.l1, opt);
                } catch (const std::exception&) {
                    res[i] = LevelResult{};
                }
            }
        };
        const int nthreads = std::max(1, std::min<int>(opt.jobs, static_cast<int>(bins.size())));
        std::vector<std::thread> pool;
        for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();

        // fold in increasing λ
        for (size_t i = 0; i < bins.size(); ++i) {
            const LevelResult& L = res[i];
            if (!L.ok) {
                ++rep.skipped_levels;
                continue;
            }
            const double W = bins[i].hi - bins[i].lo;
            LevelRow row;
            row.lambda = L.lambda;
            row.weight = W;
            row.leaves = static_cast<int>(L.leaves.size());
            for (const LeafResult& r : L.leaves) {
                row.length += r.I.length;
                row.flux += r.I.flux;
                row.enclosed += r.enclosed;
                S0 += W * rep.l1 * r.I.dN_over_du;
                S1 += W * r.I.flux * r.I.dN_over_du;
                S2 += W * r.I.dN * r.I.dN;
                S3 += W * (4 * kPi - r.enclosed) * r.enclosed;
                S4 += W * (4 * kPi - rep.l1) * r.I.flux;
                ++rep.leaves;
                if (!r.flux_ok) ++rep.leaf_flux_failed;
                rep.worst_leaf_flux_residual =
                    std::max(rep.worst_leaf_flux_residual, r.flux_residual / std::max(r.enclosed, rep.l1));
                if (r.iso == 0) ++rep.leaf_iso_skipped;
                else {
                    ++rep.leaf_iso_checked;
                    if (r.iso < 0) ++rep.leaf_iso_failed;
                    if (r.iso_ratio > 0) {
                        const bool first = rep.leaf_iso_max_ratio == 0.0;
                        rep.leaf_iso_min_ratio = first ? r.iso_ratio : std::min(rep.leaf_iso_min_ratio, r.iso_ratio);
                        rep.leaf_iso_max_ratio = std::max(rep.leaf_iso_max_ratio, r.iso_ratio);
                    }
                }
            }
            rep.levels.push_back(row);
        }
        rep.coarea_residual = coarea_check(p, s, opt.n_levels).residual;
    }

    const double top = rep.l1 * rep.bending;
    const double bottom = (4 * kPi - rep.l1) * rep.h1_sq;
    auto step = [&](const char* name, double a, double b, bool eq) {
        ChainStep st{name, a, b, eq, rel_gap(a, b), ge_tol(a, b, opt.tol_ineq)};
        rep.steps.push_back(st);
    };
    step("coarea on the bending energy", top, S0, true);
    step("leaf flux bounded by the L1 norm", S0, S1, false);
    step("Cauchy-Schwarz on each leaf", S1, S2, false);
    step("isoperimetric inequality on each leaf", S2, S3, false);
    step("enclosed curvature bounded by the L1 norm", S3, S4, false);
    step("coarea on the Dirichlet energy", S4, bottom, true);

    bool ok = rep.converged && rep.skipped_levels == 0 && rep.leaf_iso_failed == 0 && rep.leaf_flux_failed == 0;
    for (const ChainStep& st : rep.steps) ok = ok && st.holds;
    rep.chain_holds = ok;
    return rep;
}

double foliation_bound_from_leaves(const std::vector<double>& t, const std::vector<double>& burgers,
                                   const std::vector<double>& length) {
    double bound = 0.0;
    for (size_t k = 0; k + 1 < t.size(); ++k) {
        auto g = [&](size_t i) { return burgers[i] * burgers[i] / (length[i] * length[i] * length[i]); };
        bound += 0.5 * (t[k + 1] - t[k]) * (g(k) + g(k + 1));
    }
    return bound;
}

FoliationBound burgers_foliation_bound(const ImmersedChart& f, const std::vector<CurveInChart>& loops,
                                       const std::vector<double>& t, double tol_ineq) {
    if (loops.size() != t.size()) throw std::invalid_argument("one transverse value per loop");
    for (size_t k = 1; k < t.size(); ++k)
        if (!(t[k] > t[k - 1])) throw std::invalid_argument("transverse values must increase");
    // consecutive loops must not meet
    for (size_t k = 0; k + 1 < loops.size(); ++k) {
        const auto& A = loops[k].points;
        const auto& B = loops[k + 1].points;
        for (size_t i = 0; i < A.size(); ++i) {
            const Vec2 a0 = A[i], a1 = A[(i + 1) % A.size()];
            for (size_t j = 0; j < B.size(); ++j) {
                const Vec2 b0 = B[j], b1 = B[(j + 1) % B.size()];
                const double d1 = cross2(a1 - a0, b0 - a0), d2 = cross2(a1 - a0, b1 - a0);
                const double d3 = cross2(b1 - b0, a0 - b0), d4 = cross2(b1 - b0, a1 - b0);
                if (d1 * d2 <= 0 && d3 * d4 <= 0 &&
                    std::max(a0.x(), a1.x()) >= std::min(b0.x(), b1.x()) &&
                    std::max(b0.x(), b1.x()) >= std::min(a0.x(), a1.x()) &&
                    std::max(a0.y(), a1.y()) >= std::min(b0.y(), b1.y()) &&
                    std::max(b0.y(), b1.y()) >= std::min(a0.y(), a1.y()))
                    throw LoopsNotDisjoint("loops " + std::to_string(k) + " and " + std::to_string(k + 1) + " meet");
            }
        }
    }
    FoliationBound r;
    r.t = t;
    for (const CurveInChart& c : loops) {
        const FramedLoop L = restrict_frame(f, c);
        r.burgers.push_back(burgers_vector(L).magnitude);
        r.length.push_back(L.length());
        r.turning.push_back(normal_turning(L));
    }
    r.bound = foliation_bound_from_leaves(r.t, r.burgers, r.length);
    const bool polar = f.is_analytic() && f.polar_domain().has_value();
    r.bending = bending_energy(f, polar ? Quadrature::Polar : Quadrature::Element, 96, 512);
    r.holds = ge_tol(r.bending, r.bound, tol_ineq);
    return r;
}

}  // namespace wb
