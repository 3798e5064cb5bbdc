#include "wbkit/sphere.hpp"

#include "wbkit/errors.hpp"
#include "wbkit/quadrature.hpp"
#include "wbkit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace wb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRoundoffFloor = 1e-10;

// Side of p relative to the great circle through a→b, as sin of the angular
// distance. Endpoints are put in a canonical order first so the same edge
// gives bit-identical answers whichever way it is traversed; the degree and
// winding predicates then agree exactly.
double side(const Vec3& a, const Vec3& b, const Vec3& p) {
    const bool swap = std::lexicographical_compare(b.data(), b.data() + 3, a.data(), a.data() + 3);
    const Vec3& u = swap ? b : a;
    const Vec3& v = swap ? a : b;
    const Vec3 n = u.cross(v);
    const double nn = n.norm();
    if (nn == 0.0) return 0.0;
    const double s = n.dot(p) / nn;
    return swap ? -s : s;
}

double arc_angle(const Vec3& a, const Vec3& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

// angular distance from p to the minor arc ab
double distance_to_arc(const Vec3& p, const Vec3& a, const Vec3& b) {
    Vec3 n = a.cross(b);
    const double nn = n.norm();
    if (nn > 1e-300) {
        n /= nn;
        const double s = p.dot(n);
        const Vec3 pp = p - s * n;
        if (pp.squaredNorm() > 0 && a.cross(pp).dot(n) >= 0 && pp.cross(b).dot(n) >= 0)
            return std::asin(std::min(1.0, std::abs(s)));
    }
    return std::min(arc_angle(p, a), arc_angle(p, b));
}

// false only if the minor arc pq certainly misses the cap (c, rad); n is the
// unit normal of the plane through p and q
bool cap_may_meet_arc(const Vec3& c, double rad, const Vec3& p, const Vec3& q, const Vec3& n) {
    // caps under a quarter turn are convex, so an arc that misses the cap misses the block
    if (rad >= 1.5) return true;
    if (std::abs(c.dot(n)) > std::sin(rad + 1e-6)) return false;
    return distance_to_arc(c, p, q) <= rad + 1e-6;
}

// +1/-1 for a transversal crossing of arc pq with arc ab, 0 for none
int crossing(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, double delta) {
    if ((a - b).squaredNorm() == 0.0) return 0;
    const double sp = side(a, b, p), sq = side(a, b, q);
    if ((sp > delta && sq > delta) || (sp < -delta && sq < -delta)) return 0;
    const double ta = side(p, q, a), tb = side(p, q, b);
    if ((ta > delta && tb > delta) || (ta < -delta && tb < -delta)) return 0;
    if (std::abs(sp) <= delta || std::abs(sq) <= delta || std::abs(ta) <= delta || std::abs(tb) <= delta)
        throw DegenerateConfiguration("arc passes within delta of a curve vertex or tangentially");
    // the great circles meet in ±X; keep the crossing only if both arcs hit the same one
    const Vec3 X = (p.cross(q)).cross(a.cross(b));
    if (X.dot(p + q) * X.dot(a + b) <= 0) return 0;
    return sp > 0 ? 1 : -1;
}

Vec3List fibonacci_sphere(int n) {
    Vec3List pts;
    const double ga = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        pts.emplace_back(r * std::cos(ga * i), r * std::sin(ga * i), z);
    }
    return pts;
}

double distance_to_curves(const Vec3& p, const std::vector<SphereCurve>& cs) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : cs) {
        const size_t n = c.points.size();
        const size_t nb = c.block_center.size();
        const size_t blk = nb > 0 ? SphereCurve::kBlock : n;
        for (size_t b = 0, i0 = 0; i0 < n; ++b, i0 += blk) {
            if (nb > 0 && arc_angle(p, c.block_center[b]) - c.block_radius[b] >= d) continue;
            const size_t i1 = std::min(n, i0 + blk);
            for (size_t i = i0; i < i1; ++i) d = std::min(d, distance_to_arc(p, c.points[i], c.points[(i + 1) % n]));
        }
    }
    return d;
}

// Q at p, nudging p by 1e-6 along fixed directions when it is not regular
template <class Query>
int degree_nudged(const Query& Q, const Vec3& p) {
    static const Vec3List dirs = fibonacci_sphere(16);
    try {
        return Q(p);
    } catch (const NotRegularValue&) {
    } catch (const DegenerateConfiguration&) {
    }
    for (const Vec3& d : dirs) {
        try {
            return Q((p + 1e-6 * d).normalized());
        } catch (const NotRegularValue&) {
        } catch (const DegenerateConfiguration&) {
        }
    }
    throw NotRegularValue("no regular value near the requested point");
}

// boundary loops of the chart in chart coordinates, refined for sampling
struct ChartBoundary {
    std::vector<SphereCurve> curves;
    double length = 0.0;
};

ChartBoundary analytic_boundary(const ImmersedChart& f, int samples) {
    ChartBoundary out;
    if (const auto& pd = f.polar_domain()) {
        std::vector<std::pair<double, int>> circles{{pd->r_out, 1}};
        if (pd->r_in > 0) circles.push_back({pd->r_in, -1});
        for (auto [r, dir] : circles) {
            Vec3List N(samples);
            for (int k = 0; k < samples; ++k) {
                const double t = dir * 2 * kPi * k / samples;
                N[k] = f.geometry_at(pd->center + r * Vec2(std::cos(t), std::sin(t))).N;
            }
            const Vec3List dN = spectral::derivative(N, 2 * kPi);
            std::vector<double> sp(samples);
            for (int k = 0; k < samples; ++k) sp[k] = dN[k].norm();
            out.length += spectral::periodic_trapezoid(sp, 2 * kPi);
            out.curves.push_back(SphereCurve::make(std::move(N), 1e-8));
        }
        return out;
    }
    const auto& m = f.mesh();
    size_t nb = 0;
    for (const auto& loop : m.boundary_loops()) nb += loop.size();
    const int sub = std::max<int>(1, static_cast<int>(samples / std::max<size_t>(1, nb)));
    for (const auto& loop : m.boundary_loops()) {
        Vec3List N;
        for (size_t i = 0; i < loop.size(); ++i) {
            const Vec2& a = m.vertices()[loop[i]];
            const Vec2& b = m.vertices()[loop[(i + 1) % loop.size()]];
            for (int s = 0; s < sub; ++s) {
                const Vec2 p = a + (b - a) * (static_cast<double>(s) / sub);
                N.push_back(f.geometry_at(p).N);
            }
        }
        SphereCurve c = SphereCurve::make(std::move(N), 1e-8);
        out.length += c.length();
        out.curves.push_back(std::move(c));
    }
    return out;
}

bool use_polar(const ImmersedChart& f) { return f.is_analytic() && f.polar_domain().has_value(); }

struct DiscIntegrals {
    double L = 0.0, QK = 0.0, K = 0.0;
};

DiscIntegrals disc_integrals(const ImmersedChart& f) {
    DiscIntegrals r;
    if (use_polar(f)) {
        // Q∘N jumps across curves in the chart, which no fixed rule resolves;
        // on the sphere side ∫(Q∘N)K = ∫Q² and Q is piecewise constant
        const DegreeField Q(f);
        r.L = Q.boundary_length();
        r.K = integrate(f, [](const PointGeometry& g) { return g.K; }, Quadrature::Polar);
        r.QK = Q.sphere_integral([](int q) { return double(q) * q; });
        return r;
    }
    const GaussImage img = GaussImage::from_chart(f);
    for (const auto& c : img.boundary_curves()) r.L += c.length();
    for (int e = 0; e < f.mesh().num_triangles(); ++e) {
        const PointGeometry& g = f.element_geometry(e);
        const double w = f.mesh().area(e) * g.area_density * g.K;
        r.K += w;
        if (g.K != 0.0) r.QK += degree_nudged([&](const Vec3& p) { return degree_at(img, p); }, g.N) * w;
    }
    return r;
}

}  // namespace

SphereCurve SphereCurve::make(Vec3List pts, double tol) {
    if (pts.size() < 3) throw InvalidLoop("sphere curve needs at least 3 points");
    const size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) {
        if (!pts[i].allFinite() || std::abs(pts[i].norm() - 1.0) > tol)
            throw InvalidLoop("sphere curve point " + std::to_string(i) + " is not a unit vector");
        if (pts[i].dot(pts[(i + 1) % n]) < -1.0 + 1e-12)
            throw InvalidLoop("sphere curve points " + std::to_string(i) + " and next are antipodal");
    }
    SphereCurve c;
    c.points = std::move(pts);
    for (size_t i0 = 0; i0 < n; i0 += kBlock) {
        const size_t i1 = std::min(n, i0 + kBlock);
        Vec3 ctr = Vec3::Zero();
        for (size_t i = i0; i <= i1; ++i) ctr += c.points[i % n];
        double rad = kPi;
        if (ctr.norm() > 1e-12) {
            ctr.normalize();
            rad = 0.0;
            for (size_t i = i0; i <= i1; ++i) rad = std::max(rad, arc_angle(ctr, c.points[i % n]));
        }
        c.block_center.push_back(ctr);
        c.block_radius.push_back(rad);
    }
    return c;
}

double SphereCurve::length() const {
    double L = 0.0;
    const size_t n = points.size();
    for (size_t i = 0; i < n; ++i) L += arc_angle(points[i], points[(i + 1) % n]);
    return L;
}

int winding_number(const SphereCurve& c, const Vec3& p, const Vec3& q, double delta) {
    if (p.normalized().dot(q.normalized()) < -1.0 + 1e-12)
        throw DegenerateConfiguration("antipodal point pair");
    int w = 0;
    const Vec3 npq = p.cross(q).normalized();
    const size_t n = c.points.size();
    const size_t nb = c.block_center.size();
    const size_t blk = nb > 0 ? SphereCurve::kBlock : n;
    for (size_t b = 0, i0 = 0; i0 < n; ++b, i0 += blk) {
        if (nb > 0 && !cap_may_meet_arc(c.block_center[b], c.block_radius[b], p, q, npq)) continue;
        const size_t i1 = std::min(n, i0 + blk);
        for (size_t i = i0; i < i1; ++i) w += crossing(p, q, c.points[i], c.points[(i + 1) % n], delta);
    }
    return w;
}

int winding_number(const std::vector<SphereCurve>& cs, const Vec3& p, const Vec3& q, double delta) {
    int w = 0;
    for (const auto& c : cs) w += winding_number(c, p, q, delta);
    return w;
}

GaussImage GaussImage::from_chart(const ImmersedChart& f) {
    GaussImage g;
    const auto& m = f.mesh();
    g.normals.reserve(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) g.normals.push_back(f.vertex_normal(v));
    g.triangles = m.triangles();
    g.boundary = m.boundary_loops();
    return g;
}

std::vector<SphereCurve> GaussImage::boundary_curves() const {
    std::vector<SphereCurve> out;
    for (const auto& loop : boundary) {
        Vec3List pts;
        for (int v : loop) pts.push_back(normals[v]);
        out.push_back(SphereCurve::make(std::move(pts), 1e-6));
    }
    return out;
}

int degree_at(const GaussImage& g, const Vec3& p, double delta) {
    int Q = 0;
    for (size_t t = 0; t < g.triangles.size(); ++t) {
        const Vec3& A = g.normals[g.triangles[t][0]];
        const Vec3& B = g.normals[g.triangles[t][1]];
        const Vec3& C = g.normals[g.triangles[t][2]];
        // cheap rejection: p well away from the triangle's cone
        const double far = std::min({p.dot(A), p.dot(B), p.dot(C)});
        if (far < -0.5) continue;
        const double sigma = A.dot(B.cross(C)) >= 0 ? 1.0 : -1.0;
        const double m = std::min({sigma * side(A, B, p), sigma * side(B, C, p), sigma * side(C, A, p)});
        if (m < -delta) continue;
        if (m <= delta) throw NotRegularValue("point within delta of the image of element " + std::to_string(t));
        Q += static_cast<int>(sigma);
    }
    return Q;
}

DegreeWindingCheck check_degree_winding_relation(const GaussImage& g, const Vec3& p, const Vec3& q, double delta) {
    DegreeWindingCheck r;
    r.Qp = degree_at(g, p, delta);
    r.Qq = degree_at(g, q, delta);
    r.w = winding_number(g.boundary_curves(), p, q, delta);
    r.holds = r.Qp - r.Qq == r.w;
    return r;
}

DegreeField::DegreeField(const ImmersedChart& f, int boundary_samples) {
    ChartBoundary cb = analytic_boundary(f, boundary_samples);
    gamma_ = std::move(cb.curves);
    length_ = cb.length;
    const GaussImage img = GaussImage::from_chart(f);
    std::vector<SphereCurve> both = gamma_;
    for (auto& c : img.boundary_curves()) both.push_back(std::move(c));
    // the reference point sits as far from both boundary images as possible,
    // where the mesh image and the true image certainly agree
    std::vector<std::pair<double, int>> ranked;
    const Vec3List cand = fibonacci_sphere(96);
    for (size_t i = 0; i < cand.size(); ++i) ranked.push_back({-distance_to_curves(cand[i], both), int(i)});
    std::sort(ranked.begin(), ranked.end());
    for (auto [negd, i] : ranked) {
        try {
            q_ref_ = degree_at(img, cand[i]);
            ref_ = cand[i];
            return;
        } catch (const NotRegularValue&) {
        }
    }
    throw NotRegularValue("no regular reference point for the degree field");
}

int DegreeField::operator()(const Vec3& p) const {
    return q_ref_ + winding_number(gamma_, p.normalized(), ref_);
}

double DegreeField::sphere_integral(const std::function<double(int)>& g, int n_meridians) const {
    // meridians run from the reference point, where Q is known and Γ is far
    const Vec3 e3 = ref_;
    const Vec3 e1 = e3.unitOrthogonal(), e2 = e3.cross(e1);
    std::vector<std::pair<double, int>> hits;
    auto half = [&](const Vec3& p, const Vec3& q, const Vec3& m) {
        const Vec3 npq = p.cross(q).normalized();
        for (const auto& c : gamma_) {
            const size_t n = c.points.size();
            for (size_t b = 0, i0 = 0; i0 < n; ++b, i0 += SphereCurve::kBlock) {
                if (!cap_may_meet_arc(c.block_center[b], c.block_radius[b], p, q, npq)) continue;
                const size_t i1 = std::min(n, i0 + SphereCurve::kBlock);
                for (size_t i = i0; i < i1; ++i) {
                    const Vec3& a = c.points[i];
                    const Vec3& bb = c.points[(i + 1) % n];
                    const int s = crossing(p, q, a, bb, kDeltaGeo);
                    if (s == 0) continue;
                    Vec3 X = p.cross(q).cross(a.cross(bb));
                    if (X.dot(p + q) < 0) X = -X;
                    hits.push_back({std::atan2(X.dot(m), X.dot(e3)), s});
                }
            }
        }
    };
    double total = 0.0;
    for (int k = 0; k < n_meridians; ++k) {
        double F = 0.0;
        for (int attempt = 0;; ++attempt) {
            const double phi = 2 * kPi * (k + 0.5) / n_meridians + 1e-7 * attempt;
            const Vec3 m = std::cos(phi) * e1 + std::sin(phi) * e2;
            hits.clear();
            try {
                half(e3, m, m);
                half(m, -e3, m);
            } catch (const DegenerateConfiguration&) {
                if (attempt == 20) throw;
                continue;
            }
            std::sort(hits.begin(), hits.end());
            // moving along the arc, Q drops by the sign of each crossing
            int Q = q_ref_;
            double th = 0.0;
            F = 0.0;
            for (auto [t, s] : hits) {
                F += g(Q) * (std::cos(th) - std::cos(t));
                Q -= s;
                th = t;
            }
            F += g(Q) * (std::cos(th) + 1.0);
            break;
        }
        total += F;
    }
    return total * 2 * kPi / n_meridians;
}

WeinerReport weiner_check(const SphereCurve& c, std::int64_t n_mc, std::uint64_t seed, int jobs) {
    constexpr std::int64_t kChunk = 4096;
    const std::int64_t n_chunks = (n_mc + kChunk - 1) / kChunk;
    struct Acc {
        std::int64_t s2 = 0, s4 = 0, jit = 0;
    };
    std::vector<Acc> acc(n_chunks);
    auto run_chunk = [&](std::int64_t ch) {
        std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(ch)};
        std::mt19937_64 rng(ss);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::normal_distribution<double> G(0.0, 1.0);
        auto draw = [&]() {
            const double z = 2 * U(rng) - 1, ph = 2 * kPi * U(rng), r = std::sqrt(std::max(0.0, 1 - z * z));
            return Vec3(r * std::cos(ph), r * std::sin(ph), z);
        };
        const std::int64_t lo = ch * kChunk, hi = std::min(n_mc, lo + kChunk);
        Acc a;
        for (std::int64_t i = lo; i < hi; ++i) {
            Vec3 p = draw(), q = draw();
            for (int attempt = 0;; ++attempt) {
                try {
                    const std::int64_t w = winding_number(c, p, q);
                    a.s2 += w * w;
                    a.s4 += w * w * w * w;
                    break;
                } catch (const DegenerateConfiguration&) {
                    if (attempt == 50) throw;
                    ++a.jit;
                    p = (p + 1e-6 * Vec3(G(rng), G(rng), G(rng))).normalized();
                    q = (q + 1e-6 * Vec3(G(rng), G(rng), G(rng))).normalized();
                }
            }
        }
        acc[ch] = a;
    };
    jobs = std::max(1, jobs);
    if (jobs == 1 || n_chunks <= 1) {
        for (std::int64_t ch = 0; ch < n_chunks; ++ch) run_chunk(ch);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&, t] {
                for (std::int64_t ch = t; ch < n_chunks; ch += jobs) run_chunk(ch);
            });
        for (auto& th : pool) th.join();
    }
    Acc tot;
    for (const auto& a : acc) {
        tot.s2 += a.s2;
        tot.s4 += a.s4;
        tot.jit += a.jit;
    }
    WeinerReport r;
    const double L = c.length();
    r.lhs = L * L;
    r.n_mc = n_mc;
    r.jittered = tot.jit;
    if (n_mc > 0) {
        const double n = static_cast<double>(n_mc);
        const double m2 = tot.s2 / n, m4 = tot.s4 / n;
        const double var = std::max(0.0, m4 - m2 * m2) * (n > 1 ? n / (n - 1) : 1.0);
        r.estimate = 8 * kPi * kPi * m2;
        r.stderr_ = 8 * kPi * kPi * std::sqrt(var / n);
    }
    r.holds = r.lhs >= r.estimate - 3 * r.stderr_;
    return r;
}

LemmaReport check_lemma7(const ImmersedChart& f, double tol_ineq) {
    const DiscIntegrals d = disc_integrals(f);
    LemmaReport r{d.L, d.QK, d.K, d.L * d.L, 4 * kPi * d.QK - d.K * d.K, false};
    r.holds = r.lhs >= r.rhs - tol_ineq * std::abs(r.rhs) - kRoundoffFloor;
    return r;
}

LemmaReport check_lemma10(const ImmersedChart& f, double tol_ineq) {
    const DiscIntegrals d = disc_integrals(f);
    LemmaReport r{d.L, d.QK, d.K, d.QK, std::abs(d.K), false};
    r.holds = r.lhs >= r.rhs - tol_ineq * std::abs(r.rhs) - kRoundoffFloor;
    return r;
}

LemmaReport check_disc_isoperimetric(const ImmersedChart& f, double tol_ineq) {
    const DiscIntegrals d = disc_integrals(f);
    const double a = std::abs(d.K);
    LemmaReport r{d.L, d.QK, d.K, d.L * d.L, (4 * kPi - a) * a, false};
    r.holds = r.lhs >= r.rhs - tol_ineq * std::abs(r.rhs) - kRoundoffFloor;
    return r;
}

double integrate_over_image(const GaussImage& g, const SphereFunction& h) {
    // radial projection of the flat triangle; dA = det(A,B,C)/|P|³ du dv
    const auto& rule = quad::dunavant5();
    double s = 0.0;
    for (const Tri& t : g.triangles) {
        const Vec3& A = g.normals[t[0]];
        const Vec3& B = g.normals[t[1]];
        const Vec3& C = g.normals[t[2]];
        const double det = A.dot(B.cross(C));
        if (det == 0.0) continue;
        double acc = 0.0;
        for (size_t k = 0; k < rule.w.size(); ++k) {
            const Vec3 P = rule.bary[k][0] * A + rule.bary[k][1] * B + rule.bary[k][2] * C;
            const double r = P.norm();
            acc += rule.w[k] * h(P / r) / (r * r * r);
        }
        s += 0.5 * det * acc;
    }
    return s;
}

PushforwardResult pushforward_identity_check(const ImmersedChart& f, const SphereFunction& h) {
    PushforwardResult r;
    const Quadrature q = use_polar(f) ? Quadrature::Polar : Quadrature::Element;
    r.chart_side = integrate(f, [&](const PointGeometry& g) { return g.K == 0.0 ? 0.0 : h(g.N) * g.K; }, q);
    r.sphere_side = integrate_over_image(GaussImage::from_chart(f), h);
    r.residual = std::abs(r.chart_side - r.sphere_side);
    return r;
}

}  // namespace wb
