#include "wbkit/immersion.hpp"

#include "wbkit/errors.hpp"
#include "wbkit/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace wb {

namespace {

constexpr double kPi = std::numbers::pi;

Mat2 sym(double a, double b, double c) {
    Mat2 m;
    m << a, b, b, c;
    return m;
}

SurfaceJet jet_from_taylor(const std::array<Taylor2, 3>& t) {
    SurfaceJet j;
    for (int i = 0; i < 3; ++i) {
        j.f[i] = t[i].v;
        j.fu[i] = t[i].d[0];
        j.fv[i] = t[i].d[1];
        j.fuu[i] = t[i].h[0];
        j.fuv[i] = t[i].h[1];
        j.fvv[i] = t[i].h[2];
    }
    return j;
}

SurfaceJet analytic_jet(const ImmersedChart::AnalyticMap& f, const Vec2& p, double h3) {
    auto at = [&](const Vec2& q) { return jet_from_taylor(f(Taylor2::var(q.x(), 0), Taylor2::var(q.y(), 1))); };
    SurfaceJet j = at(p);
    if (h3 > 0) {
        const Vec2 ex(h3, 0.0), ey(0.0, h3);
        const SurfaceJet px = at(p + ex), mx = at(p - ex), py = at(p + ey), my = at(p - ey);
        j.fuuu = (px.fuu - mx.fuu) / (2 * h3);
        j.fuuv = 0.5 * ((py.fuu - my.fuu) + (px.fuv - mx.fuv)) / (2 * h3);
        j.fuvv = 0.5 * ((px.fvv - mx.fvv) + (py.fuv - my.fuv)) / (2 * h3);
        j.fvvv = (py.fvv - my.fvv) / (2 * h3);
        j.has_third = true;
    }
    return j;
}

// number of monomials of total degree <= d
int n_monomials(int d) { return (d + 1) * (d + 2) / 2; }

template <class F>
void for_monomials(int degree, F&& fn) {
    int idx = 0;
    for (int tot = 0; tot <= degree; ++tot)
        for (int j = 0; j <= tot; ++j) fn(idx++, tot - j, j);  // x^(tot-j) y^j
}

double falling(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= (n - i);
    return r;
}

}  // namespace

PointGeometry point_geometry(const SurfaceJet& j) {
    PointGeometry g;
    g.g = sym(j.fu.dot(j.fu), j.fu.dot(j.fv), j.fv.dot(j.fv));
    const Vec3 n = j.fu.cross(j.fv);
    const double nn = n.norm();
    if (!(nn > 1e-14 * std::max(1.0, j.fu.norm() * j.fv.norm())))
        throw DegenerateElement("immersion is singular (|fu x fv| ~ 0)");
    g.N = n / nn;
    const Vec3 nu = j.fuu.cross(j.fv) + j.fu.cross(j.fuv);
    const Vec3 nv = j.fuv.cross(j.fv) + j.fu.cross(j.fvv);
    g.Nu = (nu - g.N * g.N.dot(nu)) / nn;
    g.Nv = (nv - g.N * g.N.dot(nv)) / nn;
    g.K = g.N.dot(g.Nu.cross(g.Nv)) / nn;
    g.h = sym(j.fuu.dot(g.N), j.fuv.dot(g.N), j.fvv.dot(g.N));
    g.S = g.g.inverse() * g.h;
    g.K_shape = g.S.determinant();
    g.H = 0.5 * g.S.trace();
    g.dN2 = (g.S * g.S).trace();
    g.area_density = std::sqrt(g.g.determinant());
    return g;
}

std::array<Mat2, 2> metric_first_partials(const SurfaceJet& j) {
    const Vec3* f[2] = {&j.fu, &j.fv};
    const Vec3 fd[2][2] = {{j.fuu, j.fuv}, {j.fuv, j.fvv}};  // fd[a][i] = ∂_a f_i
    std::array<Mat2, 2> out;
    for (int a = 0; a < 2; ++a)
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) out[a](r, c) = fd[a][r].dot(*f[c]) + f[r]->dot(fd[a][c]);
    return out;
}

std::array<Mat2, 3> metric_second_partials(const SurfaceJet& j) {
    if (!j.has_third) throw DerivativeUnavailable("jet has no third derivatives");
    const Vec3 f1[2] = {j.fu, j.fv};
    // second partials of f_i: f2[i][a][b] = ∂_a ∂_b f_i with i, a, b in {u, v}
    auto f2 = [&](int i, int a) -> Vec3 {
        const int s = i + a;
        return s == 0 ? j.fuu : (s == 1 ? j.fuv : j.fvv);
    };
    auto f3 = [&](int i, int a, int b) -> Vec3 {
        const int s = i + a + b;
        return s == 0 ? j.fuuu : (s == 1 ? j.fuuv : (s == 2 ? j.fuvv : j.fvvv));
    };
    const int ab[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    std::array<Mat2, 3> out;
    for (int k = 0; k < 3; ++k) {
        const int a = ab[k][0], b = ab[k][1];
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                out[k](r, c) = f3(r, a, b).dot(f1[c]) + f2(r, a).dot(f2(c, b)) + f2(r, b).dot(f2(c, a)) +
                               f1[r].dot(f3(c, a, b));
    }
    return out;
}

SurfaceJet LocalPoly::jet(const Vec2& p) const {
    const Vec2 X = (p - center) / scale;
    // ∂^{a,b} of the polynomial at X, in chart units
    auto d = [&](int a, int b) {
        Vec3 s = Vec3::Zero();
        for_monomials(degree, [&](int idx, int i, int j) {
            if (i < a || j < b) return;
            const double c = falling(i, a) * falling(j, b) * std::pow(X.x(), i - a) * std::pow(X.y(), j - b);
            s += c * coef.row(idx).transpose();
        });
        return Vec3(s / std::pow(scale, a + b));
    };
    SurfaceJet jt;
    jt.f = d(0, 0);
    jt.fu = d(1, 0);
    jt.fv = d(0, 1);
    jt.fuu = d(2, 0);
    jt.fuv = d(1, 1);
    jt.fvv = d(0, 2);
    if (degree >= 3) {
        jt.has_third = true;
        jt.fuuu = d(3, 0);
        jt.fuuv = d(2, 1);
        jt.fuvv = d(1, 2);
        jt.fvvv = d(0, 3);
    }
    return jt;
}

LocalPoly fit_local_poly(const std::vector<Vec2>& pts, const std::vector<Vec3>& vals, const Vec2& center,
                         int degree) {
    const int m = n_monomials(degree);
    const int n = static_cast<int>(pts.size());
    if (n < m) throw DegenerateElement("not enough samples for a degree-" + std::to_string(degree) + " fit");
    LocalPoly lp;
    lp.center = center;
    lp.degree = degree;
    double s = 0.0;
    for (const Vec2& p : pts) s = std::max(s, (p - center).norm());
    lp.scale = s > 0 ? s : 1.0;
    Eigen::MatrixXd A(n, m);
    Eigen::MatrixXd B(n, 3);
    for (int r = 0; r < n; ++r) {
        const Vec2 X = (pts[r] - center) / lp.scale;
        for_monomials(degree, [&](int idx, int i, int j) { A(r, idx) = std::pow(X.x(), i) * std::pow(X.y(), j); });
        B.row(r) = vals[r].transpose();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < m) throw DegenerateElement("sample points do not determine the local fit");
    lp.coef = qr.solve(B);
    return lp;
}

struct ImmersedChart::Data {
    FCDomainMesh mesh;
    AnalyticMap map;
    std::vector<Vec3> positions;
    std::optional<PolarDomain> polar;
    std::string label;
    std::unique_ptr<ElementLocator> locator;
    std::vector<SurfaceJet> elem_jets;
    std::vector<PointGeometry> elem_geom;
    std::vector<LocalPoly> elem_quad, elem_cubic;
    std::vector<Vec3> vnormals;
    MetricField metric;
    double h3 = 0.0;

    bool analytic() const { return static_cast<bool>(map); }

    int locate_or_nearest(const Vec2& p) const {
        if (auto hit = locator->locate(p)) return hit->first;
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int e = 0; e < mesh.num_triangles(); ++e) {
            const double d = (mesh.barycenter(e) - p).squaredNorm();
            if (d < bd) {
                bd = d;
                best = e;
            }
        }
        return best;
    }

    SurfaceJet jet(const Vec2& p, bool third = false) const {
        if (analytic()) return analytic_jet(map, p, third ? h3 : 0.0);
        return (third ? elem_cubic : elem_quad)[locate_or_nearest(p)].jet(p);
    }
};

namespace {

std::vector<Vec2> probe_points(const FCDomainMesh& m) {
    std::vector<Vec2> out;
    for (int e = 0; e < m.num_triangles(); ++e) out.push_back(m.barycenter(e));
    return out;
}

LocalPoly fit_over_patch(const FCDomainMesh& mesh, const std::vector<Vec3>& pos, const std::vector<int>& seeds,
                         const Vec2& center, int degree, int rings) {
    for (int r = rings; r <= rings + 2; ++r) {
        const std::vector<int> patch = mesh.patch(seeds, r);
        if (static_cast<int>(patch.size()) < n_monomials(degree) + 2) continue;
        std::vector<Vec2> pts;
        std::vector<Vec3> vals;
        for (int v : patch) {
            pts.push_back(mesh.vertices()[v]);
            vals.push_back(pos[v]);
        }
        try {
            return fit_local_poly(pts, vals, center, degree);
        } catch (const DegenerateElement&) {
        }
    }
    throw DegenerateElement("local fit failed near chart point (" + std::to_string(center.x()) + ", " +
                            std::to_string(center.y()) + ")");
}

}  // namespace

ImmersedChart ImmersedChart::analytic(FCDomainMesh mesh, AnalyticMap f, std::optional<PolarDomain> polar,
                                      std::string label) {
    auto d = std::make_shared<Data>();
    d->mesh = std::move(mesh);
    d->map = std::move(f);
    d->polar = polar;
    d->label = std::move(label);
    d->locator = std::make_unique<ElementLocator>(d->mesh);
    d->h3 = std::cbrt(std::numeric_limits<double>::epsilon()) * d->mesh.diameter();
    const int ne = d->mesh.num_triangles();
    d->elem_jets.resize(ne);
    d->elem_geom.resize(ne);
    for (int e = 0; e < ne; ++e) {
        d->elem_jets[e] = analytic_jet(d->map, d->mesh.barycenter(e), 0.0);
        try {
            d->elem_geom[e] = point_geometry(d->elem_jets[e]);
        } catch (const DegenerateElement&) {
            throw DegenerateElement("element " + std::to_string(e) + " is not immersed");
        }
    }
    for (int v = 0; v < d->mesh.num_vertices(); ++v) {
        d->positions.push_back(analytic_jet(d->map, d->mesh.vertices()[v], 0.0).f);
        d->vnormals.push_back(point_geometry(analytic_jet(d->map, d->mesh.vertices()[v], 0.0)).N);
    }
    const Data* raw = d.get();
    d->metric = MetricField::from_first_derivatives(
        [raw](const Vec2& p) { return point_geometry(analytic_jet(raw->map, p, 0.0)).g; },
        [raw](const Vec2& p) { return metric_first_partials(analytic_jet(raw->map, p, 0.0)); },
        probe_points(d->mesh), d->mesh.diameter());
    ImmersedChart c;
    c.d_ = std::move(d);
    return c;
}

ImmersedChart ImmersedChart::meshed(FCDomainMesh mesh, std::vector<Vec3> positions, std::string label) {
    if (static_cast<int>(positions.size()) != mesh.num_vertices())
        throw InvalidMesh("positions count does not match vertex count");
    auto d = std::make_shared<Data>();
    d->mesh = std::move(mesh);
    d->positions = std::move(positions);
    d->label = std::move(label);
    d->locator = std::make_unique<ElementLocator>(d->mesh);
    const FCDomainMesh& m = d->mesh;
    const int ne = m.num_triangles();
    d->elem_quad.resize(ne);
    d->elem_cubic.resize(ne);
    d->elem_jets.resize(ne);
    d->elem_geom.resize(ne);
    for (int e = 0; e < ne; ++e) {
        const Tri& t = m.triangles()[e];
        const std::vector<int> seeds{t[0], t[1], t[2]};
        const Vec2 c = m.barycenter(e);
        d->elem_quad[e] = fit_over_patch(m, d->positions, seeds, c, 2, 1);
        d->elem_cubic[e] = fit_over_patch(m, d->positions, seeds, c, 3, 2);
        d->elem_jets[e] = d->elem_quad[e].jet(c);
        try {
            d->elem_geom[e] = point_geometry(d->elem_jets[e]);
        } catch (const DegenerateElement&) {
            throw DegenerateElement("element " + std::to_string(e) + " is not immersed");
        }
    }
    for (int v = 0; v < m.num_vertices(); ++v) {
        const LocalPoly lp = fit_over_patch(m, d->positions, {v}, m.vertices()[v], 2, 1);
        d->vnormals.push_back(point_geometry(lp.jet(m.vertices()[v])).N);
    }
    const Data* raw = d.get();
    d->metric = MetricField::from_derivatives(
        [raw](const Vec2& p) { return point_geometry(raw->jet(p, true)).g; },
        [raw](const Vec2& p) { return metric_first_partials(raw->jet(p, true)); },
        [raw](const Vec2& p) { return metric_second_partials(raw->jet(p, true)); }, probe_points(m),
        m.diameter());
    ImmersedChart c;
    c.d_ = std::move(d);
    return c;
}

ImmersedChart ImmersedChart::transformed(const Eigen::Matrix3d& R, const Vec3& t) const {
    if (d_->analytic()) {
        AnalyticMap inner = d_->map;
        AnalyticMap moved = [inner, R, t](const Taylor2& x, const Taylor2& y) {
            const auto f = inner(x, y);
            std::array<Taylor2, 3> out;
            for (int i = 0; i < 3; ++i) out[i] = Taylor2(t[i]) + R(i, 0) * f[0] + R(i, 1) * f[1] + R(i, 2) * f[2];
            return out;
        };
        return analytic(d_->mesh, moved, d_->polar, d_->label);
    }
    std::vector<Vec3> pos;
    for (const Vec3& p : d_->positions) pos.push_back(R * p + t);
    return meshed(d_->mesh, pos, d_->label);
}

const FCDomainMesh& ImmersedChart::mesh() const { return d_->mesh; }
bool ImmersedChart::is_analytic() const { return d_->analytic(); }
const std::optional<ImmersedChart::PolarDomain>& ImmersedChart::polar_domain() const { return d_->polar; }
const std::string& ImmersedChart::label() const { return d_->label; }
SurfaceJet ImmersedChart::jet_at(const Vec2& p) const { return d_->jet(p); }
PointGeometry ImmersedChart::geometry_at(const Vec2& p) const { return point_geometry(d_->jet(p)); }
const SurfaceJet& ImmersedChart::element_jet(int e) const { return d_->elem_jets[e]; }
const PointGeometry& ImmersedChart::element_geometry(int e) const { return d_->elem_geom[e]; }
Vec3 ImmersedChart::vertex_position(int v) const { return d_->positions[v]; }
Vec3 ImmersedChart::vertex_normal(int v) const { return d_->vnormals[v]; }
const MetricField& ImmersedChart::pullback_metric() const { return d_->metric; }
double ImmersedChart::element_intrinsic_K(int e) const { return brioschi_curvature(d_->metric, d_->mesh.barycenter(e)); }

std::optional<std::pair<int, Eigen::Vector3d>> ImmersedChart::locate(const Vec2& p) const {
    return d_->locator->locate(p);
}

bool ImmersedChart::contains(const Vec2& p) const {
    if (d_->analytic() && d_->polar) {
        const double r = (p - d_->polar->center).norm();
        return r >= d_->polar->r_in && r <= d_->polar->r_out;
    }
    return d_->locator->locate(p).has_value();
}

CurvatureFields curvature_fields(const ImmersedChart& f, bool require_intrinsic) {
    CurvatureFields cf;
    const FCDomainMesh& m = f.mesh();
    const int ne = m.num_triangles();
    cf.intrinsic_available = f.pullback_metric().second_mode() != MetricField::DerivativeMode::None;
    if (require_intrinsic && !cf.intrinsic_available)
        throw DerivativeUnavailable("pullback metric has no second derivatives");
    for (int e = 0; e < ne; ++e) {
        const PointGeometry& g = f.element_geometry(e);
        cf.K.push_back(g.K);
        cf.K_shape.push_back(g.K_shape);
        cf.H.push_back(g.H);
        cf.dN2.push_back(g.dN2);
        cf.vol.push_back(g.area_density * m.area(e));
        cf.max_identity_residual = std::max(cf.max_identity_residual, std::abs(4 * g.H * g.H - 2 * g.K - g.dN2));
        cf.K_intrinsic.push_back(cf.intrinsic_available ? f.element_intrinsic_K(e) : 0.0);
    }
    return cf;
}

double integrate(const ImmersedChart& f, const std::function<double(const PointGeometry&)>& fn, Quadrature q,
                 int n_r, int n_phi) {
    if (q == Quadrature::Polar) {
        if (!f.is_analytic() || !f.polar_domain())
            throw std::invalid_argument("polar quadrature needs an analytic chart with a polar domain");
        const auto& pd = *f.polar_domain();
        const quad::PolarRule rule = quad::polar(pd.center, pd.r_in, pd.r_out, n_r, n_phi);
        double s = 0.0;
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            const PointGeometry g = f.geometry_at(rule.nodes[i]);
            s += rule.weights[i] * fn(g) * g.area_density;
        }
        return s;
    }
    double s = 0.0;
    for (int e = 0; e < f.mesh().num_triangles(); ++e) {
        const PointGeometry& g = f.element_geometry(e);
        s += f.mesh().area(e) * g.area_density * fn(g);
    }
    return s;
}

double bending_energy(const ImmersedChart& f, Quadrature q, int n_r, int n_phi) {
    return integrate(f, [](const PointGeometry& g) { return g.dN2; }, q, n_r, n_phi);
}

AGMReport pointwise_AGM_check(const ImmersedChart& f, double tol) {
    AGMReport r;
    r.worst_margin = std::numeric_limits<double>::infinity();
    for (int e = 0; e < f.mesh().num_triangles(); ++e) {
        const PointGeometry& g = f.element_geometry(e);
        const double margin = g.dN2 - 2 * std::abs(g.K);
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.worst_element = e;
        }
    }
    if (r.worst_margin < -tol)
        throw ViolationFound("|dN|^2 < 2|K| at element " + std::to_string(r.worst_element) + " (margin " +
                             std::to_string(r.worst_margin) + ")");
    return r;
}

GeodesicCurvatureResult geodesic_curvature(const ImmersedChart& f, const CurveInChart& c) {
    c.validate();
    const size_t n = c.points.size();
    for (size_t i = 0; i < n; ++i) {
        if (!f.contains(c.points[i]))
            throw BoundaryTooRough("curve sample " + std::to_string(i) + " leaves the chart");
        if (c.kind == CurveInChart::Kind::Polyline && (c.closed || i + 1 < n) &&
            !f.contains(0.5 * (c.points[i] + c.points[(i + 1) % n])))
            throw BoundaryTooRough("curve segment " + std::to_string(i) + " leaves the chart");
    }
    return geodesic_curvature(f.pullback_metric(), c);
}

namespace {

struct BBox {
    Vec2 lo, hi;
    bool overlaps(const BBox& o) const {
        return lo.x() <= o.hi.x() && o.lo.x() <= hi.x() && lo.y() <= o.hi.y() && o.lo.y() <= hi.y();
    }
};

}  // namespace

namespace {

// density(e, q): K √det g at chart point q inside element e
bool segments_cross(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b) {
    const double d1 = signed_area(p, q, a), d2 = signed_area(p, q, b);
    const double d3 = signed_area(a, b, p), d4 = signed_area(a, b, q);
    return ((d1 <= 0 && d2 >= 0) || (d1 >= 0 && d2 <= 0)) && ((d3 <= 0 && d4 >= 0) || (d3 >= 0 && d4 <= 0));
}

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    return signed_area(a, b, p) >= 0 && signed_area(b, c, p) >= 0 && signed_area(c, a, p) >= 0;
}

// elements touched by the polygon outline
std::vector<char> cut_elements(const FCDomainMesh& m, const std::vector<Vec2>& polygon) {
    std::vector<char> cut(m.num_triangles(), 0);
    BBox pb{polygon[0], polygon[0]};
    for (const Vec2& p : polygon) {
        pb.lo = pb.lo.cwiseMin(p);
        pb.hi = pb.hi.cwiseMax(p);
    }
    const double cell = std::max(m.max_edge(), 1e-12);
    const int nx = std::max(1, static_cast<int>(std::ceil((pb.hi.x() - pb.lo.x()) / cell)) + 1);
    const int ny = std::max(1, static_cast<int>(std::ceil((pb.hi.y() - pb.lo.y()) / cell)) + 1);
    auto cx = [&](double x) { return std::clamp(static_cast<int>((x - pb.lo.x()) / cell), 0, nx - 1); };
    auto cy = [&](double y) { return std::clamp(static_cast<int>((y - pb.lo.y()) / cell), 0, ny - 1); };
    std::vector<std::vector<int>> grid(static_cast<size_t>(nx) * ny);
    for (int e = 0; e < m.num_triangles(); ++e) {
        const Tri& t = m.triangles()[e];
        const Vec2 a = m.vertices()[t[0]], b = m.vertices()[t[1]], c = m.vertices()[t[2]];
        const BBox eb{a.cwiseMin(b).cwiseMin(c), a.cwiseMax(b).cwiseMax(c)};
        if (!eb.overlaps(pb)) continue;
        for (int i = cx(eb.lo.x()); i <= cx(eb.hi.x()); ++i)
            for (int j = cy(eb.lo.y()); j <= cy(eb.hi.y()); ++j) grid[static_cast<size_t>(j) * nx + i].push_back(e);
    }
    const size_t n = polygon.size();
    for (size_t k = 0; k < n; ++k) {
        const Vec2 p = polygon[k], q = polygon[(k + 1) % n];
        const Vec2 lo = p.cwiseMin(q), hi = p.cwiseMax(q);
        for (int i = cx(lo.x()); i <= cx(hi.x()); ++i)
            for (int j = cy(lo.y()); j <= cy(hi.y()); ++j)
                for (int e : grid[static_cast<size_t>(j) * nx + i]) {
                    if (cut[e]) continue;
                    const Tri& t = m.triangles()[e];
                    const Vec2 a = m.vertices()[t[0]], b = m.vertices()[t[1]], c = m.vertices()[t[2]];
                    if (point_in_triangle(p, a, b, c) || segments_cross(p, q, a, b) || segments_cross(p, q, b, c) ||
                        segments_cross(p, q, c, a))
                        cut[e] = 1;
                }
    }
    return cut;
}

// Sutherland-Hodgman with the (convex, CCW) triangle as clipper; the subject may
// be concave, the signed area of the result is still that of the intersection
std::pair<double, Vec2> clip_to_triangle(const std::vector<Vec2>& poly, const Vec2& a, const Vec2& b, const Vec2& c) {
    std::vector<Vec2> cur = poly, next;
    const Vec2 tri[3] = {a, b, c};
    for (int k = 0; k < 3 && !cur.empty(); ++k) {
        const Vec2 e0 = tri[k], e1 = tri[(k + 1) % 3];
        next.clear();
        const size_t n = cur.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2& P = cur[i];
            const Vec2& Q = cur[(i + 1) % n];
            const double sp = signed_area(e0, e1, P), sq = signed_area(e0, e1, Q);
            if (sp >= 0) next.push_back(P);
            if ((sp >= 0) != (sq >= 0)) next.push_back(P + (Q - P) * (sp / (sp - sq)));
        }
        std::swap(cur, next);
    }
    if (cur.size() < 3) return {0.0, Vec2::Zero()};
    double A = 0.0;
    Vec2 C = Vec2::Zero();
    for (size_t i = 0; i < cur.size(); ++i) {
        const Vec2& P = cur[i];
        const Vec2& Q = cur[(i + 1) % cur.size()];
        const double cr = P.x() * Q.y() - P.y() * Q.x();
        A += cr;
        C += (P + Q) * cr;
    }
    if (A == 0.0) return {0.0, Vec2::Zero()};
    return {0.5 * A, C / (3.0 * A)};
}

// high_order: the density is smooth inside elements, so use a 7-point rule there
double region_integral(const FCDomainMesh& m, const std::vector<Vec2>& polygon, int subdiv_levels, bool high_order,
                       const std::function<double(int, const Vec2&)>& density) {
    const std::vector<char> cut = cut_elements(m, polygon);
    const int nsub = 1 << subdiv_levels;
    const double orient = polygon_signed_area(polygon) >= 0 ? 1.0 : -1.0;
    double total = 0.0;
    for (int e = 0; e < m.num_triangles(); ++e) {
        const Tri& t = m.triangles()[e];
        const Vec2 a = m.vertices()[t[0]], b = m.vertices()[t[1]], c = m.vertices()[t[2]];
        const Vec2 bc = m.barycenter(e);
        if (!cut[e]) {
            if (!polygon_winding(polygon, bc)) continue;
            if (!high_order) {
                total += density(e, bc) * m.area(e);
                continue;
            }
            const quad::TriangleRule& rule = quad::dunavant5();
            for (size_t k = 0; k < rule.w.size(); ++k) {
                const Vec2 q = rule.bary[k][0] * a + rule.bary[k][1] * b + rule.bary[k][2] * c;
                total += rule.w[k] * density(e, q) * m.area(e);
            }
            continue;
        }
        // element cut by the outline: clip each piece of a uniform subdivision exactly
        const int ns = high_order ? nsub : 1;
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < ns - i; ++j)
                for (int up = 0; up < 2; ++up) {
                    if (up == 1 && i + j + 1 >= ns) continue;
                    auto P = [&](double u, double v) { return Vec2(a + (b - a) * (u / ns) + (c - a) * (v / ns)); };
                    const Vec2 p0 = up == 0 ? P(i, j) : P(i + 1, j);
                    const Vec2 p1 = up == 0 ? P(i + 1, j) : P(i + 1, j + 1);
                    const Vec2 p2 = up == 0 ? P(i, j + 1) : P(i, j + 1);
                    const auto [area, centroid] = clip_to_triangle(polygon, p0, p1, p2);
                    if (area != 0.0) total += orient * area * density(e, centroid);
                }
    }
    return total;
}

void check_hole_curve(const FCDomainMesh& m, int hole_index, const CurveInChart& c) {
    for (int j = 1; j <= m.num_holes(); ++j) {
        const int w = polygon_winding(c.points, m.hole_seeds()[j - 1]);
        if (j == hole_index && w != 1)
            throw HomotopyClassAmbiguous("test curve does not wind once around hole " + std::to_string(j));
        if (j != hole_index && w != 0)
            throw HomotopyClassAmbiguous("test curve also encloses hole " + std::to_string(j));
    }
}

}  // namespace

double enclosed_K_integral(const ImmersedChart& f, const std::vector<Vec2>& polygon, int subdiv_levels) {
    return region_integral(f.mesh(), polygon, subdiv_levels, f.is_analytic(), [&](int e, const Vec2& q) {
        if (f.is_analytic() && q != f.mesh().barycenter(e)) {
            const PointGeometry g = f.geometry_at(q);
            return g.K * g.area_density;
        }
        const PointGeometry& g = f.element_geometry(e);
        return g.K * g.area_density;
    });
}

double enclosed_K_integral(const MetricField& g, const FCDomainMesh& m, const std::vector<Vec2>& polygon,
                           int subdiv_levels) {
    return region_integral(m, polygon, subdiv_levels, false, [&](int, const Vec2& q) {
        return brioschi_curvature(g, q) * std::sqrt(g.eval(q).determinant());
    });
}

CurveInChart default_hole_curve(const FCDomainMesh& mesh, int hole_index, double fraction, int n) {
    if (hole_index < 1 || hole_index > mesh.num_holes())
        throw std::out_of_range("hole index " + std::to_string(hole_index));
    const Vec2 s = mesh.hole_seeds()[hole_index - 1];
    double rho = 0.0;
    for (int v : mesh.boundary_loops()[hole_index]) rho = std::max(rho, (mesh.vertices()[v] - s).norm());
    double other = std::numeric_limits<double>::infinity();
    for (int l = 0; l <= mesh.num_holes(); ++l) {
        if (l == hole_index) continue;
        for (int v : mesh.boundary_loops()[l]) other = std::min(other, (mesh.vertices()[v] - s).norm());
    }
    if (!(other > rho)) throw HomotopyClassAmbiguous("no room for a test curve around hole " + std::to_string(hole_index));
    return CurveInChart::circle(s, rho + fraction * (other - rho), n, true);
}

EnclosedCurvature enclosed_curvature(const ImmersedChart& f, int hole_index, std::optional<CurveInChart> curve) {
    EnclosedCurvature out;
    out.curve = curve ? *curve : default_hole_curve(f.mesh(), hole_index);
    if (out.curve.orientation() < 0) out.curve = out.curve.reversed();
    check_hole_curve(f.mesh(), hole_index, out.curve);
    out.kappa_integral = geodesic_curvature(f, out.curve).integral;
    out.region_integral = enclosed_K_integral(f, out.curve.points);
    out.K_i = 2 * kPi - out.kappa_integral - out.region_integral;
    return out;
}

EnclosedCurvature enclosed_curvature(const MetricField& g, const FCDomainMesh& m, int hole_index,
                                     std::optional<CurveInChart> curve) {
    EnclosedCurvature out;
    out.curve = curve ? *curve : default_hole_curve(m, hole_index);
    if (out.curve.orientation() < 0) out.curve = out.curve.reversed();
    check_hole_curve(m, hole_index, out.curve);
    out.kappa_integral = geodesic_curvature(g, out.curve).integral;
    out.region_integral = enclosed_K_integral(g, m, out.curve.points);
    out.K_i = 2 * kPi - out.kappa_integral - out.region_integral;
    return out;
}

double gauss_bonnet_residual(const ImmersedChart& f, const CurveInChart& c) {
    const CurveInChart cc = c.orientation() < 0 ? c.reversed() : c;
    for (const Vec2& s : f.mesh().hole_seeds())
        if (polygon_winding(cc.points, s) != 0)
            throw HomotopyClassAmbiguous("curve encloses a hole; region is not a disc");
    const double kg = geodesic_curvature(f, cc).integral;
    return std::abs(enclosed_K_integral(f, cc.points) + kg - 2 * kPi);
}

}  // namespace wb
