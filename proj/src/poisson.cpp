#include "wbkit/poisson.hpp"

#include "wbkit/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <deque>

namespace wb {

double PoissonProblem::charge(int hole) const {
    const auto& q = hole_charges.empty() ? mesh.hole_charges() : hole_charges;
    return hole < static_cast<int>(q.size()) ? q[hole] : 0.0;
}

FloatingSystem assemble_floating(const PoissonProblem& p) {
    const FCDomainMesh& m = p.mesh;
    const int nv = m.num_vertices(), nt = m.num_triangles(), nh = m.num_holes();
    if (!p.source.empty() && static_cast<int>(p.source.size()) != nt)
        throw SingularSystem("source has " + std::to_string(p.source.size()) + " entries for " +
                             std::to_string(nt) + " elements");
    FloatingSystem S;
    S.dof.assign(nv, -1);
    S.hole_dof.assign(nh, -1);
    int n = 0;
    bool has_outer = false;
    for (int v = 0; v < nv; ++v) {
        const int lab = m.boundary_label(v);
        if (lab == 0) {
            has_outer = true;
            continue;
        }
        if (lab > 0) {
            int& h = S.hole_dof[lab - 1];
            if (h < 0) h = n++;
            S.dof[v] = h;
        } else {
            S.dof[v] = n++;
        }
    }
    if (!has_outer) throw SingularSystem("outer boundary has no vertices");

    // every vertex must reach Γ0, otherwise a component floats freely
    std::vector<char> seen(nv, 0);
    std::deque<int> queue;
    for (int v = 0; v < nv; ++v)
        if (m.boundary_label(v) == 0) {
            seen[v] = 1;
            queue.push_back(v);
        }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int w : m.vertex_neighbors(v))
            if (!seen[w]) {
                seen[w] = 1;
                queue.push_back(w);
            }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw SingularSystem("mesh has vertices not connected to the outer boundary");

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * nt);
    S.b = Eigen::VectorXd::Zero(n);
    S.elem_vol.resize(nt);
    S.elem_ginv.resize(nt);
    double total = 0.0;
    for (int e = 0; e < nt; ++e) {
        const Tri& t = m.triangles()[e];
        const Vec2 &a = m.vertices()[t[0]], &b = m.vertices()[t[1]], &c = m.vertices()[t[2]];
        Mat2 J;
        J.col(0) = b - a;
        J.col(1) = c - a;
        const double detJ = J.determinant();
        if (detJ == 0.0) throw SingularSystem("element " + std::to_string(e) + " has zero area");
        Eigen::Matrix<double, 2, 3> ref;
        ref << -1, 1, 0, -1, 0, 1;
        const Eigen::Matrix<double, 2, 3> G = J.transpose().inverse() * ref;
        const Mat2 g = p.metric.eval(m.barycenter(e));
        const double dg = g.determinant();
        if (!(dg > 0) || !(g(0, 0) > 0)) throw NonSPDMetric("metric not SPD at element " + std::to_string(e));
        const Mat2 gi = g.inverse();
        const double vol = 0.5 * std::abs(detJ) * std::sqrt(dg);
        S.elem_vol[e] = vol;
        S.elem_ginv[e] = gi;
        total += vol;
        const Eigen::Matrix3d Ke = vol * G.transpose() * gi * G;
        const double load = p.source.empty() ? 0.0 : p.source[e] * vol / 3.0;
        for (int i = 0; i < 3; ++i) {
            const int di = S.dof[t[i]];
            if (di < 0) continue;
            S.b[di] += load;
            for (int j = 0; j < 3; ++j) {
                const int dj = S.dof[t[j]];
                if (dj >= 0) trips.emplace_back(di, dj, Ke(i, j));
            }
        }
    }
    if (!(total > 0)) throw SingularSystem("domain has zero measure");
    for (int h = 0; h < nh; ++h)
        if (S.hole_dof[h] >= 0) S.b[S.hole_dof[h]] += p.charge(h);
    S.A.resize(n, n);
    S.A.setFromTriplets(trips.begin(), trips.end());
    return S;
}

PotentialSolution solve_floating_potential(const PoissonProblem& p) {
    const FloatingSystem S = assemble_floating(p);
    const FCDomainMesh& m = p.mesh;
    const long n = S.A.rows();
    PotentialSolution sol;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (n > 0 && S.b.norm() > 0) {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                 Eigen::DiagonalPreconditioner<double>>
            cg;
        cg.setTolerance(1e-10);
        cg.setMaxIterations(static_cast<int>(std::ceil(50 * std::sqrt(double(n)))));
        cg.compute(S.A);
        if (cg.info() != Eigen::Success) throw SingularSystem("preconditioner setup failed");
        x = cg.solve(S.b);
        sol.iterations = static_cast<int>(cg.iterations());
        sol.residual = cg.error();
        sol.converged = cg.info() == Eigen::Success;
    }
    sol.u.assign(m.num_vertices(), 0.0);
    for (int v = 0; v < m.num_vertices(); ++v)
        if (S.dof[v] >= 0) sol.u[v] = x[S.dof[v]];
    for (int h : S.hole_dof) sol.c.push_back(h >= 0 ? x[h] : 0.0);
    sol.energy = n > 0 ? x.dot(S.A * x) : 0.0;

    // reaction at each tied unknown: what the interior pushes through Γi
    const Eigen::VectorXd r = n > 0 ? Eigen::VectorXd(S.A * x - S.b) : Eigen::VectorXd();
    for (int h = 0; h < m.num_holes(); ++h)
        sol.weak_flux.push_back(S.hole_dof[h] >= 0 ? r[S.hole_dof[h]] + p.charge(h) : 0.0);
    sol.flux = boundary_flux(m, p.metric, RecoveredGradient(m, sol.u));
    return sol;
}

double h1mc_dual_norm(const PotentialSolution& s) { return std::sqrt(std::max(0.0, s.energy)); }

double l1mc_norm(const PoissonProblem& p) {
    double s = 0.0;
    if (!p.source.empty()) {
        const FCDomainMesh& m = p.mesh;
        for (int e = 0; e < m.num_triangles(); ++e) {
            if (p.source[e] == 0.0) continue;
            const Mat2 g = p.metric.eval(m.barycenter(e));
            s += std::abs(p.source[e]) * m.area(e) * std::sqrt(g.determinant());
        }
    }
    for (int h = 0; h < p.mesh.num_holes(); ++h) s += std::abs(p.charge(h));
    return s;
}

DualSupReport dual_sup_property_check(const PoissonProblem& p, const PotentialSolution& s,
                                      const std::vector<std::vector<double>>& trials, double tol_ineq) {
    const FloatingSystem S = assemble_floating(p);
    const FCDomainMesh& m = p.mesh;
    const double normK = h1mc_dual_norm(s);
    DualSupReport rep;
    rep.holds = true;
    for (size_t j = 0; j < trials.size(); ++j) {
        const auto& phi = trials[j];
        const std::string tag = "trial " + std::to_string(j);
        if (static_cast<int>(phi.size()) != m.num_vertices()) throw InadmissibleTrial(tag + ": wrong length");
        double scale = 0.0;
        for (double v : phi) scale = std::max(scale, std::abs(v));
        if (scale == 0.0) throw InadmissibleTrial(tag + ": identically zero");
        Eigen::VectorXd x = Eigen::VectorXd::Zero(S.A.rows());
        std::vector<char> set(S.A.rows(), 0);
        for (int v = 0; v < m.num_vertices(); ++v) {
            const int d = S.dof[v];
            if (d < 0) {
                if (std::abs(phi[v]) > 1e-12 * scale) throw InadmissibleTrial(tag + ": nonzero on the outer boundary");
                continue;
            }
            if (set[d] && std::abs(x[d] - phi[v]) > 1e-12 * scale)
                throw InadmissibleTrial(tag + ": not constant on a hole boundary");
            x[d] = phi[v];
            set[d] = 1;
        }
        const double energy = x.dot(S.A * x);
        if (!(energy > 0)) throw InadmissibleTrial(tag + ": zero Dirichlet energy");
        const double pairing = S.b.dot(x);
        const double ratio = normK > 0 ? pairing / (normK * std::sqrt(energy)) : 0.0;
        rep.ratio.push_back(ratio);
        rep.max_ratio = j == 0 ? ratio : std::max(rep.max_ratio, ratio);
        if (ratio > 1 + tol_ineq) rep.holds = false;
    }
    return rep;
}

LinftyReport linfty_report(const PoissonProblem& p, const PotentialSolution& s) {
    LinftyReport r;
    for (double v : s.u) r.u_inf = std::max(r.u_inf, std::abs(v));
    double lp = 0.0;
    if (!p.source.empty()) {
        const FCDomainMesh& m = p.mesh;
        for (int e = 0; e < m.num_triangles(); ++e) {
            if (p.source[e] == 0.0) continue;
            const Mat2 g = p.metric.eval(m.barycenter(e));
            lp += std::pow(std::abs(p.source[e]), 1.5) * m.area(e) * std::sqrt(g.determinant());
        }
    }
    r.proxy = std::pow(lp, 1.0 / 1.5);
    for (int h = 0; h < p.mesh.num_holes(); ++h) r.proxy += std::abs(p.charge(h));
    r.ratio = r.proxy > 0 ? r.u_inf / r.proxy : 0.0;
    return r;
}

namespace {

struct VertexFit {
    Vec2 center = Vec2::Zero();
    double h = 0.0;
    int cols = 0;
    Eigen::VectorXd a;
    Vec2 grad(const Vec2& p) const {
        const Vec2 d = (p - center) / h;
        const double x = d.x(), z = d.y();
        Vec2 g(a[1], a[2]);
        if (cols >= 6) g += Vec2(2 * a[3] * x + a[4] * z, a[4] * x + 2 * a[5] * z);
        if (cols >= 10)
            g += Vec2(3 * a[6] * x * x + 2 * a[7] * x * z + a[8] * z * z,
                      a[7] * x * x + 2 * a[8] * x * z + 3 * a[9] * z * z);
        return g / h;
    }
};

VertexFit fit_vertex(const FCDomainMesh& m, const std::vector<double>& u, int v) {
    std::vector<int> patch;
    for (int rings = 2; rings <= 5; ++rings) {
        patch = m.patch({v}, rings);
        if (patch.size() >= 15) break;
    }
    VertexFit f;
    f.center = m.vertices()[v];
    for (int w : patch) f.h = std::max(f.h, (m.vertices()[w] - f.center).norm());
    if (f.h == 0.0) return f;
    for (int cols : {10, 6, 3}) {
        if (static_cast<int>(patch.size()) < cols + cols / 2 && cols > 3) continue;
        Eigen::MatrixXd M(patch.size(), cols);
        Eigen::VectorXd y(patch.size());
        for (size_t i = 0; i < patch.size(); ++i) {
            const Vec2 d = (m.vertices()[patch[i]] - f.center) / f.h;
            const double x = d.x(), z = d.y();
            const double mono[10] = {1, x, z, x * x, x * z, z * z, x * x * x, x * x * z, x * z * z, z * z * z};
            for (int k = 0; k < cols; ++k) M(i, k) = mono[k];
            y[i] = u[patch[i]];
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
        qr.setThreshold(1e-10);
        if (qr.rank() < cols && cols > 3) continue;
        f.cols = cols;
        f.a = qr.solve(y);
        return f;
    }
    return f;
}

}  // namespace

RecoveredGradient::RecoveredGradient(const FCDomainMesh& m, const std::vector<double>& u)
    : mesh_(&m), grad_(m.num_vertices(), Vec2::Zero()) {
    std::vector<VertexFit> fits(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) {
        fits[v] = fit_vertex(m, u, v);
        if (fits[v].cols > 0) grad_[v] = fits[v].grad(fits[v].center);
    }
    // one-sided fits extrapolate badly; boundary vertices borrow the
    // polynomials of their interior neighbours instead
    for (int v = 0; v < m.num_vertices(); ++v) {
        if (m.boundary_label(v) < 0) continue;
        Vec2 sum = Vec2::Zero();
        int k = 0;
        for (int w : m.vertex_neighbors(v))
            if (m.boundary_label(w) < 0 && fits[w].cols > 0) {
                sum += fits[w].grad(m.vertices()[v]);
                ++k;
            }
        if (k > 0) grad_[v] = sum / k;
    }
}

Vec2 RecoveredGradient::at(int e, const Eigen::Vector3d& bary) const {
    const Tri& t = mesh_->triangles()[e];
    return bary[0] * grad_[t[0]] + bary[1] * grad_[t[1]] + bary[2] * grad_[t[2]];
}

std::vector<double> boundary_flux(const FCDomainMesh& m, const MetricField& g, const RecoveredGradient& du) {
    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    std::vector<double> flux;
    const auto& loops = m.boundary_loops();
    for (size_t li = 1; li < loops.size(); ++li) {
        const auto& loop = loops[li];
        double f = 0.0;
        for (size_t k = 0; k < loop.size(); ++k) {
            const int a = loop[k], b = loop[(k + 1) % loop.size()];
            int elem = -1;
            for (int e : m.vertex_triangles(a)) {
                const Tri& t = m.triangles()[e];
                if (t[0] == b || t[1] == b || t[2] == b) elem = e;
            }
            if (elem < 0) throw InvalidMesh("boundary edge without an element");
            const Tri& t = m.triangles()[elem];
            const int ia = static_cast<int>(std::find(t.begin(), t.end(), a) - t.begin());
            const int ib = static_cast<int>(std::find(t.begin(), t.end(), b) - t.begin());
            const Vec2 pa = m.vertices()[a], pb = m.vertices()[b];
            const Vec2 tau = pb - pa;
            // Ω lies to the left of each loop, so the outward normal is on the right
            const Vec2 nrm(tau.y(), -tau.x());
            for (double s : gp) {
                Eigen::Vector3d bary = Eigen::Vector3d::Zero();
                bary[ia] = 1 - s;
                bary[ib] = s;
                const Vec2 p = pa + s * tau;
                const Mat2 G = g.eval(p);
                f += 0.5 * std::sqrt(G.determinant()) * (G.inverse() * du.at(elem, bary)).dot(nrm);
            }
        }
        flux.push_back(f);
    }
    return flux;
}

}  // namespace wb
