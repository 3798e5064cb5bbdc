#include "wbkit/io.hpp"

#include "wbkit/errors.hpp"
#include "wbkit/scenarios.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace wb {

namespace {

using json = nlohmann::json;
constexpr double kTwoPi = 2 * std::numbers::pi;

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

const json& field(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + " must be an object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ParseError(where + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(where + " is not finite");
    return v;
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ParseError(where + " must be an integer");
    return j.get<int>();
}

const json& array(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + " must be an array");
    return j;
}

std::vector<double> numbers(const json& j, const std::string& where) {
    std::vector<double> out;
    for (std::size_t i = 0; i < array(j, where).size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

template <int D>
Eigen::Matrix<double, D, 1> point(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != D) throw ParseError(where + " must be an array of " + std::to_string(D) + " numbers");
    Eigen::Matrix<double, D, 1> p;
    for (int k = 0; k < D; ++k) p[k] = number(j[k], where + "[" + std::to_string(k) + "]");
    return p;
}

template <int D>
std::vector<Eigen::Matrix<double, D, 1>> points(const json& j, const std::string& where) {
    std::vector<Eigen::Matrix<double, D, 1>> out;
    for (std::size_t i = 0; i < array(j, where).size(); ++i)
        out.push_back(point<D>(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
    json a = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
    return a;
}

FCDomainMesh mesh_from(const json& j) {
    const std::string where = "mesh";
    std::vector<double> charges;
    if (j.is_object() && j.contains("hole_charges")) charges = numbers(j["hole_charges"], "mesh.hole_charges");
    try {
        if (j.is_object() && j.contains("generator")) {
            const json& g = j["generator"];
            if (!g.is_string()) throw ParseError("mesh.generator must be a string");
            const std::string kind = g.get<std::string>();
            FCDomainMesh m;
            if (kind == "annulus") {
                RadialGrading grading = RadialGrading::Logarithmic;
                if (j.contains("grading")) {
                    const std::string s = j["grading"].is_string() ? j["grading"].get<std::string>() : "";
                    if (s == "uniform") grading = RadialGrading::Uniform;
                    else if (s != "log") throw ParseError("mesh.grading must be \"log\" or \"uniform\"");
                }
                const double r_in = number(field(j, "r_in", where), "mesh.r_in");
                const double r_out = number(field(j, "r_out", where), "mesh.r_out");
                const int n_r = integer(field(j, "n_r", where), "mesh.n_r");
                const int n_phi = j.contains("n_phi") ? integer(j["n_phi"], "mesh.n_phi") : cone_ring_points(n_r, r_in, r_out);
                if (!(r_in > 0 && r_out > r_in) || n_r < 1 || n_phi < 3)
                    throw ParseError("annulus needs 0 < r_in < r_out, n_r >= 1, n_phi >= 3");
                m = meshgen::annulus({0, 0}, r_in, r_out, n_r, n_phi, grading);
            } else if (kind == "disc") {
                const double radius = number(field(j, "radius", where), "mesh.radius");
                const int n_r = integer(field(j, "n_r", where), "mesh.n_r");
                const int n_phi = integer(field(j, "n_phi", where), "mesh.n_phi");
                if (!(radius > 0) || n_r < 1 || n_phi < 3) throw ParseError("disc needs radius > 0, n_r >= 1, n_phi >= 3");
                m = meshgen::disc({0, 0}, radius, n_r, n_phi);
            } else if (kind == "perforated_disc") {
                const double R = number(field(j, "R", where), "mesh.R");
                std::vector<meshgen::CircleHole> holes;
                const json& hs = array(field(j, "holes", where), "mesh.holes");
                for (std::size_t i = 0; i < hs.size(); ++i) {
                    const std::string w = "mesh.holes[" + std::to_string(i) + "]";
                    holes.push_back({point<2>(field(hs[i], "center", w), w + ".center"),
                                     number(field(hs[i], "radius", w), w + ".radius")});
                }
                const double h_min = number(field(j, "h_min", where), "mesh.h_min");
                const double h_max = number(field(j, "h_max", where), "mesh.h_max");
                if (!(R > 0 && h_min > 0 && h_max >= h_min)) throw ParseError("perforated_disc needs R > 0, 0 < h_min <= h_max");
                const double growth = j.contains("growth") ? number(j["growth"], "mesh.growth") : 0.25;
                if (R / h_min > 1e4) throw ParseError("perforated_disc: h_min too small for R");
                if (!(growth > 0 && growth <= 1)) throw ParseError("perforated_disc: growth must lie in (0, 1]");
                m = meshgen::perforated_disc(R, holes, h_min, h_max, growth);
            } else {
                throw ParseError("unknown mesh generator '" + kind + "'");
            }
            return charges.empty() ? m : m.with_hole_charges(charges);
        }
        auto vs = points<2>(field(j, "vertices", where), "mesh.vertices");
        std::vector<Tri> tris;
        const json& ts = array(field(j, "triangles", where), "mesh.triangles");
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const std::string w = "mesh.triangles[" + std::to_string(i) + "]";
            if (!ts[i].is_array() || ts[i].size() != 3) throw ParseError(w + " must hold 3 vertex indices");
            Tri t;
            for (int k = 0; k < 3; ++k) {
                t[k] = integer(ts[i][k], w);
                if (t[k] < 0 || t[k] >= static_cast<int>(vs.size())) throw ParseError(w + " refers to a missing vertex");
            }
            tris.push_back(t);
        }
        if (!j.contains("boundary_loops")) return FCDomainMesh::from_triangles(std::move(vs), std::move(tris), charges);
        std::vector<std::vector<int>> loops;
        const json& ls = array(j["boundary_loops"], "mesh.boundary_loops");
        for (std::size_t i = 0; i < ls.size(); ++i) {
            const std::string w = "mesh.boundary_loops[" + std::to_string(i) + "]";
            std::vector<int> loop;
            for (const auto& v : array(ls[i], w)) loop.push_back(integer(v, w));
            loops.push_back(std::move(loop));
        }
        return FCDomainMesh(std::move(vs), std::move(tris), std::move(loops), charges);
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        // a mesh that fails validation is bad input, not a numerical failure
        throw ParseError(std::string("mesh rejected: ") + e.what());
    }
}

std::pair<double, double> radial_extent(const FCDomainMesh& m) {
    double lo = INFINITY, hi = 0;
    for (const auto& v : m.vertices()) lo = std::min(lo, v.norm()), hi = std::max(hi, v.norm());
    return {lo, hi};
}

}  // namespace

std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw ConfigError("cannot create " + p.parent_path().string() + ": " + ec.message());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
    if (!out) throw ConfigError("write failed for " + p.string());
}

LoopSamples parse_loop_json(const std::string& text) {
    const json j = parse(text);
    if (!j.is_object()) throw ParseError("loop file must hold a JSON object");
    LoopSamples s;
    s.gamma = points<3>(field(j, "gamma", "loop"), "gamma");
    s.normal = points<3>(field(j, "normal", "loop"), "normal");
    if (s.gamma.size() != s.normal.size())
        throw ParseError("gamma has " + std::to_string(s.gamma.size()) + " samples but normal has " +
                         std::to_string(s.normal.size()));
    if (s.gamma.size() < 4) throw ParseError("a loop needs at least 4 samples");
    if (j.contains("phi")) {
        s.phi = numbers(j["phi"], "phi");
        if (s.phi.size() != s.gamma.size()) throw ParseError("phi and gamma differ in length");
    } else {
        const std::size_t n = s.gamma.size();
        for (std::size_t k = 0; k < n; ++k) s.phi.push_back(kTwoPi * static_cast<double>(k) / static_cast<double>(n));
    }
    if (j.contains("tol_orth")) {
        s.tol_orth = number(j["tol_orth"], "tol_orth");
        if (!(s.tol_orth > 0)) throw ParseError("tol_orth must be positive");
    }
    return s;
}

std::string loop_to_json(const LoopSamples& s) {
    json j;
    j["phi"] = s.phi;
    j["gamma"] = json::array();
    j["normal"] = json::array();
    for (const auto& g : s.gamma) j["gamma"].push_back(vec_json(g));
    for (const auto& n : s.normal) j["normal"].push_back(vec_json(n));
    j["tol_orth"] = s.tol_orth;
    return j.dump(1) + "\n";
}

LoopSamples loop_samples(const FramedLoop& loop) {
    return {loop.phi(), loop.gamma(), loop.normal(), 1e-8};
}

FramedLoop to_framed_loop(const LoopSamples& s) {
    const auto bad = FramedLoop::violations(s.phi, s.gamma, s.normal, s.tol_orth);
    if (!bad.empty()) {
        std::string msg = "loop violates " + std::to_string(bad.size()) + " invariant(s)";
        for (const auto& b : bad) msg += "\n  " + b;
        throw ParseError(msg);
    }
    try {
        return FramedLoop::from_samples(s.phi, s.gamma, s.normal, s.tol_orth);
    } catch (const Error& e) {
        throw ParseError(std::string("loop rejected: ") + e.what());
    }
}

FCDomainMesh parse_mesh_json(const std::string& text) { return mesh_from(parse(text)); }

std::string mesh_to_json(const FCDomainMesh& m) {
    json j;
    j["vertices"] = json::array();
    for (const auto& v : m.vertices()) j["vertices"].push_back(vec_json(v));
    j["triangles"] = m.triangles();
    j["boundary_loops"] = m.boundary_loops();
    if (!m.hole_charges().empty()) j["hole_charges"] = m.hole_charges();
    return j.dump() + "\n";
}

ProblemFile parse_problem_json(const std::string& text) {
    const json j = parse(text);
    if (!j.is_object()) throw ParseError("problem file must hold a JSON object");
    ProblemFile f;
    f.problem.mesh = mesh_from(field(j, "mesh", "problem"));
    const FCDomainMesh& m = f.problem.mesh;

    f.metric_kind = "euclidean";
    double alpha = 0, eps = 0;
    if (j.contains("metric")) {
        const json& g = j["metric"];
        const json& kind = field(g, "kind", "metric");
        if (!kind.is_string()) throw ParseError("metric.kind must be a string");
        f.metric_kind = kind.get<std::string>();
        if (f.metric_kind == "cone") alpha = number(field(g, "alpha", "metric"), "metric.alpha");
        else if (f.metric_kind == "dipole") eps = number(field(g, "eps", "metric"), "metric.eps");
        else if (f.metric_kind != "euclidean") throw ParseError("unknown metric kind '" + f.metric_kind + "'");
    }
    if (f.metric_kind == "euclidean") {
        f.problem.metric = MetricField::euclidean();
    } else {
        const auto [lo, hi] = radial_extent(m);
        if (!(lo > 0)) throw ParseError("the " + f.metric_kind + " metric is singular at the origin, which lies in the mesh");
        try {
            f.problem.metric = f.metric_kind == "cone" ? cone_metric(alpha, lo, hi) : dipole_metric(eps, lo, hi);
        } catch (const Error& e) {
            throw ParseError(std::string("metric rejected: ") + e.what());
        }
    }

    if (j.contains("source")) {
        const json& s = j["source"];
        if (s.is_number()) {
            f.problem.source.assign(m.num_triangles(), number(s, "source"));
        } else if (s.is_string()) {
            // "analytic:<id>", sampled at element barycentres
            const std::string id = s.get<std::string>();
            std::function<double(const Vec2&)> k;
            if (id == "analytic:zero") k = [](const Vec2&) { return 0.0; };
            else if (id == "analytic:one") k = [](const Vec2&) { return 1.0; };
            else if (id == "analytic:bump") k = [](const Vec2& x) { return std::exp(-x.squaredNorm()); };
            else throw ParseError("unknown source '" + id + "' (analytic:zero, analytic:one, analytic:bump)");
            for (int e = 0; e < m.num_triangles(); ++e) f.problem.source.push_back(k(m.barycenter(e)));
        } else {
            f.problem.source = numbers(s, "source");
            if (static_cast<int>(f.problem.source.size()) != m.num_triangles())
                throw ParseError("source has " + std::to_string(f.problem.source.size()) + " entries for " +
                                 std::to_string(m.num_triangles()) + " elements");
        }
    }
    if (j.contains("hole_charges")) {
        f.problem.hole_charges = numbers(j["hole_charges"], "hole_charges");
        if (static_cast<int>(f.problem.hole_charges.size()) != m.num_holes())
            throw ParseError("hole_charges has " + std::to_string(f.problem.hole_charges.size()) + " entries for " +
                             std::to_string(m.num_holes()) + " holes");
    }
    if (j.contains("expect")) {
        const json& e = j["expect"];
        if (e.contains("dual_norm_sq")) f.expect_dual_norm_sq = number(e["dual_norm_sq"], "expect.dual_norm_sq");
        if (e.contains("rel_tol")) {
            f.expect_rel_tol = number(e["rel_tol"], "expect.rel_tol");
            if (!(f.expect_rel_tol > 0)) throw ParseError("expect.rel_tol must be positive");
        }
    }
    return f;
}

std::string u_csv(const FCDomainMesh& m, const std::vector<double>& u) {
    std::string out = "x,y,u\n";
    char buf[96];
    for (int v = 0; v < m.num_vertices(); ++v) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", m.vertices()[v].x(), m.vertices()[v].y(), u[v]);
        out += buf;
    }
    return out;
}

}  // namespace wb
