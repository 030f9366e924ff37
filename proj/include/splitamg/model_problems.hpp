#ifndef SPLITAMG_MODEL_PROBLEMS_HPP
#define SPLITAMG_MODEL_PROBLEMS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparse.hpp"

namespace splitamg {

enum class ProblemKind { poisson, reaction, convdiff };

inline std::string to_string(ProblemKind k) {
    switch (k) {
    case ProblemKind::poisson: return "poisson";
    case ProblemKind::reaction: return "reaction";
    case ProblemKind::convdiff: return "convdiff";
    }
    return "?";
}

inline ProblemKind parse_problem_kind(const std::string& s) {
    if (s == "poisson") return ProblemKind::poisson;
    if (s == "reaction") return ProblemKind::reaction;
    if (s == "convdiff") return ProblemKind::convdiff;
    throw config_error("unknown problem kind '" + s + "'");
}

struct Rectangle {
    double x_lo, x_hi, y_lo, y_hi;
};

/// One of the three model PDEs with homogeneous Dirichlet data.
///   poisson:  -Δu = f on [-π/6, π/6] x [0, 1]
///   reaction: -Δu + k u = f on the unit square
///   convdiff: -ε Δu + b·∇u = f on the unit square, b = speed * (cos φ, sin φ)
struct ProblemSpec {
    ProblemKind kind = ProblemKind::poisson;
    Rectangle domain{-std::numbers::pi / 6, std::numbers::pi / 6, 0.0, 1.0};
    double k = 0.0;
    double epsilon = 1.0;
    double phi = 0.0;
    /// Multiplies the unit convection direction; 0 leaves pure diffusion.
    double speed = 1.0;

    static ProblemSpec poisson() { return {}; }
    static ProblemSpec reaction(double k = 0.2) {
        ProblemSpec p;
        p.kind = ProblemKind::reaction;
        p.domain = {0, 1, 0, 1};
        p.k = k;
        return p;
    }
    static ProblemSpec convdiff(double epsilon = 0.01, double phi = 0.0) {
        ProblemSpec p;
        p.kind = ProblemKind::convdiff;
        p.domain = {0, 1, 0, 1};
        p.epsilon = epsilon;
        p.phi = phi;
        return p;
    }
    static ProblemSpec of_kind(ProblemKind kind, double phi = 0.0) {
        switch (kind) {
        case ProblemKind::reaction: return reaction();
        case ProblemKind::convdiff: return convdiff(0.01, phi);
        default: return poisson();
        }
    }

    double diffusion() const { return kind == ProblemKind::convdiff ? epsilon : 1.0; }
    double reaction_coefficient() const { return kind == ProblemKind::reaction ? k : 0.0; }
    std::array<double, 2> velocity() const {
        if (kind != ProblemKind::convdiff) return {0.0, 0.0};
        return {speed * std::cos(phi), speed * std::sin(phi)};
    }

    void validate() const {
        if (!(domain.x_lo < domain.x_hi) || !(domain.y_lo < domain.y_hi))
            throw config_error("problem: empty domain");
        if (kind == ProblemKind::convdiff && !(epsilon > 0)) throw config_error("problem: epsilon must be positive");
        if (kind == ProblemKind::reaction && k < 0) throw config_error("problem: reaction coefficient must be >= 0");
    }

    double exact(double x, double y) const {
        using std::numbers::pi;
        if (kind == ProblemKind::poisson) return std::cos(3 * x) * std::sin(pi * y) / (9 + pi * pi);
        return x * (1 - x) * std::sin(pi * y);
    }

    /// Source term obtained by applying the continuous operator to exact().
    double source(double x, double y) const {
        using std::numbers::pi;
        if (kind == ProblemKind::poisson) return std::cos(3 * x) * std::sin(pi * y);
        const double sy = std::sin(pi * y);
        const double u = x * (1 - x) * sy;
        const double neg_lap = 2 * sy + pi * pi * x * (1 - x) * sy;
        if (kind == ProblemKind::reaction) return neg_lap + k * u;
        const auto b = velocity();
        const double ux = (1 - 2 * x) * sy;
        const double uy = pi * x * (1 - x) * std::cos(pi * y);
        return epsilon * neg_lap + b[0] * ux + b[1] * uy;
    }
};

struct AssembledSystem {
    ProblemSpec spec;
    std::size_t n = 0;
    CsrMatrix matrix;
    Vector rhs;
    /// Interior node coordinates, lexicographic with x fastest.
    std::vector<std::array<double, 2>> node_coords;

    double hx() const { return (spec.domain.x_hi - spec.domain.x_lo) / static_cast<double>(n); }
    double hy() const { return (spec.domain.y_hi - spec.domain.y_lo) / static_cast<double>(n); }
    double exact(double x, double y) const { return spec.exact(x, y); }
    Vector exact_nodal() const {
        Vector u(node_coords.size());
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = spec.exact(node_coords[i][0], node_coords[i][1]);
        return u;
    }
};

/// P1 finite elements on an n x n grid of cells, each split along its
/// lower-left to upper-right diagonal. Boundary nodes are eliminated.
inline AssembledSystem assemble(const ProblemSpec& spec, std::size_t n) {
    if (n < 2) throw config_error("assemble: n must be >= 2");
    spec.validate();

    AssembledSystem sys;
    sys.spec = spec;
    sys.n = n;
    const double x0 = spec.domain.x_lo, y0 = spec.domain.y_lo;
    const double hx = sys.hx(), hy = sys.hy();
    const std::size_t m = n - 1;
    const double diff = spec.diffusion(), react = spec.reaction_coefficient();
    const auto b = spec.velocity();

    auto index = [&](std::size_t i, std::size_t j) -> long {
        if (i == 0 || j == 0 || i >= n || j >= n) return -1;
        return static_cast<long>((j - 1) * m + (i - 1));
    };

    std::vector<Triplet> trips;
    trips.reserve(m * m * 7);
    sys.rhs.assign(m * m, 0.0);

    const double area = 0.5 * hx * hy;
    using Corner = std::array<std::size_t, 2>;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::array<std::array<Corner, 3>, 2> tris{{
                {{{i, j}, {i + 1, j}, {i + 1, j + 1}}},
                {{{i, j}, {i + 1, j + 1}, {i, j + 1}}},
            }};
            for (const auto& tri : tris) {
                std::array<std::array<double, 2>, 3> p;
                for (int a = 0; a < 3; ++a) p[a] = {x0 + tri[a][0] * hx, y0 + tri[a][1] * hy};
                // Gradients of the barycentric basis functions.
                const double det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
                std::array<std::array<double, 2>, 3> g;
                for (int a = 0; a < 3; ++a) {
                    const auto& q1 = p[(a + 1) % 3];
                    const auto& q2 = p[(a + 2) % 3];
                    g[a] = {(q1[1] - q2[1]) / det, (q2[0] - q1[0]) / det};
                }
                // Edge midpoints: mid[e] lies between corners e and e+1.
                std::array<double, 3> fmid;
                for (int e = 0; e < 3; ++e) {
                    const auto& q1 = p[e];
                    const auto& q2 = p[(e + 1) % 3];
                    fmid[e] = spec.source(0.5 * (q1[0] + q2[0]), 0.5 * (q1[1] + q2[1]));
                }
                for (int a = 0; a < 3; ++a) {
                    const long ia = index(tri[a][0], tri[a][1]);
                    if (ia < 0) continue;
                    // phi_a is 1/2 on the two edges touching corner a.
                    sys.rhs[static_cast<std::size_t>(ia)] += area / 3.0 * 0.5 * (fmid[a] + fmid[(a + 2) % 3]);
                    for (int c = 0; c < 3; ++c) {
                        const long ic = index(tri[c][0], tri[c][1]);
                        if (ic < 0) continue;
                        double e = diff * area * (g[a][0] * g[c][0] + g[a][1] * g[c][1]);
                        e += react * area / 12.0 * (a == c ? 2.0 : 1.0);
                        e += area / 3.0 * (b[0] * g[c][0] + b[1] * g[c][1]);
                        trips.push_back({static_cast<std::size_t>(ia), static_cast<std::size_t>(ic), e});
                    }
                }
            }
        }
    }
    sys.matrix = CsrMatrix::from_triplets(m * m, m * m, std::move(trips));
    sys.node_coords.reserve(m * m);
    for (std::size_t j = 1; j < n; ++j)
        for (std::size_t i = 1; i < n; ++i) sys.node_coords.push_back({x0 + i * hx, y0 + j * hy});
    return sys;
}

struct DiscretizationError {
    double l2 = 0;
    double max = 0;
};

/// Nodal max error and the mesh-weighted discrete L2 error sqrt(hx*hy)*||u_h - u||_2.
inline DiscretizationError discretization_error(const AssembledSystem& sys, std::span<const double> u_h) {
    if (u_h.size() != sys.matrix.rows()) throw dimension_error("discretization_error: length mismatch");
    DiscretizationError out;
    double sq = 0;
    for (std::size_t i = 0; i < u_h.size(); ++i) {
        const double d = u_h[i] - sys.spec.exact(sys.node_coords[i][0], sys.node_coords[i][1]);
        sq += d * d;
        out.max = std::max(out.max, std::abs(d));
    }
    out.l2 = std::sqrt(sys.hx() * sys.hy()) * std::sqrt(sq);
    return out;
}

inline nlohmann::json problem_json(const ProblemSpec& spec) {
    nlohmann::json coeffs = nlohmann::json::object();
    switch (spec.kind) {
    case ProblemKind::reaction: coeffs["k"] = spec.k; break;
    case ProblemKind::convdiff:
        coeffs["epsilon"] = spec.epsilon;
        coeffs["phi"] = spec.phi;
        coeffs["speed"] = spec.speed;
        break;
    default: break;
    }
    return {{"kind", to_string(spec.kind)},
            {"domain", {spec.domain.x_lo, spec.domain.x_hi, spec.domain.y_lo, spec.domain.y_hi}},
            {"coefficients", coeffs}};
}

/// Sidecar written next to an exported matrix.
inline nlohmann::json system_json(const AssembledSystem& sys) {
    auto j = problem_json(sys.spec);
    j["n"] = sys.n;
    j["dim"] = sys.matrix.rows();
    return j;
}

inline ProblemSpec problem_from_json(const nlohmann::json& j) {
    ProblemSpec p = ProblemSpec::of_kind(parse_problem_kind(j.at("kind").get<std::string>()));
    if (j.contains("domain")) {
        const auto d = j.at("domain").get<std::vector<double>>();
        if (d.size() != 4) throw config_error("problem json: domain needs 4 numbers");
        p.domain = {d[0], d[1], d[2], d[3]};
    }
    if (j.contains("coefficients")) {
        const auto& c = j.at("coefficients");
        p.k = c.value("k", p.k);
        p.epsilon = c.value("epsilon", p.epsilon);
        p.phi = c.value("phi", p.phi);
        p.speed = c.value("speed", p.speed);
    }
    p.validate();
    return p;
}

} // namespace splitamg

#endif
