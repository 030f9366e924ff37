#ifndef SPLITAMG_KRYLOV_HPP
#define SPLITAMG_KRYLOV_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "ilu0.hpp"
#include "sparse.hpp"

namespace splitamg {

enum class PreconditionerKind { identity, ilu0 };

/// Stopping rule and preconditioner for the inner Krylov solves.
struct KrylovConfig {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    /// Iteration cap; unset means 10 * dim.
    std::optional<std::size_t> max_iters;
    /// Factors for ilu0 preconditioning; null selects the identity.
    std::shared_ptr<const Ilu0> ilu;
    /// The recurrence residual is replaced by b - M x this often.
    std::size_t residual_refresh = 50;

    PreconditionerKind preconditioner() const noexcept {
        return ilu ? PreconditionerKind::ilu0 : PreconditionerKind::identity;
    }

    void validate() const {
        if (!(rel_tol > 0)) throw config_error("krylov: rel_tol must be positive");
        if (abs_tol < 0) throw config_error("krylov: abs_tol must be non-negative");
        if (max_iters && *max_iters < 1) throw config_error("krylov: max_iters must be >= 1");
        if (residual_refresh < 1) throw config_error("krylov: residual_refresh must be >= 1");
    }

    std::size_t iteration_cap(std::size_t dim) const { return max_iters ? *max_iters : 10 * std::max<std::size_t>(dim, 1); }
};

struct KrylovStats {
    std::size_t iterations = 0;
    /// ||b - M x||_2, recomputed from scratch on exit.
    double residual_norm = 0;
    double target = 0;
};

struct KrylovResult {
    Vector x;
    KrylovStats stats;
};

namespace detail {

inline double krylov_target(const KrylovConfig& cfg, double bnorm) {
    return std::max(cfg.rel_tol * bnorm, cfg.abs_tol);
}

inline void check_system(const CsrMatrix& m, std::span<const double> b, const char* who) {
    if (!m.is_square()) throw dimension_error(std::string(who) + ": matrix must be square");
    if (b.size() != m.rows()) throw dimension_error(std::string(who) + ": rhs length mismatch");
}

} // namespace detail

/// Preconditioned conjugate gradients for symmetric positive definite m,
/// started from x = 0.
inline KrylovResult pcg_solve(const CsrMatrix& m, std::span<const double> b, const KrylovConfig& cfg = {}) {
    detail::check_system(m, b, "pcg");
    cfg.validate();
    if (cfg.ilu && cfg.ilu->dim() != m.rows()) throw dimension_error("pcg: preconditioner size mismatch");

    const std::size_t n = m.rows();
    const double target = detail::krylov_target(cfg, norm2(b));
    KrylovResult out{Vector(n, 0.0), {0, norm2(b), target}};
    if (out.stats.residual_norm <= target) return out;

    Vector& x = out.x;
    Vector r(b.begin(), b.end());
    Vector z = cfg.ilu ? cfg.ilu->apply(r) : r;
    Vector p = z, q(n);
    double rz = dot(r, z);
    const std::size_t cap = cfg.iteration_cap(n);

    for (std::size_t it = 1; it <= cap; ++it) {
        spmv(m, p, q);
        const double pq = dot(p, q);
        if (!(pq > 0) || !std::isfinite(pq))
            throw breakdown_error("pcg: non-positive curvature at iteration " + std::to_string(it));
        const double a = rz / pq;
        axpy(a, p, x);
        axpy(-a, q, r);
        if (it % cfg.residual_refresh == 0) residual(m, x, b, r);

        double rnorm = norm2(r);
        if (rnorm <= target) {
            residual(m, x, b, r);
            rnorm = norm2(r);
            if (rnorm <= target) {
                out.stats = {it, rnorm, target};
                return out;
            }
        }

        if (cfg.ilu) z = cfg.ilu->apply(r);
        else z = r;
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // CG minimizes the energy-norm error, so the last iterate is the best one.
    const double rn = norm2(residual(m, x, b));
    throw convergence_error("pcg: no convergence in " + std::to_string(cap) + " iterations (residual " +
                                std::to_string(rn) + ", target " + std::to_string(target) + ")",
                            x, rn, cap);
}

/// Conjugate gradients on the normal equations mᵀm x = mᵀb (CGNR form), started
/// from x = 0. With ILU factors N ≈ m⁻¹ in cfg, iterates on (mN)ᵀ(mN) z = (mN)ᵀ b
/// and returns x = N z, so the tracked residual is the true residual of m x = b.
/// mt, when given, must be the transpose of m.
inline KrylovResult pcgne_solve(const CsrMatrix& m, std::span<const double> b, const KrylovConfig& cfg,
                                const CsrMatrix* mt) {
    detail::check_system(m, b, "pcgne");
    cfg.validate();
    if (cfg.ilu && cfg.ilu->dim() != m.rows()) throw dimension_error("pcgne: preconditioner size mismatch");
    CsrMatrix owned;
    if (!mt) {
        owned = transpose(m);
        mt = &owned;
    } else if (mt->rows() != m.cols() || mt->cols() != m.rows()) {
        throw dimension_error("pcgne: transpose has wrong shape");
    }

    const std::size_t n = m.rows();
    const double target = detail::krylov_target(cfg, norm2(b));
    KrylovResult out{Vector(n, 0.0), {0, norm2(b), target}};
    if (out.stats.residual_norm <= target) return out;

    auto precond = [&](const Vector& v) { return cfg.ilu ? cfg.ilu->apply(v) : v; };
    auto precond_t = [&](const Vector& v) { return cfg.ilu ? cfg.ilu->apply_transpose(v) : v; };

    Vector& x = out.x;
    Vector r(b.begin(), b.end());
    Vector s = precond_t(spmv(*mt, r));
    Vector p = s, w(n);
    double gamma = dot(s, s);
    const std::size_t cap = cfg.iteration_cap(n);

    for (std::size_t it = 1; it <= cap; ++it) {
        const Vector np = precond(p);
        spmv(m, np, w);
        const double ww = dot(w, w);
        if (!(ww > 0) || !std::isfinite(ww))
            throw breakdown_error("pcgne: zero search direction image at iteration " + std::to_string(it));
        const double a = gamma / ww;
        axpy(a, np, x);
        axpy(-a, w, r);
        if (it % cfg.residual_refresh == 0) residual(m, x, b, r);

        double rnorm = norm2(r);
        if (rnorm <= target) {
            residual(m, x, b, r);
            rnorm = norm2(r);
            if (rnorm <= target) {
                out.stats = {it, rnorm, target};
                return out;
            }
        }

        s = precond_t(spmv(*mt, r));
        const double gamma_new = dot(s, s);
        if (gamma_new == 0.0)
            throw breakdown_error("pcgne: normal-equation residual vanished with residual " + std::to_string(rnorm));
        const double beta = gamma_new / gamma;
        gamma = gamma_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = s[i] + beta * p[i];
    }
    // CGNR decreases ||b - m x|| monotonically: the last iterate is the best one.
    const double rn = norm2(residual(m, x, b));
    throw convergence_error("pcgne: no convergence in " + std::to_string(cap) + " iterations (residual " +
                                std::to_string(rn) + ", target " + std::to_string(target) + ")",
                            x, rn, cap);
}

inline KrylovResult pcgne_solve(const CsrMatrix& m, std::span<const double> b, const KrylovConfig& cfg = {}) {
    return pcgne_solve(m, b, cfg, nullptr);
}

} // namespace splitamg

#endif
