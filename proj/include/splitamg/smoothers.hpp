#ifndef SPLITAMG_SMOOTHERS_HPP
#define SPLITAMG_SMOOTHERS_HPP

#include <atomic>
#include <cmath>
#include <memory>
#include <span>
#include <string>

#include "ilu0.hpp"
#include "krylov.hpp"
#include "sparse.hpp"
#include "spectral.hpp"

namespace splitamg {

enum class SmootherKind { pgadi_hs, hss, spd_gadi };

inline std::string to_string(SmootherKind k) {
    switch (k) {
    case SmootherKind::pgadi_hs: return "pgadi-hs";
    case SmootherKind::hss: return "hss";
    case SmootherKind::spd_gadi: return "spd-gadi";
    }
    return "?";
}

inline SmootherKind parse_smoother_kind(const std::string& s) {
    if (s == "pgadi-hs" || s == "pgadi_hs") return SmootherKind::pgadi_hs;
    if (s == "hss") return SmootherKind::hss;
    if (s == "spd-gadi" || s == "spd_gadi") return SmootherKind::spd_gadi;
    throw config_error("unknown smoother '" + s + "'");
}

struct SmootherConfig {
    SmootherKind kind = SmootherKind::pgadi_hs;
    double alpha = 0.1;
    /// Relaxation; ignored by hss.
    double omega = 1.0;
    /// Tolerances for the inner solves. Any ilu factors set here are ignored:
    /// each level builds its own from `precond`.
    KrylovConfig inner{};
    /// Right preconditioner of the skew half-step: ilu0 uses the incomplete
    /// factors of the level operator A_k.
    PreconditionerKind precond = PreconditionerKind::identity;

    void validate() const {
        if (!(alpha > 0) || !std::isfinite(alpha)) throw config_error("smoother: alpha must be positive");
        if (kind != SmootherKind::hss && !(omega > 0 && omega < 2))
            throw config_error("smoother: omega must lie in (0, 2)");
        inner.validate();
    }
};

namespace detail {

template <class Fn>
auto tagged(const std::string& tag, Fn&& fn) {
    try {
        return fn();
    } catch (const convergence_error& e) {
        throw convergence_error(tag + ": " + e.what(), e.best_iterate(), e.residual(), e.iterations());
    } catch (const breakdown_error& e) {
        throw breakdown_error(tag + ": " + e.what());
    }
}

} // namespace detail

/// One relaxation x -> x' for a fixed level operator.
class Smoother {
  public:
    virtual ~Smoother() = default;
    virtual std::size_t dim() const = 0;
    virtual Vector apply(std::span<const double> x, std::span<const double> b) const = 0;
    /// Inner Krylov iterations spent so far; 0 for direct smoothers.
    virtual std::size_t inner_iterations() const { return 0; }
    virtual void reset_counters() const {}
};

/// One smoothing step bound to a level: caches αI + H, αI + S and its transpose.
class LevelSmoother final : public Smoother {
  public:
    LevelSmoother(const CsrMatrix& a, const HsSplitting& split, const SmootherConfig& cfg) : cfg_(cfg), a_(a) {
        cfg_.validate();
        if (!a.is_square() || split.h.rows() != a.rows() || split.s.rows() != a.rows())
            throw dimension_error("smoother: operator and splitting sizes differ");
        sym_cfg_ = cfg_.inner;
        sym_cfg_.ilu.reset();
        shifted_h_ = shifted(split.h, cfg_.alpha);
        if (cfg_.kind == SmootherKind::spd_gadi) {
            // The symmetric reduction smooths against H alone.
            a_ = split.h;
            return;
        }
        shifted_s_ = shifted(split.s, cfg_.alpha);
        shifted_s_t_ = transpose(shifted_s_);
        skew_cfg_ = cfg_.inner;
        skew_cfg_.ilu.reset();
        if (cfg_.precond == PreconditionerKind::ilu0) skew_cfg_.ilu = std::make_shared<const Ilu0>(a);
    }

    const SmootherConfig& config() const noexcept { return cfg_; }
    std::size_t dim() const override { return a_.rows(); }
    std::size_t inner_iterations() const override { return inner_iters_.load(std::memory_order_relaxed); }
    void reset_counters() const override { inner_iters_.store(0, std::memory_order_relaxed); }

    Vector apply(std::span<const double> x, std::span<const double> b) const override {
        if (x.size() != dim() || b.size() != dim()) throw dimension_error("smoother: length mismatch");
        const double alpha = cfg_.alpha;
        Vector r = residual(a_, x, b);
        Vector out(x.begin(), x.end());
        switch (cfg_.kind) {
        case SmootherKind::spd_gadi: {
            const Vector d = solve_h(r);
            axpy(2.0 - cfg_.omega, d, out);
            return out;
        }
        case SmootherKind::pgadi_hs: {
            Vector delta = solve_h(r);
            for (auto& v : delta) v *= alpha * (2.0 - cfg_.omega);
            axpy(1.0, solve_s(delta), out);
            return out;
        }
        case SmootherKind::hss: {
            axpy(1.0, solve_h(r), out);
            residual(a_, out, b, r);
            axpy(1.0, solve_s(r), out);
            return out;
        }
        }
        return out;
    }

  private:
    Vector solve_h(const Vector& rhs) const {
        return detail::tagged("symmetric half-step", [&] {
            auto res = pcg_solve(shifted_h_, rhs, sym_cfg_);
            inner_iters_.fetch_add(res.stats.iterations, std::memory_order_relaxed);
            return std::move(res.x);
        });
    }
    Vector solve_s(const Vector& rhs) const {
        return detail::tagged("skew half-step", [&] {
            auto res = pcgne_solve(shifted_s_, rhs, skew_cfg_, &shifted_s_t_);
            inner_iters_.fetch_add(res.stats.iterations, std::memory_order_relaxed);
            return std::move(res.x);
        });
    }

    SmootherConfig cfg_;
    CsrMatrix a_;
    CsrMatrix shifted_h_, shifted_s_, shifted_s_t_;
    KrylovConfig sym_cfg_, skew_cfg_;
    mutable std::atomic<std::size_t> inner_iters_{0};
};

/// x + α(2-ω)(αI+S)⁻¹(αI+H)⁻¹(b - a x), computed as two inner solves.
inline Vector pgadi_hs_step(const CsrMatrix& a, const HsSplitting& split, const SmootherConfig& cfg,
                            std::span<const double> x, std::span<const double> b) {
    if (cfg.kind != SmootherKind::pgadi_hs) throw config_error("pgadi_hs_step: config is for another smoother");
    return LevelSmoother(a, split, cfg).apply(x, b);
}

/// Classical alternation: (αI+H) x½ = (αI-S) x + b, then (αI+S) x⁺ = (αI-H) x½ + b.
inline Vector hss_step(const CsrMatrix& a, const HsSplitting& split, double alpha, const KrylovConfig& inner,
                       std::span<const double> x, std::span<const double> b) {
    SmootherConfig cfg;
    cfg.kind = SmootherKind::hss;
    cfg.alpha = alpha;
    cfg.inner = inner;
    return LevelSmoother(a, split, cfg).apply(x, b);
}

/// x + (2-ω)(αI+h)⁻¹(b - h x). alpha = 0 is accepted here when h itself is SPD.
inline Vector spd_gadi_step(const CsrMatrix& h, double alpha, double omega, const KrylovConfig& inner,
                            std::span<const double> x, std::span<const double> b) {
    if (alpha < 0) throw config_error("spd_gadi_step: alpha must be >= 0");
    if (!(omega > 0 && omega < 2)) throw config_error("spd_gadi_step: omega must lie in (0, 2)");
    if (!h.is_square() || x.size() != h.rows() || b.size() != h.rows())
        throw dimension_error("spd_gadi_step: length mismatch");
    const Vector r = residual(h, x, b);
    auto d = detail::tagged("symmetric half-step", [&] { return pcg_solve(shifted(h, alpha), r, inner).x; });
    Vector out(x.begin(), x.end());
    axpy(2.0 - omega, d, out);
    return out;
}

/// sqrt(lambda_min * lambda_max) of an SPD matrix.
inline double hss_optimal_alpha(const CsrMatrix& h, double tol = 1e-8) {
    const auto eig = extreme_eigs(h, tol);
    if (!(eig.lambda_min > 0)) throw config_error("hss_optimal_alpha: matrix is not positive definite");
    return std::sqrt(eig.lambda_min * eig.lambda_max);
}

} // namespace splitamg

#endif
