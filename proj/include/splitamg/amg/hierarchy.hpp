#ifndef SPLITAMG_AMG_HIERARCHY_HPP
#define SPLITAMG_AMG_HIERARCHY_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "../smoothers.hpp"
#include "../sparse.hpp"
#include "../spectral.hpp"
#include "coarsening.hpp"
#include "interpolation.hpp"

namespace splitamg {

struct CoarseningConfig {
    double strength_theta = 0.025;
    std::size_t max_levels = 20;
    std::size_t min_coarse_size = 10;
    InterpolationMode interp = InterpolationMode::direct;
    bool second_pass = true;
    /// Coarsening stops when a coarse level would keep more than this fraction of points.
    double stall_ratio = 0.9;
    /// Extreme eigenvalues of every H_k are estimated to this tolerance.
    /// A miss within the cap keeps the best estimate (see Level::spectral_converged).
    SpectralConfig spectral{1e-6, 5000};

    void validate() const {
        if (!(strength_theta > 0 && strength_theta < 1)) throw config_error("coarsening: theta must lie in (0, 1)");
        if (max_levels < 1) throw config_error("coarsening: max_levels must be >= 1");
        if (min_coarse_size < 1) throw config_error("coarsening: min_coarse_size must be >= 1");
        if (!(stall_ratio > 0 && stall_ratio <= 1)) throw config_error("coarsening: stall_ratio must lie in (0, 1]");
    }
};

/// Immutable per-level operator data; index 0 is the finest level.
struct Level {
    CsrMatrix a;
    HsSplitting splitting;
    /// Maps this level to the next finer one (rows = finer dim); empty on the finest level.
    CsrMatrix interp_to_finer;
    CsrMatrix restrict_from_finer;
    SpectralEstimate spectral;
    bool spectral_converged = true;

    std::size_t dim() const noexcept { return a.rows(); }
};

struct SolveOptions {
    double tol = 1e-8;
    std::size_t max_cycles = 500;
    /// Relative residual above which the iteration is declared divergent.
    double divergence_limit = 1e6;
};

struct SolveReport {
    std::size_t iterations = 0;
    /// ||b - A u_k|| / ||b||, starting with 1 for u_0 = 0.
    std::vector<double> residual_history{1.0};
    bool converged = false;
    std::chrono::duration<double, std::milli> wall_time{0};
    /// Krylov iterations spent inside the smoothers during this solve.
    std::size_t inner_iterations = 0;
};

struct SolveResult {
    Vector x;
    SolveReport report;
};

struct ContractionEstimate {
    /// Largest H-norm growth factor over the trailing window.
    double factor = 0;
    /// Spread of the factors inside that window.
    double spread = 0;
    std::vector<double> ratios;
};

/// Builds a smoother for one level; used to plug in non-standard relaxations.
using SmootherFactory = std::function<std::shared_ptr<const Smoother>(std::size_t level, const Level&)>;

class AmgHierarchy {
  public:
    static AmgHierarchy setup(const CsrMatrix& a, const CoarseningConfig& cfg, const SmootherConfig& smoother) {
        cfg.validate();
        smoother.validate();
        if (!a.is_square()) throw dimension_error("amg setup: matrix must be square");
        if (a.rows() == 0) throw dimension_error("amg setup: empty matrix");

        auto levels = std::make_shared<std::vector<Level>>();
        levels->push_back(make_level(a, {}, cfg));
        while (levels->back().dim() > cfg.min_coarse_size && levels->size() < cfg.max_levels) {
            const CsrMatrix& fine = levels->back().a;
            const auto strength = strength_connections(fine, cfg.strength_theta);
            const auto cf = rs_coarsen(strength, cfg.second_pass);
            const std::size_t nc = coarse_count(cf);
            if (nc == 0 || static_cast<double>(nc) > cfg.stall_ratio * static_cast<double>(fine.rows())) break;
            CsrMatrix p = build_interpolation(fine, strength, cf, cfg.interp);
            CsrMatrix coarse = galerkin_product(fine, p);
            levels->push_back(make_level(std::move(coarse), std::move(p), cfg));
        }

        AmgHierarchy h;
        h.cfg_ = cfg;
        h.levels_ = std::move(levels);
        const auto& last = h.levels_->back().a;
        const auto dense = last.to_dense();
        Eigen::MatrixXd m(last.rows(), last.cols());
        for (std::size_t i = 0; i < last.rows(); ++i)
            for (std::size_t j = 0; j < last.cols(); ++j) m(i, j) = dense[i * last.cols() + j];
        h.coarse_ = std::make_shared<const Eigen::PartialPivLU<Eigen::MatrixXd>>(m);
        return h.with_smoother(smoother);
    }

    /// Same levels, new smoother on every level but the coarsest.
    AmgHierarchy with_smoother(const SmootherConfig& smoother) const {
        smoother.validate();
        return with_smoother([smoother](std::size_t, const Level& lv) -> std::shared_ptr<const Smoother> {
            return std::make_shared<const LevelSmoother>(lv.a, lv.splitting, smoother);
        }, smoother);
    }

    AmgHierarchy with_smoother(const SmootherFactory& factory,
                               std::optional<SmootherConfig> described = std::nullopt) const {
        AmgHierarchy h = *this;
        h.smoother_cfg_ = described;
        h.smoothers_.clear();
        for (std::size_t k = 0; k + 1 < levels_->size(); ++k) {
            auto s = factory(k, (*levels_)[k]);
            if (!s || s->dim() != (*levels_)[k].dim()) throw dimension_error("amg: smoother size mismatch");
            h.smoothers_.push_back(std::move(s));
        }
        return h;
    }

    /// Enables one extra smoothing step after the coarse correction.
    AmgHierarchy with_post_smoothing(bool on) const {
        AmgHierarchy h = *this;
        h.post_smoothing_ = on;
        return h;
    }

    std::size_t num_levels() const noexcept { return levels_->size(); }
    const Level& level(std::size_t k) const { return levels_->at(k); }
    const CoarseningConfig& config() const noexcept { return cfg_; }
    const std::optional<SmootherConfig>& smoother_config() const noexcept { return smoother_cfg_; }
    bool post_smoothing() const noexcept { return post_smoothing_; }

    double operator_complexity() const {
        double total = 0;
        for (const auto& lv : *levels_) total += static_cast<double>(lv.a.nnz());
        return total / static_cast<double>(levels_->front().a.nnz());
    }

    /// One cycle on level k (0 = finest): pre-smooth, coarse correction from
    /// level k+1 started at zero, optional post-smooth. The coarsest level solves directly.
    Vector vcycle(std::size_t k, std::span<const double> v, std::span<const double> g) const {
        const Level& lv = level(k);
        if (v.size() != lv.dim() || g.size() != lv.dim()) throw dimension_error("vcycle: length mismatch");
        if (k + 1 == num_levels()) return coarse_solve(g);

        Vector out = smooth(k, v, g);
        const Level& next = level(k + 1);
        const Vector rc = spmv(next.restrict_from_finer, residual(lv.a, out, g));
        const Vector q = vcycle(k + 1, Vector(next.dim(), 0.0), rc);
        axpy(1.0, spmv(next.interp_to_finer, q), out);
        if (post_smoothing_) out = smooth(k, out, g);
        return out;
    }

    /// Stationary iteration u <- vcycle(0, u, b) from u = 0.
    SolveResult solve(std::span<const double> b, const SolveOptions& opt = {}) const {
        const CsrMatrix& a = level(0).a;
        if (b.size() != a.rows()) throw dimension_error("amg solve: rhs length mismatch");
        if (!(opt.tol > 0) || opt.max_cycles < 1) throw config_error("amg solve: bad tolerance or cycle cap");
        const auto start = std::chrono::steady_clock::now();
        const std::size_t inner_before = inner_iterations();

        SolveResult out{Vector(a.rows(), 0.0), {}};
        auto& rep = out.report;
        const double r0 = norm2(b);
        auto finish = [&] {
            rep.wall_time = std::chrono::steady_clock::now() - start;
            rep.inner_iterations = inner_iterations() - inner_before;
        };
        if (r0 == 0.0) {
            rep.converged = true;
            finish();
            return out;
        }
        for (std::size_t it = 1; it <= opt.max_cycles; ++it) {
            out.x = vcycle(0, out.x, b);
            const double rel = norm2(residual(a, out.x, b)) / r0;
            rep.residual_history.push_back(rel);
            rep.iterations = it;
            if (rel <= opt.tol) {
                rep.converged = true;
                break;
            }
            if (!std::isfinite(rel) || rel > opt.divergence_limit)
                throw divergence_error("amg solve: relative residual " + std::to_string(rel) + " after " +
                                           std::to_string(it) + " cycles",
                                       rep.residual_history);
        }
        finish();
        return out;
    }

    /// Power iteration on e -> e - vcycle(0, 0, A e), measured in the norm sqrt(eᵀ H e).
    ContractionEstimate estimate_contraction(std::size_t iterations = 50, std::size_t window = 10) const {
        ContractionEstimate est;
        if (num_levels() == 1) return est;
        const Level& fine = level(0);
        const std::size_t n = fine.dim();
        auto hnorm = [&](const Vector& e) { return std::sqrt(std::max(0.0, dot(e, spmv(fine.splitting.h, e)))); };

        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        Vector e(n);
        for (auto& x : e) x = unif(rng);
        double ne = hnorm(e);
        for (auto& x : e) x /= ne;
        const Vector zero(n, 0.0);
        for (std::size_t it = 0; it < iterations; ++it) {
            const Vector corr = vcycle(0, zero, spmv(fine.a, e));
            Vector next = subtract(e, corr);
            const double ratio = hnorm(next);
            est.ratios.push_back(ratio);
            if (ratio == 0.0) break;
            for (std::size_t i = 0; i < n; ++i) e[i] = next[i] / ratio;
        }
        const std::size_t from = est.ratios.size() > window ? est.ratios.size() - window : 0;
        double lo = est.ratios.empty() ? 0.0 : est.ratios[from];
        for (std::size_t i = from; i < est.ratios.size(); ++i) {
            est.factor = std::max(est.factor, est.ratios[i]);
            lo = std::min(lo, est.ratios[i]);
        }
        est.spread = est.factor - lo;
        return est;
    }

    std::size_t inner_iterations() const {
        std::size_t total = 0;
        for (const auto& s : smoothers_) total += s->inner_iterations();
        return total;
    }

    nlohmann::json summary() const {
        nlohmann::json levels = nlohmann::json::array();
        for (std::size_t k = 0; k < num_levels(); ++k) {
            const auto& lv = level(k);
            levels.push_back({{"level", k},
                              {"dim", lv.dim()},
                              {"nnz", lv.a.nnz()},
                              {"lambda_min_h", lv.spectral.lambda_min},
                              {"lambda_max_h", lv.spectral.lambda_max},
                              {"spectral_converged", lv.spectral_converged}});
        }
        nlohmann::json j{{"levels", levels},
                         {"operator_complexity", operator_complexity()},
                         {"strength_theta", cfg_.strength_theta},
                         {"interpolation", to_string(cfg_.interp)},
                         {"post_smoothing", post_smoothing_}};
        if (smoother_cfg_) {
            j["smoother"] = {{"kind", to_string(smoother_cfg_->kind)},
                             {"alpha", smoother_cfg_->alpha},
                             {"omega", smoother_cfg_->omega}};
        }
        return j;
    }

  private:
    AmgHierarchy() = default;

    static Level make_level(CsrMatrix a, CsrMatrix p, const CoarseningConfig& cfg) {
        Level lv;
        lv.splitting = split_hs(a);
        lv.a = std::move(a);
        if (p.rows() > 0) {
            lv.restrict_from_finer = transpose(p);
            lv.interp_to_finer = std::move(p);
        }
        try {
            lv.spectral = extreme_eigs(lv.splitting.h, cfg.spectral);
        } catch (const convergence_error& e) {
            lv.spectral = {e.best_iterate()[0], e.best_iterate()[1], e.iterations(), e.residual()};
            lv.spectral_converged = false;
        }
        return lv;
    }

    Vector smooth(std::size_t k, std::span<const double> v, std::span<const double> g) const {
        try {
            return smoothers_[k]->apply(v, g);
        } catch (const convergence_error& e) {
            throw convergence_error("level " + std::to_string(k) + ": " + e.what(), e.best_iterate(), e.residual(),
                                    e.iterations());
        } catch (const breakdown_error& e) {
            throw breakdown_error("level " + std::to_string(k) + ": " + e.what());
        }
    }

    Vector coarse_solve(std::span<const double> g) const {
        Eigen::Map<const Eigen::VectorXd> rhs(g.data(), static_cast<Eigen::Index>(g.size()));
        const Eigen::VectorXd x = coarse_->solve(rhs);
        return Vector(x.data(), x.data() + x.size());
    }

    CoarseningConfig cfg_;
    std::shared_ptr<const std::vector<Level>> levels_;
    std::shared_ptr<const Eigen::PartialPivLU<Eigen::MatrixXd>> coarse_;
    std::vector<std::shared_ptr<const Smoother>> smoothers_;
    std::optional<SmootherConfig> smoother_cfg_;
    bool post_smoothing_ = false;
};

} // namespace splitamg

#endif
