#ifndef SPLITAMG_GPR_GPR_HPP
#define SPLITAMG_GPR_GPR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "../error.hpp"
#include "kernels.hpp"
#include "optimizer.hpp"

namespace splitamg::gpr {

inline constexpr double default_noise_sigma = 1e-4;
/// Mesh sizes are divided by this before kernel evaluation.
inline constexpr double default_input_scale = 100.0;

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
    double sigma() const { return std::sqrt(variance); }
};

/// Clamp round-off negatives; anything below -1e-10 is kept so it stays visible.
inline double clamp_variance(double v) { return v < 0 && v >= -1e-10 ? 0.0 : std::max(v, 0.0); }

namespace detail {

inline void check_noise(double noise_sigma) {
    if (!(noise_sigma > 0) || !std::isfinite(noise_sigma)) throw config_error("gpr: noise sigma must be positive");
}

inline void check_scale(double input_scale) {
    if (!(input_scale > 0) || !std::isfinite(input_scale)) throw config_error("gpr: input scale must be positive");
}

/// Factor m; throws fit_error if it is not numerically positive definite.
inline Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& m, const char* who) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw fit_error(std::string(who) + ": covariance is not positive definite");
    const Eigen::VectorXd d = llt.matrixLLT().diagonal();
    if (!(d.minCoeff() > 0) || !d.allFinite())
        throw fit_error(std::string(who) + ": covariance is not positive definite");
    return llt;
}

/// C⁻¹y with one step of iterative refinement (residual accumulated in long double),
/// plus yᵀC⁻¹y summed before the correction is rounded into the weights.
struct RefinedSolve {
    Eigen::VectorXd weights;
    double quad = 0;
};

inline RefinedSolve refined_solve(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& c,
                                  const Eigen::VectorXd& y) {
    const Eigen::VectorXd a = llt.solve(y);
    Eigen::VectorXd r(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        long double acc = y[i];
        for (Eigen::Index j = 0; j < y.size(); ++j) acc -= static_cast<long double>(c(i, j)) * a[j];
        r[i] = static_cast<double>(acc);
    }
    const Eigen::VectorXd d = llt.solve(r);
    long double q = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        q += static_cast<long double>(y[i]) * a[i] + static_cast<long double>(y[i]) * d[i];
    return {a + d, static_cast<double>(q)};
}

inline double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2 * llt.matrixLLT().diagonal().array().log().sum();
}

} // namespace detail

/// Single-output GP conditioned on data, zero prior mean. Immutable.
class GprModel {
  public:
    static GprModel condition(std::vector<double> inputs, std::vector<double> targets, Kernel kernel,
                              double noise_sigma = default_noise_sigma, double input_scale = default_input_scale) {
        if (inputs.size() != targets.size()) throw dimension_error("gpr: one target per input");
        if (inputs.empty()) throw dimension_error("gpr: no training data");
        detail::check_noise(noise_sigma);
        detail::check_scale(input_scale);
        GprModel m;
        m.inputs_ = std::move(inputs);
        m.targets_ = std::move(targets);
        m.kernel_ = std::move(kernel);
        m.noise_ = noise_sigma;
        m.scale_ = input_scale;
        const Eigen::MatrixXd c = m.covariance();
        m.llt_ = detail::factor(c, "gpr");
        auto sol = detail::refined_solve(m.llt_, c, Eigen::Map<const Eigen::VectorXd>(m.targets_.data(), m.size()));
        m.weights_ = std::move(sol.weights);
        m.quad_ = sol.quad;
        return m;
    }

    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(inputs_.size()); }
    const std::vector<double>& inputs() const noexcept { return inputs_; }
    const std::vector<double>& targets() const noexcept { return targets_; }
    const Kernel& kernel() const noexcept { return kernel_; }
    double noise_sigma() const noexcept { return noise_; }
    double input_scale() const noexcept { return scale_; }
    /// Lower-triangular factor of K + σ²I.
    Eigen::MatrixXd cholesky() const { return llt_.matrixL(); }
    /// (K + σ²I)⁻¹ y.
    const Eigen::VectorXd& alpha_weights() const noexcept { return weights_; }

    double k(double x, double y) const { return kernel_(x / scale_, y / scale_); }

    /// K + σ²I over the training inputs.
    Eigen::MatrixXd covariance() const {
        const auto n = size();
        Eigen::MatrixXd c(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) c(i, j) = c(j, i) = k(inputs_[i], inputs_[j]);
        c.diagonal().array() += noise_ * noise_;
        return c;
    }

    Posterior predict(double x) const {
        Eigen::VectorXd ks(size());
        for (Eigen::Index i = 0; i < size(); ++i) ks[i] = k(x, inputs_[i]);
        const Eigen::VectorXd v = llt_.matrixL().solve(ks);
        return {ks.dot(weights_), clamp_variance(k(x, x) - v.squaredNorm())};
    }

    double log_marginal_likelihood() const {
        return -0.5 * quad_ - 0.5 * detail::log_det(llt_) -
               0.5 * static_cast<double>(size()) * std::log(2 * std::numbers::pi);
    }

  private:
    GprModel() = default;
    std::vector<double> inputs_, targets_;
    Kernel kernel_;
    double noise_ = default_noise_sigma;
    double scale_ = default_input_scale;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd weights_;
    double quad_ = 0;
};

inline Posterior predict(const GprModel& m, double x) { return m.predict(x); }
inline double log_marginal_likelihood(const GprModel& m) { return m.log_marginal_likelihood(); }

struct FitOptions {
    BfgsOptions bfgs{};
    double input_scale = default_input_scale;
};

/// Log marginal likelihood of a single base kernel and its gradient with
/// respect to the log-hyperparameters. -inf where K + σ²I does not factor.
inline double lml_with_gradient(std::span<const double> xs, std::span<const double> ys, const KernelSpec& kernel,
                                double noise_sigma, Eigen::VectorXd* grad) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd c(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) c(i, j) = c(j, i) = kernel(xs[i], xs[j]);
    c.diagonal().array() += noise_sigma * noise_sigma;
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().minCoeff() > 0))
        return -std::numeric_limits<double>::infinity();
    const Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
    const auto sol = detail::refined_solve(llt, c, y);
    const Eigen::VectorXd& a = sol.weights;
    const double lml = -0.5 * sol.quad - 0.5 * detail::log_det(llt) - 0.5 * static_cast<double>(n) * std::log(2 * std::numbers::pi);
    if (grad) {
        // dL/dθ = ½ tr((aaᵀ − C⁻¹) dC/dθ)
        const Eigen::MatrixXd w = a * a.transpose() - llt.solve(Eigen::MatrixXd::Identity(n, n));
        grad->setZero(static_cast<Eigen::Index>(kernel.hyper.size()));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const auto dk = kernel.log_gradient(xs[i], xs[j]);
                for (std::size_t p = 0; p < dk.size(); ++p) (*grad)[static_cast<Eigen::Index>(p)] += 0.5 * w(i, j) * dk[p];
            }
    }
    return lml;
}

/// Start points for (log ι, log σ_f); extra shape parameters start at log 1.
inline constexpr std::array<std::array<double, 2>, 5> fit_seeds{{{0, 0}, {-2, -2}, {-2, 2}, {2, -2}, {2, 2}}};

/// Maximise the log marginal likelihood of one base-kernel family over its
/// log-hyperparameters; the best of the fixed starts wins.
inline GprModel fit(std::span<const double> inputs, std::span<const double> targets,
                    KernelBase family = KernelBase::gauss_unsquared, double noise_sigma = default_noise_sigma,
                    const FitOptions& opt = {}) {
    if (inputs.size() != targets.size()) throw dimension_error("fit: one target per input");
    if (inputs.size() < 2) throw dimension_error("fit: at least two training points required");
    detail::check_noise(noise_sigma);
    detail::check_scale(opt.input_scale);

    std::vector<double> xs(inputs.size());
    std::ranges::transform(inputs, xs.begin(), [&](double v) { return v / opt.input_scale; });
    const auto np = static_cast<Eigen::Index>(hyper_count(family));

    const auto spec_of = [&](const Eigen::VectorXd& p) {
        KernelSpec k{family, std::vector<double>(static_cast<std::size_t>(np))};
        for (Eigen::Index i = 0; i < np; ++i) k.hyper[static_cast<std::size_t>(i)] = std::exp(p[i]);
        return k;
    };
    const Objective neg_lml = [&](const Eigen::VectorXd& p, Eigen::VectorXd* g) {
        const double v = lml_with_gradient(xs, targets, spec_of(p), noise_sigma, g);
        if (g) *g = -*g;
        return -v;
    };

    BfgsResult best;
    for (const auto& seed : fit_seeds) {
        Eigen::VectorXd p0 = Eigen::VectorXd::Zero(np);
        p0[0] = seed[0];
        p0[1] = seed[1];
        auto r = bfgs_minimize(neg_lml, p0, opt.bfgs);
        if (std::isfinite(r.value) && r.value < best.value) best = std::move(r);
    }
    if (!std::isfinite(best.value)) throw fit_error("fit: covariance failed to factor from every start");
    return GprModel::condition({inputs.begin(), inputs.end()}, {targets.begin(), targets.end()}, spec_of(best.x),
                               noise_sigma, opt.input_scale);
}

} // namespace splitamg::gpr

#endif
