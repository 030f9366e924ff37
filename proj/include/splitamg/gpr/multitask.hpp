#ifndef SPLITAMG_GPR_MULTITASK_HPP
#define SPLITAMG_GPR_MULTITASK_HPP

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "gpr.hpp"

namespace splitamg::gpr {

/// Everything that fixes a multi-task covariance apart from the data.
struct MtHyper {
    Eigen::MatrixXd task_cov;   // M×M, symmetric PSD
    LibraryShape shape;         // shared by the library kernels
    std::vector<double> noise;  // per-task σ_l
    Eigen::MatrixXd weights;    // M×N, non-negative

    void validate(std::size_t library_size) const {
        const auto m = task_cov.rows();
        if (m < 1 || task_cov.cols() != m) throw dimension_error("mt: task covariance must be square");
        if ((task_cov - task_cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + task_cov.cwiseAbs().maxCoeff()))
            throw config_error("mt: task covariance must be symmetric");
        if (noise.size() != static_cast<std::size_t>(m)) throw dimension_error("mt: one noise level per task");
        for (double s : noise) detail::check_noise(s);
        if (weights.rows() != m || weights.cols() != static_cast<Eigen::Index>(library_size))
            throw dimension_error("mt: weights must be tasks × library size");
        if ((weights.array() < 0).any()) throw config_error("mt: weights must be non-negative");
        for (Eigen::Index l = 0; l < m; ++l)
            if (!(weights.row(l).maxCoeff() > 0)) throw config_error("mt: all weights of a task are zero");
    }
};

/// Multi-output GP. Task l uses the kernel K^t_ll Σ_ξ c_lξ k_ξ; the cross
/// covariance of tasks l, m is K^t_lm Σ_ξ √(c_lξ c_mξ) k_ξ. With equal weight
/// rows this is exactly K^t ⊗ K^x. Training vector is task-major.
class MtGprModel {
  public:
    static MtGprModel condition(std::vector<double> inputs, std::vector<std::vector<double>> targets, MtHyper hyper,
                                double input_scale = default_input_scale) {
        if (inputs.empty()) throw dimension_error("mt: no training data");
        for (const auto& row : targets)
            if (row.size() != inputs.size()) throw dimension_error("mt: every task needs one target per input");
        detail::check_scale(input_scale);
        MtGprModel m;
        m.library_ = default_library(hyper.shape);
        hyper.validate(m.library_.size());
        if (targets.size() != static_cast<std::size_t>(hyper.task_cov.rows()))
            throw dimension_error("mt: target rows must match the task count");
        m.inputs_ = std::move(inputs);
        m.targets_ = std::move(targets);
        m.hyper_ = std::move(hyper);
        m.scale_ = input_scale;
        const Eigen::MatrixXd c = m.covariance();
        m.llt_ = detail::factor(c, "mt");
        auto sol = detail::refined_solve(m.llt_, c, m.stacked_targets());
        m.weights_vec_ = std::move(sol.weights);
        m.quad_ = sol.quad;
        return m;
    }

    std::size_t task_count() const noexcept { return targets_.size(); }
    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(inputs_.size()); }
    const std::vector<double>& inputs() const noexcept { return inputs_; }
    const std::vector<std::vector<double>>& targets() const noexcept { return targets_; }
    const MtHyper& hyper() const noexcept { return hyper_; }
    const std::vector<LibraryKernel>& library() const noexcept { return library_; }
    double input_scale() const noexcept { return scale_; }

    double cov(std::size_t l, std::size_t m, double x, double y) const {
        const auto li = static_cast<Eigen::Index>(l), mi = static_cast<Eigen::Index>(m);
        const double kt = hyper_.task_cov(li, mi);
        if (kt == 0.0) return 0.0;
        double s = 0;
        for (std::size_t xi = 0; xi < library_.size(); ++xi) {
            const auto c = static_cast<Eigen::Index>(xi);
            const double w = l == m ? hyper_.weights(li, c) : std::sqrt(hyper_.weights(li, c) * hyper_.weights(mi, c));
            if (w != 0.0) s += w * library_[xi](x / scale_, y / scale_);
        }
        return kt * s;
    }

    /// Σ = task-coupled covariance + D ⊗ I.
    Eigen::MatrixXd covariance() const {
        const auto n = size();
        const auto mt = static_cast<Eigen::Index>(task_count());
        Eigen::MatrixXd c(mt * n, mt * n);
        for (Eigen::Index l = 0; l < mt; ++l)
            for (Eigen::Index m = 0; m <= l; ++m)
                for (Eigen::Index i = 0; i < n; ++i)
                    for (Eigen::Index j = 0; j < n; ++j) {
                        const double v = cov(static_cast<std::size_t>(l), static_cast<std::size_t>(m), inputs_[i], inputs_[j]);
                        c(l * n + i, m * n + j) = v;
                        c(m * n + j, l * n + i) = v;
                    }
        for (Eigen::Index l = 0; l < mt; ++l) {
            const double s = hyper_.noise[static_cast<std::size_t>(l)];
            c.diagonal().segment(l * n, n).array() += s * s;
        }
        return c;
    }

    Posterior predict(double x, std::size_t task) const {
        if (task >= task_count()) throw dimension_error("mt_predict: task index out of range");
        const auto n = size();
        Eigen::VectorXd ks(n * static_cast<Eigen::Index>(task_count()));
        for (std::size_t m = 0; m < task_count(); ++m)
            for (Eigen::Index i = 0; i < n; ++i) ks[static_cast<Eigen::Index>(m) * n + i] = cov(task, m, x, inputs_[i]);
        const Eigen::VectorXd v = llt_.matrixL().solve(ks);
        return {ks.dot(weights_vec_), clamp_variance(cov(task, task, x, x) - v.squaredNorm())};
    }

    double log_marginal_likelihood() const {
        return -0.5 * quad_ - 0.5 * detail::log_det(llt_) -
               0.5 * static_cast<double>(weights_vec_.size()) * std::log(2 * std::numbers::pi);
    }

  private:
    MtGprModel() = default;

    Eigen::VectorXd stacked_targets() const {
        const auto n = size();
        Eigen::VectorXd y(n * static_cast<Eigen::Index>(task_count()));
        for (std::size_t l = 0; l < task_count(); ++l)
            y.segment(static_cast<Eigen::Index>(l) * n, n) = Eigen::Map<const Eigen::VectorXd>(targets_[l].data(), n);
        return y;
    }

    std::vector<double> inputs_;
    std::vector<std::vector<double>> targets_;
    MtHyper hyper_;
    std::vector<LibraryKernel> library_;
    double scale_ = default_input_scale;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd weights_vec_;
    double quad_ = 0;
};

inline Posterior mt_predict(const MtGprModel& m, double x, std::size_t task) { return m.predict(x, task); }

struct MtFitOptions {
    BfgsOptions bfgs{};
    double input_scale = default_input_scale;
    double noise_init = default_noise_sigma;
    bool learn_noise = true;
    // Learned noise stays inside this band.
    double noise_min = 1e-6;
    double noise_max = 1e-2;
};

namespace detail {

/// Packs K^t's Cholesky factor (log diagonal), the library shape, per-task
/// log noise (when learned) and log weights into one vector.
struct MtLayout {
    Eigen::Index tasks = 1, library = 10;
    bool learn_noise = true;

    Eigen::Index chol_count() const { return tasks * (tasks + 1) / 2; }
    Eigen::Index shape_offset() const { return chol_count(); }
    Eigen::Index noise_offset() const { return shape_offset() + 3; }
    Eigen::Index weight_offset() const { return noise_offset() + (learn_noise ? tasks : 0); }
    Eigen::Index size() const { return weight_offset() + tasks * library; }

    MtHyper unpack(const Eigen::VectorXd& p, double fixed_noise) const {
        MtHyper h;
        Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(tasks, tasks);
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < tasks; ++i)
            for (Eigen::Index j = 0; j <= i; ++j, ++k) lower(i, j) = i == j ? std::exp(p[k]) : p[k];
        h.task_cov = lower * lower.transpose();
        h.shape = {std::exp(p[shape_offset()]), std::exp(p[shape_offset() + 1]), std::exp(p[shape_offset() + 2])};
        h.noise.assign(static_cast<std::size_t>(tasks), fixed_noise);
        if (learn_noise)
            for (Eigen::Index l = 0; l < tasks; ++l) h.noise[static_cast<std::size_t>(l)] = std::exp(p[noise_offset() + l]);
        h.weights.resize(tasks, library);
        for (Eigen::Index l = 0; l < tasks; ++l)
            for (Eigen::Index c = 0; c < library; ++c) h.weights(l, c) = std::exp(p[weight_offset() + l * library + c]);
        return h;
    }
};

} // namespace detail

/// Maximise the multi-task log marginal likelihood with finite-difference
/// gradients. Starts differ in the shared length scale.
inline MtGprModel mt_fit(std::span<const double> inputs, const std::vector<std::vector<double>>& targets,
                         const MtFitOptions& opt = {}) {
    if (targets.empty()) throw dimension_error("mt_fit: at least one task required");
    if (inputs.size() < 2) throw dimension_error("mt_fit: at least two training points required");
    for (const auto& row : targets)
        if (row.size() != inputs.size()) throw dimension_error("mt_fit: every task needs one target per input");
    detail::check_noise(opt.noise_init);
    detail::check_scale(opt.input_scale);

    const detail::MtLayout layout{static_cast<Eigen::Index>(targets.size()),
                                  static_cast<Eigen::Index>(default_library().size()), opt.learn_noise};
    const std::vector<double> xs(inputs.begin(), inputs.end());

    const auto lml = [&](const Eigen::VectorXd& p) {
        try {
            return MtGprModel::condition(xs, targets, layout.unpack(p, opt.noise_init), opt.input_scale)
                .log_marginal_likelihood();
        } catch (const error&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    const std::function<double(const Eigen::VectorXd&)> neg = [&](const Eigen::VectorXd& p) { return -lml(p); };
    const Objective obj = [&](const Eigen::VectorXd& p, Eigen::VectorXd* g) {
        const double v = neg(p);
        if (g && std::isfinite(v)) *g = finite_difference_gradient(neg, p);
        return v;
    };

    BfgsOptions bfgs = opt.bfgs;
    bfgs.lower_bounds = Eigen::VectorXd::Constant(layout.size(), bfgs.lower);
    bfgs.upper_bounds = Eigen::VectorXd::Constant(layout.size(), bfgs.upper);
    if (opt.learn_noise) {
        bfgs.lower_bounds.segment(layout.noise_offset(), layout.tasks).setConstant(std::log(opt.noise_min));
        bfgs.upper_bounds.segment(layout.noise_offset(), layout.tasks).setConstant(std::log(opt.noise_max));
    }

    BfgsResult best;
    for (double log_length : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        Eigen::VectorXd p0 = Eigen::VectorXd::Zero(layout.size());
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < layout.tasks; ++i)
            for (Eigen::Index j = 0; j <= i; ++j, ++k) {
                if (i != j) continue;
                // Start each task's amplitude at its RMS target.
                double ms = 0;
                for (double y : targets[static_cast<std::size_t>(i)]) ms += y * y;
                p0[k] = 0.5 * std::log(std::max(ms / static_cast<double>(xs.size()), 1e-12));
            }
        p0[layout.shape_offset()] = log_length;
        if (opt.learn_noise)
            p0.segment(layout.noise_offset(), layout.tasks)
                .setConstant(std::log(std::clamp(opt.noise_init, opt.noise_min, opt.noise_max)));
        p0.segment(layout.weight_offset(), layout.tasks * layout.library)
            .setConstant(-std::log(static_cast<double>(layout.library)));
        auto r = bfgs_minimize(obj, p0, bfgs);
        if (std::isfinite(r.value) && r.value < best.value) best = std::move(r);
    }
    if (!std::isfinite(best.value)) throw fit_error("mt_fit: covariance failed to factor from every start");
    return MtGprModel::condition(xs, targets, layout.unpack(best.x, opt.noise_init), opt.input_scale);
}

} // namespace splitamg::gpr

#endif
