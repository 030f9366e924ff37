#ifndef SPLITAMG_GPR_OPTIMIZER_HPP
#define SPLITAMG_GPR_OPTIMIZER_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace splitamg::gpr {

/// Objective to minimise. Fills `grad` when non-null; returns +inf where undefined.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct BfgsOptions {
    int max_iters = 200;
    double grad_tol = 1e-6;
    double value_tol = 1e-12;
    // Box on every coordinate (log-parameters); per-coordinate bounds override when sized.
    double lower = -12.0;
    double upper = 12.0;
    Eigen::VectorXd lower_bounds;
    Eigen::VectorXd upper_bounds;
};

struct BfgsResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Central differences, step 1e-6 relative to the coordinate (absolute near zero).
inline Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                                  const Eigen::VectorXd& x, double rel_step = 1e-6) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = rel_step * std::max(1.0, std::abs(x[i]));
        probe[i] = x[i] + h;
        const double fp = f(probe);
        probe[i] = x[i] - h;
        const double fm = f(probe);
        probe[i] = x[i];
        g[i] = (fp - fm) / (2 * h);
        if (!std::isfinite(g[i])) g[i] = 0.0;
    }
    return g;
}

/// BFGS with a projected backtracking (Armijo) line search.
inline BfgsResult bfgs_minimize(const Objective& obj, Eigen::VectorXd x, const BfgsOptions& opt = {}) {
    const auto n = x.size();
    const auto project = [&](Eigen::VectorXd v) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double lo = opt.lower_bounds.size() == n ? opt.lower_bounds[i] : opt.lower;
            const double hi = opt.upper_bounds.size() == n ? opt.upper_bounds[i] : opt.upper;
            v[i] = std::clamp(v[i], lo, hi);
        }
        return v;
    };
    x = project(std::move(x));

    BfgsResult res;
    Eigen::VectorXd g(n);
    double f = obj(x, &g);
    res.x = x;
    res.value = f;
    if (!std::isfinite(f)) return res;

    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
    for (int it = 0; it < opt.max_iters; ++it) {
        res.iterations = it + 1;
        if (g.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd dir = -hinv * g;
        if (g.dot(dir) >= 0) { // lost descent: restart from steepest descent
            hinv.setIdentity();
            dir = -g;
        }

        double t = 1.0;
        Eigen::VectorXd xn, gn(n);
        double fn = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            xn = project(x + t * dir);
            const double decrease = g.dot(xn - x);
            if (decrease >= 0 && (xn - x).norm() > 0) continue;
            fn = obj(xn, &gn);
            if (std::isfinite(fn) && fn <= f + 1e-4 * decrease) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            res.converged = g.lpNorm<Eigen::Infinity>() < std::sqrt(opt.grad_tol);
            break;
        }

        const Eigen::VectorXd s = xn - x, y = gn - g;
        const double sy = s.dot(y);
        const double df = f - fn;
        x = std::move(xn);
        g = gn;
        f = fn;
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
            hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        if (df <= opt.value_tol * std::max(1.0, std::abs(f))) {
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.value = f;
    return res;
}

} // namespace splitamg::gpr

#endif
