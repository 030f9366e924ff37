#ifndef SPLITAMG_SPECTRAL_HPP
#define SPLITAMG_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>

#include "sparse.hpp"

namespace splitamg {

struct SpectralEstimate {
    double lambda_min = 0;
    double lambda_max = 0;
    std::size_t iterations_used = 0;
    /// Larger of the two final ||h v - lambda v|| values.
    double residual = 0;
};

struct SpectralConfig {
    double tol = 1e-8;
    std::size_t max_iters = 20000;
};

namespace detail {

struct PowerResult {
    double lambda;
    double residual;
    std::size_t iterations;
    bool converged;
};

/// Power iteration on v -> scale*h*v + shift*v, with a fixed-seed start vector.
/// Stops once the extrapolated remaining change of the Rayleigh quotient,
/// assuming geometric convergence, drops below tol relative to its magnitude.
inline PowerResult power_iteration(const CsrMatrix& h, double scale, double shift, const SpectralConfig& cfg) {
    const std::size_t n = h.rows();
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    Vector v(n), w(n);
    for (auto& x : v) x = unif(rng);
    double nv = norm2(v);
    for (auto& x : v) x /= nv;

    auto apply = [&](const Vector& in, Vector& out) {
        spmv(h, in, out);
        for (std::size_t i = 0; i < n; ++i) out[i] = scale * out[i] + shift * in[i];
    };

    double rho = 0, prev_delta = 0;
    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
        apply(v, w);
        const double rho_new = dot(v, w);
        double res = 0;
        for (std::size_t i = 0; i < n; ++i) res += (w[i] - rho_new * v[i]) * (w[i] - rho_new * v[i]);
        res = std::sqrt(res);

        const double nw = norm2(w);
        const double delta = std::abs(rho_new - rho);
        rho = rho_new;
        if (nw == 0.0) return {0.0, 0.0, it, true};
        const double magnitude = std::max(std::abs(rho), 1e-300);
        if (res <= cfg.tol * magnitude) return {rho, res, it, true};
        if (it > 2 && prev_delta > 0) {
            const double q = delta / prev_delta;
            if (q < 1 && delta * q / (1 - q) <= cfg.tol * magnitude) return {rho, res, it, true};
        }
        prev_delta = delta;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    }
    apply(v, w);
    rho = dot(v, w);
    double res = 0;
    for (std::size_t i = 0; i < n; ++i) res += (w[i] - rho * v[i]) * (w[i] - rho * v[i]);
    return {rho, std::sqrt(res), cfg.max_iters, false};
}

} // namespace detail

/// Extreme eigenvalues of a symmetric matrix: the largest by power iteration,
/// the smallest by power iteration on lambda_max*I - h.
/// Throws convergence_error with best_iterate() = {lambda_min, lambda_max}
/// when either estimate misses the tolerance within max_iters.
inline SpectralEstimate extreme_eigs(const CsrMatrix& h, const SpectralConfig& cfg = {}) {
    if (!h.is_square()) throw dimension_error("extreme_eigs: matrix must be square");
    if (h.rows() == 0) throw dimension_error("extreme_eigs: empty matrix");
    if (!(cfg.tol > 0) || cfg.max_iters < 1) throw config_error("extreme_eigs: bad tolerance or iteration cap");

    const auto top = detail::power_iteration(h, 1.0, 0.0, cfg);
    // Power iteration converges to the eigenvalue of largest magnitude; for an
    // indefinite h that may be the negative end, so shift it away.
    auto hi = top;
    if (top.lambda < 0) {
        const auto shifted_top = detail::power_iteration(h, 1.0, -top.lambda, cfg);
        hi = {shifted_top.lambda + top.lambda, shifted_top.residual, top.iterations + shifted_top.iterations,
              top.converged && shifted_top.converged};
    }
    const auto low = detail::power_iteration(h, -1.0, hi.lambda, cfg);

    SpectralEstimate out{hi.lambda - low.lambda, hi.lambda, hi.iterations + low.iterations,
                         std::max(hi.residual, low.residual)};
    if (!hi.converged || !low.converged)
        throw convergence_error("extreme_eigs: power iteration did not reach tol " + std::to_string(cfg.tol),
                                {out.lambda_min, out.lambda_max}, out.residual, out.iterations_used);
    return out;
}

inline SpectralEstimate extreme_eigs(const CsrMatrix& h, double tol) {
    SpectralConfig cfg;
    cfg.tol = tol;
    return extreme_eigs(h, cfg);
}

} // namespace splitamg

#endif
