#ifndef SPLITAMG_ERROR_HPP
#define SPLITAMG_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace splitamg {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (non-square matrix, vector length mismatch).
class dimension_error : public error {
  public:
    using error::error;
};

/// Invalid argument value (negative shift, empty range, ...).
class config_error : public error {
  public:
    using error::error;
};

/// Iterative method stopped at its iteration cap. Carries the best iterate.
class convergence_error : public error {
  public:
    convergence_error(const std::string& what, std::vector<double> best, double residual,
                      std::size_t iterations)
        : error(what), best_(std::move(best)), residual_(residual), iterations_(iterations) {}

    const std::vector<double>& best_iterate() const noexcept { return best_; }
    double residual() const noexcept { return residual_; }
    std::size_t iterations() const noexcept { return iterations_; }

  private:
    std::vector<double> best_;
    double residual_;
    std::size_t iterations_;
};

/// Krylov recurrence hit a zero (or negative) curvature direction.
class breakdown_error : public error {
  public:
    using error::error;
};

/// Zero pivot during incomplete factorization.
class pivot_error : public error {
  public:
    pivot_error(const std::string& what, std::size_t row) : error(what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

  private:
    std::size_t row_;
};

/// An F point has strong couplings but no strong coarse neighbour to interpolate from.
class coarsening_error : public error {
  public:
    using error::error;
};

/// Multigrid iteration blew up. Carries the relative residual history.
class divergence_error : public error {
  public:
    divergence_error(const std::string& what, std::vector<double> history)
        : error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

  private:
    std::vector<double> history_;
};

/// Hyperparameter fitting could not produce a positive-definite covariance.
class fit_error : public error {
  public:
    using error::error;
};

} // namespace splitamg

#endif
