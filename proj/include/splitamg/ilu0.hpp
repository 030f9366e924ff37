#ifndef SPLITAMG_ILU0_HPP
#define SPLITAMG_ILU0_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sparse.hpp"

namespace splitamg {

/// Incomplete LU factorization with zero fill-in.
///
/// L (unit lower) and U share the sparsity pattern of the source matrix and are
/// stored together: strictly-lower entries hold L, the rest holds U.
class Ilu0 {
  public:
    explicit Ilu0(const CsrMatrix& a) : lu_(a) {
        if (!a.is_square()) throw dimension_error("ilu0: matrix must be square");
        const std::size_t n = a.rows();
        diag_.assign(n, CsrMatrix::npos);
        for (std::size_t i = 0; i < n; ++i) {
            diag_[i] = lu_.find(i, i);
            if (diag_[i] == CsrMatrix::npos)
                throw pivot_error("ilu0: missing diagonal in row " + std::to_string(i), i);
        }

        auto val = lu_.mutable_values();
        std::vector<std::size_t> pos(n, CsrMatrix::npos);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t rb = lu_.row_begin(i), re = lu_.row_end(i);
            for (std::size_t k = rb; k < re; ++k) pos[lu_.col(k)] = k;

            for (std::size_t k = rb; k < re && lu_.col(k) < i; ++k) {
                const std::size_t p = lu_.col(k);
                const double pivot = val[diag_[p]];
                if (pivot == 0.0 || !std::isfinite(pivot))
                    throw pivot_error("ilu0: zero pivot in row " + std::to_string(p), p);
                val[k] /= pivot;
                const double lik = val[k];
                for (std::size_t q = diag_[p] + 1; q < lu_.row_end(p); ++q) {
                    const std::size_t target = pos[lu_.col(q)];
                    if (target != CsrMatrix::npos) val[target] -= lik * val[q];
                }
            }
            if (val[diag_[i]] == 0.0 || !std::isfinite(val[diag_[i]]))
                throw pivot_error("ilu0: zero pivot in row " + std::to_string(i), i);

            for (std::size_t k = rb; k < re; ++k) pos[lu_.col(k)] = CsrMatrix::npos;
        }
    }

    std::size_t dim() const noexcept { return lu_.rows(); }

    /// Solves L U z = r.
    Vector apply(std::span<const double> r) const {
        if (r.size() != dim()) throw dimension_error("ilu0 apply: length mismatch");
        const std::size_t n = dim();
        Vector z(r.begin(), r.end());
        for (std::size_t i = 0; i < n; ++i) {
            double s = z[i];
            for (std::size_t k = lu_.row_begin(i); k < diag_[i]; ++k) s -= lu_.value(k) * z[lu_.col(k)];
            z[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = z[ii];
            for (std::size_t k = diag_[ii] + 1; k < lu_.row_end(ii); ++k) s -= lu_.value(k) * z[lu_.col(k)];
            z[ii] = s / lu_.value(diag_[ii]);
        }
        return z;
    }

    /// Solves (L U)ᵀ z = r, i.e. Uᵀ then Lᵀ.
    Vector apply_transpose(std::span<const double> r) const {
        if (r.size() != dim()) throw dimension_error("ilu0 apply_transpose: length mismatch");
        const std::size_t n = dim();
        Vector y(r.begin(), r.end());
        for (std::size_t i = 0; i < n; ++i) {
            y[i] /= lu_.value(diag_[i]);
            const double yi = y[i];
            for (std::size_t k = diag_[i] + 1; k < lu_.row_end(i); ++k) y[lu_.col(k)] -= lu_.value(k) * yi;
        }
        for (std::size_t i = n; i-- > 0;) {
            const double zi = y[i];
            for (std::size_t k = lu_.row_begin(i); k < diag_[i]; ++k) y[lu_.col(k)] -= lu_.value(k) * zi;
        }
        return y;
    }

    /// Unit lower factor as a standalone matrix.
    CsrMatrix lower() const {
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < dim(); ++i) {
            for (std::size_t k = lu_.row_begin(i); k < diag_[i]; ++k) t.push_back({i, lu_.col(k), lu_.value(k)});
            t.push_back({i, i, 1.0});
        }
        return CsrMatrix::from_triplets(dim(), dim(), std::move(t));
    }

    CsrMatrix upper() const {
        std::vector<Triplet> t;
        for (std::size_t i = 0; i < dim(); ++i)
            for (std::size_t k = diag_[i]; k < lu_.row_end(i); ++k) t.push_back({i, lu_.col(k), lu_.value(k)});
        return CsrMatrix::from_triplets(dim(), dim(), std::move(t));
    }

  private:
    CsrMatrix lu_;
    std::vector<std::size_t> diag_;
};

} // namespace splitamg

#endif
