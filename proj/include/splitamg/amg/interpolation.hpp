#ifndef SPLITAMG_AMG_INTERPOLATION_HPP
#define SPLITAMG_AMG_INTERPOLATION_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "../sparse.hpp"
#include "coarsening.hpp"

namespace splitamg {

enum class InterpolationMode { direct, standard };

inline std::string to_string(InterpolationMode m) { return m == InterpolationMode::direct ? "direct" : "standard"; }

/// Coarse index of every C point, npos for F points.
inline std::vector<std::size_t> coarse_numbering(const CfSplit& cf) {
    std::vector<std::size_t> idx(cf.size(), CsrMatrix::npos);
    std::size_t next = 0;
    for (std::size_t i = 0; i < cf.size(); ++i)
        if (cf[i] == PointType::C) idx[i] = next++;
    return idx;
}

/// Prolongation from the C points to all points. C rows copy their coarse
/// value; F rows without strong couplings stay empty.
inline CsrMatrix build_interpolation(const CsrMatrix& a, const StrengthGraph& s, const CfSplit& cf,
                                     InterpolationMode mode = InterpolationMode::direct) {
    const std::size_t n = a.rows();
    if (!a.is_square() || s.size() != n || cf.size() != n) throw dimension_error("interpolation: size mismatch");
    const auto cidx = coarse_numbering(cf);
    const std::size_t nc = coarse_count(cf);

    std::vector<Triplet> trips;
    trips.reserve(n * 4);
    // Per-row scratch: marks strong C dependencies of the current F row.
    std::vector<std::size_t> owner(n, CsrMatrix::npos);
    std::vector<double> weight(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        if (cf[i] == PointType::C) {
            trips.push_back({i, cidx[i], 1.0});
            continue;
        }
        const auto deps = s.strong(i);
        if (deps.empty()) continue;

        std::vector<std::size_t> cs;
        for (auto j : deps)
            if (cf[j] == PointType::C) {
                cs.push_back(j);
                owner[j] = i;
            }
        if (cs.empty())
            throw coarsening_error("interpolation: F point " + std::to_string(i) +
                                   " has strong couplings but no strong C neighbour");

        const double aii = a.diagonal(i);
        if (aii == 0.0) throw coarsening_error("interpolation: zero diagonal in row " + std::to_string(i));

        if (mode == InterpolationMode::direct) {
            double sum_all = 0, sum_c = 0;
            for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) {
                const auto j = a.col(k);
                if (j == i) continue;
                sum_all += a.value(k);
                if (owner[j] == i) sum_c += a.value(k);
            }
            if (sum_c == 0.0)
                throw coarsening_error("interpolation: vanishing strong C coupling in row " + std::to_string(i));
            const double scale = -sum_all / (sum_c * aii);
            for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) {
                const auto j = a.col(k);
                if (j != i && owner[j] == i) trips.push_back({i, cidx[j], scale * a.value(k)});
            }
        } else {
            // Weak couplings are lumped into the diagonal; strong F couplings
            // are spread over the C points shared with that neighbour, through
            // its negative couplings only (positive ones may cancel the sum).
            double diag = aii;
            for (auto j : cs) weight[j] = 0.0;
            for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) {
                const auto j = a.col(k);
                if (j == i) continue;
                const double aij = a.value(k);
                if (owner[j] == i) {
                    weight[j] += aij;
                } else if (cf[j] == PointType::F && s.depends_on(i, j)) {
                    double denom = 0;
                    for (std::size_t q = a.row_begin(j); q < a.row_end(j); ++q)
                        if (owner[a.col(q)] == i) denom += std::min(a.value(q), 0.0);
                    if (denom == 0.0) {
                        diag += aij;
                        continue;
                    }
                    for (std::size_t q = a.row_begin(j); q < a.row_end(j); ++q)
                        if (owner[a.col(q)] == i && a.value(q) < 0) weight[a.col(q)] += aij * a.value(q) / denom;
                } else {
                    diag += aij;
                }
            }
            if (diag == 0.0)
                throw coarsening_error("interpolation: lumped diagonal vanishes in row " + std::to_string(i));
            for (auto j : cs) trips.push_back({i, cidx[j], -weight[j] / diag});
        }
    }
    return CsrMatrix::from_triplets(n, nc, std::move(trips));
}

/// Coarse operator pᵀ a p; entries below 1e-300 in magnitude are dropped.
inline CsrMatrix galerkin_product(const CsrMatrix& a, const CsrMatrix& p) {
    if (!a.is_square() || p.rows() != a.rows()) throw dimension_error("galerkin: p.rows must equal a.dim");
    constexpr double drop = 1e-300;
    return multiply(transpose(p), multiply(a, p, drop), drop);
}

} // namespace splitamg

#endif
