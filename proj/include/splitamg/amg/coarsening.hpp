#ifndef SPLITAMG_AMG_COARSENING_HPP
#define SPLITAMG_AMG_COARSENING_HPP

#include <algorithm>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "../sparse.hpp"

namespace splitamg {

/// Directed graph: strong(i) lists the nodes i strongly depends on.
class StrengthGraph {
  public:
    StrengthGraph() = default;
    StrengthGraph(std::size_t n, std::vector<std::size_t> ptr, std::vector<std::size_t> col)
        : n_(n), ptr_(std::move(ptr)), col_(std::move(col)) {
        if (ptr_.size() != n_ + 1) throw dimension_error("strength graph: bad offsets");
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t edges() const noexcept { return col_.size(); }
    std::span<const std::size_t> strong(std::size_t i) const {
        return std::span<const std::size_t>(col_).subspan(ptr_[i], ptr_[i + 1] - ptr_[i]);
    }
    bool depends_on(std::size_t i, std::size_t j) const {
        const auto s = strong(i);
        return std::binary_search(s.begin(), s.end(), j);
    }

    /// Reverse graph: influenced(j) lists the nodes that strongly depend on j.
    StrengthGraph transposed() const {
        std::vector<std::size_t> ptr(n_ + 1, 0), col(col_.size());
        for (auto c : col_) ++ptr[c + 1];
        for (std::size_t i = 0; i < n_; ++i) ptr[i + 1] += ptr[i];
        std::vector<std::size_t> next(ptr.begin(), ptr.end() - 1);
        for (std::size_t i = 0; i < n_; ++i)
            for (auto j : strong(i)) col[next[j]++] = i;
        return StrengthGraph(n_, std::move(ptr), std::move(col));
    }

  private:
    std::size_t n_ = 0;
    std::vector<std::size_t> ptr_{0};
    std::vector<std::size_t> col_;
};

/// Classical rule: j is strong for i iff -a_ij >= theta * max_{k != i}(-a_ik).
/// Positive couplings are never strong.
inline StrengthGraph strength_connections(const CsrMatrix& a, double theta) {
    if (!a.is_square()) throw dimension_error("strength: matrix must be square");
    if (!(theta > 0 && theta < 1)) throw config_error("strength: theta must lie in (0, 1)");
    const std::size_t n = a.rows();
    std::vector<std::size_t> ptr(n + 1, 0), col;
    col.reserve(a.nnz());
    for (std::size_t i = 0; i < n; ++i) {
        double peak = 0;
        for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k)
            if (a.col(k) != i) peak = std::max(peak, -a.value(k));
        if (peak > 0) {
            const double cut = theta * peak;
            for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k)
                if (a.col(k) != i && -a.value(k) >= cut) col.push_back(a.col(k));
        }
        ptr[i + 1] = col.size();
    }
    return StrengthGraph(n, std::move(ptr), std::move(col));
}

enum class PointType : unsigned char { F = 0, C = 1 };

using CfSplit = std::vector<PointType>;

/// First pass: greedy independent-set selection by the influence measure.
inline CfSplit rs_first_pass(const StrengthGraph& s) {
    const std::size_t n = s.size();
    const StrengthGraph st = s.transposed();
    enum : unsigned char { undecided, coarse, fine };
    std::vector<unsigned char> state(n, undecided);
    std::vector<long> measure(n);
    // Ordered by descending measure, then ascending index.
    std::set<std::pair<long, std::size_t>> queue;

    for (std::size_t i = 0; i < n; ++i) {
        measure[i] = static_cast<long>(st.strong(i).size());
        if (s.strong(i).empty() && st.strong(i).empty()) state[i] = fine;
        else queue.insert({-measure[i], i});
    }
    auto bump = [&](std::size_t k, long by) {
        if (state[k] != undecided) return;
        queue.erase({-measure[k], k});
        measure[k] += by;
        queue.insert({-measure[k], k});
    };

    while (!queue.empty()) {
        const auto [neg, i] = *queue.begin();
        if (-neg <= 0) break;
        queue.erase(queue.begin());
        state[i] = coarse;
        for (auto j : st.strong(i)) {
            if (state[j] != undecided) continue;
            queue.erase({-measure[j], j});
            state[j] = fine;
            for (auto k : s.strong(j)) bump(k, 1);
        }
        for (auto j : s.strong(i)) bump(j, -1);
    }

    // Leftovers have nobody undecided depending on them.
    for (const auto& [neg, i] : queue) {
        const auto deps = s.strong(i);
        const bool has_c = std::any_of(deps.begin(), deps.end(), [&](auto j) { return state[j] == coarse; });
        state[i] = has_c ? fine : coarse;
    }

    CfSplit out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = state[i] == coarse ? PointType::C : PointType::F;
    return out;
}

/// Second pass: every pair of strongly connected F points must share a strong
/// C point. Violations are repaired with a tentative promotion of the offending
/// neighbour, falling back to promoting the point itself.
inline void rs_second_pass(const StrengthGraph& s, CfSplit& cf) {
    const std::size_t n = s.size();
    if (cf.size() != n) throw dimension_error("rs_second_pass: split size mismatch");
    std::vector<std::size_t> mark(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (cf[i] != PointType::F) continue;
        for (auto j : s.strong(i))
            if (cf[j] == PointType::C) mark[j] = i;
        std::size_t tentative = n;
        bool promote_self = false;
        for (auto j : s.strong(i)) {
            if (cf[j] != PointType::F) continue;
            const auto dj = s.strong(j);
            const bool shared = std::any_of(dj.begin(), dj.end(), [&](auto k) { return mark[k] == i; });
            if (shared) continue;
            if (tentative != n) {
                promote_self = true;
                break;
            }
            tentative = j;
            mark[j] = i;
        }
        if (promote_self) cf[i] = PointType::C;
        else if (tentative != n) cf[tentative] = PointType::C;
        // Marks left on a withdrawn tentative point only refer to row i, which is done.
    }
}

inline CfSplit rs_coarsen(const StrengthGraph& s, bool second_pass = true) {
    CfSplit cf = rs_first_pass(s);
    if (second_pass) rs_second_pass(s, cf);
    return cf;
}

/// Checks the two splitting axioms. Returns an empty string when both hold,
/// otherwise a description of the first violation.
/// - every F point with strong dependencies has a strong C dependency;
/// - every strongly connected F pair (i depends on j) shares a strong C dependency.
inline std::string check_cf_axioms(const StrengthGraph& s, const CfSplit& cf, bool require_shared = true) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (cf[i] != PointType::F) continue;
        const auto di = s.strong(i);
        if (di.empty()) continue;
        if (std::none_of(di.begin(), di.end(), [&](auto j) { return cf[j] == PointType::C; }))
            return "F point " + std::to_string(i) + " has no strong C dependency";
        if (!require_shared) continue;
        for (auto j : di) {
            if (cf[j] != PointType::F) continue;
            const auto dj = s.strong(j);
            const bool shared = std::any_of(di.begin(), di.end(), [&](auto k) {
                return cf[k] == PointType::C && std::binary_search(dj.begin(), dj.end(), k);
            });
            if (!shared)
                return "F points " + std::to_string(i) + " and " + std::to_string(j) + " share no strong C point";
        }
    }
    return {};
}

inline std::size_t coarse_count(const CfSplit& cf) {
    return static_cast<std::size_t>(std::count(cf.begin(), cf.end(), PointType::C));
}

} // namespace splitamg

#endif
