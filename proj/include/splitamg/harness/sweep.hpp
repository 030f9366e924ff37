#ifndef SPLITAMG_HARNESS_SWEEP_HPP
#define SPLITAMG_HARNESS_SWEEP_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "../amg/hierarchy.hpp"
#include "../error.hpp"
#include "../model_problems.hpp"
#include "../smoothers.hpp"

namespace splitamg::harness {

/// Closed grid lo, lo+step, ..., ≤ hi. A half-open (0, hi] interval is written with lo = step.
struct Range {
    double lo = 0, hi = 0, step = 1;

    static Range single(double v) { return {v, v, 1.0}; }

    /// "lo:hi:step", or a single value.
    static Range parse(const std::string& s) {
        std::vector<double> parts;
        std::size_t start = 0;
        try {
            while (true) {
                const auto colon = s.find(':', start);
                std::size_t used = 0;
                const std::string tok = s.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
                parts.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw config_error("range: trailing characters in '" + s + "'");
                if (colon == std::string::npos) break;
                start = colon + 1;
            }
        } catch (const std::logic_error&) {
            throw config_error("range: cannot parse '" + s + "' (expected lo:hi:step)");
        }
        Range r;
        if (parts.size() == 1) r = single(parts[0]);
        else if (parts.size() == 3) r = {parts[0], parts[1], parts[2]};
        else throw config_error("range: expected lo:hi:step, got '" + s + "'");
        r.validate();
        return r;
    }

    void validate() const {
        if (!(step > 0) || !std::isfinite(lo) || !std::isfinite(hi)) throw config_error("range: step must be positive");
        if (hi < lo) throw config_error("range: hi below lo");
    }

    std::size_t count() const {
        validate();
        return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    }

    /// Grid values, rounded to 12 significant digits so 0.001·k prints as typed.
    std::vector<double> values() const {
        std::vector<double> v;
        const auto n = count();
        v.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.12g", lo + static_cast<double>(k) * step);
            v.push_back(std::strtod(buf, nullptr));
        }
        return v;
    }

    std::string str() const;
};

inline std::string format_number(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

inline std::string Range::str() const { return format_number(lo) + ":" + format_number(hi) + ":" + format_number(step); }

inline nlohmann::json to_json(const Range& r) { return {{"lo", r.lo}, {"hi", r.hi}, {"step", r.step}}; }
inline Range range_from_json(const nlohmann::json& j) {
    Range r{j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("step").get<double>()};
    r.validate();
    return r;
}

/// Solver settings shared by every point of a sweep.
struct SolverSetup {
    SmootherKind smoother = SmootherKind::pgadi_hs;
    PreconditionerKind precond = PreconditionerKind::identity;
    CoarseningConfig coarsening{};
    SolveOptions solve{};
    KrylovConfig inner{};

    SmootherConfig smoother_config(double alpha, double omega) const {
        SmootherConfig c;
        c.kind = smoother;
        c.alpha = alpha;
        c.omega = omega;
        c.inner = inner;
        c.precond = precond;
        return c;
    }
};

/// Preconditioner used for a problem kind unless overridden: ILU(0) for convection-diffusion.
inline PreconditionerKind default_precond(ProblemKind k) {
    return k == ProblemKind::convdiff ? PreconditionerKind::ilu0 : PreconditionerKind::identity;
}

struct SweepGrid {
    ProblemSpec problem = ProblemSpec::poisson();
    std::size_t n = 16;
    Range alpha{0.001, 0.1, 0.001};
    Range omega = Range::single(1.0);
    SolverSetup setup{};
    /// Worker threads; 0 means one per hardware thread.
    unsigned threads = 0;
};

/// Standard traversal grid for each problem kind.
inline SweepGrid default_grid(ProblemKind kind, std::size_t n) {
    SweepGrid g;
    g.problem = ProblemSpec::of_kind(kind);
    g.n = n;
    g.setup.precond = default_precond(kind);
    switch (kind) {
    case ProblemKind::poisson:
        // ω fixed from a coarse traversal; 1.0 is the optimum for this smoother form.
        g.alpha = {0.001, 0.1, 0.001};
        g.omega = Range::single(1.0);
        break;
    case ProblemKind::reaction:
        g.alpha = {0.01, 1.0, 0.01};
        g.omega = {0.55, 1.5, 0.05};
        break;
    case ProblemKind::convdiff:
        g.alpha = {0.01, 0.8, 0.01};
        g.omega = {0.85, 1.8, 0.05};
        break;
    }
    return g;
}

struct SweepRecord {
    std::size_t n = 0;
    double alpha = 0, omega = 0;
    /// max_cycles when not converged.
    std::size_t iterations = 0;
    bool converged = false;
    double wall_ms = 0;
    /// Krylov iterations inside the smoothers; deterministic, unlike wall_ms.
    std::size_t inner_iterations = 0;
    /// Empty on success; otherwise why the solve stopped.
    std::string failure;
};

/// Order used to pick the best record: iterations, then inner work, then α, then ω.
inline bool better(const SweepRecord& a, const SweepRecord& b) {
    if (a.converged != b.converged) return a.converged;
    return std::tie(a.iterations, a.inner_iterations, a.alpha, a.omega) <
           std::tie(b.iterations, b.inner_iterations, b.alpha, b.omega);
}

inline nlohmann::json to_json(const SweepRecord& r) {
    nlohmann::json j{{"n", r.n},
                     {"alpha", r.alpha},
                     {"omega", r.omega},
                     {"iterations", r.iterations},
                     {"converged", r.converged},
                     {"wall_ms", r.wall_ms},
                     {"inner_iterations", r.inner_iterations}};
    if (!r.failure.empty()) j["failure"] = r.failure;
    return j;
}

inline SweepRecord record_from_json(const nlohmann::json& j) {
    SweepRecord r;
    r.n = j.at("n").get<std::size_t>();
    r.alpha = j.at("alpha").get<double>();
    r.omega = j.at("omega").get<double>();
    r.iterations = j.at("iterations").get<std::size_t>();
    r.converged = j.at("converged").get<bool>();
    r.wall_ms = j.value("wall_ms", 0.0);
    r.inner_iterations = j.value("inner_iterations", std::size_t{0});
    r.failure = j.value("failure", std::string{});
    return r;
}

/// One solve with a prepared hierarchy. Solver failures become a flagged record.
inline SweepRecord run_point(const AmgHierarchy& base, std::span<const double> b, std::size_t n, double alpha,
                             double omega, const SolverSetup& setup) {
    SweepRecord rec{n, alpha, omega, setup.solve.max_cycles, false, 0, 0, {}};
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto h = base.with_smoother(setup.smoother_config(alpha, omega));
        const auto res = h.solve(b, setup.solve);
        rec.converged = res.report.converged;
        rec.iterations = res.report.converged ? res.report.iterations : setup.solve.max_cycles;
        rec.inner_iterations = res.report.inner_iterations;
        if (!rec.converged) rec.failure = "cycle cap reached";
    } catch (const divergence_error& e) {
        rec.failure = std::string("diverged: ") + e.what();
    } catch (const error& e) {
        rec.failure = e.what();
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

class sweep_failure : public error {
  public:
    sweep_failure(const std::string& what, std::vector<SweepRecord> records)
        : error(what), records_(std::move(records)) {}
    const std::vector<SweepRecord>& records() const noexcept { return records_; }

  private:
    std::vector<SweepRecord> records_;
};

struct SweepResult {
    SweepRecord best;
    /// Grid order: α outer, ω inner.
    std::vector<SweepRecord> all;
};

/// Runs fn(i) for i in [0, count) on `threads` workers.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
}

/// Assemble once, build the hierarchy once, then solve at every grid point.
inline SweepResult sweep(const SweepGrid& grid) {
    const auto alphas = grid.alpha.values();
    const auto omegas = grid.omega.values();
    const auto sys = assemble(grid.problem, grid.n);
    const auto base = AmgHierarchy::setup(sys.matrix, grid.setup.coarsening,
                                          grid.setup.smoother_config(alphas.front(), omegas.front()));

    SweepResult out;
    out.all.resize(alphas.size() * omegas.size());
    parallel_for(out.all.size(), grid.threads, [&](std::size_t i) {
        out.all[i] = run_point(base, sys.rhs, grid.n, alphas[i / omegas.size()], omegas[i % omegas.size()], grid.setup);
    });

    out.best = *std::ranges::min_element(out.all, better);
    if (!out.best.converged)
        throw sweep_failure("sweep: no grid point converged for n = " + std::to_string(grid.n), out.all);
    return out;
}

} // namespace splitamg::harness

#endif
