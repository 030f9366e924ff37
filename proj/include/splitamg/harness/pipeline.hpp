#ifndef SPLITAMG_HARNESS_PIPELINE_HPP
#define SPLITAMG_HARNESS_PIPELINE_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "../gpr/gpr.hpp"
#include "../gpr/multitask.hpp"
#include "../gpr/serialization.hpp"
#include "dataset.hpp"

namespace splitamg::harness {

enum class KernelChoice { gauss_unsquared, se, library };

inline KernelChoice parse_kernel_choice(const std::string& s) {
    if (s == "gauss-unsquared") return KernelChoice::gauss_unsquared;
    if (s == "se") return KernelChoice::se;
    if (s == "library") return KernelChoice::library;
    throw config_error("unknown kernel '" + s + "' (gauss-unsquared, se, library)");
}

inline std::string to_string(KernelChoice k) {
    switch (k) {
    case KernelChoice::gauss_unsquared: return "gauss-unsquared";
    case KernelChoice::se: return "se";
    case KernelChoice::library: return "library";
    }
    return "?";
}

/// Noise levels accepted when training from a dataset.
inline constexpr double min_train_noise = 1e-6;
inline constexpr double max_train_noise = 1e-2;

/// A fitted regressor plus what is needed to use its predictions.
struct TrainedModel {
    std::variant<gpr::GprModel, gpr::MtGprModel> model;
    /// "alpha" or "alpha","omega".
    std::vector<std::string> tasks;
    ProblemSpec problem = ProblemSpec::poisson();
    SolverSetup setup{};
    /// ω used when only α is regressed.
    double fixed_omega = 1.0;

    bool predicts_omega() const { return tasks.size() == 2; }
};

struct Prediction {
    std::size_t n = 0;
    double alpha = 0, omega = 0;
    double sigma_alpha = 0;
    std::optional<double> sigma_omega;
};

inline std::vector<std::string> parse_tasks(const std::string& s) {
    if (s == "alpha") return {"alpha"};
    if (s == "alpha,omega") return {"alpha", "omega"};
    throw config_error("tasks must be 'alpha' or 'alpha,omega', got '" + s + "'");
}

/// Single-task fit for {alpha}, multi-task library fit for {alpha, omega}.
inline TrainedModel train_model(const Dataset& data, const std::vector<std::string>& tasks, KernelChoice kernel,
                                double noise = gpr::default_noise_sigma) {
    if (!(noise >= min_train_noise && noise <= max_train_noise))
        throw config_error("train: noise must lie in [1e-6, 1e-2]");
    if (tasks != std::vector<std::string>{"alpha"} && tasks != std::vector<std::string>{"alpha", "omega"})
        throw config_error("train: tasks must be {alpha} or {alpha, omega}");
    const auto recs = data.usable();
    if (recs.size() < 3) throw config_error("train: dataset has fewer than 3 usable points");

    std::vector<double> xs, alphas, omegas;
    for (const auto& r : recs) {
        xs.push_back(static_cast<double>(r.n));
        alphas.push_back(r.alpha);
        omegas.push_back(r.omega);
    }
    const double fixed_omega = omegas.front();
    using Regressor = decltype(TrainedModel::model);
    const auto fitted = [&]() -> Regressor {
        if (tasks.size() == 2) {
            if (kernel != KernelChoice::library) throw config_error("train: a two-task fit needs --kernel library");
            return gpr::mt_fit(xs, {alphas, omegas}, {.noise_init = noise});
        }
        for (double w : omegas)
            if (w != fixed_omega) throw config_error("train: omega varies across the dataset; train {alpha, omega}");
        if (kernel == KernelChoice::library)
            return gpr::mt_fit(xs, {alphas}, {.noise_init = noise, .learn_noise = false});
        return gpr::fit(xs, alphas,
                        kernel == KernelChoice::se ? gpr::KernelBase::squared_exponential : gpr::KernelBase::gauss_unsquared,
                        noise);
    };
    TrainedModel out{fitted(), tasks, data.problem, data.grid.setup, fixed_omega};
    return out;
}

inline Prediction predict_params(const TrainedModel& m, std::size_t n) {
    Prediction p;
    p.n = n;
    p.omega = m.fixed_omega;
    const double x = static_cast<double>(n);
    if (const auto* st = std::get_if<gpr::GprModel>(&m.model)) {
        const auto a = st->predict(x);
        p.alpha = a.mean;
        p.sigma_alpha = a.sigma();
    } else {
        const auto& mt = std::get<gpr::MtGprModel>(m.model);
        const auto a = mt.predict(x, 0);
        p.alpha = a.mean;
        p.sigma_alpha = a.sigma();
        if (m.predicts_omega()) {
            const auto w = mt.predict(x, 1);
            p.omega = w.mean;
            p.sigma_omega = w.sigma();
        }
    }
    return p;
}

inline nlohmann::json to_json(const TrainedModel& m) {
    auto j = std::visit([](const auto& g) { return gpr::to_json(g); }, m.model);
    j["tasks"] = m.tasks;
    j["problem"] = problem_json(m.problem);
    j["solver"] = to_json(m.setup);
    j["fixed_omega"] = m.fixed_omega;
    return j;
}

inline TrainedModel trained_model_from_json(const nlohmann::json& j) {
    TrainedModel m{gpr::is_multitask_json(j) ? decltype(TrainedModel::model){gpr::mt_from_json(j)}
                                             : decltype(TrainedModel::model){gpr::gpr_from_json(j)},
                   j.at("tasks").get<std::vector<std::string>>(), problem_from_json(j.at("problem")),
                   setup_from_json(j.at("solver")), j.value("fixed_omega", 1.0)};
    const std::size_t outputs =
        gpr::is_multitask_json(j) ? std::get<gpr::MtGprModel>(m.model).task_count() : std::size_t{1};
    if (m.tasks.size() != outputs) throw config_error("model: task list does not match the regressor");
    return m;
}

struct PredictionRow {
    Prediction params;
    /// Present when a solve was requested.
    std::optional<SweepRecord> solve;
};

/// Predict (α, ω) at each n and, optionally, solve with them. Solver failures flag the row.
inline std::vector<PredictionRow> predict_and_solve(const TrainedModel& m, const std::vector<std::size_t>& ns,
                                                    bool solve = true) {
    std::vector<PredictionRow> rows;
    for (auto n : ns) {
        PredictionRow row{predict_params(m, n), std::nullopt};
        if (solve) {
            SweepRecord rec{n, row.params.alpha, row.params.omega, m.setup.solve.max_cycles, false, 0, 0, {}};
            try {
                const auto sys = assemble(m.problem, n);
                const auto base = AmgHierarchy::setup(sys.matrix, m.setup.coarsening,
                                                      m.setup.smoother_config(row.params.alpha, row.params.omega));
                rec = run_point(base, sys.rhs, n, row.params.alpha, row.params.omega, m.setup);
            } catch (const error& e) {
                rec.failure = e.what();
            }
            row.solve = rec;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct CompareRow {
    SweepRecord pgadi;
    SweepRecord hss;
};

/// PGADI-HS parameters for a given n.
using ParameterSource = std::function<std::pair<double, double>(std::size_t n)>;

/// Parameters from a fresh sweep over `grid` at each n.
inline ParameterSource swept_parameters(const SweepGrid& grid) {
    return [grid](std::size_t n) {
        auto g = grid;
        g.n = n;
        const auto best = sweep(g).best;
        return std::pair{best.alpha, best.omega};
    };
}

inline ParameterSource predicted_parameters(const TrainedModel& m) {
    return [m](std::size_t n) {
        const auto p = predict_params(m, n);
        return std::pair{p.alpha, p.omega};
    };
}

/// PGADI-HS with the given parameters against HSS with α = √(λ_min λ_max) of H.
/// Both share one hierarchy per n.
inline std::vector<CompareRow> compare_smoothers(const ProblemSpec& problem, const std::vector<std::size_t>& ns,
                                                 const ParameterSource& params, const SolverSetup& setup) {
    std::vector<CompareRow> rows;
    for (auto n : ns) {
        CompareRow row;
        row.pgadi = {n, 0, 0, setup.solve.max_cycles, false, 0, 0, {}};
        row.hss = row.pgadi;
        try {
            const auto sys = assemble(problem, n);
            const auto [alpha, omega] = params(n);
            auto pg = setup;
            pg.smoother = SmootherKind::pgadi_hs;
            const auto base = AmgHierarchy::setup(sys.matrix, setup.coarsening, pg.smoother_config(alpha, omega));
            row.pgadi = run_point(base, sys.rhs, n, alpha, omega, pg);

            auto hs = setup;
            hs.smoother = SmootherKind::hss;
            const double ha = hss_optimal_alpha(base.level(0).splitting.h);
            row.hss = run_point(base, sys.rhs, n, ha, 1.0, hs);
        } catch (const error& e) {
            if (row.pgadi.failure.empty() && !row.pgadi.converged) row.pgadi.failure = e.what();
            row.hss.failure = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace splitamg::harness

#endif
