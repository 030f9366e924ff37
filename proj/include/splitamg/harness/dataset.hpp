#ifndef SPLITAMG_HARNESS_DATASET_HPP
#define SPLITAMG_HARNESS_DATASET_HPP

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sweep.hpp"

namespace splitamg::harness {

/// Mesh-size schedules. Training uses train ∪ train2 ∪ retrain; test is informational.
struct Schedule {
    Range train{4, 160, 4};
    std::optional<Range> train2;
    std::optional<Range> retrain;
    std::optional<Range> test;

    static std::vector<std::size_t> sizes(const Range& r) {
        std::vector<std::size_t> out;
        for (double v : r.values()) {
            if (v < 0 || std::abs(v - std::round(v)) > 1e-9) throw config_error("schedule: mesh sizes must be whole numbers");
            out.push_back(static_cast<std::size_t>(std::llround(v)));
        }
        return out;
    }

    /// Sorted, duplicate-free sizes with the set each one belongs to (first listed wins).
    std::vector<std::pair<std::size_t, std::string>> training_sizes() const {
        std::vector<std::pair<std::size_t, std::string>> out;
        std::set<std::size_t> seen;
        const auto add = [&](const Range& r, const std::string& tag) {
            for (auto n : sizes(r))
                if (seen.insert(n).second) out.emplace_back(n, tag);
        };
        add(train, "train");
        if (train2) add(*train2, "train");
        if (retrain) add(*retrain, "retrain");
        std::ranges::sort(out);
        return out;
    }
};

/// Grid settings applied at every n of a dataset.
struct GridTemplate {
    Range alpha{0.001, 0.1, 0.001};
    Range omega = Range::single(1.0);
    SolverSetup setup{};
    unsigned threads = 0;

    static GridTemplate from(const SweepGrid& g) { return {g.alpha, g.omega, g.setup, g.threads}; }

    SweepGrid at(const ProblemSpec& problem, std::size_t n) const { return {problem, n, alpha, omega, setup, threads}; }
};

struct DatasetEntry {
    std::string set = "train";
    SweepRecord best;
    /// Empty when the sweep produced a converged optimum.
    std::string error;

    bool usable() const { return error.empty() && best.converged; }
};

struct Dataset {
    ProblemSpec problem = ProblemSpec::poisson();
    Schedule schedule{};
    GridTemplate grid{};
    std::vector<DatasetEntry> entries;

    std::vector<SweepRecord> usable() const {
        std::vector<SweepRecord> out;
        for (const auto& e : entries)
            if (e.usable()) out.push_back(e.best);
        return out;
    }
};

using ProgressFn = std::function<void(const DatasetEntry&)>;

/// Sweeps every training size. A failed size is kept as a flagged gap.
inline Dataset gen_dataset(const ProblemSpec& problem, const Schedule& schedule, const GridTemplate& grid,
                           const ProgressFn& progress = {}) {
    Dataset d{problem, schedule, grid, {}};
    for (const auto& [n, tag] : schedule.training_sizes()) {
        DatasetEntry e;
        e.set = tag;
        e.best.n = n;
        try {
            e.best = sweep(grid.at(problem, n)).best;
        } catch (const sweep_failure& f) {
            e.error = f.what();
            e.best.iterations = grid.setup.solve.max_cycles;
        } catch (const error& f) {
            e.error = f.what();
            e.best.iterations = grid.setup.solve.max_cycles;
        }
        if (progress) progress(e);
        d.entries.push_back(std::move(e));
    }
    return d;
}

inline nlohmann::json to_json(const SolverSetup& s) {
    return {{"smoother", to_string(s.smoother)},
            {"precond", s.precond == PreconditionerKind::ilu0 ? "ilu0" : "identity"},
            {"theta", s.coarsening.strength_theta},
            {"tol", s.solve.tol},
            {"max_cycles", s.solve.max_cycles},
            {"inner_rel_tol", s.inner.rel_tol}};
}

inline PreconditionerKind parse_precond(const std::string& s) {
    if (s == "identity") return PreconditionerKind::identity;
    if (s == "ilu0") return PreconditionerKind::ilu0;
    throw config_error("unknown preconditioner '" + s + "'");
}

inline SolverSetup setup_from_json(const nlohmann::json& j) {
    SolverSetup s;
    s.smoother = parse_smoother_kind(j.at("smoother").get<std::string>());
    s.precond = parse_precond(j.at("precond").get<std::string>());
    s.coarsening.strength_theta = j.at("theta").get<double>();
    s.solve.tol = j.at("tol").get<double>();
    s.solve.max_cycles = j.at("max_cycles").get<std::size_t>();
    s.inner.rel_tol = j.value("inner_rel_tol", s.inner.rel_tol);
    return s;
}

inline nlohmann::json to_json(const Dataset& d) {
    nlohmann::json sched{{"train", to_json(d.schedule.train)}};
    if (d.schedule.train2) sched["train2"] = to_json(*d.schedule.train2);
    if (d.schedule.retrain) sched["retrain"] = to_json(*d.schedule.retrain);
    if (d.schedule.test) sched["test"] = to_json(*d.schedule.test);
    nlohmann::json records = nlohmann::json::array();
    for (const auto& e : d.entries) {
        auto r = to_json(e.best);
        r["set"] = e.set;
        if (!e.error.empty()) r["error"] = e.error;
        records.push_back(std::move(r));
    }
    return {{"problem", problem_json(d.problem)},
            {"schedule", sched},
            {"grid", {{"alpha", to_json(d.grid.alpha)}, {"omega", to_json(d.grid.omega)}, {"solver", to_json(d.grid.setup)}}},
            {"records", records}};
}

inline Dataset dataset_from_json(const nlohmann::json& j) {
    Dataset d;
    d.problem = problem_from_json(j.at("problem"));
    const auto& s = j.at("schedule");
    d.schedule.train = range_from_json(s.at("train"));
    if (s.contains("train2")) d.schedule.train2 = range_from_json(s.at("train2"));
    if (s.contains("retrain")) d.schedule.retrain = range_from_json(s.at("retrain"));
    if (s.contains("test")) d.schedule.test = range_from_json(s.at("test"));
    const auto& g = j.at("grid");
    d.grid.alpha = range_from_json(g.at("alpha"));
    d.grid.omega = range_from_json(g.at("omega"));
    d.grid.setup = setup_from_json(g.at("solver"));
    for (const auto& r : j.at("records")) {
        DatasetEntry e;
        e.best = record_from_json(r);
        e.set = r.value("set", std::string("train"));
        e.error = r.value("error", std::string{});
        d.entries.push_back(std::move(e));
    }
    return d;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw config_error("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

} // namespace splitamg::harness

#endif
