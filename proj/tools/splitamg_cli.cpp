// Command-line front end: solves, parameter sweeps, datasets, GPR training and prediction.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <splitamg/splitamg.hpp>

using namespace splitamg;
using namespace splitamg::harness;

namespace {

// Exit codes: 0 success, 1 usage or runtime error, 2 a solve did not converge.
constexpr int exit_not_converged = 2;

struct ProblemOpts {
    std::string problem = "poisson";
    double phi = 0.0;

    void add(CLI::App* app) {
        app->add_option("--problem", problem, "Model problem")
            ->required()
            ->check(CLI::IsMember({"poisson", "reaction", "convdiff"}));
        app->add_option("--phi", phi, "Convection angle for convdiff");
    }

    ProblemSpec spec() const { return ProblemSpec::of_kind(parse_problem_kind(problem), phi); }
};

struct SolverOpts {
    double theta = 0.025;
    double tol = 1e-8;
    std::size_t max_cycles = 500;
    std::string precond;

    void add(CLI::App* app) {
        app->add_option("--theta", theta, "Strength threshold")->capture_default_str();
        app->add_option("--tol", tol, "Relative residual tolerance")->capture_default_str();
        app->add_option("--max-cycles", max_cycles, "V-cycle cap")->capture_default_str();
        app->add_option("--precond", precond, "Skew half-step preconditioner (default: ilu0 for convdiff)")
            ->check(CLI::IsMember({"identity", "ilu0"}));
    }

    SolverSetup setup(ProblemKind kind, SmootherKind smoother = SmootherKind::pgadi_hs) const {
        SolverSetup s;
        s.smoother = smoother;
        s.precond = precond.empty() ? default_precond(kind) : parse_precond(precond);
        s.coarsening.strength_theta = theta;
        s.solve.tol = tol;
        s.solve.max_cycles = max_cycles;
        return s;
    }
};

struct GridOpts {
    std::string alpha_range, omega_range;
    std::optional<double> omega;
    unsigned threads = 0;

    void add(CLI::App* app) {
        app->add_option("--alpha-range", alpha_range, "lo:hi:step (default: the problem's standard grid)");
        auto* r = app->add_option("--omega-range", omega_range, "lo:hi:step");
        app->add_option("--omega", omega, "Fixed omega")->excludes(r);
        app->add_option("--threads", threads, "Worker threads (0: all cores)");
    }

    void apply(SweepGrid& g) const {
        if (!alpha_range.empty()) g.alpha = Range::parse(alpha_range);
        if (!omega_range.empty()) g.omega = Range::parse(omega_range);
        if (omega) g.omega = Range::single(*omega);
        g.threads = threads;
    }
};

SweepGrid make_grid(const ProblemOpts& p, const SolverOpts& s, const GridOpts& g, std::size_t n) {
    auto grid = default_grid(parse_problem_kind(p.problem), n);
    grid.problem = p.spec();
    grid.setup = s.setup(grid.problem.kind);
    g.apply(grid);
    return grid;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AMG with splitting smoothers and GPR parameter prediction"};
    app.require_subcommand(1);

    // solve
    ProblemOpts solve_p;
    SolverOpts solve_s;
    std::size_t solve_n = 16;
    std::string solve_smoother = "pgadi-hs", solve_out;
    std::optional<double> solve_alpha;
    double solve_omega = 1.0;
    bool solve_verbose = false;
    auto* solve = app.add_subcommand("solve", "Assemble, set up AMG and solve once");
    solve_p.add(solve);
    solve->add_option("--n", solve_n, "Cells per direction")->required()->check(CLI::Range(2, 4096));
    solve->add_option("--smoother", solve_smoother, "Smoother")
        ->check(CLI::IsMember({"pgadi-hs", "hss", "spd-gadi"}))
        ->capture_default_str();
    solve->add_option("--alpha", solve_alpha, "Shift (default for hss: sqrt(lambda_min lambda_max) of H)");
    solve->add_option("--omega", solve_omega, "Relaxation")->capture_default_str();
    solve_s.add(solve);
    solve->add_option("--out", solve_out, "Write the JSON report here instead of stdout");
    solve->add_flag("--verbose", solve_verbose, "Include the hierarchy summary");

    // sweep
    ProblemOpts sweep_p;
    SolverOpts sweep_s;
    GridOpts sweep_g;
    std::size_t sweep_n = 16;
    std::string sweep_out;
    auto* sw = app.add_subcommand("sweep", "Solve over an (alpha, omega) grid");
    sweep_p.add(sw);
    sw->add_option("--n", sweep_n, "Cells per direction")->required()->check(CLI::Range(2, 4096));
    sweep_g.add(sw);
    sweep_s.add(sw);
    sw->add_option("--out", sweep_out, "CSV output")->required();

    // dataset
    ProblemOpts ds_p;
    SolverOpts ds_s;
    GridOpts ds_g;
    std::string ds_train, ds_train2, ds_retrain, ds_test, ds_out;
    auto* ds = app.add_subcommand("dataset", "Sweep every size of a schedule and keep the best records");
    ds_p.add(ds);
    ds->add_option("--train", ds_train, "lo:hi:step")->required();
    ds->add_option("--train2", ds_train2, "Second training range");
    ds->add_option("--retrain", ds_retrain, "Retraining range, merged into training");
    ds->add_option("--test", ds_test, "Test range (stored only)");
    ds_g.add(ds);
    ds_s.add(ds);
    ds->add_option("--out", ds_out, "Dataset JSON")->required();

    // gpr-train
    std::string tr_dataset, tr_tasks = "alpha", tr_kernel, tr_out;
    double tr_noise = gpr::default_noise_sigma;
    auto* tr = app.add_subcommand("gpr-train", "Fit a GP to a dataset");
    tr->add_option("--dataset", tr_dataset, "Dataset JSON")->required()->check(CLI::ExistingFile);
    tr->add_option("--tasks", tr_tasks, "alpha or alpha,omega")->capture_default_str();
    tr->add_option("--kernel", tr_kernel, "gauss-unsquared, se or library (default: gauss-unsquared; library for two tasks)")
        ->check(CLI::IsMember({"gauss-unsquared", "se", "library"}));
    tr->add_option("--noise", tr_noise, "Observation noise sigma, within [1e-6, 1e-2]")->capture_default_str();
    tr->add_option("--out", tr_out, "Model JSON")->required();

    // gpr-predict
    std::string pr_model, pr_out;
    std::vector<std::size_t> pr_n;
    bool pr_solve = false;
    auto* pr = app.add_subcommand("gpr-predict", "Predict parameters and optionally solve with them");
    pr->add_option("--model", pr_model, "Model JSON")->required()->check(CLI::ExistingFile);
    pr->add_option("--n", pr_n, "n1,n2,...")->required()->delimiter(',');
    pr->add_flag("--solve", pr_solve, "Solve with the predicted parameters");
    pr->add_option("--out", pr_out, "CSV output")->required();

    // compare
    ProblemOpts cmp_p;
    SolverOpts cmp_s;
    GridOpts cmp_g;
    std::vector<std::size_t> cmp_n;
    std::string cmp_out, cmp_model;
    std::optional<double> cmp_alpha;
    auto* cmp = app.add_subcommand("compare", "PGADI-HS against HSS with its optimal shift");
    cmp_p.add(cmp);
    cmp->add_option("--n", cmp_n, "n1,n2,...")->required()->delimiter(',');
    cmp->add_option("--out", cmp_out, "CSV output")->required();
    auto* cmp_model_opt = cmp->add_option("--model", cmp_model, "Take PGADI-HS parameters from this model")
                              ->check(CLI::ExistingFile);
    cmp->add_option("--alpha", cmp_alpha, "Fixed PGADI-HS alpha (with --omega)")->excludes(cmp_model_opt);
    cmp_g.add(cmp);
    cmp_s.add(cmp);

    // assemble
    ProblemOpts as_p;
    std::size_t as_n = 16;
    std::string as_out;
    auto* as = app.add_subcommand("assemble", "Write the system as Matrix Market plus a JSON sidecar");
    as_p.add(as);
    as->add_option("--n", as_n, "Cells per direction")->required()->check(CLI::Range(2, 4096));
    as->add_option("--out", as_out, "Matrix Market path; the sidecar gets .json appended")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) {
            const auto spec = solve_p.spec();
            const auto kind = parse_smoother_kind(solve_smoother);
            const auto setup = solve_s.setup(spec.kind, kind);
            const auto sys = assemble(spec, solve_n);
            const auto split = split_hs(sys.matrix);
            double alpha = 0;
            if (solve_alpha) alpha = *solve_alpha;
            else if (kind == SmootherKind::hss) alpha = hss_optimal_alpha(split.h);
            else throw config_error("--alpha is required for " + solve_smoother);

            const auto h = AmgHierarchy::setup(sys.matrix, setup.coarsening, setup.smoother_config(alpha, solve_omega));
            nlohmann::json report{{"problem", problem_json(spec)}, {"n", solve_n}, {"smoother", solve_smoother},
                                  {"alpha", alpha},  {"omega", solve_omega},       {"tol", setup.solve.tol}};
            bool converged = false;
            try {
                const auto res = h.solve(sys.rhs, setup.solve);
                const auto err = discretization_error(sys, res.x);
                converged = res.report.converged;
                report["iterations"] = res.report.iterations;
                report["converged"] = converged;
                report["residual_history"] = res.report.residual_history;
                report["wall_ms"] = res.report.wall_time.count();
                report["inner_iterations"] = res.report.inner_iterations;
                report["l2_error"] = err.l2;
                report["max_error"] = err.max;
            } catch (const divergence_error& e) {
                report["converged"] = false;
                report["diverged"] = e.what();
                report["residual_history"] = e.history();
            }
            if (solve_verbose) report["hierarchy"] = h.summary();
            if (solve_out.empty()) std::cout << report.dump(2) << '\n';
            else write_json_file(solve_out, report);
            return converged ? 0 : exit_not_converged;
        }

        if (*sw) {
            const auto grid = make_grid(sweep_p, sweep_s, sweep_g, sweep_n);
            std::vector<SweepRecord> records;
            std::optional<SweepRecord> best;
            try {
                auto r = sweep(grid);
                records = std::move(r.all);
                best = r.best;
            } catch (const sweep_failure& f) {
                records = f.records();
            }
            auto out = open_output(sweep_out);
            write_sweep_csv(out, records);
            if (!best) {
                std::cerr << "no grid point converged\n";
                return exit_not_converged;
            }
            std::cout << "best: n=" << best->n << " alpha=" << format_number(best->alpha)
                      << " omega=" << format_number(best->omega) << " iterations=" << best->iterations << '\n';
            return 0;
        }

        if (*ds) {
            Schedule sched;
            sched.train = Range::parse(ds_train);
            if (!ds_train2.empty()) sched.train2 = Range::parse(ds_train2);
            if (!ds_retrain.empty()) sched.retrain = Range::parse(ds_retrain);
            if (!ds_test.empty()) sched.test = Range::parse(ds_test);
            const auto grid = make_grid(ds_p, ds_s, ds_g, 0);
            const auto d = gen_dataset(grid.problem, sched, GridTemplate::from(grid), [](const DatasetEntry& e) {
                std::cerr << "n=" << e.best.n << ' ';
                if (e.usable())
                    std::cerr << "alpha=" << format_number(e.best.alpha) << " omega=" << format_number(e.best.omega)
                              << " iterations=" << e.best.iterations << '\n';
                else
                    std::cerr << "FAILED: " << e.error << '\n';
            });
            write_json_file(ds_out, to_json(d));
            return 0;
        }

        if (*tr) {
            const auto tasks = parse_tasks(tr_tasks);
            const auto kernel = parse_kernel_choice(!tr_kernel.empty() ? tr_kernel
                                                    : tasks.size() == 2 ? "library"
                                                                        : "gauss-unsquared");
            const auto model = train_model(dataset_from_json(read_json_file(tr_dataset)), tasks, kernel, tr_noise);
            write_json_file(tr_out, to_json(model));
            return 0;
        }

        if (*pr) {
            const auto model = trained_model_from_json(read_json_file(pr_model));
            const auto rows = predict_and_solve(model, pr_n, pr_solve);
            auto out = open_output(pr_out);
            write_prediction_csv(out, rows, model.predicts_omega());
            bool all_ok = true;
            for (const auto& r : rows)
                if (r.solve && !r.solve->converged) {
                    all_ok = false;
                    std::cerr << "n=" << r.params.n << " flagged: " << r.solve->failure << '\n';
                }
            return all_ok ? 0 : exit_not_converged;
        }

        if (*cmp) {
            const auto grid = make_grid(cmp_p, cmp_s, cmp_g, 0);
            ParameterSource params;
            if (!cmp_model.empty()) {
                params = predicted_parameters(trained_model_from_json(read_json_file(cmp_model)));
            } else if (cmp_alpha) {
                if (!cmp_g.omega) throw config_error("--alpha needs --omega");
                params = [a = *cmp_alpha, w = *cmp_g.omega](std::size_t) { return std::pair{a, w}; };
            } else {
                params = swept_parameters(grid);
            }
            const auto rows = compare_smoothers(grid.problem, cmp_n, params, grid.setup);
            auto out = open_output(cmp_out);
            write_compare_csv(out, rows);
            for (const auto& r : rows)
                std::cout << "n=" << r.pgadi.n << " pgadi-hs=" << r.pgadi.iterations << " hss=" << r.hss.iterations << '\n';
            return 0;
        }

        if (*as) {
            const auto sys = assemble(as_p.spec(), as_n);
            write_matrix_market(as_out, sys.matrix);
            auto side = system_json(sys);
            side["rhs"] = sys.rhs;
            write_json_file(as_out + ".json", side);
            return 0;
        }
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
