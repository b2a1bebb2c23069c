// Command-line front end: validate, solve, train, simulate, compare,
// estimate, optimize-stops. Outputs are plain text artifacts plus a
// run_metadata.txt that pins the full configuration and seed of the run.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "multistop/estimation.hpp"
#include "multistop/model_io.hpp"
#include "multistop/sim.hpp"
#include "multistop/spsa.hpp"

namespace fs = std::filesystem;
using namespace multistop;

namespace {

constexpr const char* kToolVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct OutputDir {
    fs::path dir;
    bool force = false;

    void prepare() const {
        if (!dir.empty()) fs::create_directories(dir);
    }

    fs::path file(const std::string& name) const {
        fs::path p = dir.empty() ? fs::path(name) : dir / name;
        if (fs::exists(p) && !force)
            throw std::runtime_error("refusing to overwrite " + p.string() +
                                     " (pass --force to allow)");
        return p;
    }
};

void write_metadata(const OutputDir& out, const std::string& subcommand,
                    const std::vector<std::pair<std::string, std::string>>& config) {
    std::ofstream meta(out.file("run_metadata.txt"));
    meta << "tool mstop " << kToolVersion << "\n";
    meta << "subcommand " << subcommand << "\n";
    for (const auto& [k, v] : config) meta << k << ' ' << v << "\n";
}

std::string fmt(double v) { return format_real(v); }

SpsaConfig parse_spsa(const std::vector<double>& gains, int iterations, int rollouts,
                      int horizon, std::uint64_t seed) {
    SpsaConfig config;
    if (!gains.empty()) {
        if (gains.size() != 5)
            throw CLI::ValidationError("--spsa needs 5 values: epsilon,varsigma,kappa,nu,psi");
        config.epsilon = gains[0];
        config.varsigma = gains[1];
        config.kappa = gains[2];
        config.nu = gains[3];
        config.psi = gains[4];
    }
    config.num_iterations = iterations;
    config.rollouts_per_eval = rollouts;
    config.horizon = horizon;
    config.seed = seed;
    return config;
}

int cmd_validate(const std::string& model_path) {
    PomdpModel model = load_model(model_path);
    ValidationReport report = validate_model(model);
    for (const auto& check : report.checks) {
        std::cout << (check.pass ? "pass" : "FAIL") << "  " << check.name;
        if (!check.pass && !check.detail.empty()) std::cout << "  (" << check.detail << ")";
        std::cout << "\n";
    }
    bool ok = report.assumptions_pass();
    std::cout << (ok ? "model accepted" : "model rejected") << "\n";
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_solve(const std::string& model_path, int grid, double tol, int max_iters,
              OutputDir out) {
    PomdpModel model = load_model(model_path);
    SolveOptions options;
    options.tolerance = tol;
    options.max_iterations = max_iters;
    ValueTable table = solve_value_iteration(model, grid, options);

    out.prepare();
    save_value_table(out.file("value_table.tsv").string(), table);
    StructureReport structure = verify_structure(table);
    {
        std::ofstream rep(out.file("structure_report.txt"));
        rep << "# level monotone connected nested\n";
        for (std::size_t l = 0; l < structure.levels.size(); ++l) {
            const auto& s = structure.levels[l];
            rep << l + 1 << '\t' << s.monotone << '\t' << s.connected << '\t' << s.nested
                << "\n";
        }
    }
    write_metadata(out, "solve",
                   {{"model", model_path},
                    {"grid", std::to_string(grid)},
                    {"tol", fmt(tol)},
                    {"max_iters", std::to_string(max_iters)}});

    int p0 = table.grid().nearest_index(model.initial_belief);
    std::cout << "value at initial belief: " << fmt(table.value(p0, 1)) << "\n";
    std::cout << "converged: " << (table.converged ? "yes" : "no")
              << "  iterations: " << table.iterations
              << "  residual: " << fmt(table.final_residual) << "\n";
    std::cout << "structure (monotone/connected/nested all levels): "
              << (structure.all_pass() ? "holds" : "violated") << "\n";
    return kExitOk;
}

int cmd_train(const std::string& model_path, const std::vector<double>& gains, int iterations,
              int rollouts, int horizon, std::uint64_t seed, int eval_rollouts, OutputDir out) {
    PomdpModel model = load_model(model_path);
    SpsaConfig config = parse_spsa(gains, iterations, rollouts, horizon, seed);
    LinearTrainingResult result = train(model, config);

    out.prepare();
    save_policy(out.file("policy.txt").string(), result.policy, "trained linear mining policy");
    save_trace(out.file("trace.tsv").string(), result.trace);
    write_metadata(out, "train",
                   {{"model", model_path},
                    {"seed", std::to_string(seed)},
                    {"iterations", std::to_string(iterations)},
                    {"rollouts_per_eval", std::to_string(rollouts)},
                    {"horizon", std::to_string(horizon)},
                    {"epsilon", fmt(config.epsilon)},
                    {"varsigma", fmt(config.varsigma)},
                    {"kappa", fmt(config.kappa)},
                    {"nu", fmt(config.nu)},
                    {"psi", fmt(config.psi)}});

    LinearPolicyAdapter adapter(result.policy);
    JEstimate j = estimate_J(model, adapter, eval_rollouts, horizon, splitmix64(seed + 1));
    std::cout << "trained policy J: " << fmt(j.mean) << " +- " << fmt(j.std_error) << " ("
              << eval_rollouts << " rollouts)\n";
    return kExitOk;
}

int cmd_simulate(const std::string& model_path, const std::string& policy_spec, int rollouts,
                 int horizon, std::uint64_t seed, int grid, OutputDir out) {
    PomdpModel model = load_model(model_path);
    std::unique_ptr<MiningPolicy> policy;
    std::shared_ptr<ValueTable> table;
    if (policy_spec == "first-l") {
        policy = std::make_unique<FirstLPolicy>();
    } else if (policy_spec == "random") {
        policy = std::make_unique<RandomPolicy>(0.5);
    } else if (policy_spec == "vi") {
        table = std::make_shared<ValueTable>(solve_value_iteration(model, grid));
        policy = std::make_unique<GridPolicyAdapter>(table);
    } else {
        policy = std::make_unique<LinearPolicyAdapter>(load_policy(policy_spec));
    }

    JEstimate j = estimate_J(model, *policy, rollouts, horizon, seed);
    std::cout << "policy " << policy->name() << ": J = " << fmt(j.mean) << " +- "
              << fmt(j.std_error) << " (" << rollouts << " rollouts, horizon " << horizon
              << ", seed " << seed << ")\n";

    if (!out.dir.empty()) {
        out.prepare();
        Rng rng = Rng::stream(seed, 0);
        RolloutRecord rec = rollout(model, *policy, horizon, rng);
        std::ofstream tr(out.file("sample_rollout.tsv"));
        tr << "# t state observation action\n";
        for (std::size_t t = 0; t < rec.actions.size(); ++t) {
            tr << t << '\t' << rec.states[t] + 1 << '\t'
               << (t < rec.observations.size() ? rec.observations[t] : 0) << '\t'
               << rec.actions[t] << "\n";
        }
        write_metadata(out, "simulate",
                       {{"model", model_path},
                        {"policy", policy_spec},
                        {"rollouts", std::to_string(rollouts)},
                        {"horizon", std::to_string(horizon)},
                        {"seed", std::to_string(seed)}});
    }
    return kExitOk;
}

int cmd_compare(const std::string& model_path, std::vector<std::string> policies, int rollouts,
                int horizon, std::uint64_t seed, int grid, const std::vector<double>& gains,
                int iterations, int train_rollouts, OutputDir out) {
    PomdpModel model = load_model(model_path);
    out.prepare();

    std::vector<std::pair<std::string, JEstimate>> results;
    std::shared_ptr<ValueTable> table;
    for (const std::string& name : policies) {
        std::unique_ptr<MiningPolicy> policy;
        if (name == "vi") {
            if (!table) table = std::make_shared<ValueTable>(solve_value_iteration(model, grid));
            policy = std::make_unique<GridPolicyAdapter>(table);
        } else if (name == "linear") {
            SpsaConfig config =
                parse_spsa(gains, iterations, train_rollouts, horizon, splitmix64(seed ^ 0x11));
            policy = std::make_unique<LinearPolicyAdapter>(train(model, config).policy);
        } else if (name == "softmax") {
            SpsaConfig config =
                parse_spsa(gains, iterations, train_rollouts, horizon, splitmix64(seed ^ 0x22));
            policy = std::make_unique<SoftmaxWindowPolicy>(
                train_softmax_baseline(model, config).policy);
        } else if (name == "random") {
            policy = std::make_unique<RandomPolicy>(0.5);
        } else if (name == "first-l") {
            policy = std::make_unique<FirstLPolicy>();
        } else {
            throw CLI::ValidationError("unknown policy '" + name + "'");
        }
        results.push_back({name, estimate_J(model, *policy, rollouts, horizon, seed)});
    }

    std::ofstream rep(out.file("comparison.tsv"));
    rep << "# policy mean_j std_error rollouts seed\n";
    for (const auto& [name, j] : results)
        rep << name << '\t' << fmt(j.mean) << '\t' << fmt(j.std_error) << '\t' << rollouts
            << '\t' << seed << "\n";
    write_metadata(out, "compare",
                   {{"model", model_path},
                    {"rollouts", std::to_string(rollouts)},
                    {"horizon", std::to_string(horizon)},
                    {"seed", std::to_string(seed)},
                    {"grid", std::to_string(grid)},
                    {"train_iterations", std::to_string(iterations)},
                    {"train_rollouts", std::to_string(train_rollouts)}});

    for (const auto& [name, j] : results)
        std::cout << name << "\tJ = " << fmt(j.mean) << " +- " << fmt(j.std_error) << "\n";
    return kExitOk;
}

int cmd_estimate(const std::string& csv_path, int states, int obs, double discount, int stops,
                 OutputDir out) {
    TimeSeriesDataset dataset = ingest(csv_path);
    EstimationOptions options;
    options.discount = discount;
    options.num_stops = stops;
    EstimatedModel estimated = estimate_model(dataset, states, obs, options);

    out.prepare();
    save_model(out.file("estimated.model").string(), estimated.model,
               "estimated from " + csv_path);
    {
        std::ofstream rep(out.file("estimation_report.txt"));
        rep << "records " << dataset.records.size() << "\n";
        rep << "rejected " << dataset.rejected.size() << "\n";
        for (const auto& r : dataset.rejected)
            rep << "  line " << r.line_number << ": " << r.reason << "\n";
        rep << "state_edges";
        for (double e : estimated.binned.state_edges) rep << ' ' << fmt(e);
        rep << "\nobs_edges";
        for (double e : estimated.binned.obs_edges) rep << ' ' << fmt(e);
        rep << "\nunvisited_states";
        for (int s : estimated.transition.unvisited_states) rep << ' ' << s;
        rep << "\ntp2_ok " << estimated.observation.tp2_ok << "\n";
        rep << "tp2_projection_distance " << fmt(estimated.observation.projection_distance)
            << "\n";
    }
    write_metadata(out, "estimate",
                   {{"csv", csv_path},
                    {"states", std::to_string(states)},
                    {"obs", std::to_string(obs)},
                    {"discount", fmt(discount)},
                    {"stops", std::to_string(stops)}});

    std::cout << "records: " << dataset.records.size()
              << "  rejected: " << dataset.rejected.size() << "\n";
    std::cout << "observation TP2: " << (estimated.observation.tp2_ok ? "yes" : "no")
              << "  projection distance: " << fmt(estimated.observation.projection_distance)
              << "\n";
    return estimated.observation.tp2_ok ? kExitOk : kExitCheckFailed;
}

int cmd_optimize_stops(const std::string& model_path, double cost_coeff, int lmax, int grid,
                       OutputDir out) {
    PomdpModel base = load_model(model_path);
    auto family = [&base](int stops) {
        PomdpModel m = base;
        m.num_stops = stops;
        return m;
    };
    auto cost = [cost_coeff](int stops) { return cost_coeff * stops * stops; };
    StopCountReport report = optimize_num_stops(family, cost, lmax, grid);

    out.prepare();
    {
        std::ofstream rep(out.file("stops_report.txt"));
        rep << "# L value cost net\n";
        for (int l = 1; l <= lmax; ++l)
            rep << l << '\t' << fmt(report.values[l - 1]) << '\t' << fmt(cost(l)) << '\t'
                << fmt(report.net_values[l - 1]) << "\n";
        rep << "best " << report.best_num_stops << "\n";
        rep << "value_concave " << report.value_concave << "\n";
    }
    write_metadata(out, "optimize-stops",
                   {{"model", model_path},
                    {"cost_coeff", fmt(cost_coeff)},
                    {"lmax", std::to_string(lmax)},
                    {"grid", std::to_string(grid)}});

    std::cout << "best number of stops: " << report.best_num_stops << "\n";
    std::cout << "value concave in L: " << (report.value_concave ? "yes" : "no") << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple-stopping POMDP toolkit for energy-efficient blockchain mining"};
    app.require_subcommand(1);

    std::string model_path, csv_path, policy_spec = "vi", out_dir;
    std::vector<std::string> policies{"vi", "linear", "softmax", "random", "first-l"};
    std::vector<double> gains;
    int grid = 30, max_iters = 2000, iterations = 200, rollouts = 500, horizon = 200;
    int eval_rollouts = 100000, compare_rollouts = 100000, train_rollouts = 500;
    int states = 3, obs = 5, stops = 3, lmax = 6;
    double tol = 1e-8, discount = 0.9, cost_coeff = 0.005;
    std::uint64_t seed = 42;
    bool force = false;

    app.add_flag("--force", force, "allow overwriting existing output files");

    auto* validate = app.add_subcommand("validate", "check model assumptions");
    validate->add_option("model", model_path)->required();

    auto* solve = app.add_subcommand("solve", "value iteration on the belief lattice");
    solve->add_option("model", model_path)->required();
    solve->add_option("--grid", grid, "lattice subdivisions per axis");
    solve->add_option("--tol", tol, "sup-norm convergence tolerance");
    solve->add_option("--max-iters", max_iters);
    solve->add_option("--out", out_dir, "output directory")->required();

    auto* train_cmd = app.add_subcommand("train", "policy-gradient training of the linear policy");
    train_cmd->add_option("model", model_path)->required();
    train_cmd->add_option("--spsa", gains, "epsilon,varsigma,kappa,nu,psi")->delimiter(',');
    train_cmd->add_option("--iterations", iterations);
    train_cmd->add_option("--rollouts", rollouts, "rollouts per objective evaluation");
    train_cmd->add_option("--horizon", horizon);
    train_cmd->add_option("--seed", seed);
    train_cmd->add_option("--eval-rollouts", eval_rollouts);
    train_cmd->add_option("--out", out_dir)->required();

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo evaluation of one policy");
    simulate->add_option("model", model_path)->required();
    simulate->add_option("--policy", policy_spec, "vi | random | first-l | <policy file>");
    simulate->add_option("--rollouts", compare_rollouts);
    simulate->add_option("--horizon", horizon);
    simulate->add_option("--seed", seed);
    simulate->add_option("--grid", grid);
    simulate->add_option("--out", out_dir);

    auto* compare = app.add_subcommand("compare", "benchmark policies side by side");
    compare->add_option("model", model_path)->required();
    compare->add_option("--policies", policies)->delimiter(',');
    compare->add_option("--rollouts", compare_rollouts);
    compare->add_option("--horizon", horizon);
    compare->add_option("--seed", seed);
    compare->add_option("--grid", grid);
    compare->add_option("--spsa", gains, "epsilon,varsigma,kappa,nu,psi")->delimiter(',');
    compare->add_option("--train-iterations", iterations);
    compare->add_option("--train-rollouts", train_rollouts);
    compare->add_option("--out", out_dir)->required();

    auto* estimate = app.add_subcommand("estimate", "fit a model from a hash-rate/difficulty CSV");
    estimate->add_option("csv", csv_path)->required();
    estimate->add_option("--states", states);
    estimate->add_option("--obs", obs);
    estimate->add_option("--discount", discount);
    estimate->add_option("--stops", stops);
    estimate->add_option("--out", out_dir)->required();

    auto* optimize = app.add_subcommand("optimize-stops", "choose the stop budget");
    optimize->add_option("model", model_path)->required();
    optimize->add_option("--cost-coeff", cost_coeff, "quadratic stop cost coefficient");
    optimize->add_option("--lmax", lmax);
    optimize->add_option("--grid", grid);
    optimize->add_option("--out", out_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    OutputDir out{out_dir, force};
    try {
        if (validate->parsed()) return cmd_validate(model_path);
        if (solve->parsed()) return cmd_solve(model_path, grid, tol, max_iters, out);
        if (train_cmd->parsed())
            return cmd_train(model_path, gains, iterations, rollouts, horizon, seed,
                             eval_rollouts, out);
        if (simulate->parsed())
            return cmd_simulate(model_path, policy_spec, compare_rollouts, horizon, seed, grid,
                                out);
        if (compare->parsed())
            return cmd_compare(model_path, policies, compare_rollouts, horizon, seed, grid,
                               gains, iterations, train_rollouts, out);
        if (estimate->parsed())
            return cmd_estimate(csv_path, states, obs, discount, stops, out);
        if (optimize->parsed())
            return cmd_optimize_stops(model_path, cost_coeff, lmax, grid, out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitUsage;
}
