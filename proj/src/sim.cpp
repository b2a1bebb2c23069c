#include "multistop/sim.hpp"

#include <cmath>
#include <stdexcept>

#include "multistop/parallel.hpp"

namespace multistop {

RolloutRecord rollout(const PomdpModel& model, const MiningPolicy& policy, int horizon,
                      Rng& rng) {
    check_dimensions(model);
    if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
    const int n = model.num_states();
    const int nobs = model.num_observations();
    const double rho = model.discount;

    RolloutRecord rec;
    if (model.num_stops == 0) return rec;  // degenerate budget: nothing to do

    int state = static_cast<int>(rng.categorical(model.initial_belief));
    Belief pi = model.initial_belief;
    std::vector<double> predicted(n), unnormalized(n);
    int level = 1;
    double discount_t = 1.0;

    for (int t = 0; t < horizon; ++t) {
        rec.states.push_back(state);
        rec.beliefs.push_back(pi);
        int u = policy.action(pi, level, rec.observations, rng);
        rec.actions.push_back(u);
        if (u == 2) {
            double expected = dot(model.reward_mine, pi);
            rec.discounted_reward += discount_t * expected;
            rec.stop_times.push_back(t);
            rec.stop_rewards.push_back(expected);
            rec.realized_rewards.push_back(model.reward_mine[state]);
            ++level;
            if (level > model.num_stops) break;
        }

        // advance the chain, observe the new state, filter
        state = static_cast<int>(rng.categorical(model.transition.row(state)));
        int y = static_cast<int>(rng.categorical(model.observation.row(state)));  // 0-based
        rec.observations.push_back(y + 1);

        for (int j = 0; j < n; ++j) predicted[j] = 0.0;
        for (int i = 0; i < n; ++i) {
            if (pi[i] == 0.0) continue;
            auto row = model.transition.row(i);
            for (int j = 0; j < n; ++j) predicted[j] += row[j] * pi[i];
        }
        double sigma = 0.0;
        for (int j = 0; j < n; ++j) {
            unnormalized[j] = model.observation(j, y) * predicted[j];
            sigma += unnormalized[j];
        }
        for (int j = 0; j < n; ++j) pi[j] = unnormalized[j] / sigma;

        discount_t *= rho;
        (void)nobs;
    }
    return rec;
}

JEstimate estimate_J(const PomdpModel& model, const MiningPolicy& policy, int num_rollouts,
                     int horizon, std::uint64_t seed, bool parallel) {
    if (num_rollouts < 1) throw std::invalid_argument("estimate_J: num_rollouts must be >= 1");
    std::vector<double> js(num_rollouts);
    parallel_for(
        static_cast<std::size_t>(num_rollouts),
        [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                Rng stream = Rng::stream(seed, i);
                js[i] = rollout(model, policy, horizon, stream).discounted_reward;
            }
        },
        parallel);

    double mean = 0.0;
    for (double j : js) mean += j;
    mean /= num_rollouts;
    double var = 0.0;
    for (double j : js) var += (j - mean) * (j - mean);
    var = num_rollouts > 1 ? var / (num_rollouts - 1) : 0.0;
    return {mean, std::sqrt(var / num_rollouts), num_rollouts};
}

StopCountReport optimize_num_stops(const std::function<PomdpModel(int)>& model_family,
                                   const std::function<double(int)>& cost, int max_stops,
                                   int grid_resolution, const SolveOptions& options) {
    if (max_stops < 1) throw std::invalid_argument("optimize_num_stops: max_stops must be >= 1");
    const double tol = 1e-9;
    for (int l = 1; l < max_stops; ++l)
        if (cost(l + 1) < cost(l) - tol)
            throw std::invalid_argument("optimize_num_stops: cost is not non-decreasing");
    for (int l = 1; l + 2 <= max_stops; ++l)
        if (cost(l + 2) - 2.0 * cost(l + 1) + cost(l) < -tol)
            throw std::invalid_argument("optimize_num_stops: cost is not convex");

    StopCountReport report;
    for (int l = 1; l <= max_stops; ++l) {
        PomdpModel m = model_family(l);
        if (m.num_stops != l)
            throw std::invalid_argument("optimize_num_stops: model_family(L) must set num_stops=L");
        ValueTable table = solve_value_iteration(m, grid_resolution, options);
        int p0 = table.grid().nearest_index(m.initial_belief);
        report.values.push_back(table.value(p0, 1));
        report.net_values.push_back(report.values.back() - cost(l));
    }

    report.best_num_stops = 1;
    for (int l = 2; l <= max_stops; ++l)
        if (report.net_values[l - 1] > report.net_values[report.best_num_stops - 1])
            report.best_num_stops = l;  // strict: ties keep the smaller L

    report.value_concave = true;
    for (std::size_t i = 0; i + 2 < report.values.size(); ++i)
        if (report.values[i + 2] - 2.0 * report.values[i + 1] + report.values[i] > tol)
            report.value_concave = false;
    return report;
}

}  // namespace multistop
