#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "multistop/model.hpp"
#include "multistop/policy.hpp"
#include "multistop/rng.hpp"
#include "multistop/value_iteration.hpp"

namespace multistop {

/// One simulated trajectory. Policy evaluation accrues the belief-based
/// mining reward r^T pi_t (the decision maker's expected reward); the
/// realized per-stop reward r(X_t, 2) is kept for diagnostics only.
struct RolloutRecord {
    std::vector<int> states;        ///< X_t, 0-based, one per decision epoch
    std::vector<int> observations;  ///< y_t, 1-based, observation t arrives after decision t-1
    std::vector<Belief> beliefs;    ///< pi_t, one per decision epoch
    std::vector<int> actions;       ///< u_t in {1,2}
    std::vector<int> stop_times;            ///< tau_1 < tau_2 < ...
    std::vector<double> stop_rewards;       ///< r^T pi at each stop (what J accrues)
    std::vector<double> realized_rewards;   ///< r(X_tau, 2) at each stop
    double discounted_reward = 0.0;
};

/// Simulates the mining problem for `horizon` decision epochs t = 0..T-1,
/// or until the L-th mine. The hidden state advances by P, the observation
/// is drawn from the new state, and the belief follows the Bayesian filter;
/// sampled observations always have positive likelihood.
RolloutRecord rollout(const PomdpModel& model, const MiningPolicy& policy, int horizon,
                      Rng& rng);

struct JEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int num_rollouts = 0;
};

/// Monte Carlo estimate of the cumulative reward. Every rollout runs on its
/// own stream derived from (seed, index) and results are reduced in index
/// order, so the estimate is identical no matter how rollouts are scheduled.
JEstimate estimate_J(const PomdpModel& model, const MiningPolicy& policy, int num_rollouts,
                     int horizon, std::uint64_t seed, bool parallel = true);

struct StopCountReport {
    int best_num_stops = 0;
    std::vector<double> values;      ///< J*_L at the initial belief, L = 1..L_max
    std::vector<double> net_values;  ///< J*_L - cost(L)
    bool value_concave = false;      ///< second differences of L -> J*_L
};

/// Picks the stop budget maximizing J*_L(pi0) - cost(L), solving the grid
/// recursion per L. Ties go to the smaller L. The cost must be
/// non-decreasing and convex on {1..L_max} (checked by finite differences;
/// violations raise std::invalid_argument).
StopCountReport optimize_num_stops(const std::function<PomdpModel(int)>& model_family,
                                   const std::function<double(int)>& cost, int max_stops,
                                   int grid_resolution, const SolveOptions& options = {});

}  // namespace multistop
