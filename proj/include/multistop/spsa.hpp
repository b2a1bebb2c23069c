#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "multistop/model.hpp"
#include "multistop/policy.hpp"
#include "multistop/threshold_policy.hpp"

namespace multistop {

/// Gain constants and run parameters for simultaneous-perturbation ascent.
struct SpsaConfig {
    double epsilon = 0.7;   ///< a_n scale
    double varsigma = 0.1;  ///< a_n stability offset
    double kappa = 0.6;     ///< a_n decay, in (0.5, 1]
    double nu = 0.6;        ///< c_n decay, in (0.5, 1]
    double psi = 0.1;       ///< c_n scale
    int num_iterations = 200;
    int rollouts_per_eval = 500;
    int horizon = 200;
    std::uint64_t seed = 42;
    /// Reuse the same rollout seeds for the +/- evaluations of one iteration
    /// (variance reduction). Switchable for experiments.
    bool common_random_numbers = true;

    /// Enforces the gain constraints; throws std::invalid_argument.
    void validate() const;
};

struct GainPair {
    double a = 0.0;
    double c = 0.0;
};

/// a_n = eps (n+1+varsigma)^-kappa, c_n = psi (n+1)^-nu, n >= 0.
GainPair gain_schedule(const SpsaConfig& config, int n);

struct TraceEntry {
    int iteration = 0;
    double a = 0.0;
    double c = 0.0;
    double j_estimate = 0.0;  ///< mean of the two perturbed evaluations
    std::vector<double> params;
};

using TrainingTrace = std::vector<TraceEntry>;

class spsa_divergence : public std::runtime_error {
public:
    spsa_divergence(const std::string& what, TrainingTrace trace)
        : std::runtime_error(what), trace(std::move(trace)) {}
    TrainingTrace trace;
};

/// Noisy objective: params -> estimated value, where eval_seed pins the
/// Monte Carlo randomness of one evaluation.
using Objective = std::function<double(const std::vector<double>&, std::uint64_t)>;

/// One two-sided simultaneous-perturbation gradient estimate:
///   [f(x + c w) - f(x - c w)] / (2c) * w,   w ~ iid Rademacher.
std::vector<double> estimate_gradient(const Objective& objective, const std::vector<double>& x,
                                      double c, std::uint64_t seed_plus,
                                      std::uint64_t seed_minus, Rng& perturbation_rng);

struct SpsaResult {
    std::vector<double> params;
    TrainingTrace trace;
};

/// Gradient ascent x <- x + a_n g_n for config.num_iterations steps.
/// Throws spsa_divergence (carrying the partial trace) when an evaluation or
/// parameter turns non-finite.
SpsaResult maximize(const Objective& objective, std::vector<double> x0,
                    const SpsaConfig& config);

/// Default parameter initialization: the two magnitude entries (1,1), (1,2)
/// uniform on [0,1], every other entry uniform on [0, pi/2].
SphericalParams default_phi_init(int num_states, int num_stops, Rng& rng);

/// SPSA gradient of the rollout objective over spherical parameters,
/// evaluated with common random numbers across the two perturbed policies.
std::vector<double> estimate_gradient(const PomdpModel& model, const SphericalParams& phi,
                                      double c, int rollouts, int horizon, Rng& rng);

struct LinearTrainingResult {
    LinearThresholdPolicy policy;
    SphericalParams phi;
    TrainingTrace trace;
};

/// Trains the linear mining policy in spherical coordinates. Every iterate
/// maps to a Theorem-2-feasible policy by construction; this is verified
/// after each transform rather than assumed.
LinearTrainingResult train(const PomdpModel& model, const SpsaConfig& config,
                           std::optional<SphericalParams> phi_init = std::nullopt);

struct SoftmaxTrainingResult {
    SoftmaxWindowPolicy policy;
    TrainingTrace trace;
};

/// Trains the observation-window softmax baseline with the same ascent loop,
/// directly over its unconstrained parameter vector.
SoftmaxTrainingResult train_softmax_baseline(const PomdpModel& model, const SpsaConfig& config,
                                             int window_size = 2);

}  // namespace multistop
