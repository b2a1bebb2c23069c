#include "multistop/spsa.hpp"

#include <cmath>
#include <sstream>

#include "multistop/sim.hpp"

namespace multistop {

void SpsaConfig::validate() const {
    if (!(kappa > 0.5 && kappa <= 1.0))
        throw std::invalid_argument("spsa: kappa must lie in (0.5, 1]");
    if (!(nu > 0.5 && nu <= 1.0)) throw std::invalid_argument("spsa: nu must lie in (0.5, 1]");
    if (!(epsilon > 0.0)) throw std::invalid_argument("spsa: epsilon must be positive");
    if (!(varsigma > 0.0)) throw std::invalid_argument("spsa: varsigma must be positive");
    if (!(psi > 0.0)) throw std::invalid_argument("spsa: psi must be positive");
    if (num_iterations < 0) throw std::invalid_argument("spsa: negative iteration count");
    if (rollouts_per_eval < 1) throw std::invalid_argument("spsa: rollouts_per_eval must be >= 1");
    if (horizon < 1) throw std::invalid_argument("spsa: horizon must be >= 1");
}

GainPair gain_schedule(const SpsaConfig& config, int n) {
    if (n < 0) throw std::invalid_argument("gain_schedule: n must be >= 0");
    GainPair g;
    g.a = config.epsilon * std::pow(n + 1 + config.varsigma, -config.kappa);
    g.c = config.psi * std::pow(n + 1.0, -config.nu);
    return g;
}

std::vector<double> estimate_gradient(const Objective& objective, const std::vector<double>& x,
                                      double c, std::uint64_t seed_plus,
                                      std::uint64_t seed_minus, Rng& perturbation_rng) {
    if (!(c > 0.0)) throw std::invalid_argument("estimate_gradient: c must be positive");
    const std::size_t dim = x.size();
    std::vector<double> omega(dim);
    for (double& w : omega) w = perturbation_rng.rademacher();

    std::vector<double> plus(x), minus(x);
    for (std::size_t i = 0; i < dim; ++i) {
        plus[i] += c * omega[i];
        minus[i] -= c * omega[i];
    }
    double jp = objective(plus, seed_plus);
    double jm = objective(minus, seed_minus);
    double scale = (jp - jm) / (2.0 * c);
    std::vector<double> grad(dim);
    for (std::size_t i = 0; i < dim; ++i) grad[i] = scale * omega[i];
    return grad;
}

namespace {

std::uint64_t eval_seed_for(std::uint64_t master, int iteration, bool minus_side) {
    std::uint64_t base = splitmix64(master ^ splitmix64(0x5e0a11u + iteration));
    return minus_side ? splitmix64(base + 0x9177u) : base;
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

SpsaResult maximize(const Objective& objective, std::vector<double> x0,
                    const SpsaConfig& config) {
    config.validate();
    SpsaResult result;
    result.params = std::move(x0);
    Rng perturbation_rng = Rng::stream(config.seed, 0x03e6a);

    for (int n = 0; n < config.num_iterations; ++n) {
        GainPair g = gain_schedule(config, n);
        std::uint64_t sp = eval_seed_for(config.seed, n, false);
        std::uint64_t sm =
            config.common_random_numbers ? sp : eval_seed_for(config.seed, n, true);

        const std::size_t dim = result.params.size();
        std::vector<double> omega(dim);
        for (double& w : omega) w = perturbation_rng.rademacher();
        std::vector<double> plus(result.params), minus(result.params);
        for (std::size_t i = 0; i < dim; ++i) {
            plus[i] += g.c * omega[i];
            minus[i] -= g.c * omega[i];
        }
        double jp = objective(plus, sp);
        double jm = objective(minus, sm);
        double mid = 0.5 * (jp + jm);

        if (!std::isfinite(jp) || !std::isfinite(jm)) {
            std::ostringstream os;
            os << "spsa: non-finite objective at iteration " << n;
            throw spsa_divergence(os.str(), result.trace);
        }

        double scale = (jp - jm) / (2.0 * g.c);
        for (std::size_t i = 0; i < dim; ++i) result.params[i] += g.a * scale * omega[i];
        if (!all_finite(result.params)) {
            std::ostringstream os;
            os << "spsa: non-finite parameters at iteration " << n;
            throw spsa_divergence(os.str(), result.trace);
        }
        result.trace.push_back({n, g.a, g.c, mid, result.params});
    }
    return result;
}

SphericalParams default_phi_init(int num_states, int num_stops, Rng& rng) {
    if (num_states < 2) throw std::invalid_argument("default_phi_init: needs num_states >= 2");
    if (num_stops < 1) throw std::invalid_argument("default_phi_init: needs num_stops >= 1");
    SphericalParams params;
    params.phi = Matrix(num_stops, num_states - 1);
    constexpr double half_pi = 1.5707963267948966;
    for (int l = 0; l < num_stops; ++l)
        for (int i = 0; i < num_states - 1; ++i) {
            bool magnitude = (l == 0 && i <= 1);
            params.phi(l, i) = magnitude ? rng.uniform(0.0, 1.0) : rng.uniform(0.0, half_pi);
        }
    return params;
}

namespace {

std::vector<double> flatten(const Matrix& m) {
    return m.data();
}

Matrix unflatten(const std::vector<double>& v, int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = v[static_cast<std::size_t>(i) * cols + j];
    return m;
}

Objective linear_policy_objective(const PomdpModel& model, int rows, int cols, int rollouts,
                                  int horizon) {
    return [&model, rows, cols, rollouts, horizon](const std::vector<double>& params,
                                                   std::uint64_t eval_seed) {
        SphericalParams phi{unflatten(params, rows, cols)};
        LinearPolicyAdapter policy(from_spherical(phi));
        return estimate_J(model, policy, rollouts, horizon, eval_seed).mean;
    };
}

}  // namespace

std::vector<double> estimate_gradient(const PomdpModel& model, const SphericalParams& phi,
                                      double c, int rollouts, int horizon, Rng& rng) {
    const int rows = phi.num_stops();
    const int cols = static_cast<int>(phi.phi.cols());
    Objective objective = linear_policy_objective(model, rows, cols, rollouts, horizon);
    std::uint64_t seed = rng.bits();
    return estimate_gradient(objective, flatten(phi.phi), c, seed, seed, rng);
}

LinearTrainingResult train(const PomdpModel& model, const SpsaConfig& config,
                           std::optional<SphericalParams> phi_init) {
    check_dimensions(model);
    config.validate();
    if (model.num_stops < 1) throw std::invalid_argument("train: needs num_stops >= 1");

    SphericalParams init;
    if (phi_init) {
        init = *phi_init;
        if (init.num_stops() != model.num_stops || init.num_states() != model.num_states())
            throw std::invalid_argument("train: phi_init shape does not match the model");
    } else {
        Rng init_rng = Rng::stream(config.seed, 0x1a17);
        init = default_phi_init(model.num_states(), model.num_stops, init_rng);
    }

    const int rows = init.num_stops();
    const int cols = static_cast<int>(init.phi.cols());
    Objective objective =
        linear_policy_objective(model, rows, cols, config.rollouts_per_eval, config.horizon);
    SpsaResult result = maximize(objective, flatten(init.phi), config);

    LinearTrainingResult out{from_spherical(SphericalParams{unflatten(result.params, rows, cols)}),
                             SphericalParams{unflatten(result.params, rows, cols)},
                             std::move(result.trace)};
    if (!check_feasible(out.policy.theta).feasible())
        throw std::logic_error("train: spherical transform produced an infeasible policy");
    return out;
}

SoftmaxTrainingResult train_softmax_baseline(const PomdpModel& model, const SpsaConfig& config,
                                             int window_size) {
    check_dimensions(model);
    config.validate();
    SoftmaxWindowPolicy proto(model.num_stops, window_size);

    Objective objective = [&model, &proto, &config](const std::vector<double>& params,
                                                    std::uint64_t eval_seed) {
        SoftmaxWindowPolicy policy = proto;
        policy.set_parameters(params);
        return estimate_J(model, policy, config.rollouts_per_eval, config.horizon, eval_seed)
            .mean;
    };

    std::vector<double> x0(proto.parameters().size(), 0.0);  // uniform action probabilities
    SpsaResult result = maximize(objective, std::move(x0), config);
    SoftmaxWindowPolicy policy = proto;
    policy.set_parameters(result.params);
    return {std::move(policy), std::move(result.trace)};
}

}  // namespace multistop
