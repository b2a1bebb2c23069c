#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "multistop/model.hpp"
#include "multistop/rng.hpp"
#include "multistop/threshold_policy.hpp"
#include "multistop/value_iteration.hpp"

namespace multistop {

/// Common decision interface for rollouts. `observations` is the full
/// 1-based observation history, oldest first (empty before the first
/// observation arrives); belief-based policies ignore it, window-based
/// policies read its tail. Deterministic policies ignore the rng.
class MiningPolicy {
public:
    virtual ~MiningPolicy() = default;
    virtual int action(const Belief& pi, int level, std::span<const int> observations,
                       Rng& rng) const = 0;
    virtual std::string name() const = 0;
};

/// Mines at every step until the budget runs out.
class FirstLPolicy : public MiningPolicy {
public:
    int action(const Belief&, int, std::span<const int>, Rng&) const override { return 2; }
    std::string name() const override { return "first-l"; }
};

/// Biased-coin mining.
class RandomPolicy : public MiningPolicy {
public:
    explicit RandomPolicy(double p_mine = 0.5) : p_mine_(p_mine) {}
    int action(const Belief&, int, std::span<const int>, Rng& rng) const override {
        return rng.bernoulli(p_mine_) ? 2 : 1;
    }
    std::string name() const override { return "random"; }

private:
    double p_mine_;
};

class LinearPolicyAdapter : public MiningPolicy {
public:
    explicit LinearPolicyAdapter(LinearThresholdPolicy policy) : policy_(std::move(policy)) {}
    int action(const Belief& pi, int level, std::span<const int>, Rng&) const override {
        return policy_.decide(pi, level);
    }
    std::string name() const override { return "linear"; }
    const LinearThresholdPolicy& policy() const { return policy_; }

private:
    LinearThresholdPolicy policy_;
};

class GridPolicyAdapter : public MiningPolicy {
public:
    explicit GridPolicyAdapter(std::shared_ptr<const ValueTable> table)
        : table_(std::move(table)) {}
    int action(const Belief& pi, int level, std::span<const int>, Rng&) const override {
        return policy_action(*table_, pi, level);
    }
    std::string name() const override { return "vi"; }
    const ValueTable& table() const { return *table_; }

private:
    std::shared_ptr<const ValueTable> table_;
};

/// Observation-window softmax policy (the reinforcement-learning baseline):
///   Pr(u) = exp(theta_{l,u} . W_t) / sum_v exp(theta_{l,v} . W_t)
/// with W_t the last `window_size` observation indices, newest first and
/// zero-padded before enough observations exist.
class SoftmaxWindowPolicy : public MiningPolicy {
public:
    SoftmaxWindowPolicy(int num_stops, int window_size)
        : num_stops_(num_stops),
          window_size_(window_size),
          params_(static_cast<std::size_t>(num_stops) * 2 * window_size, 0.0) {}

    int num_stops() const { return num_stops_; }
    int window_size() const { return window_size_; }

    const std::vector<double>& parameters() const { return params_; }
    void set_parameters(std::vector<double> params);

    /// theta_{l,u}(k); l and u are 1-based, k is 0-based into the window.
    double param(int level, int action, int k) const {
        return params_[index(level, action, k)];
    }
    double& param(int level, int action, int k) { return params_[index(level, action, k)]; }

    double prob_mine(int level, std::span<const int> observations) const;

    int action(const Belief&, int level, std::span<const int> observations,
               Rng& rng) const override {
        return rng.bernoulli(prob_mine(level, observations)) ? 2 : 1;
    }
    std::string name() const override { return "softmax"; }

private:
    std::size_t index(int level, int action, int k) const {
        return (static_cast<std::size_t>(level - 1) * 2 + (action - 1)) * window_size_ + k;
    }

    int num_stops_;
    int window_size_;
    std::vector<double> params_;
};

FirstLPolicy baseline_first_l();
RandomPolicy baseline_random(double p_mine);
SoftmaxWindowPolicy baseline_softmax(int num_stops, int window_size = 2);

}  // namespace multistop
