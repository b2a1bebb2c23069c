#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "multistop/matrix.hpp"

namespace multistop {

/// Point on the probability simplex over hidden states.
using Belief = std::vector<double>;

/// Tolerance for stochasticity / simplex-membership checks. Matrices come
/// from data estimation and must not fail on rounding.
inline constexpr double kProbTol = 1e-12;

/// 2x2 minors are compared against -kMinorTol to absorb float noise.
inline constexpr double kMinorTol = 1e-12;

/// Hidden-Markov mining model: total computing power evolves by `transition`,
/// is seen through PoW difficulty via `observation`, and mining at state x
/// pays `reward_mine[x]` (the probability of winning the block, decreasing in
/// x). The device may mine `num_stops` times, discounting by `discount`.
struct PomdpModel {
    Matrix transition;                ///< |X| x |X|, row-stochastic
    Matrix observation;               ///< |X| x |Y|, row-stochastic
    std::vector<double> reward_mine;  ///< length |X|, non-increasing, in [0,1]
    double discount = 0.9;
    int num_stops = 1;
    Belief initial_belief;

    int num_states() const { return static_cast<int>(transition.rows()); }
    int num_observations() const { return static_cast<int>(observation.cols()); }
};

/// Throws std::invalid_argument when field shapes disagree. Probabilistic
/// invariants are the job of validate_model, which reports instead of throwing.
void check_dimensions(const PomdpModel& model);

struct ValidationCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool all_pass() const;
    /// The checks that gate acceptance of a model: stochasticity, TP2 of P
    /// and B, monotone reward, valid initial belief. The tri-diagonal
    /// dominant-diagonal shape of P is reported but does not gate (it is a
    /// sufficient construction for TP2, not a requirement).
    bool assumptions_pass() const;
    const ValidationCheck* find(const std::string& name) const;
};

/// Report-only model validation; never mutates the model.
ValidationReport validate_model(const PomdpModel& model);

/// True iff every 2x2 minor (i1<i2, j1<j2) is >= -kMinorTol.
/// Throws std::invalid_argument for an empty matrix.
bool is_tp2(const Matrix& m);

/// Monotone likelihood ratio order on beliefs. MLR is a partial order:
/// a >= b iff a(j)b(i) >= b(j)a(i) for all i < j.
enum class MlrOrder { Greater, Less, Equal, Incomparable };

MlrOrder mlr_compare(const Belief& a, const Belief& b);

/// Convenience: a >=_r b (Greater or Equal).
bool mlr_geq(const Belief& a, const Belief& b);

class impossible_observation : public std::runtime_error {
public:
    explicit impossible_observation(const std::string& what) : std::runtime_error(what) {}
};

struct FilterResult {
    Belief posterior;
    double likelihood = 0.0;  ///< sigma(pi, y) = 1^T B_y P^T pi
};

/// One Bayesian filter step T(pi, y) = B_y P^T pi / sigma(pi, y).
/// `observation` is 1-based, matching Y = {1..|Y|}. The posterior is
/// renormalized so drift cannot accumulate over long rollouts. A zero
/// likelihood means the observation is impossible under the predicted belief
/// (model/data mismatch) and raises impossible_observation.
FilterResult belief_update(const PomdpModel& model, const Belief& pi, int observation);

/// Expected one-step reward: 0 for u=1 (don't mine), r^T pi for u=2 (mine).
double reward_of_belief(const PomdpModel& model, const Belief& pi, int action);

/// Stop-counting augmentation: states ordered ((1,1)..(1,|X|), ...,
/// (L,1)..(L,|X|), absorbing). Continuing keeps the stop level; mining
/// advances it, and mining at the last level moves to the absorbing state,
/// which loops on itself.
struct AugmentedModel {
    Matrix transition_continue;
    Matrix transition_mine;

    int size() const { return static_cast<int>(transition_continue.rows()); }
};

AugmentedModel build_augmented_model(const PomdpModel& model);

/// Entries non-negative and summing to 1 within kProbTol.
bool is_valid_belief(const Belief& pi);

bool rows_stochastic(const Matrix& m, double tol = kProbTol);

}  // namespace multistop
