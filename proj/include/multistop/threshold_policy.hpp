#pragma once

#include <vector>

#include "multistop/matrix.hpp"
#include "multistop/model.hpp"

namespace multistop {

/// Linear mining policy: mine at stop level l iff
///   [theta_l  1  0] . [-1; pi] >= 0,
/// i.e. -theta_l(1) + sum_{i=2..n-1} theta_l(i) pi(i-1) + pi(n-1) >= 0.
/// theta is L x (n-1): per level, one threshold offset followed by the
/// belief-coefficient weights; the weight on pi(n-1) is fixed to 1 and on
/// pi(n) to 0. A boundary value of exactly 0 mines.
struct LinearThresholdPolicy {
    int num_states = 0;
    Matrix theta;  ///< L x (num_states - 1)

    int num_stops() const { return static_cast<int>(theta.rows()); }

    double decision_value(const Belief& pi, int level) const;
    /// 2 = mine, 1 = don't mine. Throws when level is out of [1, L].
    int decide(const Belief& pi, int level) const;
};

/// Unconstrained angle/magnitude parameters, L x (num_states - 1).
/// Entries (1,1) and (1,2) act as magnitudes; everything else enters only
/// through sin^2 terms, which is what makes the image feasible for free.
struct SphericalParams {
    Matrix phi;

    int num_stops() const { return static_cast<int>(phi.rows()); }
    int num_states() const { return static_cast<int>(phi.cols()) + 1; }
};

struct FeasibilityViolation {
    int condition = 0;  ///< 1, 2 or 3
    int level = 0;      ///< 1-based stop level
    int index = 0;      ///< 1-based theta component
};

struct FeasibilityReport {
    bool nonnegative = true;       ///< condition 1: theta_l(i) >= 0
    bool weight_bounds = true;     ///< condition 2: theta_l(2) >= 1, theta_l(i>2) <= theta_l(2)
    bool level_monotone = true;    ///< condition 3: offsets increase, weights decrease with l
    std::vector<FeasibilityViolation> violations;

    bool feasible() const { return nonnegative && weight_bounds && level_monotone; }
};

/// Itemized check of the three feasibility conditions (1e-12 slack).
FeasibilityReport check_feasible(const Matrix& theta);

/// Maps unconstrained spherical parameters onto a feasible policy:
///   theta_l(1)   = phi_1(1)^2 * prod_{j=l..L-1} sin^2(phi_j(1))
///   theta_l(2)   = 1 + phi_1(2)^2 * prod_{j=2..l} sin^2(phi_j(2))
///   theta_l(i>2) = theta_l(2) * prod_{j=1..L} sin^2(phi_j(i))
/// Every output passes check_feasible; this is asserted rather than assumed
/// because the i>2 product does not vary with l on its own.
LinearThresholdPolicy from_spherical(const SphericalParams& phi);

/// True iff mining at level l implies mining at level l-1 for every belief on
/// a dense lattice (default resolution 50).
bool nestedness_of_policy(const LinearThresholdPolicy& policy, int grid_resolution = 50);

}  // namespace multistop
