#include "multistop/threshold_policy.hpp"

#include <cmath>
#include <stdexcept>

#include "multistop/simplex_grid.hpp"

namespace multistop {

double LinearThresholdPolicy::decision_value(const Belief& pi, int level) const {
    if (level < 1 || level > num_stops())
        throw std::invalid_argument("LinearThresholdPolicy: level out of range");
    if (static_cast<int>(pi.size()) != num_states)
        throw std::invalid_argument("LinearThresholdPolicy: belief dimension mismatch");
    auto th = theta.row(level - 1);
    double v = -th[0];
    for (int i = 1; i < num_states - 1; ++i) v += th[i] * pi[i - 1];
    v += pi[num_states - 2];
    return v;
}

int LinearThresholdPolicy::decide(const Belief& pi, int level) const {
    return decision_value(pi, level) >= 0.0 ? 2 : 1;
}

FeasibilityReport check_feasible(const Matrix& theta) {
    const double tol = 1e-12;
    const int levels = static_cast<int>(theta.rows());
    const int width = static_cast<int>(theta.cols());
    FeasibilityReport report;

    for (int l = 0; l < levels; ++l)
        for (int i = 0; i < width; ++i)
            if (theta(l, i) < -tol) {
                report.nonnegative = false;
                report.violations.push_back({1, l + 1, i + 1});
            }

    if (width >= 2) {
        for (int l = 0; l < levels; ++l) {
            if (theta(l, 1) < 1.0 - tol) {
                report.weight_bounds = false;
                report.violations.push_back({2, l + 1, 2});
            }
            for (int i = 2; i < width; ++i)
                if (theta(l, i) > theta(l, 1) + tol) {
                    report.weight_bounds = false;
                    report.violations.push_back({2, l + 1, i + 1});
                }
        }
    }

    for (int l = 0; l + 1 < levels; ++l) {
        if (theta(l, 0) > theta(l + 1, 0) + tol) {
            report.level_monotone = false;
            report.violations.push_back({3, l + 1, 1});
        }
        for (int i = 1; i < width; ++i)
            if (theta(l, i) < theta(l + 1, i) - tol) {
                report.level_monotone = false;
                report.violations.push_back({3, l + 1, i + 1});
            }
    }
    return report;
}

LinearThresholdPolicy from_spherical(const SphericalParams& params) {
    const Matrix& phi = params.phi;
    const int levels = static_cast<int>(phi.rows());
    const int width = static_cast<int>(phi.cols());
    if (levels < 1 || width < 1)
        throw std::invalid_argument("from_spherical: empty parameter array");

    auto sin2 = [](double x) {
        double s = std::sin(x);
        return s * s;
    };

    LinearThresholdPolicy policy;
    policy.num_states = width + 1;
    policy.theta = Matrix(levels, width);

    for (int l = 1; l <= levels; ++l) {
        double prod = 1.0;
        for (int j = l; j <= levels - 1; ++j) prod *= sin2(phi(j - 1, 0));
        policy.theta(l - 1, 0) = phi(0, 0) * phi(0, 0) * prod;

        if (width >= 2) {
            double prod2 = 1.0;
            for (int j = 2; j <= l; ++j) prod2 *= sin2(phi(j - 1, 1));
            policy.theta(l - 1, 1) = 1.0 + phi(0, 1) * phi(0, 1) * prod2;

            for (int i = 3; i <= width; ++i) {
                double prodi = 1.0;
                for (int j = 1; j <= levels; ++j) prodi *= sin2(phi(j - 1, i - 1));
                policy.theta(l - 1, i - 1) = policy.theta(l - 1, 1) * prodi;
            }
        }
    }
    return policy;
}

bool nestedness_of_policy(const LinearThresholdPolicy& policy, int grid_resolution) {
    if (policy.num_stops() <= 1) return true;
    SimplexGrid grid(policy.num_states, grid_resolution);
    for (int p = 0; p < grid.size(); ++p) {
        Belief pi = grid.belief(p);
        for (int l = 2; l <= policy.num_stops(); ++l)
            if (policy.decide(pi, l) == 2 && policy.decide(pi, l - 1) != 2) return false;
    }
    return true;
}

}  // namespace multistop
