#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "multistop/model.hpp"
#include "multistop/simplex_grid.hpp"

namespace multistop {

struct SolveOptions {
    int max_iterations = 2000;
    double tolerance = 1e-8;  ///< sup-norm change between sweeps
    bool parallel = true;
};

/// Value function and greedy actions tabulated on a simplex lattice, one
/// column per stop level l in {1..L}. Level L+1 is the zero boundary (the
/// budget is spent). Immutable once returned by the solver.
class ValueTable {
public:
    ValueTable(SimplexGrid grid, int num_levels)
        : grid_(std::move(grid)),
          num_levels_(num_levels),
          values_(static_cast<std::size_t>(grid_.size()) * num_levels, 0.0),
          actions_(static_cast<std::size_t>(grid_.size()) * num_levels, 1) {}

    const SimplexGrid& grid() const { return grid_; }
    int num_levels() const { return num_levels_; }

    double value(int point, int level) const {
        if (level > num_levels_) return 0.0;
        return values_[idx(point, level)];
    }
    int action(int point, int level) const { return actions_[idx(point, level)]; }

    void set(int point, int level, double value, int action) {
        values_[idx(point, level)] = value;
        actions_[idx(point, level)] = static_cast<std::uint8_t>(action);
    }

    bool converged = false;
    double final_residual = 0.0;
    int iterations = 0;
    std::vector<double> residual_history;

private:
    std::size_t idx(int point, int level) const {
        return static_cast<std::size_t>(point) * num_levels_ + (level - 1);
    }

    SimplexGrid grid_;
    int num_levels_;
    std::vector<double> values_;
    std::vector<std::uint8_t> actions_;
};

/// Solves the multiple-stopping Bellman recursion on the lattice:
///   Q(pi,l,2) = r^T pi + rho * sum_y V(T(pi,y), l+1) sigma(pi,y)
///   Q(pi,l,1) =          rho * sum_y V(T(pi,y), l)   sigma(pi,y)
/// with V(., L+1) = 0, V_0 = 0, and off-lattice children mapped to the
/// Euclidean-nearest lattice point. Exact ties in the argmax keep action 1
/// (don't mine), conserving the stop budget. Stops when the sup-norm sweep
/// change drops below options.tolerance; otherwise returns with
/// converged == false and the final residual.
ValueTable solve_value_iteration(const PomdpModel& model, int grid_resolution,
                                 const SolveOptions& options = {});

/// Grid indices where the tabulated action is mine / don't-mine at level l.
std::pair<std::vector<int>, std::vector<int>> extract_sets(const ValueTable& table, int level);

struct StructureLevel {
    bool monotone = false;   ///< one switch along every L(e_1,.) and L(e_n,.) lattice line
    bool connected = false;  ///< mine and don't-mine sets each one component
    bool nested = false;     ///< M^l inside M^{l-1}
};

struct StructureReport {
    std::vector<StructureLevel> levels;  ///< levels[l-1] describes stop level l
    bool all_pass() const {
        for (const auto& s : levels)
            if (!(s.monotone && s.connected && s.nested)) return false;
        return true;
    }
};

StructureReport verify_structure(const ValueTable& table);

/// Action at the nearest lattice representative of an arbitrary belief.
int policy_action(const ValueTable& table, const Belief& pi, int level);

}  // namespace multistop
