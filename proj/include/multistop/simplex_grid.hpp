#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "multistop/model.hpp"

namespace multistop {

/// Regular lattice on the belief simplex: all points whose coordinates are
/// non-negative multiples of 1/d summing to 1. Points are enumerated
/// lexicographically by integer composition, and index_of ranks a
/// composition in that order combinatorially, so lookups need no hashing.
class SimplexGrid {
public:
    SimplexGrid(int num_states, int resolution);

    int num_states() const { return num_states_; }
    int resolution() const { return resolution_; }
    int size() const { return static_cast<int>(coords_.size() / num_states_); }

    static std::int64_t point_count(int num_states, int resolution);

    std::span<const double> point(int p) const {
        return {coords_.data() + static_cast<std::size_t>(p) * num_states_,
                static_cast<std::size_t>(num_states_)};
    }
    Belief belief(int p) const {
        auto s = point(p);
        return Belief(s.begin(), s.end());
    }
    std::span<const int> composition(int p) const {
        return {comps_.data() + static_cast<std::size_t>(p) * num_states_,
                static_cast<std::size_t>(num_states_)};
    }

    int index_of(std::span<const int> composition) const;

    /// Index of the Euclidean-nearest lattice point to an arbitrary belief.
    int nearest_index(const Belief& pi) const;

    /// Lattice points reachable by moving one 1/d unit of mass between two
    /// coordinates; this adjacency defines connectivity on the grid.
    std::vector<int> neighbors(int p) const;

    /// Maximal totally-MLR-ordered segments L(e_vertex, pibar): each returned
    /// list starts at the vertex and walks outward (vertex share decreasing).
    std::vector<std::vector<int>> lines_through_vertex(int vertex) const;

private:
    int num_states_;
    int resolution_;
    std::vector<int> comps_;
    std::vector<double> coords_;
    std::vector<std::int64_t> count_table_;  ///< compositions of m into q parts

    std::int64_t compositions(int m, int q) const;
};

}  // namespace multistop
