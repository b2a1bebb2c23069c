#include "multistop/simplex_grid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

namespace multistop {

std::int64_t SimplexGrid::point_count(int num_states, int resolution) {
    // C(resolution + num_states - 1, num_states - 1)
    std::int64_t c = 1;
    for (int i = 1; i < num_states; ++i) {
        c = c * (resolution + i) / i;
    }
    return c;
}

SimplexGrid::SimplexGrid(int num_states, int resolution)
    : num_states_(num_states), resolution_(resolution) {
    if (num_states < 1 || resolution < 1)
        throw std::invalid_argument("SimplexGrid: need num_states >= 1 and resolution >= 1");
    std::int64_t total = point_count(num_states, resolution);
    if (total > 5'000'000)
        throw std::invalid_argument("SimplexGrid: lattice too large for this state dimension");

    // compositions(m, q) for m <= resolution, q <= num_states
    count_table_.assign(static_cast<std::size_t>(resolution + 1) * (num_states + 1), 0);
    for (int q = 0; q <= num_states; ++q)
        for (int m = 0; m <= resolution; ++m) {
            std::int64_t v;
            if (q == 0)
                v = (m == 0) ? 1 : 0;
            else if (m == 0)
                v = 1;
            else
                v = count_table_[(m - 1) * (num_states + 1) + q] +
                    count_table_[m * (num_states + 1) + (q - 1)];
            count_table_[m * (num_states + 1) + q] = v;
        }

    comps_.reserve(static_cast<std::size_t>(total) * num_states);
    coords_.reserve(static_cast<std::size_t>(total) * num_states);
    std::vector<int> cur(num_states, 0);
    // lexicographic enumeration over (k_1, ..., k_{n-1}); k_n absorbs the rest
    const int n = num_states;
    std::vector<int> stack_pos;
    // iterative odometer
    std::function<void(int, int)> rec = [&](int idx, int rem) {
        if (idx == n - 1) {
            cur[idx] = rem;
            comps_.insert(comps_.end(), cur.begin(), cur.end());
            for (int i = 0; i < n; ++i)
                coords_.push_back(static_cast<double>(cur[i]) / resolution);
            return;
        }
        for (int k = 0; k <= rem; ++k) {
            cur[idx] = k;
            rec(idx + 1, rem - k);
        }
    };
    rec(0, resolution);
}

std::int64_t SimplexGrid::compositions(int m, int q) const {
    return count_table_[static_cast<std::size_t>(m) * (num_states_ + 1) + q];
}

int SimplexGrid::index_of(std::span<const int> composition) const {
    if (static_cast<int>(composition.size()) != num_states_)
        throw std::invalid_argument("SimplexGrid::index_of: wrong dimension");
    std::int64_t rank = 0;
    int rem = resolution_;
    for (int i = 0; i < num_states_ - 1; ++i) {
        int k = composition[i];
        if (k < 0 || k > rem) throw std::invalid_argument("SimplexGrid::index_of: not on lattice");
        for (int v = 0; v < k; ++v) rank += compositions(rem - v, num_states_ - i - 1);
        rem -= k;
    }
    if (composition[num_states_ - 1] != rem)
        throw std::invalid_argument("SimplexGrid::index_of: coordinates do not sum to resolution");
    return static_cast<int>(rank);
}

int SimplexGrid::nearest_index(const Belief& pi) const {
    if (static_cast<int>(pi.size()) != num_states_)
        throw std::invalid_argument("SimplexGrid::nearest_index: wrong dimension");
    const int n = num_states_;
    std::vector<int> k(n);
    std::vector<double> frac(n);
    int sum = 0;
    for (int i = 0; i < n; ++i) {
        double x = std::max(0.0, pi[i]) * resolution_;
        double f = std::floor(x);
        k[i] = static_cast<int>(f);
        frac[i] = x - f;
        sum += k[i];
    }
    int deficit = resolution_ - sum;
    if (deficit > 0) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return frac[a] > frac[b]; });
        for (int j = 0; j < deficit && j < n; ++j) k[order[j]] += 1;
        deficit -= std::min(deficit, n);
    }
    while (deficit > 0) {  // only reachable for badly unnormalized input
        k[0] += 1;
        --deficit;
    }
    while (deficit < 0) {
        for (int i = 0; i < n && deficit < 0; ++i)
            if (k[i] > 0) {
                k[i] -= 1;
                ++deficit;
            }
    }
    return index_of(k);
}

std::vector<int> SimplexGrid::neighbors(int p) const {
    auto k = composition(p);
    std::vector<int> out;
    std::vector<int> q(k.begin(), k.end());
    for (int i = 0; i < num_states_; ++i) {
        if (k[i] == 0) continue;
        for (int j = 0; j < num_states_; ++j) {
            if (i == j) continue;
            q[i] -= 1;
            q[j] += 1;
            out.push_back(index_of(q));
            q[i] += 1;
            q[j] -= 1;
        }
    }
    return out;
}

std::vector<std::vector<int>> SimplexGrid::lines_through_vertex(int vertex) const {
    std::vector<int> vert_comp(num_states_, 0);
    vert_comp[vertex] = resolution_;
    const int vidx = index_of(vert_comp);

    // group by primitive direction of the non-vertex coordinates
    std::map<std::vector<int>, std::vector<std::pair<int, int>>> groups;
    for (int p = 0; p < size(); ++p) {
        auto k = composition(p);
        std::vector<int> rest;
        rest.reserve(num_states_ - 1);
        int mass = 0;
        for (int i = 0; i < num_states_; ++i)
            if (i != vertex) {
                rest.push_back(k[i]);
                mass += k[i];
            }
        if (mass == 0) continue;  // the vertex lies on every line
        int g = 0;
        for (int v : rest) g = std::gcd(g, v);
        for (int& v : rest) v /= g;
        groups[rest].push_back({k[vertex], p});
    }

    std::vector<std::vector<int>> lines;
    lines.reserve(groups.size());
    for (auto& [dir, pts] : groups) {
        std::sort(pts.begin(), pts.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<int> line{vidx};
        for (const auto& [share, p] : pts) line.push_back(p);
        lines.push_back(std::move(line));
    }
    return lines;
}

}  // namespace multistop
