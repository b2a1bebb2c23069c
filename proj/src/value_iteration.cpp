#include "multistop/value_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "multistop/parallel.hpp"

namespace multistop {

ValueTable solve_value_iteration(const PomdpModel& model, int grid_resolution,
                                 const SolveOptions& options) {
    check_dimensions(model);
    if (model.num_stops < 1)
        throw std::invalid_argument("solve_value_iteration: needs num_stops >= 1");
    if (options.tolerance <= 0.0)
        throw std::invalid_argument("solve_value_iteration: tolerance must be positive");

    const int n = model.num_states();
    const int nobs = model.num_observations();
    const int levels = model.num_stops;
    SimplexGrid grid(n, grid_resolution);
    const int npts = grid.size();

    // Per (point, observation): one-step likelihood and the lattice index of
    // the updated belief. sigma sums to 1 over y for a stochastic model, so
    // the backup below is a rho-contraction on the lattice.
    std::vector<double> sigma(static_cast<std::size_t>(npts) * nobs, 0.0);
    std::vector<int> successor(static_cast<std::size_t>(npts) * nobs, 0);
    std::vector<double> mine_reward(npts, 0.0);

    parallel_for(
        npts,
        [&](std::size_t b, std::size_t e) {
            Belief posterior(n);
            for (std::size_t p = b; p < e; ++p) {
                Belief pi = grid.belief(static_cast<int>(p));
                mine_reward[p] = dot(model.reward_mine, pi);
                std::vector<double> predicted = transpose_apply(model.transition, pi);
                for (int y = 0; y < nobs; ++y) {
                    double s = 0.0;
                    for (int j = 0; j < n; ++j) {
                        posterior[j] = model.observation(j, y) * predicted[j];
                        s += posterior[j];
                    }
                    sigma[p * nobs + y] = s;
                    if (s > 0.0) {
                        for (double& v : posterior) v /= s;
                        successor[p * nobs + y] = grid.nearest_index(posterior);
                    }
                }
            }
        },
        options.parallel);

    ValueTable table(std::move(grid), levels);
    std::vector<double> current(static_cast<std::size_t>(npts) * (levels + 1), 0.0);
    std::vector<double> next(current.size(), 0.0);
    std::vector<std::uint8_t> actions(static_cast<std::size_t>(npts) * levels, 1);
    auto at = [levels](std::vector<double>& v, std::size_t p, int l) -> double& {
        return v[p * (levels + 1) + (l - 1)];  // column levels holds the zero boundary
    };

    const double rho = model.discount;
    double residual = 0.0;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        parallel_for(
            npts,
            [&](std::size_t b, std::size_t e) {
                for (std::size_t p = b; p < e; ++p) {
                    for (int l = levels; l >= 1; --l) {
                        double cont = 0.0, fut = 0.0;
                        for (int y = 0; y < nobs; ++y) {
                            double s = sigma[p * nobs + y];
                            if (s <= 0.0) continue;
                            std::size_t q = static_cast<std::size_t>(successor[p * nobs + y]);
                            cont += s * at(current, q, l);
                            fut += s * (l + 1 <= levels ? at(current, q, l + 1) : 0.0);
                        }
                        cont *= rho;
                        double mine = mine_reward[p] + rho * fut;
                        bool take = mine > cont;  // exact tie keeps don't-mine
                        at(next, p, l) = take ? mine : cont;
                        actions[p * levels + (l - 1)] = take ? 2 : 1;
                    }
                }
            },
            options.parallel);

        residual = 0.0;
        for (std::size_t i = 0; i < current.size(); ++i)
            residual = std::max(residual, std::abs(next[i] - current[i]));
        current.swap(next);
        table.residual_history.push_back(residual);
        if (residual < options.tolerance) {
            ++iter;
            break;
        }
    }

    table.converged = residual < options.tolerance;
    table.final_residual = residual;
    table.iterations = iter;
    for (int p = 0; p < npts; ++p)
        for (int l = 1; l <= levels; ++l)
            table.set(p, l, at(current, p, l), actions[static_cast<std::size_t>(p) * levels + (l - 1)]);
    return table;
}

std::pair<std::vector<int>, std::vector<int>> extract_sets(const ValueTable& table, int level) {
    if (level < 1 || level > table.num_levels())
        throw std::invalid_argument("extract_sets: level out of range");
    std::vector<int> mine, dont;
    for (int p = 0; p < table.grid().size(); ++p)
        (table.action(p, level) == 2 ? mine : dont).push_back(p);
    return {mine, dont};
}

namespace {

/// Actions along a lattice line ordered away from the vertex. Lines through
/// e_1 must read 2..2,1..1 (mine only near e_1); lines through e_n must read
/// 1..1,2..2.
bool single_switch(const ValueTable& table, const std::vector<int>& line, int level,
                   bool mine_first) {
    int prev = mine_first ? 2 : 1;
    for (int p : line) {
        int a = table.action(p, level);
        if (mine_first ? (a > prev) : (a < prev)) return false;
        prev = a;
    }
    return true;
}

bool component_connected(const SimplexGrid& grid, const std::vector<int>& pts) {
    if (pts.empty()) return true;
    std::vector<char> in_set(grid.size(), 0), seen(grid.size(), 0);
    for (int p : pts) in_set[p] = 1;
    std::vector<int> stack{pts.front()};
    seen[pts.front()] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        for (int nb : grid.neighbors(cur)) {
            if (in_set[nb] && !seen[nb]) {
                seen[nb] = 1;
                ++reached;
                stack.push_back(nb);
            }
        }
    }
    return reached == pts.size();
}

}  // namespace

StructureReport verify_structure(const ValueTable& table) {
    const SimplexGrid& grid = table.grid();
    const int n = grid.num_states();
    StructureReport report;
    report.levels.resize(table.num_levels());

    auto lines_low = grid.lines_through_vertex(0);
    auto lines_high = grid.lines_through_vertex(n - 1);

    for (int l = 1; l <= table.num_levels(); ++l) {
        StructureLevel& out = report.levels[l - 1];

        out.monotone = true;
        for (const auto& line : lines_low)
            out.monotone = out.monotone && single_switch(table, line, l, /*mine_first=*/true);
        for (const auto& line : lines_high)
            out.monotone = out.monotone && single_switch(table, line, l, /*mine_first=*/false);

        auto [mine, dont] = extract_sets(table, l);
        out.connected = component_connected(grid, mine) && component_connected(grid, dont);

        out.nested = true;
        if (l >= 2)
            for (int p : mine)
                if (table.action(p, l - 1) != 2) {
                    out.nested = false;
                    break;
                }
    }
    return report;
}

int policy_action(const ValueTable& table, const Belief& pi, int level) {
    if (level < 1 || level > table.num_levels())
        throw std::invalid_argument("policy_action: level out of range");
    return table.action(table.grid().nearest_index(pi), level);
}

}  // namespace multistop
