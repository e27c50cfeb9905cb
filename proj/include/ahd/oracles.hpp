#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ahd/instance.hpp"
#include "ahd/numeric.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Desk-scale exact references. Each oracle is exhaustive over a deliberately
// small search space; the size gates keep runtimes in the milliseconds. These
// anchor the gap reports and the solver acceptance checks.
// ----------------------------------------------------------------------------

/// Held-Karp optimal closed-tour length. Gated at n <= 13.
inline double exact_tsp(const EuclideanInstance& inst) {
    const int n = inst.n;
    if (n > 13) throw std::invalid_argument("exact_tsp handles n <= 13");
    if (n < 2) return 0.0;
    const Matrix d = inst.distances();
    const int c = n - 1;  // nodes 1..n-1; node 0 anchors the tour
    const std::size_t full = std::size_t{1} << c;
    const double inf = std::numeric_limits<double>::infinity();

    // dp[mask][j]: cheapest path 0 -> ... -> j+1 visiting exactly mask.
    std::vector<double> dp(full * static_cast<std::size_t>(c), inf);
    for (int j = 0; j < c; ++j) dp[(std::size_t{1} << j) * c + j] = d(0, j + 1);
    for (std::size_t mask = 1; mask < full; ++mask) {
        for (int j = 0; j < c; ++j) {
            if (!(mask >> j & 1)) continue;
            const double cur = dp[mask * c + j];
            if (cur == inf) continue;
            for (int k = 0; k < c; ++k) {
                if (mask >> k & 1) continue;
                const std::size_t next = mask | (std::size_t{1} << k);
                double& slot = dp[next * c + k];
                const double cost = cur + d(j + 1, k + 1);
                if (cost < slot) slot = cost;
            }
        }
    }
    double best = inf;
    for (int j = 0; j < c; ++j) best = std::min(best, dp[(full - 1) * c + j] + d(j + 1, 0));
    return best;
}

namespace detail {

inline void mkp_search(const KnapsackInstance& inst, int j, double value,
                       const std::vector<double>& used, const std::vector<double>& suffix,
                       double& best) {
    if (value > best) best = value;
    if (j == inst.n || value + suffix[j] <= best) return;
    // Include item j when it fits every constraint. The include branch copies
    // the load vector so partial sums always accumulate in ascending item
    // order, which keeps feasibility decisions reproducible bit for bit.
    bool fits = true;
    for (int i = 0; i < inst.m(); ++i)
        if (used[i] + inst.weights(j, i) > inst.capacities[i]) {
            fits = false;
            break;
        }
    if (fits) {
        std::vector<double> next = used;
        for (int i = 0; i < inst.m(); ++i) next[i] += inst.weights(j, i);
        mkp_search(inst, j + 1, value + inst.values[j], next, suffix, best);
    }
    mkp_search(inst, j + 1, value, used, suffix, best);
}

}  // namespace detail

/// Exact optimum by depth-first branch and bound with a remaining-value bound.
/// Gated at n <= 20.
inline double exact_mkp(const KnapsackInstance& inst) {
    if (inst.n > 20) throw std::invalid_argument("exact_mkp handles n <= 20");
    std::vector<double> suffix(inst.n + 1, 0.0);
    for (int j = inst.n - 1; j >= 0; --j) suffix[j] = suffix[j + 1] + inst.values[j];
    double best = 0.0;
    detail::mkp_search(inst, 0, 0.0, std::vector<double>(inst.m(), 0.0), suffix, best);
    return best;
}

/// Exhaustive optimum over customer partitions into capacity-feasible routes
/// with per-route exact ordering. `open_routes` applies the open objective:
/// exactly one route skips its return edge. Gated at 8 customers.
inline double exact_routing(const RoutingInstance& inst, bool open_routes) {
    const int customers = inst.base.n - 1;
    if (customers > 8) throw std::invalid_argument("exact_routing handles <= 8 customers");
    if (inst.depot_index != 0) throw std::invalid_argument("depot must be node 0");
    if (customers == 0) return 0.0;
    const Matrix d = inst.base.distances();
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t full = std::size_t{1} << customers;

    // path[mask][j]: cheapest depot-start path through mask ending at j+1.
    std::vector<double> path(full * static_cast<std::size_t>(customers), inf);
    for (int j = 0; j < customers; ++j)
        path[(std::size_t{1} << j) * customers + j] = d(0, j + 1);
    for (std::size_t mask = 1; mask < full; ++mask)
        for (int j = 0; j < customers; ++j) {
            if (!(mask >> j & 1)) continue;
            const double cur = path[mask * customers + j];
            if (cur == inf) continue;
            for (int k = 0; k < customers; ++k) {
                if (mask >> k & 1) continue;
                double& slot = path[(mask | (std::size_t{1} << k)) * customers + k];
                const double cost = cur + d(j + 1, k + 1);
                if (cost < slot) slot = cost;
            }
        }

    // Single-route costs on capacity-feasible subsets, closed and open.
    std::vector<long> demand_of(full, 0);
    for (std::size_t mask = 1; mask < full; ++mask) {
        const int low = std::countr_zero(mask);
        demand_of[mask] = demand_of[mask & (mask - 1)] + inst.demands[low + 1];
    }
    std::vector<double> closed(full, inf), open(full, inf);
    for (std::size_t mask = 1; mask < full; ++mask) {
        if (demand_of[mask] > inst.capacity) continue;
        for (int j = 0; j < customers; ++j) {
            if (!(mask >> j & 1)) continue;
            const double tail = path[mask * customers + j];
            closed[mask] = std::min(closed[mask], tail + d(j + 1, 0));
            open[mask] = std::min(open[mask], tail);
        }
    }

    // Partition into closed routes; the submask holding the lowest unserved
    // customer avoids double-counting permutations of the same partition.
    std::vector<double> part(full, inf);
    part[0] = 0.0;
    for (std::size_t mask = 1; mask < full; ++mask) {
        const std::size_t low = mask & (0 - mask);
        for (std::size_t sub = mask; sub; sub = (sub - 1) & mask) {
            if (!(sub & low) || closed[sub] == inf) continue;
            const double rest = part[mask ^ sub];
            if (rest == inf) continue;
            part[mask] = std::min(part[mask], closed[sub] + rest);
        }
    }
    if (!open_routes) return part[full - 1];

    double best = inf;
    for (std::size_t tail = 1; tail < full; ++tail) {
        if (open[tail] == inf) continue;
        const double rest = part[(full - 1) ^ tail];
        if (rest == inf) continue;
        best = std::min(best, open[tail] + rest);
    }
    return best;
}

}  // namespace ahd
