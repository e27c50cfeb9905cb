#pragma once

#include <cstddef>
#include <vector>

#include "ahd/domain.hpp"
#include "ahd/instance.hpp"
#include "ahd/numeric.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Solver output shared by both backbones. Routing domains fill `routes` with
// the customer order per vehicle (depot omitted; TSP and OP use a single
// entry), MKP fills `items`. `feasible` records the framework's own recheck
// against the instance constraints.
// ----------------------------------------------------------------------------
struct Solution {
    Domain domain = Domain::tsp_c;
    std::vector<std::vector<int>> routes;
    std::vector<int> items;
    double objective = 0.0;
    bool feasible = false;
};

namespace detail {

inline double edge(const Matrix& d, int a, int b) {
    return d(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
}

}  // namespace detail

/// Closed-cycle length of a full tour.
inline double tour_objective(const Matrix& dist, const std::vector<int>& tour) {
    if (tour.size() < 2) return 0.0;
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < tour.size(); ++i)
        len += detail::edge(dist, tour[i], tour[i + 1]);
    len += detail::edge(dist, tour.back(), tour.front());
    return len;
}

/// Total length of a multi-route solution; every route starts at the depot.
/// `open_final` drops the last route's return edge (the OVRP objective).
inline double routes_objective(const Matrix& dist, const std::vector<std::vector<int>>& routes,
                               int depot, bool open_final) {
    double len = 0.0;
    for (std::size_t r = 0; r < routes.size(); ++r) {
        const auto& route = routes[r];
        if (route.empty()) continue;
        len += detail::edge(dist, depot, route.front());
        for (std::size_t i = 0; i + 1 < route.size(); ++i)
            len += detail::edge(dist, route[i], route[i + 1]);
        if (!(open_final && r + 1 == routes.size()))
            len += detail::edge(dist, route.back(), depot);
    }
    return len;
}

/// Length of the orienteering loop depot -> visits -> depot.
inline double op_route_length(const Matrix& dist, const std::vector<int>& visits, int depot) {
    if (visits.empty()) return 0.0;
    double len = 0.0;
    int cur = depot;
    for (int v : visits) {
        len += detail::edge(dist, cur, v);
        cur = v;
    }
    return len + detail::edge(dist, cur, depot);
}

/// Collected prize; the depot's own prize counts since the loop starts there.
inline double op_objective(const std::vector<double>& prizes, const std::vector<int>& visits,
                           int depot) {
    double total = prizes[static_cast<std::size_t>(depot)];
    for (int v : visits) total += prizes[static_cast<std::size_t>(v)];
    return total;
}

inline double mkp_objective(const std::vector<double>& values, const std::vector<int>& items) {
    double total = 0.0;
    for (int j : items) total += values[static_cast<std::size_t>(j)];
    return total;
}

// ----------------------------------------------------------------------------
// Feasibility rechecks. These re-derive every constraint from the instance so
// solvers (and tests) can verify their own outputs.
// ----------------------------------------------------------------------------

/// Tour visits every node exactly once.
inline bool check_solution(const EuclideanInstance& inst, const Solution& sol) {
    if (sol.routes.size() != 1) return false;
    const auto& tour = sol.routes.front();
    if (static_cast<int>(tour.size()) != inst.n) return false;
    std::vector<char> seen(static_cast<std::size_t>(inst.n), 0);
    for (int v : tour) {
        if (v < 0 || v >= inst.n || seen[static_cast<std::size_t>(v)]) return false;
        seen[static_cast<std::size_t>(v)] = 1;
    }
    return true;
}

/// Every customer served exactly once, depot never inside a route, and each
/// route's demand within capacity.
inline bool check_solution(const RoutingInstance& inst, const Solution& sol) {
    const int n = inst.base.n;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    int served = 0;
    for (const auto& route : sol.routes) {
        if (route.empty()) return false;
        long load = 0;
        for (int v : route) {
            if (v < 0 || v >= n || v == inst.depot_index || seen[static_cast<std::size_t>(v)])
                return false;
            seen[static_cast<std::size_t>(v)] = 1;
            ++served;
            load += inst.demands[static_cast<std::size_t>(v)];
        }
        if (load > inst.capacity) return false;
    }
    return served == n - 1;
}

/// Distinct non-depot visits whose closed loop fits the length budget (with a
/// small tolerance for accumulated rounding).
inline bool check_solution(const OrienteeringInstance& inst, const Solution& sol) {
    if (sol.routes.size() != 1) return false;
    const int n = inst.base.n;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int v : sol.routes.front()) {
        if (v < 0 || v >= n || v == inst.depot_index || seen[static_cast<std::size_t>(v)])
            return false;
        seen[static_cast<std::size_t>(v)] = 1;
    }
    const double len = op_route_length(inst.base.distances(), sol.routes.front(), inst.depot_index);
    return len <= inst.max_length + 1e-9;
}

/// Distinct items satisfying every resource constraint.
inline bool check_solution(const KnapsackInstance& inst, const Solution& sol) {
    std::vector<char> seen(static_cast<std::size_t>(inst.n), 0);
    const int m = inst.m();
    std::vector<double> used(static_cast<std::size_t>(m), 0.0);
    for (int j : sol.items) {
        if (j < 0 || j >= inst.n || seen[static_cast<std::size_t>(j)]) return false;
        seen[static_cast<std::size_t>(j)] = 1;
        for (int i = 0; i < m; ++i)
            used[static_cast<std::size_t>(i)] +=
                inst.weights(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
    }
    for (int i = 0; i < m; ++i)
        if (used[static_cast<std::size_t>(i)] > inst.capacities[static_cast<std::size_t>(i)] + 1e-9)
            return false;
    return true;
}

inline bool check_solution(const Instance& inst, const Solution& sol) {
    return std::visit([&](const auto& v) { return check_solution(v, sol); }, inst);
}

}  // namespace ahd
