#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ahd/domain.hpp"
#include "ahd/instance.hpp"
#include "ahd/program.hpp"
#include "ahd/solution.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Step-by-step construction. The framework owns candidate filtering,
// termination, and the objective; the program only picks the next element.
// Selector failures surface in the result status, never as exceptions.
// ----------------------------------------------------------------------------

struct ConstructiveConfig {
    Domain domain = Domain::tsp_c;
    int start_node = 0;

    bool operator==(const ConstructiveConfig&) const = default;
};

struct ConstructResult {
    ExecStatus status = ExecStatus::ok;
    std::string diagnostics;
    Solution solution;  // meaningful only when status == ok

    bool ok() const { return status == ExecStatus::ok; }
};

namespace detail {

inline int selected_index(const ExecutionOutcome& out) {
    return static_cast<int>(out.value.as_number_unchecked());
}

}  // namespace detail

/// Tour construction: start at config.start_node, consult the selector until
/// every node is visited. The closing edge back to the start counts.
inline ConstructResult construct_tsp(const EuclideanInstance& inst,
                                     const HeuristicProgram& program,
                                     const ConstructiveConfig& config) {
    const int n = inst.n;
    if (config.start_node < 0 || config.start_node >= n)
        throw std::invalid_argument("start node outside the instance");
    const Matrix dist = inst.distances();

    std::vector<int> tour{config.start_node};
    std::vector<int> unvisited;
    for (int v = 0; v < n; ++v)
        if (v != config.start_node) unvisited.push_back(v);

    ConstructResult res;
    int cur = config.start_node;
    while (!unvisited.empty()) {
        SelectorCall call;
        call.current_node = cur;
        call.anchor = 0;  // destination_node is node 0 by the interface contract
        call.feasible = unvisited;
        call.distances = &dist;
        call.allow_anchor_return = false;
        ExecutionOutcome out = invoke_selector(program, call);
        if (!out.ok()) {
            res.status = out.status;
            res.diagnostics = out.diagnostics;
            return res;
        }
        const int next = detail::selected_index(out);
        tour.push_back(next);
        unvisited.erase(std::find(unvisited.begin(), unvisited.end(), next));
        cur = next;
    }
    res.solution.domain = config.domain;
    res.solution.routes = {std::move(tour)};
    res.solution.objective = tour_objective(dist, res.solution.routes.front());
    res.solution.feasible = check_solution(inst, res.solution);
    return res;
}

/// Vehicle-route construction shared by the closed and open readings. The
/// selector sees only capacity-feasible customers; returning the depot closes
/// the current route, and an empty feasible set forces a depot return without
/// consulting the program. Choosing the depot while already there is rejected
/// by the selector contract, so every step makes progress.
inline ConstructResult construct_vrp(const RoutingInstance& inst,
                                     const HeuristicProgram& program,
                                     const ConstructiveConfig& config) {
    const int n = inst.base.n;
    const int depot = inst.depot_index;
    if (config.start_node != depot)
        throw std::invalid_argument("vrp construction starts at the depot");
    for (int v = 0; v < n; ++v)
        if (v != depot && inst.demands[static_cast<std::size_t>(v)] > inst.capacity)
            throw std::invalid_argument("customer demand exceeds vehicle capacity");

    const Matrix dist = inst.base.distances();
    std::vector<char> unserved(static_cast<std::size_t>(n), 1);
    unserved[static_cast<std::size_t>(depot)] = 0;
    int remaining = n - 1;

    ConstructResult res;
    std::vector<std::vector<int>> routes;
    std::vector<int> route;
    int cur = depot;
    int capacity = inst.capacity;
    while (remaining > 0) {
        std::vector<int> feasible;
        for (int v = 0; v < n; ++v)
            if (unserved[static_cast<std::size_t>(v)] &&
                inst.demands[static_cast<std::size_t>(v)] <= capacity)
                feasible.push_back(v);
        if (feasible.empty()) {
            // At the depot every customer fits (demand <= Q checked above), so a
            // forced return always leaves a non-empty route behind.
            routes.push_back(std::move(route));
            route.clear();
            cur = depot;
            capacity = inst.capacity;
            continue;
        }
        SelectorCall call;
        call.current_node = cur;
        call.anchor = depot;
        call.feasible = feasible;
        call.capacity_remaining = static_cast<double>(capacity);
        call.demands = &inst.demands;
        call.distances = &dist;
        call.allow_anchor_return = cur != depot;
        ExecutionOutcome out = invoke_selector(program, call);
        if (!out.ok()) {
            res.status = out.status;
            res.diagnostics = out.diagnostics;
            return res;
        }
        const int next = detail::selected_index(out);
        if (next == depot) {
            routes.push_back(std::move(route));
            route.clear();
            cur = depot;
            capacity = inst.capacity;
        } else {
            route.push_back(next);
            unserved[static_cast<std::size_t>(next)] = 0;
            --remaining;
            capacity -= inst.demands[static_cast<std::size_t>(next)];
            cur = next;
        }
    }
    if (!route.empty()) routes.push_back(std::move(route));

    res.solution.domain = config.domain;
    res.solution.routes = std::move(routes);
    res.solution.objective = routes_objective(dist, res.solution.routes, depot,
                                              config.domain == Domain::ovrp_c);
    res.solution.feasible = check_solution(inst, res.solution);
    return res;
}

/// Build one solution with the bound selector program. The config picks the
/// domain reading: cvrp_c and ovrp_c share instances and construction and
/// differ only in whether the final route's return edge counts.
inline ConstructResult construct_route(const Instance& instance, const HeuristicProgram& program,
                                       const ConstructiveConfig& config) {
    if (program.domain != config.domain)
        throw std::invalid_argument("program bound to a different domain");
    switch (config.domain) {
        case Domain::tsp_c:
            return construct_tsp(std::get<EuclideanInstance>(instance), program, config);
        case Domain::cvrp_c:
        case Domain::ovrp_c:
            return construct_vrp(std::get<RoutingInstance>(instance), program, config);
        default:
            throw std::invalid_argument("construct_route requires a constructive domain");
    }
}

}  // namespace ahd
