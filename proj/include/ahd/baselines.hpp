#pragma once

#include <stdexcept>
#include <string>

#include "ahd/domain.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Hand-written starting heuristics, one per domain. The constructive pair is
// the classical nearest-neighbor rule; ACO domains use the standard
// desirability priors (inverse distance, prize over distance, value over mean
// weight). These double as the seed code of improve-from-code sessions.
// ----------------------------------------------------------------------------

inline std::string baseline_source(Domain d) {
    switch (d) {
        case Domain::tsp_c:
            return R"(def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):
    best = unvisited_nodes[0]
    best_d = distance_matrix[current_node][best]
    for j in unvisited_nodes:
        d = distance_matrix[current_node][j]
        if d < best_d:
            best_d = d
            best = j
    return best
)";
        case Domain::cvrp_c:
        case Domain::ovrp_c:
            return R"(def select_next_node(current_node, depot, feasible_unvisited, capacity_remaining, demands, distance_matrix):
    if len(feasible_unvisited) == 0:
        return depot
    best = feasible_unvisited[0]
    best_d = distance_matrix[current_node][best]
    for j in feasible_unvisited:
        d = distance_matrix[current_node][j]
        if d < best_d:
            best_d = d
            best = j
    return best
)";
        case Domain::tsp_aco:
            return R"(def heuristic(distance_matrix):
    n = len(distance_matrix)
    eta = zeros(n, n)
    for i in range(n):
        for j in range(n):
            if i != j:
                eta[i][j] = 1.0 / distance_matrix[i][j]
    return eta
)";
        case Domain::cvrp_aco:
            return R"(def heuristic(distance_matrix, coordinates, demands, capacity):
    n = len(distance_matrix)
    eta = zeros(n, n)
    for i in range(n):
        for j in range(n):
            if i != j:
                eta[i][j] = 1.0 / distance_matrix[i][j]
    return eta
)";
        case Domain::op_aco:
            return R"(def heuristic(prize, distance, maxlen):
    n = len(prize)
    eta = zeros(n, n)
    for i in range(n):
        for j in range(n):
            if i != j:
                eta[i][j] = prize[j] / distance[i][j]
    return eta
)";
        case Domain::mkp_aco:
            return R"(def heuristic(prize, weight):
    n = len(prize)
    eta = zeros(n)
    for j in range(n):
        eta[j] = prize[j] / mean(weight[j])
    return eta
)";
    }
    throw std::logic_error("unknown domain");
}

}  // namespace ahd
