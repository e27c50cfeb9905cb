#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ahd/domain.hpp"
#include "ahd/instance.hpp"
#include "ahd/numeric.hpp"
#include "ahd/rng.hpp"
#include "ahd/solution.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Ant colony backbone. The program under evaluation only supplies eta; the
// colony, pheromone bookkeeping, and constraint masks live here. A run is a
// pure function of (instance, eta, config): ant k of iteration t draws from
// its own split stream, so constructions are order-independent and could run
// in parallel without changing results.
// ----------------------------------------------------------------------------

struct AcoConfig {
    int ants = 30;
    int iterations = 100;
    double decay = 0.9;
    double alpha = 1.0;
    double beta = 1.0;
    std::uint64_t rng_seed = 0;

    bool operator==(const AcoConfig&) const = default;
};

/// Colony settings per domain.
inline AcoConfig aco_defaults(Domain d) {
    switch (d) {
        case Domain::tsp_aco:
        case Domain::cvrp_aco: return AcoConfig{30, 100, 0.9, 1.0, 1.0, 0};
        case Domain::op_aco: return AcoConfig{20, 50, 0.9, 1.0, 1.0, 0};
        case Domain::mkp_aco: return AcoConfig{10, 50, 0.9, 1.0, 1.0, 0};
        default: throw std::invalid_argument("not an ACO domain");
    }
}

struct AcoResult {
    Solution best;
    std::vector<double> best_trace;  // best objective so far, one entry per iteration
};

/// Pheromone added per ant: minimization routes deposit inverse cost.
inline double route_deposit(double cost) { return 1.0 / cost; }

/// OP and MKP deposit the ant's objective scaled by the instance's total prize.
inline double prize_deposit(double total_prize, double objective) {
    return objective / total_prize;
}

/// The published stream contract: ant k of iteration t draws from this stream
/// and nothing else, which is what makes runs reproducible.
inline Rng ant_stream(const AcoConfig& c, int iteration, int ant) {
    return Rng::split(c.rng_seed, fnv1a64("aco-ant"), static_cast<std::uint64_t>(iteration),
                      static_cast<std::uint64_t>(ant));
}

namespace detail {

inline void require_aco(const AcoConfig& c) {
    if (c.ants < 1 || c.iterations < 1 || !(c.decay > 0.0) || c.decay > 1.0)
        throw std::invalid_argument("aco config out of range");
}

/// tau^alpha * eta^beta without pow() on the default exponents, keeping the
/// alpha = beta = 1 path inside plain IEEE multiplies.
inline double weight_pow(double x, double e) {
    if (e == 1.0) return x;
    if (e == 0.0) return 1.0;
    return std::pow(x, e);
}

/// Sample an index in [0, count) by cumulative weight; the first prefix sum
/// exceeding the draw wins, with the last index as the numerical-leftover
/// fallback. Degenerate mass (zero or non-finite total) falls back to a
/// uniform draw so construction stays live.
template <class WeightAt>
int sample_index(Rng& rng, int count, WeightAt&& weight) {
    double total = 0.0;
    for (int i = 0; i < count; ++i) total += weight(i);
    if (!(total > 0.0) || !std::isfinite(total))
        return static_cast<int>(rng.index(static_cast<std::size_t>(count)));
    const double draw = rng.uniform() * total;
    double cum = 0.0;
    for (int i = 0; i < count; ++i) {
        cum += weight(i);
        if (cum > draw) return i;
    }
    return count - 1;
}

/// Deposit on every arc of a node sequence, mirrored to keep tau symmetric;
/// `close` also covers the arc back from the last node to the first.
inline void deposit_path(Matrix& tau, const std::vector<int>& seq, bool close, double amount) {
    auto add = [&](int a, int b) {
        tau(a, b) += amount;
        tau(b, a) += amount;
    };
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) add(seq[i], seq[i + 1]);
    if (close && seq.size() > 1) add(seq.back(), seq.front());
}

inline void evaporate(std::vector<double>& tau, double decay) {
    for (double& v : tau) v *= decay;
}

}  // namespace detail

/// Normalized transition distribution over one row. Infeasible entries get
/// probability exactly 0; degenerate feasible mass falls back to uniform over
/// the feasible set.
inline std::vector<double> aco_transition_probs(const std::vector<double>& tau_row,
                                                const std::vector<double>& eta_row,
                                                const std::vector<bool>& feasible, double alpha,
                                                double beta) {
    const std::size_t n = tau_row.size();
    if (eta_row.size() != n || feasible.size() != n)
        throw std::invalid_argument("row lengths differ");
    std::vector<double> probs(n, 0.0);
    double total = 0.0;
    std::size_t feasible_count = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!feasible[j]) continue;
        ++feasible_count;
        const double w =
            detail::weight_pow(tau_row[j], alpha) * detail::weight_pow(eta_row[j], beta);
        probs[j] = w;
        total += w;
    }
    if (feasible_count == 0) throw std::invalid_argument("no feasible entry");
    if (!(total > 0.0) || !std::isfinite(total)) {
        const double u = 1.0 / static_cast<double>(feasible_count);
        for (std::size_t j = 0; j < n; ++j) probs[j] = feasible[j] ? u : 0.0;
        return probs;
    }
    for (std::size_t j = 0; j < n; ++j) probs[j] /= total;
    return probs;
}

/// Candidates for the next CVRP-ACO transition: unserved customers that fit
/// the remaining capacity, plus the depot when the ant is away from it and
/// customers remain. Empty means construction is complete.
inline std::vector<int> cvrp_step_mask(const RoutingInstance& inst, const std::vector<char>& served,
                                       int current_node, int capacity_remaining) {
    std::vector<int> cand;
    bool any_unserved = false;
    for (int v = 0; v < inst.base.n; ++v) {
        if (v == inst.depot_index || served[v]) continue;
        any_unserved = true;
        if (inst.demands[v] <= capacity_remaining) cand.push_back(v);
    }
    if (any_unserved && current_node != inst.depot_index) cand.push_back(inst.depot_index);
    return cand;
}

/// TSP colony: each ant starts at a sampled node and completes a closed tour.
inline AcoResult aco_solve(const EuclideanInstance& inst, const Matrix& eta,
                           const AcoConfig& config) {
    detail::require_aco(config);
    const int n = inst.n;
    if (eta.rows() != static_cast<std::size_t>(n) || eta.cols() != static_cast<std::size_t>(n))
        throw std::invalid_argument("eta shape mismatch");
    const Matrix dist = inst.distances();
    Matrix tau(n, n, 1.0);

    AcoResult res;
    res.best.domain = Domain::tsp_aco;
    res.best.objective = std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> tours(config.ants);
    std::vector<double> costs(config.ants);

    for (int t = 0; t < config.iterations; ++t) {
        for (int k = 0; k < config.ants; ++k) {
            Rng rng = ant_stream(config, t, k);
            std::vector<int>& tour = tours[k];
            tour.clear();
            std::vector<char> visited(n, 0);
            int cur = static_cast<int>(rng.index(n));
            tour.push_back(cur);
            visited[cur] = 1;
            std::vector<int> cand;
            cand.reserve(n);
            while (static_cast<int>(tour.size()) < n) {
                cand.clear();
                for (int v = 0; v < n; ++v)
                    if (!visited[v]) cand.push_back(v);
                const int pick = detail::sample_index(
                    rng, static_cast<int>(cand.size()), [&](int i) {
                        return detail::weight_pow(tau(cur, cand[i]), config.alpha) *
                               detail::weight_pow(eta(cur, cand[i]), config.beta);
                    });
                cur = cand[pick];
                tour.push_back(cur);
                visited[cur] = 1;
            }
            costs[k] = tour_objective(dist, tour);
            if (costs[k] < res.best.objective) {
                res.best.objective = costs[k];
                res.best.routes = {tour};
            }
        }
        detail::evaporate(tau.data(), config.decay);
        for (int k = 0; k < config.ants; ++k)
            detail::deposit_path(tau, tours[k], true, route_deposit(costs[k]));
        res.best_trace.push_back(res.best.objective);
    }
    res.best.feasible = check_solution(inst, res.best);
    return res;
}

/// CVRP colony: ants start at the depot; the step mask enforces capacity and
/// every route closes back at the depot.
inline AcoResult aco_solve(const RoutingInstance& inst, const Matrix& eta,
                           const AcoConfig& config) {
    detail::require_aco(config);
    const int n = inst.base.n;
    const int depot = inst.depot_index;
    if (eta.rows() != static_cast<std::size_t>(n) || eta.cols() != static_cast<std::size_t>(n))
        throw std::invalid_argument("eta shape mismatch");
    for (int v = 0; v < n; ++v)
        if (v != depot && inst.demands[v] > inst.capacity)
            throw std::invalid_argument("customer demand exceeds vehicle capacity");
    const Matrix dist = inst.base.distances();
    Matrix tau(n, n, 1.0);

    AcoResult res;
    res.best.domain = Domain::cvrp_aco;
    res.best.objective = std::numeric_limits<double>::infinity();
    std::vector<std::vector<std::vector<int>>> ant_routes(config.ants);
    std::vector<double> costs(config.ants);

    for (int t = 0; t < config.iterations; ++t) {
        for (int k = 0; k < config.ants; ++k) {
            Rng rng = ant_stream(config, t, k);
            auto& routes = ant_routes[k];
            routes.clear();
            std::vector<char> served(n, 0);
            served[depot] = 1;
            std::vector<int> route;
            int cur = depot;
            int capacity = inst.capacity;
            while (true) {
                const std::vector<int> cand = cvrp_step_mask(inst, served, cur, capacity);
                if (cand.empty()) break;
                const int pick = detail::sample_index(
                    rng, static_cast<int>(cand.size()), [&](int i) {
                        return detail::weight_pow(tau(cur, cand[i]), config.alpha) *
                               detail::weight_pow(eta(cur, cand[i]), config.beta);
                    });
                const int next = cand[pick];
                if (next == depot) {
                    routes.push_back(std::move(route));
                    route.clear();
                    cur = depot;
                    capacity = inst.capacity;
                } else {
                    route.push_back(next);
                    served[next] = 1;
                    capacity -= inst.demands[next];
                    cur = next;
                }
            }
            if (!route.empty()) routes.push_back(std::move(route));
            costs[k] = routes_objective(dist, routes, depot, false);
            if (costs[k] < res.best.objective) {
                res.best.objective = costs[k];
                res.best.routes = routes;
            }
        }
        detail::evaporate(tau.data(), config.decay);
        for (int k = 0; k < config.ants; ++k) {
            const double amount = route_deposit(costs[k]);
            for (const auto& route : ant_routes[k]) {
                std::vector<int> seq;
                seq.reserve(route.size() + 1);
                seq.push_back(depot);
                seq.insert(seq.end(), route.begin(), route.end());
                detail::deposit_path(tau, seq, true, amount);
            }
        }
        res.best_trace.push_back(res.best.objective);
    }
    res.best.feasible = check_solution(inst, res.best);
    return res;
}

/// OP colony: ants start at the depot and may only move to nodes they can
/// still return from within the length budget.
inline AcoResult aco_solve(const OrienteeringInstance& inst, const Matrix& eta,
                           const AcoConfig& config) {
    detail::require_aco(config);
    const int n = inst.base.n;
    const int depot = inst.depot_index;
    if (eta.rows() != static_cast<std::size_t>(n) || eta.cols() != static_cast<std::size_t>(n))
        throw std::invalid_argument("eta shape mismatch");
    const Matrix dist = inst.base.distances();
    Matrix tau(n, n, 1.0);
    double total_prize = 0.0;
    for (double p : inst.prizes) total_prize += p;

    AcoResult res;
    res.best.domain = Domain::op_aco;
    res.best.objective = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> ant_visits(config.ants);
    std::vector<double> collected(config.ants);

    for (int t = 0; t < config.iterations; ++t) {
        for (int k = 0; k < config.ants; ++k) {
            Rng rng = ant_stream(config, t, k);
            std::vector<int>& visits = ant_visits[k];
            visits.clear();
            std::vector<char> visited(n, 0);
            visited[depot] = 1;
            int cur = depot;
            double length = 0.0;
            std::vector<int> cand;
            while (true) {
                cand.clear();
                for (int v = 0; v < n; ++v) {
                    if (visited[v]) continue;
                    if (length + detail::edge(dist, cur, v) + detail::edge(dist, v, depot) <=
                        inst.max_length)
                        cand.push_back(v);
                }
                if (cand.empty()) break;
                const int pick = detail::sample_index(
                    rng, static_cast<int>(cand.size()), [&](int i) {
                        return detail::weight_pow(tau(cur, cand[i]), config.alpha) *
                               detail::weight_pow(eta(cur, cand[i]), config.beta);
                    });
                const int next = cand[pick];
                length += detail::edge(dist, cur, next);
                visits.push_back(next);
                visited[next] = 1;
                cur = next;
            }
            collected[k] = op_objective(inst.prizes, visits, depot);
            if (collected[k] > res.best.objective) {
                res.best.objective = collected[k];
                res.best.routes = {visits};
            }
        }
        detail::evaporate(tau.data(), config.decay);
        for (int k = 0; k < config.ants; ++k) {
            std::vector<int> seq;
            seq.reserve(ant_visits[k].size() + 1);
            seq.push_back(depot);
            seq.insert(seq.end(), ant_visits[k].begin(), ant_visits[k].end());
            detail::deposit_path(tau, seq, true, prize_deposit(total_prize, collected[k]));
        }
        res.best_trace.push_back(res.best.objective);
    }
    res.best.feasible = check_solution(inst, res.best);
    return res;
}

/// MKP colony over a pheromone vector: ants add items while every resource
/// constraint still holds.
inline AcoResult aco_solve(const KnapsackInstance& inst, const std::vector<double>& eta,
                           const AcoConfig& config) {
    detail::require_aco(config);
    const int n = inst.n;
    const int m = inst.m();
    if (eta.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("eta length mismatch");
    std::vector<double> tau(n, 1.0);
    double total_value = 0.0;
    for (double v : inst.values) total_value += v;

    AcoResult res;
    res.best.domain = Domain::mkp_aco;
    res.best.objective = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> ant_items(config.ants);
    std::vector<double> values(config.ants);

    for (int t = 0; t < config.iterations; ++t) {
        for (int k = 0; k < config.ants; ++k) {
            Rng rng = ant_stream(config, t, k);
            std::vector<int>& items = ant_items[k];
            items.clear();
            std::vector<char> selected(n, 0);
            std::vector<double> used(m, 0.0);
            std::vector<int> cand;
            while (true) {
                cand.clear();
                for (int j = 0; j < n; ++j) {
                    if (selected[j]) continue;
                    bool fits = true;
                    for (int i = 0; i < m; ++i)
                        if (used[i] + inst.weights(j, i) > inst.capacities[i]) {
                            fits = false;
                            break;
                        }
                    if (fits) cand.push_back(j);
                }
                if (cand.empty()) break;
                const int pick = detail::sample_index(
                    rng, static_cast<int>(cand.size()), [&](int i) {
                        return detail::weight_pow(tau[cand[i]], config.alpha) *
                               detail::weight_pow(eta[cand[i]], config.beta);
                    });
                const int next = cand[pick];
                items.push_back(next);
                selected[next] = 1;
                for (int i = 0; i < m; ++i) used[i] += inst.weights(next, i);
            }
            values[k] = mkp_objective(inst.values, items);
            if (values[k] > res.best.objective) {
                res.best.objective = values[k];
                res.best.items = items;
            }
        }
        detail::evaporate(tau, config.decay);
        for (int k = 0; k < config.ants; ++k) {
            const double amount = prize_deposit(total_value, values[k]);
            for (int j : ant_items[k]) tau[j] += amount;
        }
        res.best_trace.push_back(res.best.objective);
    }
    res.best.feasible = check_solution(inst, res.best);
    return res;
}

}  // namespace ahd
