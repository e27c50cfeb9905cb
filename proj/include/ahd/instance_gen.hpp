#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ahd/instance.hpp"
#include "ahd/rng.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Seeded instance generators.
//
// Instance k of a dataset draws from the stream
//   Rng::split(seed, fnv1a64(family), fnv1a64(role), n, k)
// where `family` names the generation recipe ("tsp", "cvrp_q40", "cvrp_q50",
// "op", "mkp"). CVRP-constructive and OVRP share the "cvrp_q40" family, so the
// same seed yields identical raw instance data for both. Draw order within an
// instance is part of the format: coordinates first (x then y, node order),
// then demands (customers in node order), then any domain extras.
// ----------------------------------------------------------------------------

namespace detail {

inline std::uint64_t tag64(std::string_view s) { return fnv1a64(s); }

inline std::string make_id(Domain d, Role role, int n, std::uint64_t seed, int k) {
    return std::string(domain_tag(d)) + "-" + std::string(role_tag(role)) + "-" +
           std::to_string(n) + "-" + std::to_string(seed) + "-" + std::to_string(k);
}

inline std::uint64_t instance_seed(std::uint64_t seed, std::string_view family, Role role,
                                   int n, int k) {
    return mix_seed(seed, tag64(family), tag64(role_tag(role)),
                    static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k));
}

inline void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

inline Matrix draw_coordinates(Rng& rng, int n) {
    Matrix coords(static_cast<std::size_t>(n), 2);
    for (int i = 0; i < n; ++i) {
        coords(static_cast<std::size_t>(i), 0) = rng.uniform();
        coords(static_cast<std::size_t>(i), 1) = rng.uniform();
    }
    return coords;
}

inline std::vector<int> draw_demands(Rng& rng, int n, int depot_index) {
    std::vector<int> demands(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        if (i == depot_index) continue;
        demands[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(1, 9));
    }
    return demands;
}

}  // namespace detail

inline Dataset generate_tsp(int n, int count, std::uint64_t seed, Role role = Role::design,
                            Domain domain = Domain::tsp_c) {
    detail::require(n >= 3, "tsp requires n >= 3");
    detail::require(count >= 1, "count must be >= 1");
    detail::require(domain == Domain::tsp_c || domain == Domain::tsp_aco,
                    "generate_tsp serves tsp_c or tsp_aco");
    Dataset ds{domain, role, n, seed, {}};
    ds.instances.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const std::uint64_t sub = detail::instance_seed(seed, "tsp", role, n, k);
        Rng rng(sub);
        EuclideanInstance inst;
        inst.id = detail::make_id(domain, role, n, seed, k);
        inst.n = n;
        inst.coordinates = detail::draw_coordinates(rng, n);
        inst.seed = sub;
        ds.instances.emplace_back(std::move(inst));
    }
    return ds;
}

enum class CvrpVariant { constructive, aco };

inline Dataset generate_cvrp(int n, int count, std::uint64_t seed, CvrpVariant variant,
                             Role role = Role::design) {
    detail::require(n >= 2, "cvrp requires n >= 2");
    detail::require(count >= 1, "count must be >= 1");
    const bool aco = variant == CvrpVariant::aco;
    const Domain domain = aco ? Domain::cvrp_aco : Domain::cvrp_c;
    const char* family = aco ? "cvrp_q50" : "cvrp_q40";
    const int capacity = aco ? 50 : 40;
    Dataset ds{domain, role, n, seed, {}};
    ds.instances.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const std::uint64_t sub = detail::instance_seed(seed, family, role, n, k);
        Rng rng(sub);
        RoutingInstance inst;
        inst.base.id = detail::make_id(domain, role, n, seed, k);
        inst.base.n = n;
        inst.base.seed = sub;
        if (aco) {
            // Depot pinned to the square center; customer coordinates drawn for
            // nodes 1..n-1 in order.
            Matrix coords(static_cast<std::size_t>(n), 2);
            coords(0, 0) = 0.5;
            coords(0, 1) = 0.5;
            for (int i = 1; i < n; ++i) {
                coords(static_cast<std::size_t>(i), 0) = rng.uniform();
                coords(static_cast<std::size_t>(i), 1) = rng.uniform();
            }
            inst.base.coordinates = std::move(coords);
        } else {
            inst.base.coordinates = detail::draw_coordinates(rng, n);
        }
        inst.depot_index = 0;
        inst.demands = detail::draw_demands(rng, n, 0);
        inst.capacity = capacity;
        ds.instances.emplace_back(std::move(inst));
    }
    return ds;
}

/// Same raw distribution as constructive CVRP; only the downstream objective
/// convention differs (the final vehicle's return edge is not charged).
inline Dataset generate_ovrp(int n, int count, std::uint64_t seed, Role role = Role::design) {
    Dataset ds = generate_cvrp(n, count, seed, CvrpVariant::constructive, role);
    ds.domain = Domain::ovrp_c;
    for (int k = 0; k < count; ++k) {
        auto& inst = std::get<RoutingInstance>(ds.instances[static_cast<std::size_t>(k)]);
        inst.base.id = detail::make_id(Domain::ovrp_c, role, n, seed, k);
    }
    return ds;
}

inline double op_max_length(int n) {
    if (n <= 50) return 3.0;
    if (n <= 100) return 4.0;
    if (n <= 200) return 5.0;
    if (n <= 300) return 6.0;
    throw std::invalid_argument("op route budget undefined for n > 300");
}

inline Dataset generate_op(int n, int count, std::uint64_t seed, Role role = Role::design) {
    detail::require(n >= 3, "op requires n >= 3");
    detail::require(count >= 1, "count must be >= 1");
    const double max_length = op_max_length(n);
    Dataset ds{Domain::op_aco, role, n, seed, {}};
    ds.instances.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const std::uint64_t sub = detail::instance_seed(seed, "op", role, n, k);
        Rng rng(sub);
        OrienteeringInstance inst;
        inst.base.id = detail::make_id(Domain::op_aco, role, n, seed, k);
        inst.base.n = n;
        inst.base.seed = sub;
        inst.base.coordinates = detail::draw_coordinates(rng, n);
        inst.depot_index = 0;

        // Prize of node i is (1 + floor(99 * d0i / max_j d0j)) / 100, so the
        // depot-farthest node is worth exactly 1.00 and the depot itself 0.01.
        std::vector<double> depot_dist(static_cast<std::size_t>(n), 0.0);
        double max_d = 0.0;
        for (int i = 0; i < n; ++i) {
            depot_dist[static_cast<std::size_t>(i)] =
                euclidean(inst.base.coordinates(0, 0), inst.base.coordinates(0, 1),
                          inst.base.coordinates(static_cast<std::size_t>(i), 0),
                          inst.base.coordinates(static_cast<std::size_t>(i), 1));
            max_d = std::max(max_d, depot_dist[static_cast<std::size_t>(i)]);
        }
        inst.prizes.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double ratio = max_d > 0.0 ? depot_dist[static_cast<std::size_t>(i)] / max_d : 0.0;
            inst.prizes[static_cast<std::size_t>(i)] = (1.0 + std::floor(99.0 * ratio)) / 100.0;
        }
        inst.max_length = max_length;
        ds.instances.emplace_back(std::move(inst));
    }
    return ds;
}

inline Dataset generate_mkp(int n, int count, std::uint64_t seed, Role role = Role::design) {
    detail::require(n >= 1, "mkp requires n >= 1");
    detail::require(count >= 1, "count must be >= 1");
    constexpr int kConstraints = 5;
    constexpr double kTightness = 0.5;
    Dataset ds{Domain::mkp_aco, role, n, seed, {}};
    ds.instances.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const std::uint64_t sub = detail::instance_seed(seed, "mkp", role, n, k);
        Rng rng(sub);
        KnapsackInstance inst;
        inst.id = detail::make_id(Domain::mkp_aco, role, n, seed, k);
        inst.n = n;
        inst.seed = sub;
        inst.values.resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) inst.values[static_cast<std::size_t>(j)] = rng.uniform();
        Matrix raw(static_cast<std::size_t>(n), kConstraints);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < kConstraints; ++i)
                raw(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = rng.uniform();

        // Per-constraint capacity is kTightness times that column's raw weight
        // sum; dividing the column by it normalizes capacities to 1 and makes
        // column sums equal 1/kTightness. The capacity is floored at the
        // column max so every single item stays feasible; at realistic sizes
        // the floor never binds (it would need one item to outweigh all
        // others combined).
        inst.weights = Matrix(static_cast<std::size_t>(n), kConstraints);
        for (int i = 0; i < kConstraints; ++i) {
            double colsum = 0.0, colmax = 0.0;
            for (int j = 0; j < n; ++j) {
                const double w = raw(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
                colsum += w;
                colmax = std::max(colmax, w);
            }
            const double cap = std::max(kTightness * colsum, colmax);
            for (int j = 0; j < n; ++j)
                inst.weights(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) =
                    cap > 0.0
                        ? raw(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) / cap
                        : 0.0;
        }
        inst.capacities.assign(kConstraints, 1.0);
        ds.instances.emplace_back(std::move(inst));
    }
    return ds;
}

}  // namespace ahd
