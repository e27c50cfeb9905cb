#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ahd/domain.hpp"
#include "ahd/numeric.hpp"

namespace ahd {

enum class Role { design, validation };

inline std::string_view role_tag(Role r) {
    return r == Role::design ? "design" : "validation";
}

inline Role parse_role(std::string_view tag) {
    if (tag == "design") return Role::design;
    if (tag == "validation") return Role::validation;
    throw std::invalid_argument("unknown role tag: " + std::string(tag));
}

// ----------------------------------------------------------------------------
// Instance records. Node 0 is the depot wherever a depot exists; n counts all
// nodes including it. Distance matrices are derived on demand, never stored.
// ----------------------------------------------------------------------------
struct EuclideanInstance {
    std::string id;
    int n = 0;
    Matrix coordinates;   // n x 2, components in [0,1]
    std::uint64_t seed = 0;

    Matrix distances() const { return distance_matrix(coordinates); }
    bool operator==(const EuclideanInstance&) const = default;
};

struct RoutingInstance {
    EuclideanInstance base;
    int depot_index = 0;
    std::vector<int> demands;   // demands[depot_index] == 0, customers in {1..9}
    int capacity = 0;

    bool operator==(const RoutingInstance&) const = default;
};

struct OrienteeringInstance {
    EuclideanInstance base;
    int depot_index = 0;
    std::vector<double> prizes;   // multiples of 0.01 in [0.01, 1.0]
    double max_length = 0.0;

    bool operator==(const OrienteeringInstance&) const = default;
};

struct KnapsackInstance {
    std::string id;
    int n = 0;                        // item count
    std::vector<double> values;
    Matrix weights;                   // n x m, every entry <= 1 after normalization
    std::vector<double> capacities;   // identically 1.0
    std::uint64_t seed = 0;

    int m() const { return static_cast<int>(capacities.size()); }
    bool operator==(const KnapsackInstance&) const = default;
};

using Instance =
    std::variant<EuclideanInstance, RoutingInstance, OrienteeringInstance, KnapsackInstance>;

inline const std::string& instance_id(const Instance& inst) {
    return std::visit(
        [](const auto& v) -> const std::string& {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, EuclideanInstance>) return v.id;
            else if constexpr (std::is_same_v<T, KnapsackInstance>) return v.id;
            else return v.base.id;
        },
        inst);
}

inline int instance_size(const Instance& inst) {
    return std::visit(
        [](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, EuclideanInstance>) return v.n;
            else if constexpr (std::is_same_v<T, KnapsackInstance>) return v.n;
            else return v.base.n;
        },
        inst);
}

struct Dataset {
    Domain domain = Domain::tsp_c;
    Role role = Role::design;
    int size_class = 0;           // N: nodes (routing/OP) or items (MKP)
    std::uint64_t seed = 0;
    std::vector<Instance> instances;

    bool operator==(const Dataset&) const = default;
};

}  // namespace ahd
