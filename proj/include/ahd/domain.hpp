#pragma once

#include <array>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ahd {

// ----------------------------------------------------------------------------
// Problem domains. The suffix picks the solver backbone a heuristic plugs
// into: _c variants drive a step-by-step constructive loop, _aco variants
// supply the heuristic-preference matrix of an ant colony solver.
// ----------------------------------------------------------------------------
enum class Domain {
    tsp_c,
    cvrp_c,
    ovrp_c,
    tsp_aco,
    cvrp_aco,
    op_aco,
    mkp_aco,
};

enum class Objective { minimize, maximize };
enum class Backbone { constructive, aco };

struct DomainInfo {
    Domain domain;
    std::string_view tag;       // stable id used in filenames / CLI / JSON
    Objective objective;
    Backbone backbone;
    std::string_view problem;   // underlying combinatorial problem
};

inline constexpr std::array<DomainInfo, 7> kDomainTable{{
    {Domain::tsp_c, "tsp_c", Objective::minimize, Backbone::constructive, "tsp"},
    {Domain::cvrp_c, "cvrp_c", Objective::minimize, Backbone::constructive, "cvrp"},
    {Domain::ovrp_c, "ovrp_c", Objective::minimize, Backbone::constructive, "ovrp"},
    {Domain::tsp_aco, "tsp_aco", Objective::minimize, Backbone::aco, "tsp"},
    {Domain::cvrp_aco, "cvrp_aco", Objective::minimize, Backbone::aco, "cvrp"},
    {Domain::op_aco, "op_aco", Objective::maximize, Backbone::aco, "op"},
    {Domain::mkp_aco, "mkp_aco", Objective::maximize, Backbone::aco, "mkp"},
}};

inline const DomainInfo& domain_info(Domain d) {
    for (const auto& row : kDomainTable)
        if (row.domain == d) return row;
    throw std::logic_error("unknown domain");
}

inline std::string_view domain_tag(Domain d) { return domain_info(d).tag; }
inline Objective domain_objective(Domain d) { return domain_info(d).objective; }
inline Backbone domain_backbone(Domain d) { return domain_info(d).backbone; }

inline Domain parse_domain(std::string_view tag) {
    for (const auto& row : kDomainTable)
        if (row.tag == tag) return row.domain;
    throw std::invalid_argument("unknown domain tag: " + std::string(tag));
}

inline bool is_minimization(Domain d) { return domain_objective(d) == Objective::minimize; }

/// True when candidate `a` beats incumbent `b` under the domain objective.
inline bool improves(Domain d, double a, double b) {
    return is_minimization(d) ? a < b : a > b;
}

inline double worst_value(Domain d) {
    return is_minimization(d) ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
}

}  // namespace ahd
