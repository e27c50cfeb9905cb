#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ahd/baselines.hpp"
#include "ahd/instance_gen.hpp"
#include "ahd/program.hpp"

using namespace ahd;

namespace {

Matrix square(std::initializer_list<double> flat, std::size_t n) {
    Matrix m(n, n);
    std::size_t i = 0;
    for (double v : flat) m.data()[i++] = v;
    return m;
}

}  // namespace

TEST_CASE("every domain binds its exact interface") {
    for (const auto& row : kDomainTable) {
        const auto& spec = domain_interface(row.domain);
        INFO(row.tag);
        HeuristicProgram p = parse_program(baseline_source(row.domain), row.domain);
        REQUIRE(p.entry_name == spec.entry);
        REQUIRE(p.domain == row.domain);
    }
    REQUIRE(domain_interface(Domain::tsp_c).params ==
            std::vector<std::string>{"current_node", "destination_node", "unvisited_nodes",
                                     "distance_matrix"});
    REQUIRE(domain_interface(Domain::cvrp_c).params ==
            std::vector<std::string>{"current_node", "depot", "feasible_unvisited",
                                     "capacity_remaining", "demands", "distance_matrix"});
    REQUIRE(domain_interface(Domain::cvrp_c).params == domain_interface(Domain::ovrp_c).params);
    REQUIRE(domain_interface(Domain::tsp_aco).params ==
            std::vector<std::string>{"distance_matrix"});
    REQUIRE(domain_interface(Domain::cvrp_aco).params ==
            std::vector<std::string>{"distance_matrix", "coordinates", "demands", "capacity"});
    REQUIRE(domain_interface(Domain::op_aco).params ==
            std::vector<std::string>{"prize", "distance", "maxlen"});
    REQUIRE(domain_interface(Domain::mkp_aco).params ==
            std::vector<std::string>{"prize", "weight"});
}

TEST_CASE("binding rejects wrong names and arities") {
    REQUIRE_THROWS_AS(parse_program("def select_nextnode(a):\n    return 0\n", Domain::tsp_c),
                      InterfaceMismatch);
    REQUIRE_THROWS_AS(
        parse_program("def select_next_node(a, b, c):\n    return 0\n", Domain::tsp_c),
        InterfaceMismatch);
    // Right arity, wrong parameter names.
    REQUIRE_THROWS_AS(
        parse_program("def select_next_node(a, b, c, d):\n    return 0\n", Domain::tsp_c),
        InterfaceMismatch);
    REQUIRE_THROWS_AS(parse_program("def heuristic(d):\n    return d\n", Domain::tsp_aco),
                      InterfaceMismatch);
    REQUIRE_THROWS_AS(parse_program("def f(:\n    return 0\n", Domain::tsp_c),
                      script::ParseError);
    REQUIRE_THROWS_AS(parse_program("", Domain::tsp_c), script::ParseError);
}

TEST_CASE("nearest-neighbor selector picks the minimum-distance node") {
    HeuristicProgram p = parse_program(baseline_source(Domain::tsp_c), Domain::tsp_c);
    const Matrix d = square({0, 5, 2, 9,
                             5, 0, 4, 1,
                             2, 4, 0, 8,
                             9, 1, 8, 0}, 4);
    SelectorCall call;
    call.current_node = 1;
    call.anchor = 0;
    call.feasible = {2, 3};
    call.distances = &d;
    ExecutionOutcome out = invoke_selector(p, call);
    REQUIRE(out.ok());
    REQUIRE(out.value.number() == 3.0);  // d(1,3)=1 < d(1,2)=4
}

TEST_CASE("selector outcomes map onto the failure taxonomy") {
    const Matrix d = square({0, 1, 1, 0}, 2);
    SelectorCall call;
    call.current_node = 0;
    call.anchor = 0;
    call.feasible = {1};
    call.distances = &d;

    SECTION("exception inside the program") {
        auto p = parse_program(
            "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n"
            "    return unvisited_nodes[99]\n",
            Domain::tsp_c);
        auto out = invoke_selector(p, call);
        REQUIRE(out.status == ExecStatus::runtime_error);
        REQUIRE_FALSE(out.diagnostics.empty());
    }
    SECTION("index outside the feasible set") {
        auto p = parse_program(
            "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n"
            "    return 0\n",
            Domain::tsp_c);
        REQUIRE(invoke_selector(p, call).status == ExecStatus::infeasible_output);
    }
    SECTION("non-integer index") {
        auto p = parse_program(
            "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n"
            "    return 1.5\n",
            Domain::tsp_c);
        REQUIRE(invoke_selector(p, call).status == ExecStatus::infeasible_output);
    }
    SECTION("non-numeric return") {
        auto p = parse_program(
            "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n"
            "    return unvisited_nodes\n",
            Domain::tsp_c);
        REQUIRE(invoke_selector(p, call).status == ExecStatus::infeasible_output);
    }
    SECTION("timeout") {
        auto p = parse_program(
            "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n"
            "    x = 0\n"
            "    while True:\n"
            "        x += 1\n"
            "    return 1\n",
            Domain::tsp_c);
        REQUIRE(invoke_selector(p, call).status == ExecStatus::timeout);
    }
}

TEST_CASE("cvrp selector may return the depot only when allowed") {
    auto p = parse_program(
        "def select_next_node(current_node, depot, feasible_unvisited, capacity_remaining, demands, distance_matrix):\n"
        "    return depot\n",
        Domain::cvrp_c);
    const Matrix d = square({0, 1, 1, 0}, 2);
    std::vector<int> demands{0, 3};
    SelectorCall call;
    call.current_node = 1;
    call.anchor = 0;
    call.feasible = {1};
    call.capacity_remaining = 5;
    call.demands = &demands;
    call.distances = &d;

    call.allow_anchor_return = true;
    REQUIRE(invoke_selector(p, call).ok());
    call.allow_anchor_return = false;
    REQUIRE(invoke_selector(p, call).status == ExecStatus::infeasible_output);
}

TEST_CASE("baseline eta is the elementwise reciprocal off the diagonal") {
    auto p = parse_program(baseline_source(Domain::tsp_aco), Domain::tsp_aco);
    Dataset ds = generate_tsp(4, 1, 5);
    const auto& inst = std::get<EuclideanInstance>(ds.instances[0]);
    const Matrix d = inst.distances();

    ExecutionOutcome out = invoke_matrix_heuristic(p, ds.instances[0]);
    REQUIRE(out.ok());
    Matrix eta = eta_matrix(out, 4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            if (i == j)
                REQUIRE(eta(i, j) == 0.0);
            else
                REQUIRE(eta(i, j) == 1.0 / d(i, j));
        }
}

TEST_CASE("mkp baseline returns an accepted vector") {
    auto p = parse_program(baseline_source(Domain::mkp_aco), Domain::mkp_aco);
    Dataset ds = generate_mkp(7, 1, 5);
    const auto& inst = std::get<KnapsackInstance>(ds.instances[0]);
    ExecutionOutcome out = invoke_matrix_heuristic(p, ds.instances[0]);
    REQUIRE(out.ok());
    auto eta = eta_vector(out, 7);
    for (int j = 0; j < 7; ++j) {
        double mean_w = 0.0;
        for (int i = 0; i < inst.m(); ++i)
            mean_w += inst.weights(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
        mean_w /= inst.m();
        REQUIRE(eta[static_cast<std::size_t>(j)] ==
                Catch::Approx(inst.values[static_cast<std::size_t>(j)] / mean_w));
    }
}

TEST_CASE("matrix sanitation clamps bad entries and rejects empty signal") {
    Dataset ds = generate_tsp(3, 1, 6);

    SECTION("negative, nan, inf entries clamp to the floor") {
        auto p = parse_program(
            "def heuristic(distance_matrix):\n"
            "    n = len(distance_matrix)\n"
            "    eta = ones(n, n)\n"
            "    eta[0][1] = -5.0\n"
            "    eta[0][2] = ([1.0] / [0.0])[0]\n"  // inf via elementwise ieee
            "    eta[1][0] = ([0.0] / [0.0])[0]\n"  // nan
            "    return eta\n",
            Domain::tsp_aco);
        auto out = invoke_matrix_heuristic(p, ds.instances[0]);
        REQUIRE(out.ok());
        Matrix eta = eta_matrix(out, 3, 3);
        REQUIRE(eta(0, 1) == kEtaFloor);
        REQUIRE(eta(0, 2) == kEtaFloor);
        REQUIRE(eta(1, 0) == kEtaFloor);
        REQUIRE(eta(2, 2) == 1.0);
    }
    SECTION("all-nonpositive matrix is infeasible") {
        auto p = parse_program(
            "def heuristic(distance_matrix):\n"
            "    n = len(distance_matrix)\n"
            "    return zeros(n, n)\n",
            Domain::tsp_aco);
        REQUIRE(invoke_matrix_heuristic(p, ds.instances[0]).status ==
                ExecStatus::infeasible_output);
    }
    SECTION("wrong shape is infeasible") {
        auto p = parse_program(
            "def heuristic(distance_matrix):\n"
            "    n = len(distance_matrix)\n"
            "    return zeros(n, n - 1) + 1\n",
            Domain::tsp_aco);
        REQUIRE(invoke_matrix_heuristic(p, ds.instances[0]).status ==
                ExecStatus::infeasible_output);
    }
    SECTION("vector where a matrix is required is infeasible") {
        auto p = parse_program(
            "def heuristic(distance_matrix):\n"
            "    return ones(len(distance_matrix))\n",
            Domain::tsp_aco);
        REQUIRE(invoke_matrix_heuristic(p, ds.instances[0]).status ==
                ExecStatus::infeasible_output);
    }
}

TEST_CASE("sandboxed execution is deterministic and isolated") {
    auto p = parse_program(baseline_source(Domain::tsp_aco), Domain::tsp_aco);
    Dataset ds = generate_tsp(10, 1, 77);
    auto a = invoke_matrix_heuristic(p, ds.instances[0]);
    auto b = invoke_matrix_heuristic(p, ds.instances[0]);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    REQUIRE(eta_matrix(a, 10, 10) == eta_matrix(b, 10, 10));

    // A program that mutates its inputs cannot corrupt the host instance.
    auto vandal = parse_program(
        "def heuristic(distance_matrix):\n"
        "    n = len(distance_matrix)\n"
        "    for i in range(n):\n"
        "        for j in range(n):\n"
        "            distance_matrix[i][j] = 0.0\n"
        "    return ones(n, n)\n",
        Domain::tsp_aco);
    REQUIRE(invoke_matrix_heuristic(vandal, ds.instances[0]).ok());
    auto after = invoke_matrix_heuristic(p, ds.instances[0]);
    REQUIRE(eta_matrix(a, 10, 10) == eta_matrix(after, 10, 10));
}
