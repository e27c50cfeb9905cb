// Acceptance gate. Each criterion below is checked independently and prints
// exactly one pass/fail line; the binary exits nonzero if any criterion fails.
// Oracles used here are written from scratch (permutation enumeration, subset
// enumeration, a second Moran's I) so the library is judged against code that
// shares nothing with it beyond the instance structs.

#include <ahd/aco.hpp>
#include <ahd/ast_novelty.hpp>
#include <ahd/baselines.hpp>
#include <ahd/domain.hpp>
#include <ahd/episode.hpp>
#include <ahd/instance_analysis.hpp>
#include <ahd/instance_gen.hpp>
#include <ahd/oracles.hpp>
#include <ahd/policy.hpp>
#include <ahd/scoring.hpp>
#include <ahd/session.hpp>
#include <ahd/solution.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

using namespace ahd;
namespace fs = std::filesystem;

namespace {

struct CheckFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw CheckFailed(what);
}

bool within(double a, double b, double tol) { return std::abs(a - b) <= tol; }

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        const auto tick = std::chrono::steady_clock::now().time_since_epoch().count();
        path = fs::temp_directory_path() /
               ("ahd-accept-" + std::to_string(tick) + "-" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

// ----------------------------------------------------------------------------
// Shared fixtures
// ----------------------------------------------------------------------------

const std::string kNearest =
    "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n"
    "    best = unvisited_nodes[0]\n"
    "    best_d = distance_matrix[current_node][best]\n"
    "    for v in unvisited_nodes:\n"
    "        d = distance_matrix[current_node][v]\n"
    "        if d < best_d:\n"
    "            best = v\n"
    "            best_d = d\n"
    "    return best\n";

const std::string kFarthest =
    "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n"
    "    pick = unvisited_nodes[0]\n"
    "    pick_d = distance_matrix[current_node][pick]\n"
    "    for v in unvisited_nodes:\n"
    "        d = distance_matrix[current_node][v]\n"
    "        if d > pick_d:\n"
    "            pick = v\n"
    "            pick_d = d\n"
    "    return pick\n";

const std::string kCrash =
    "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n"
    "    return unvisited_nodes[0] / 0\n";

// Visits the second-listed node first (a 0.15 detour each way), then greedily
// low indices: tour 0 -> 2 -> 1 -> 3 -> 0.
const std::string kDetour =
    "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n"
    "    if len(unvisited_nodes) == 3:\n"
    "        return unvisited_nodes[1]\n"
    "    return unvisited_nodes[0]\n";

const std::string kRenameBase =
    "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n"
    "    best_node = unvisited_nodes[0]\n"
    "    best_cost = distance_matrix[current_node][best_node]\n"
    "    for node in unvisited_nodes:\n"
    "        cost = distance_matrix[current_node][node]\n"
    "        if cost < best_cost:\n"
    "            best_cost = cost\n"
    "            best_node = node\n"
    "    return best_node\n";

const std::string kRenameVariant =
    "def select_next_node(a, b, c, d):\n"
    "    pick = c[0]\n"
    "    low = d[a][pick]\n"
    "    for v in c:\n"
    "        w = d[a][v]\n"
    "        if w < low:\n"
    "            low = w\n"
    "            pick = v\n"
    "    return pick\n";

std::string trimmed(const std::string& code) {
    const auto first = code.find_first_not_of(" \t\r\n");
    const auto last = code.find_last_not_of(" \t\r\n");
    return code.substr(first, last - first + 1);
}

std::string fenced(const std::string& code) { return "```python\n" + code + "```\n"; }

std::string final_turn(const std::string& code) {
    return std::string(kFinalMarker) + "\n" + fenced(code);
}

std::string tool_turn(const std::string& json) { return "```tool\n" + json + "\n```\n"; }

Matrix coords_from(const std::vector<std::pair<double, double>>& pts) {
    Matrix m(pts.size(), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        m(i, 0) = pts[i].first;
        m(i, 1) = pts[i].second;
    }
    return m;
}

Matrix inverse_distance_eta(const Matrix& d) {
    Matrix eta(d.rows(), d.cols(), 0.0);
    for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t j = 0; j < d.cols(); ++j)
            if (i != j) eta(i, j) = 1.0 / d(i, j);
    return eta;
}

// ----------------------------------------------------------------------------
// Independent oracles
// ----------------------------------------------------------------------------

// Exhaustive tour enumeration: node 0 fixed, edges summed left to right in
// visit order, which is also the order the dynamic program accumulates them.
double enumerate_tsp(const EuclideanInstance& inst) {
    const Matrix d = inst.distances();
    std::vector<int> perm;
    for (int v = 1; v < inst.n; ++v) perm.push_back(v);
    double best = std::numeric_limits<double>::infinity();
    do {
        double len = d(0, perm.front());
        for (std::size_t i = 0; i + 1 < perm.size(); ++i) len += d(perm[i], perm[i + 1]);
        len += d(perm.back(), 0);
        best = std::min(best, len);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// All 2^n item subsets, values summed in ascending item order.
double enumerate_mkp(const KnapsackInstance& inst) {
    const int n = inst.n, m = inst.m();
    double best = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        double value = 0.0;
        std::vector<double> used(static_cast<std::size_t>(m), 0.0);
        bool ok = true;
        for (int j = 0; j < n && ok; ++j) {
            if (!((mask >> j) & 1u)) continue;
            value += inst.values[static_cast<std::size_t>(j)];
            for (int i = 0; i < m; ++i) {
                used[static_cast<std::size_t>(i)] += inst.weights(j, i);
                if (used[static_cast<std::size_t>(i)] > inst.capacities[static_cast<std::size_t>(i)]) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) best = std::max(best, value);
    }
    return best;
}

// Best collectable prize over every customer subset and visiting order. A
// subset is admitted when its cheapest closed route fits the length budget
// (with a hair of slack so the bound stays an upper bound for the colony).
double enumerate_op(const OrienteeringInstance& inst) {
    const Matrix d = inst.base.distances();
    const int n = inst.base.n;
    double best = inst.prizes[0];
    for (unsigned mask = 1; mask < (1u << (n - 1)); ++mask) {
        std::vector<int> nodes;
        double prize = inst.prizes[0];
        for (int v = 1; v < n; ++v)
            if ((mask >> (v - 1)) & 1u) {
                nodes.push_back(v);
                prize += inst.prizes[static_cast<std::size_t>(v)];
            }
        if (prize <= best) continue;
        double shortest = std::numeric_limits<double>::infinity();
        std::vector<int> perm = nodes;
        do {
            shortest = std::min(shortest, op_route_length(d, perm, inst.depot_index));
        } while (std::next_permutation(perm.begin(), perm.end()));
        if (shortest <= inst.max_length + 1e-9) best = prize;
    }
    return best;
}

// Greedy closest-next tour from node 0, first index winning ties.
double nearest_neighbor_tour(const Matrix& d, int n) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    seen[0] = 1;
    int cur = 0;
    double len = 0.0;
    for (int step = 1; step < n; ++step) {
        int pick = -1;
        double pick_d = 0.0;
        for (int v = 0; v < n; ++v) {
            if (seen[static_cast<std::size_t>(v)]) continue;
            const double dv = d(cur, v);
            if (pick < 0 || dv < pick_d) {
                pick = v;
                pick_d = dv;
            }
        }
        seen[static_cast<std::size_t>(pick)] = 1;
        len += pick_d;
        cur = pick;
    }
    return len + d(cur, 0);
}

// From-scratch Moran's I with brute-force 5-nearest neighbors, sharing only
// the (distance, index) tie rule with the library.
double reference_moran(const Matrix& coords, const std::vector<double>& demands) {
    const std::size_t n = coords.rows();
    const double mean = mean_of(demands);
    double cross = 0.0, weights = 0.0, z2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> others;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = coords(i, 0) - coords(j, 0);
            const double dy = coords(i, 1) - coords(j, 1);
            others.emplace_back(dx * dx + dy * dy, j);
        }
        std::sort(others.begin(), others.end());
        const double zi = demands[i] - mean;
        z2 += zi * zi;
        for (std::size_t k = 0; k < 5; ++k) {
            cross += zi * (demands[others[k].second] - mean);
            weights += 1.0;
        }
    }
    return (static_cast<double>(n) / weights) * (cross / z2);
}

Matrix two_blob_coords(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 12; ++i)
        pts.emplace_back(rng.uniform(0.15, 0.25), rng.uniform(0.45, 0.55));
    for (int i = 0; i < 12; ++i)
        pts.emplace_back(rng.uniform(0.75, 0.85), rng.uniform(0.45, 0.55));
    return coords_from(pts);
}

bool non_increasing(const std::vector<double>& xs) {
    return std::is_sorted(xs.rbegin(), xs.rend());
}

bool non_decreasing(const std::vector<double>& xs) {
    return std::is_sorted(xs.begin(), xs.end());
}

// ----------------------------------------------------------------------------
// Criterion 1: percentage gap formula
// ----------------------------------------------------------------------------

void check_gap_formula() {
    require(within(gap(9.586, 7.726, Objective::minimize), 24.075, 1e-3),
            "gap(9.586, 7.726, minimize) missed 24.075 by more than 0.001");
    for (double f : {7.726, 1.0, 123.456, 0.01}) {
        require(gap(f, f, Objective::minimize) == 0.0, "self gap nonzero under minimize");
        require(gap(f, f, Objective::maximize) == 0.0, "self gap nonzero under maximize");
    }
}

// ----------------------------------------------------------------------------
// Criterion 2: exact oracles equal exhaustive enumeration
// ----------------------------------------------------------------------------

void check_oracle_parity() {
    const Dataset tsp = generate_tsp(10, 50, 2026);
    for (const auto& variant : tsp.instances) {
        const auto& inst = std::get<EuclideanInstance>(variant);
        require(exact_tsp(inst) == enumerate_tsp(inst),
                "tour oracle diverged from enumeration on " + inst.id);
    }
    const Dataset mkp = generate_mkp(15, 20, 2026);
    for (const auto& variant : mkp.instances) {
        const auto& inst = std::get<KnapsackInstance>(variant);
        require(exact_mkp(inst) == enumerate_mkp(inst),
                "knapsack oracle diverged from enumeration on " + inst.id);
    }
}

// ----------------------------------------------------------------------------
// Criterion 3: nearest-neighbor gap band
// ----------------------------------------------------------------------------

void check_baseline_band() {
    std::vector<double> gaps;
    for (const auto& variant : generate_tsp(12, 100, 2026).instances) {
        const auto& inst = std::get<EuclideanInstance>(variant);
        gaps.push_back(gap(nearest_neighbor_tour(inst.distances(), inst.n), exact_tsp(inst),
                           Objective::minimize));
    }
    const double mean = mean_of(gaps);
    require(mean >= 5.0 && mean <= 30.0,
            "nearest-neighbor mean gap " + std::to_string(mean) + "% fell outside [5%, 30%]");
}

// ----------------------------------------------------------------------------
// Criterion 4: colony effectiveness with inverse-distance guidance
// ----------------------------------------------------------------------------

void check_colony_effectiveness() {
    require(aco_defaults(Domain::tsp_aco) == AcoConfig{30, 100, 0.9, 1.0, 1.0, 0},
            "tour colony defaults drifted from (30, 100, 0.9, 1, 1)");

    int hits = 0;
    for (const auto& variant : generate_tsp(8, 50, 2026).instances) {
        const auto& inst = std::get<EuclideanInstance>(variant);
        AcoConfig cfg = aco_defaults(Domain::tsp_aco);
        cfg.rng_seed = inst.seed;
        const AcoResult res = aco_solve(inst, inverse_distance_eta(inst.distances()), cfg);
        if (within(res.best.objective, exact_tsp(inst), 1e-9)) ++hits;
    }
    require(hits >= 40, "colony found only " + std::to_string(hits) + "/50 small optima, needs 40");

    int wins = 0;
    for (const auto& variant : generate_tsp(20, 20, 2026).instances) {
        const auto& inst = std::get<EuclideanInstance>(variant);
        const Matrix d = inst.distances();
        AcoConfig cfg = aco_defaults(Domain::tsp_aco);
        cfg.rng_seed = inst.seed;
        if (aco_solve(inst, inverse_distance_eta(d), cfg).best.objective <
            nearest_neighbor_tour(d, inst.n))
            ++wins;
    }
    require(wins >= 18,
            "colony beat nearest neighbor on only " + std::to_string(wins) + "/20, needs 18");
}

// ----------------------------------------------------------------------------
// Criterion 5: colony invariants
// ----------------------------------------------------------------------------

void check_colony_invariants() {
    const Dataset single = generate_tsp(12, 1, 2026);
    const auto& inst = std::get<EuclideanInstance>(single.instances.front());
    const Matrix eta = inverse_distance_eta(inst.distances());
    AcoConfig cfg = aco_defaults(Domain::tsp_aco);
    cfg.rng_seed = 7;

    const AcoResult a = aco_solve(inst, eta, cfg);
    const AcoResult b = aco_solve(inst, eta, cfg);
    require(a.best.routes == b.best.routes && a.best.objective == b.best.objective &&
                a.best_trace == b.best_trace,
            "two seeded runs disagreed");

    require(non_increasing(a.best_trace), "tour best-so-far trace rose");
    for (const auto& variant : generate_mkp(10, 2, 3).instances) {
        const auto& mk = std::get<KnapsackInstance>(variant);
        std::vector<double> unit_eta(static_cast<std::size_t>(mk.n), 1.0);
        AcoConfig mcfg = aco_defaults(Domain::mkp_aco);
        mcfg.rng_seed = mk.seed;
        require(non_decreasing(aco_solve(mk, unit_eta, mcfg).best_trace),
                "knapsack best-so-far trace fell");
    }

    Rng rng(19);
    for (int round = 0; round < 50; ++round) {
        const std::size_t n = 3 + rng.index(8);
        std::vector<double> tau(n), row_eta(n);
        std::vector<bool> feasible(n, false);
        for (std::size_t j = 0; j < n; ++j) {
            tau[j] = rng.uniform(0.1, 2.0);
            row_eta[j] = rng.uniform(0.1, 5.0);
            feasible[j] = rng.uniform() < 0.6;
        }
        feasible[rng.index(n)] = true;
        const double alpha = rng.uniform(0.0, 3.0);
        const double beta = rng.uniform(0.0, 3.0);
        const auto probs = aco_transition_probs(tau, row_eta, feasible, alpha, beta);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sum += probs[j];
            if (!feasible[j]) require(probs[j] == 0.0, "infeasible move kept probability mass");
        }
        require(within(sum, 1.0, 1e-12), "transition probabilities did not sum to 1");

        std::vector<double> scaled_eta = row_eta;
        for (double& e : scaled_eta) e *= 3.7;
        const auto scaled = aco_transition_probs(tau, scaled_eta, feasible, alpha, beta);
        for (std::size_t j = 0; j < n; ++j)
            require(within(scaled[j], probs[j], 1e-12), "eta scaling shifted a probability");
    }

    Matrix scaled_eta = eta;
    for (double& e : scaled_eta.data()) e *= 4.0;
    const AcoResult c = aco_solve(inst, scaled_eta, cfg);
    require(c.best.routes == a.best.routes && c.best.objective == a.best.objective &&
                c.best_trace == a.best_trace,
            "power-of-two eta scaling changed the seeded trajectory");
}

// ----------------------------------------------------------------------------
// Criterion 6: orienteering and knapsack formulas plus solution quality
// ----------------------------------------------------------------------------

void check_prize_formulas() {
    require(op_max_length(50) == 3.0 && op_max_length(100) == 4.0 && op_max_length(200) == 5.0 &&
                op_max_length(300) == 6.0,
            "route budget schedule drifted");
    require(op_max_length(8) == 3.0 && op_max_length(51) == 4.0 && op_max_length(150) == 5.0 &&
                op_max_length(201) == 6.0,
            "route budget schedule drifted inside a band");

    for (const auto& variant : generate_op(30, 5, 17).instances) {
        const auto& inst = std::get<OrienteeringInstance>(variant);
        const int n = inst.base.n;
        double max_d = 0.0;
        std::vector<double> depot_dist(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            const double dx = inst.base.coordinates(0, 0) - inst.base.coordinates(i, 0);
            const double dy = inst.base.coordinates(0, 1) - inst.base.coordinates(i, 1);
            depot_dist[static_cast<std::size_t>(i)] = std::sqrt(dx * dx + dy * dy);
            max_d = std::max(max_d, depot_dist[static_cast<std::size_t>(i)]);
        }
        int farthest = 0;
        for (int i = 0; i < n; ++i)
            if (depot_dist[static_cast<std::size_t>(i)] >
                depot_dist[static_cast<std::size_t>(farthest)])
                farthest = i;
        require(inst.prizes[0] == 0.01, "depot prize is not 0.01");
        require(inst.prizes[static_cast<std::size_t>(farthest)] == 1.0,
                "farthest prize is not 1.00");
        for (int i = 0; i < n; ++i) {
            const double expected =
                (1.0 + std::floor(99.0 * depot_dist[static_cast<std::size_t>(i)] / max_d)) / 100.0;
            require(inst.prizes[static_cast<std::size_t>(i)] == expected,
                    "prize formula mismatch on " + inst.base.id);
        }
    }

    require(prize_deposit(50.0, 10.0) == 0.2, "deposit for objective 10 of 50 is not 0.2");

    for (const auto& variant : generate_op(8, 10, 19).instances) {
        const auto& inst = std::get<OrienteeringInstance>(variant);
        const Matrix d = inst.base.distances();
        Matrix eta(static_cast<std::size_t>(inst.base.n), static_cast<std::size_t>(inst.base.n),
                   0.0);
        for (int i = 0; i < inst.base.n; ++i)
            for (int j = 0; j < inst.base.n; ++j)
                if (i != j) eta(i, j) = inst.prizes[static_cast<std::size_t>(j)] / d(i, j);
        AcoConfig cfg = aco_defaults(Domain::op_aco);
        cfg.rng_seed = inst.base.seed;
        const AcoResult res = aco_solve(inst, eta, cfg);
        require(res.best.feasible, "orienteering solution flagged infeasible");
        const std::vector<int>& route = res.best.routes.front();
        require(op_route_length(d, route, inst.depot_index) <= inst.max_length + 1e-9,
                "orienteering route blew the length budget");
        double prize = inst.prizes[0];
        for (int v : route) prize += inst.prizes[static_cast<std::size_t>(v)];
        require(within(prize, res.best.objective, 1e-9), "orienteering objective recount differs");
        require(res.best.objective <= enumerate_op(inst) + 1e-9,
                "orienteering objective exceeded the enumeration optimum");
    }

    for (const auto& variant : generate_mkp(12, 10, 31).instances) {
        const auto& inst = std::get<KnapsackInstance>(variant);
        std::vector<double> eta(static_cast<std::size_t>(inst.n));
        for (int j = 0; j < inst.n; ++j) {
            double mean_w = 0.0;
            for (int i = 0; i < inst.m(); ++i) mean_w += inst.weights(j, i);
            eta[static_cast<std::size_t>(j)] = inst.values[static_cast<std::size_t>(j)] /
                                               (mean_w / inst.m());
        }
        AcoConfig cfg = aco_defaults(Domain::mkp_aco);
        cfg.rng_seed = inst.seed;
        const AcoResult res = aco_solve(inst, eta, cfg);
        require(res.best.feasible, "knapsack solution flagged infeasible");
        std::vector<double> used(static_cast<std::size_t>(inst.m()), 0.0);
        double value = 0.0;
        for (int j : res.best.items) {
            value += inst.values[static_cast<std::size_t>(j)];
            for (int i = 0; i < inst.m(); ++i) used[static_cast<std::size_t>(i)] +=
                inst.weights(j, i);
        }
        for (int i = 0; i < inst.m(); ++i)
            require(used[static_cast<std::size_t>(i)] <=
                        inst.capacities[static_cast<std::size_t>(i)] + 1e-9,
                    "knapsack constraint violated on recount");
        require(within(value, res.best.objective, 1e-9), "knapsack objective recount differs");
        require(res.best.objective <= enumerate_mkp(inst) + 1e-9,
                "knapsack objective exceeded the enumeration optimum");
    }
}

// ----------------------------------------------------------------------------
// Criterion 7: structural similarity
// ----------------------------------------------------------------------------

void check_ast_suite() {
    const std::string source = baseline_source(Domain::tsp_c);
    const AstNoveltyReport identity = ast_novelty(source, {{"prior-0", source}});
    require(identity.matches.size() == 1 && identity.matches[0].combined == 1.0,
            "identity similarity is not 1");
    require(identity.novelty == 0.0, "identity novelty is not 0");

    require(within(combined_similarity(0.8, 1.0, 1.0), 0.95, 1e-12),
            "weight blend of (0.8, 1, 1) is not 0.95");

    const AstNoveltyReport rename = ast_novelty(kRenameVariant, {{"prior-0", kRenameBase}});
    require(rename.matches[0].shape_sim == 1.0, "rename changed the shape similarity");
    require(rename.matches[0].node_sim == 1.0, "rename changed the node similarity");
    require(rename.matches[0].combined >= 0.75, "rename similarity fell under 0.75");

    const AstNoveltyReport fresh = ast_novelty(source, {});
    require(fresh.novelty == 1.0 && fresh.matches.empty(), "empty history novelty is not 1");
}

// ----------------------------------------------------------------------------
// Criterion 8: instance analysis
// ----------------------------------------------------------------------------

void check_analysis_suite() {
    std::vector<std::pair<double, double>> grid;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) grid.emplace_back(0.2 * i, 0.2 * j);
    require(nn_statistics(coords_from(grid)).nn_cv < 0.01, "grid spacing variation too large");

    const DensityHull corners = density_and_hull(coords_from({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
    require(corners.hull_fraction == 1.0, "square corners hull fraction is not 1.0");
    const DensityHull with_center =
        density_and_hull(coords_from({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}}));
    require(with_center.hull_fraction == 0.8, "square plus center hull fraction is not 0.8");

    const Matrix blobs = two_blob_coords(77);
    const DemandStats constant = demand_pattern(blobs, std::vector<double>(24, 5.0));
    require(constant.constant, "constant demands were not flagged undefined");

    std::vector<double> blocked(24, 1.0);
    for (std::size_t i = 0; i < 12; ++i) blocked[i] = 9.0;
    const DemandStats stats = demand_pattern(blobs, blocked);
    require(stats.demand_morans_i > 0.3, "two-block autocorrelation under 0.3");
    require(within(stats.demand_morans_i, reference_moran(blobs, blocked), 1e-12),
            "library Moran's I diverged from the reference implementation");

    const Dataset routing = generate_cvrp(40, 1, 19, CvrpVariant::constructive);
    const auto& inst = std::get<RoutingInstance>(routing.instances.front());
    const auto features = [&](double factor) {
        RoutingInstance copy = inst;
        for (double& v : copy.base.coordinates.data()) v *= factor;
        return instance_features(Instance{copy});
    };
    const InstanceFeatureSummary f0 = features(1.0);
    const InstanceFeatureSummary f4 = features(4.0);
    require(f4.nn_cv == f0.nn_cv && f4.density_cv == f0.density_cv &&
                f4.hull_fraction == f0.hull_fraction &&
                f4.hull_area_ratio == f0.hull_area_ratio && f4.demand_cv == f0.demand_cv &&
                f4.demand_morans_i == f0.demand_morans_i,
            "ratio statistics moved under a power-of-two rescale");
    const InstanceFeatureSummary f35 = features(3.5);
    require(within(f35.nn_cv, f0.nn_cv, 1e-9) && within(f35.density_cv, f0.density_cv, 1e-9) &&
                f35.hull_fraction == f0.hull_fraction &&
                within(f35.hull_area_ratio, f0.hull_area_ratio, 1e-9),
            "ratio statistics moved under an arbitrary rescale");
}

// ----------------------------------------------------------------------------
// Criterion 9: budget accounting
// ----------------------------------------------------------------------------

void check_budget_accounting() {
    TempDir tmp;
    SessionStore store(tmp.path);
    Session s = create_session(store, Domain::tsp_c, generate_tsp(10, 3, 41), 30);

    int failures = 0;
    for (int i = 0; i < 30; ++i) {
        const std::string& source =
            (i % 7 == 3) ? kCrash : (i % 2 == 0 ? kNearest : kFarthest);
        const SubmitResult r = submit_candidate(store, s, source);
        if (r.record.status != ExecStatus::ok) ++failures;
        require(s.evaluator_calls_used == i + 1, "call counter skipped a submission");
        if (i % 3 == 0) {
            ToolArgs args;
            args.scope = "summary";
            diagnostic_call(store, s, "analyze_instances", args);
            require(s.evaluator_calls_used == i + 1, "a diagnostic call spent budget");
        }
    }
    require(failures > 0, "fixture produced no failing submissions");
    require(s.evaluator_calls_used == 30 && s.attempts.size() == 30,
            "thirty submissions were not all accepted");

    bool rejected = false;
    try {
        submit_candidate(store, s, kNearest);
    } catch (const BudgetExhausted&) {
        rejected = true;
    }
    require(rejected, "submission 31 was accepted");
    require(s.evaluator_calls_used == 30 && s.attempts.size() == 30,
            "the rejected submission left a trace");

    for (int i = 0; i < 100; ++i) {
        ToolArgs args;
        args.scope = "summary";
        require(!diagnostic_call(store, s, "analyze_instances", args).empty(),
                "diagnostics stopped answering after exhaustion");
    }
    require(s.evaluator_calls_used == 30, "post-exhaustion diagnostics spent budget");
}

// ----------------------------------------------------------------------------
// Criterion 10: reward branches
// ----------------------------------------------------------------------------

void check_reward_branches() {
    TempDir tmp;
    SessionStore store(tmp.path);
    const Dataset design = generate_tsp(10, 3, 41);

    Session idle = create_session(store, Domain::tsp_c, design, 5);
    ScriptedPolicy prose({"thinking out loud", "still just prose"});
    require(run_episode(prose, store, idle, 2).trajectory.reward == -2.0,
            "code-free episode did not earn -2.0");

    Session crash = create_session(store, Domain::tsp_c, design, 5);
    ScriptedPolicy crasher({final_turn(kCrash)});
    require(run_episode(crasher, store, crash, 2).trajectory.reward == -1.5,
            "crashing final did not earn -1.5");

    EuclideanInstance line;
    line.id = "delta-0";
    line.n = 4;
    line.coordinates = coords_from({{0.0, 0.0}, {1.0, 0.0}, {1.15, 0.0}, {2.0, 0.0}});
    Dataset delta{Domain::tsp_c, Role::design, 4, 0, {}};
    delta.instances.push_back(line);

    Session seeded = create_session(store, Domain::tsp_c, delta, 5, kDetour);
    ScriptedPolicy improver({final_turn(kNearest)});
    const double reward = run_episode(improver, store, seeded, 2).trajectory.reward;
    require(within(reward, 0.3, 1e-9),
            "improvement reward was " + std::to_string(reward) + ", expected 0.3");
}

// ----------------------------------------------------------------------------
// Criterion 11: end-to-end determinism and search strategies
// ----------------------------------------------------------------------------

void check_end_to_end() {
    const auto run_once = [](const fs::path& root) {
        SessionStore store(root);
        Session session = create_session(store, Domain::tsp_c, generate_tsp(10, 3, 41), 30,
                                         kFarthest);
        ScriptedPolicy policy({
            fenced(kFarthest),
            tool_turn(R"({"tool": "analyze_instances", "args": {"scope": "summary"}})"),
            fenced(kNearest),
            final_turn(kNearest),
        });
        const EpisodeResult episode = run_episode(policy, store, session, 40);
        const std::string log =
            detail::read_text_file(store.session_dir(session.session_id) / "events.jsonl");
        return std::make_pair(episode.trajectory.reward, log);
    };
    TempDir a, b;
    const auto first = run_once(a.path);
    const auto second = run_once(b.path);
    require(first.second == second.second, "session logs differ between two runs");
    require(first.first == second.first, "rewards differ between two runs");

    TempDir sr_dir;
    SessionStore sr_store(sr_dir.path);
    std::vector<std::string> turns;
    for (int i = 0; i < 29; ++i) turns.push_back(fenced(kFarthest));
    turns.push_back(fenced(kNearest));
    turns.push_back(final_turn(kNearest));
    for (int round = 0; round < 2; ++round) {
        for (int i = 0; i < 30; ++i) turns.push_back(fenced(kFarthest));
        turns.push_back(final_turn(kFarthest));
    }
    for (int i = 0; i < 10; ++i) turns.push_back(fenced(kFarthest));
    turns.push_back(final_turn(kFarthest));

    ScriptedPolicy sr_policy(turns);
    SrOptions options;
    options.global_budget = 100;
    options.rounds = 10;
    options.round_budget = 30;
    options.max_turns = 35;
    const SrResult sr = sequential_refinement(sr_policy, sr_store, Domain::tsp_c,
                                              generate_tsp(10, 2, 41), options);
    require(sr.rounds.size() == 4, "refinement ran the wrong number of rounds");
    require(sr.rounds[0].budget == 30 && sr.rounds[1].budget == 30 && sr.rounds[2].budget == 30 &&
                sr.rounds[3].budget == 10,
            "round budgets did not follow 30/30/30/10");
    require(sr.total_calls == 100, "refinement spent " + std::to_string(sr.total_calls) +
                                       " calls, expected exactly 100");
    const Session round2 = load_session(sr_store, sr.rounds[1].session_id);
    require(round2.seed_heuristic.has_value() && *round2.seed_heuristic == trimmed(kNearest),
            "round 2 was not seeded with the round 1 best");
    require(sr.best_source.has_value() && *sr.best_source == trimmed(kNearest),
            "refinement lost the best source");

    TempDir ps_dir;
    SessionStore ps_store(ps_dir.path);
    const std::vector<std::vector<std::string>> scripts{
        {fenced(kFarthest), final_turn(kFarthest)},
        {fenced(kNearest), final_turn(kNearest)},
        {fenced(kCrash), "prose"},
        {fenced(kNearest), final_turn(kNearest)},
        {fenced(kFarthest), final_turn(kFarthest)},
    };
    const PolicyFactory factory = [&](int lane) -> std::unique_ptr<ChatPolicy> {
        return std::make_unique<ScriptedPolicy>(scripts[static_cast<std::size_t>(lane)]);
    };
    const PsResult ps = parallel_sampling(factory, ps_store, Domain::tsp_c,
                                          generate_tsp(10, 3, 41), 5, 2,
                                          PsOptions{.max_turns = 4});
    require(ps.selected_lane == 1, "selection did not prefer the earliest best lane");
    require(ps.selected_objective.has_value(), "selection carried no objective");
    double lane_min = std::numeric_limits<double>::infinity();
    for (const LaneResult& lane : ps.lanes)
        if (!lane.failed && lane.best_objective) lane_min = std::min(lane_min, *lane.best_objective);
    require(*ps.selected_objective == lane_min, "selection missed the lane-minimum objective");
}

// ----------------------------------------------------------------------------

struct Criterion {
    const char* title;
    void (*body)();
};

const Criterion kCriteria[] = {
    {"percentage gap formula", check_gap_formula},
    {"exact oracles equal exhaustive enumeration", check_oracle_parity},
    {"nearest-neighbor mean gap inside [5%, 30%]", check_baseline_band},
    {"colony finds small optima and beats nearest neighbor", check_colony_effectiveness},
    {"colony determinism, monotone best, normalized transitions, eta scaling",
     check_colony_invariants},
    {"orienteering and knapsack formulas, feasibility, enumeration bounds", check_prize_formulas},
    {"structural similarity: identity, weights, renames, empty history", check_ast_suite},
    {"instance analysis: spacing, hull, autocorrelation, scale invariance", check_analysis_suite},
    {"evaluation budget accounting", check_budget_accounting},
    {"reward branches: -2.0, -1.5, +0.3 improvement", check_reward_branches},
    {"deterministic replay, budget conservation, lane selection", check_end_to_end},
};

}  // namespace

int main() {
    int failed = 0;
    int index = 0;
    for (const Criterion& criterion : kCriteria) {
        ++index;
        std::string note;
        try {
            criterion.body();
        } catch (const std::exception& e) {
            ++failed;
            note = e.what();
        }
        if (note.empty())
            std::printf("criterion %2d: pass  %s\n", index, criterion.title);
        else
            std::printf("criterion %2d: FAIL  %s (%s)\n", index, criterion.title, note.c_str());
    }
    if (failed == 0)
        std::printf("acceptance: all %d criteria passed\n", index);
    else
        std::printf("acceptance: %d of %d criteria failed\n", failed, index);
    return failed == 0 ? 0 : 1;
}
