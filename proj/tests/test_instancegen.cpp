#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ahd/dataset_io.hpp"
#include "ahd/instance_gen.hpp"

using namespace ahd;

namespace {

// Oracle for the prize rule, restated from the definition: prizes depend only
// on depot distance, scaled so the farthest node is worth exactly 1.00.
double oracle_prize(const Matrix& coords, int i) {
    double max_d = 0.0;
    for (std::size_t j = 0; j < coords.rows(); ++j)
        max_d = std::max(max_d, euclidean(coords(0, 0), coords(0, 1), coords(j, 0), coords(j, 1)));
    const double d =
        euclidean(coords(0, 0), coords(0, 1), coords(static_cast<std::size_t>(i), 0),
                  coords(static_cast<std::size_t>(i), 1));
    return (1.0 + std::floor(99.0 * d / max_d)) / 100.0;
}

const RoutingInstance& routing_at(const Dataset& ds, std::size_t k) {
    return std::get<RoutingInstance>(ds.instances[k]);
}

}  // namespace

TEST_CASE("tsp generation is deterministic and sized as requested") {
    Dataset a = generate_tsp(50, 64, 2024);
    Dataset b = generate_tsp(50, 64, 2024);
    REQUIRE(a == b);
    REQUIRE(a.instances.size() == 64);
    REQUIRE(a.role == Role::design);
    for (const auto& inst : a.instances) {
        const auto& e = std::get<EuclideanInstance>(inst);
        REQUIRE(e.n == 50);
        REQUIRE(e.coordinates.rows() == 50);
        REQUIRE(e.coordinates.cols() == 2);
        for (double v : e.coordinates.data()) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
        }
    }
    REQUIRE(generate_tsp(50, 64, 2025) != a);
}

TEST_CASE("tsp coordinates look uniform on the unit square") {
    Dataset ds = generate_tsp(200, 50, 7);
    double sum = 0.0, sumsq = 0.0;
    std::size_t count = 0;
    for (const auto& inst : ds.instances)
        for (double v : std::get<EuclideanInstance>(inst).coordinates.data()) {
            sum += v;
            sumsq += v * v;
            ++count;
        }
    const double mean = sum / static_cast<double>(count);
    const double var = sumsq / static_cast<double>(count) - mean * mean;
    // 20000 samples: mean se ~ 0.002, variance of U(0,1) is 1/12.
    REQUIRE(mean == Catch::Approx(0.5).margin(0.01));
    REQUIRE(var == Catch::Approx(1.0 / 12.0).margin(0.005));
}

TEST_CASE("tsp rejects degenerate sizes") {
    REQUIRE_THROWS_AS(generate_tsp(2, 1, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(generate_tsp(5, 0, 0), std::invalid_argument);
}

TEST_CASE("cvrp constructive variant uses Q=40 and a random depot") {
    Dataset ds = generate_cvrp(50, 64, 99, CvrpVariant::constructive);
    REQUIRE(ds.domain == Domain::cvrp_c);
    REQUIRE(ds.instances.size() == 64);
    int depot_moves = 0;
    for (std::size_t k = 0; k < ds.instances.size(); ++k) {
        const auto& r = routing_at(ds, k);
        REQUIRE(r.capacity == 40);
        REQUIRE(r.depot_index == 0);
        REQUIRE(r.demands[0] == 0);
        for (std::size_t i = 1; i < r.demands.size(); ++i) {
            REQUIRE(r.demands[i] >= 1);
            REQUIRE(r.demands[i] <= 9);
        }
        if (r.base.coordinates(0, 0) != 0.5 || r.base.coordinates(0, 1) != 0.5) ++depot_moves;
    }
    REQUIRE(depot_moves == 64);
}

TEST_CASE("cvrp aco variant uses Q=50 and depot pinned at the center") {
    Dataset ds = generate_cvrp(50, 10, 99, CvrpVariant::aco);
    REQUIRE(ds.domain == Domain::cvrp_aco);
    REQUIRE(ds.instances.size() == 10);
    for (std::size_t k = 0; k < ds.instances.size(); ++k) {
        const auto& r = routing_at(ds, k);
        REQUIRE(r.capacity == 50);
        REQUIRE(r.base.coordinates(0, 0) == 0.5);
        REQUIRE(r.base.coordinates(0, 1) == 0.5);
        REQUIRE(r.demands[0] == 0);
        for (std::size_t i = 1; i < r.demands.size(); ++i) {
            REQUIRE(r.demands[i] >= 1);
            REQUIRE(r.demands[i] <= 9);
        }
    }
}

TEST_CASE("ovrp shares the raw generator with constructive cvrp") {
    Dataset cvrp = generate_cvrp(40, 8, 555, CvrpVariant::constructive);
    Dataset ovrp = generate_ovrp(40, 8, 555);
    REQUIRE(ovrp.domain == Domain::ovrp_c);
    for (std::size_t k = 0; k < 8; ++k) {
        const auto& a = routing_at(cvrp, k);
        const auto& b = routing_at(ovrp, k);
        REQUIRE(a.base.coordinates == b.base.coordinates);
        REQUIRE(a.demands == b.demands);
        REQUIRE(a.capacity == b.capacity);
        REQUIRE(a.depot_index == b.depot_index);
    }
}

TEST_CASE("op prizes satisfy the depot-distance formula") {
    Dataset ds = generate_op(60, 12, 31);
    for (const auto& inst : ds.instances) {
        const auto& o = std::get<OrienteeringInstance>(inst);
        REQUIRE(o.prizes.size() == 60);
        double best_d = -1.0;
        int farthest = -1;
        for (int i = 0; i < o.base.n; ++i) {
            const double d = euclidean(o.base.coordinates(0, 0), o.base.coordinates(0, 1),
                                       o.base.coordinates(static_cast<std::size_t>(i), 0),
                                       o.base.coordinates(static_cast<std::size_t>(i), 1));
            if (d > best_d) {
                best_d = d;
                farthest = i;
            }
            const double p = o.prizes[static_cast<std::size_t>(i)];
            REQUIRE(p == oracle_prize(o.base.coordinates, i));
            REQUIRE(p >= 0.01);
            REQUIRE(p <= 1.0);
            // Prizes are integer hundredths by construction.
            REQUIRE(std::round(p * 100.0) == Catch::Approx(p * 100.0));
        }
        REQUIRE(o.prizes[static_cast<std::size_t>(farthest)] == 1.0);
        REQUIRE(o.prizes[0] == 0.01);
    }
}

TEST_CASE("op route budget follows the size schedule") {
    auto budget_of = [](int n) {
        return std::get<OrienteeringInstance>(generate_op(n, 1, 3).instances[0]).max_length;
    };
    REQUIRE(budget_of(50) == 3.0);
    REQUIRE(budget_of(51) == 4.0);
    REQUIRE(budget_of(100) == 4.0);
    REQUIRE(budget_of(200) == 5.0);
    REQUIRE(budget_of(300) == 6.0);
    REQUIRE_THROWS_AS(generate_op(301, 1, 3), std::invalid_argument);
}

TEST_CASE("mkp normalization leaves unit capacities and 1/lambda column sums") {
    Dataset ds = generate_mkp(100, 5, 4711);
    REQUIRE(ds.domain == Domain::mkp_aco);
    REQUIRE(ds.instances.size() == 5);
    for (const auto& inst : ds.instances) {
        const auto& p = std::get<KnapsackInstance>(inst);
        REQUIRE(p.n == 100);
        REQUIRE(p.m() == 5);
        for (double c : p.capacities) REQUIRE(c == 1.0);
        for (double v : p.values) {
            REQUIRE(v >= 0.0);
            REQUIRE(v < 1.0);
        }
        for (int i = 0; i < p.m(); ++i) {
            double colsum = 0.0;
            for (int j = 0; j < p.n; ++j) {
                const double w =
                    p.weights(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
                REQUIRE(w >= 0.0);
                REQUIRE(w <= 1.0);  // every single item fits on its own
                colsum += w;
            }
            REQUIRE(colsum == Catch::Approx(2.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("mkp stays feasible even at pathological sizes") {
    // At n<=2 strict 0.5 tightness cannot keep every item feasible (one item
    // would have to outweigh the rest combined), so the capacity floor binds.
    for (int n : {1, 2, 3}) {
        Dataset tiny = generate_mkp(n, 50, 8);
        for (const auto& inst : tiny.instances) {
            const auto& p = std::get<KnapsackInstance>(inst);
            for (double w : p.weights.data()) {
                REQUIRE(w >= 0.0);
                REQUIRE(w <= 1.0);
            }
        }
        REQUIRE(tiny == generate_mkp(n, 50, 8));
    }
}

TEST_CASE("dataset save/load round trip is bit identical") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ahd_io_test";
    fs::create_directories(dir);

    for (Dataset ds : {generate_tsp(12, 3, 17), generate_cvrp(10, 2, 17, CvrpVariant::aco),
                       generate_ovrp(9, 2, 17), generate_op(8, 2, 17), generate_mkp(6, 2, 17)}) {
        const fs::path file = dataset_path(dir, ds.domain, ds.role, ds.size_class, ds.seed);
        save_dataset(ds, file);
        Dataset back = load_dataset(file);
        REQUIRE(back == ds);
        // Byte-for-byte: re-serializing the loaded dataset reproduces the file.
        std::ifstream in(file, std::ios::binary);
        std::string on_disk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        REQUIRE(serialize_dataset(back) == on_disk);
    }
    fs::remove_all(dir);
}

TEST_CASE("dataset loader rejects corrupt input") {
    REQUIRE_THROWS_AS(parse_dataset(""), SchemaError);
    REQUIRE_THROWS_AS(parse_dataset("{\"schema\":\"other.v9\"}\n"), SchemaError);

    std::string good = serialize_dataset(generate_tsp(5, 3, 1));
    // Drop the last record: header count no longer matches.
    std::string truncated = good.substr(0, good.rfind("\n{") + 1);
    REQUIRE_THROWS_AS(parse_dataset(truncated), SchemaError);
    REQUIRE_THROWS_AS(load_dataset("/nonexistent/ahd.jsonl"), IoError);
}

TEST_CASE("committed golden dataset loads with a stable checksum") {
    const std::filesystem::path file =
        std::filesystem::path(AHD_FIXTURE_DIR) / "golden_tsp_design_6_42.jsonl";
    std::ifstream in(file, std::ios::binary);
    REQUIRE(in.good());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(checksum_hex(bytes) == "8492aaa6b7174229");
    Dataset golden = parse_dataset(bytes);
    REQUIRE(golden == generate_tsp(6, 2, 42));
}
