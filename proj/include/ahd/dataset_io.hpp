#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ahd/instance.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Dataset files are JSON Lines: a header record followed by one record per
// instance. Doubles are written with 17 significant digits so save -> load ->
// save reproduces the file byte for byte. Writing is done by hand to pin the
// byte layout; reading goes through a JSON parser.
// ----------------------------------------------------------------------------

inline constexpr const char* kDatasetSchema = "ahd.dataset.v1";

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void write_doubles(std::string& out, const std::vector<double>& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    out += ']';
}

inline void write_rows(std::string& out, const Matrix& m) {
    out += '[';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (r) out += ',';
        out += '[';
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += format_double(m(r, c));
        }
        out += ']';
    }
    out += ']';
}

inline void write_ints(std::string& out, const std::vector<int>& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    out += ']';
}

inline std::string euclidean_json(const EuclideanInstance& e, bool close) {
    std::string out = "{\"id\":\"" + e.id + "\",\"n\":" + std::to_string(e.n) +
                      ",\"seed\":" + std::to_string(e.seed) + ",\"coordinates\":";
    write_rows(out, e.coordinates);
    if (close) out += '}';
    return out;
}

inline std::string instance_json(const Instance& inst) {
    std::string out;
    if (const auto* e = std::get_if<EuclideanInstance>(&inst)) {
        out = euclidean_json(*e, true);
    } else if (const auto* r = std::get_if<RoutingInstance>(&inst)) {
        out = euclidean_json(r->base, false);
        out += ",\"depot_index\":" + std::to_string(r->depot_index) + ",\"demands\":";
        write_ints(out, r->demands);
        out += ",\"capacity\":" + std::to_string(r->capacity) + "}";
    } else if (const auto* o = std::get_if<OrienteeringInstance>(&inst)) {
        out = euclidean_json(o->base, false);
        out += ",\"depot_index\":" + std::to_string(o->depot_index) + ",\"prizes\":";
        write_doubles(out, o->prizes);
        out += ",\"max_length\":" + format_double(o->max_length) + "}";
    } else if (const auto* p = std::get_if<KnapsackInstance>(&inst)) {
        out = "{\"id\":\"" + p->id + "\",\"n\":" + std::to_string(p->n) +
              ",\"seed\":" + std::to_string(p->seed) + ",\"values\":";
        write_doubles(out, p->values);
        out += ",\"weights\":";
        write_rows(out, p->weights);
        out += ",\"capacities\":";
        write_doubles(out, p->capacities);
        out += "}";
    }
    return out;
}

inline Matrix read_rows(const nlohmann::json& j) {
    if (!j.is_array()) throw SchemaError("matrix field must be an array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = rows ? j[0].size() : 0;
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (j[r].size() != cols) throw SchemaError("ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

inline EuclideanInstance read_euclidean(const nlohmann::json& j) {
    EuclideanInstance e;
    e.id = j.at("id").get<std::string>();
    e.n = j.at("n").get<int>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.coordinates = read_rows(j.at("coordinates"));
    if (e.coordinates.rows() != static_cast<std::size_t>(e.n) || e.coordinates.cols() != 2)
        throw SchemaError("coordinate shape mismatch for " + e.id);
    return e;
}

inline Instance read_instance(Domain domain, const nlohmann::json& j) {
    switch (domain) {
        case Domain::tsp_c:
        case Domain::tsp_aco:
            return read_euclidean(j);
        case Domain::cvrp_c:
        case Domain::ovrp_c:
        case Domain::cvrp_aco: {
            RoutingInstance r;
            r.base = read_euclidean(j);
            r.depot_index = j.at("depot_index").get<int>();
            r.demands = j.at("demands").get<std::vector<int>>();
            r.capacity = j.at("capacity").get<int>();
            if (r.demands.size() != static_cast<std::size_t>(r.base.n))
                throw SchemaError("demand length mismatch for " + r.base.id);
            return r;
        }
        case Domain::op_aco: {
            OrienteeringInstance o;
            o.base = read_euclidean(j);
            o.depot_index = j.at("depot_index").get<int>();
            o.prizes = j.at("prizes").get<std::vector<double>>();
            o.max_length = j.at("max_length").get<double>();
            if (o.prizes.size() != static_cast<std::size_t>(o.base.n))
                throw SchemaError("prize length mismatch for " + o.base.id);
            return o;
        }
        case Domain::mkp_aco: {
            KnapsackInstance p;
            p.id = j.at("id").get<std::string>();
            p.n = j.at("n").get<int>();
            p.seed = j.at("seed").get<std::uint64_t>();
            p.values = j.at("values").get<std::vector<double>>();
            p.weights = read_rows(j.at("weights"));
            p.capacities = j.at("capacities").get<std::vector<double>>();
            if (p.weights.rows() != static_cast<std::size_t>(p.n) ||
                p.weights.cols() != p.capacities.size())
                throw SchemaError("weight shape mismatch for " + p.id);
            return p;
        }
    }
    throw SchemaError("unknown domain in dataset");
}

}  // namespace detail

inline std::string serialize_dataset(const Dataset& ds) {
    std::string out = "{\"schema\":\"";
    out += kDatasetSchema;
    out += "\",\"domain\":\"" + std::string(domain_tag(ds.domain)) + "\",\"role\":\"" +
           std::string(role_tag(ds.role)) + "\",\"size_class\":" + std::to_string(ds.size_class) +
           ",\"count\":" + std::to_string(ds.instances.size()) +
           ",\"seed\":" + std::to_string(ds.seed) + "}\n";
    for (const auto& inst : ds.instances) {
        out += detail::instance_json(inst);
        out += '\n';
    }
    return out;
}

inline Dataset parse_dataset(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty dataset file");
    nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object())
        throw SchemaError("malformed dataset header");
    if (header.value("schema", "") != kDatasetSchema)
        throw SchemaError("schema version mismatch: expected " + std::string(kDatasetSchema));

    Dataset ds;
    ds.domain = parse_domain(header.at("domain").get<std::string>());
    ds.role = parse_role(header.at("role").get<std::string>());
    ds.size_class = header.at("size_class").get<int>();
    ds.seed = header.at("seed").get<std::uint64_t>();
    const std::size_t count = header.at("count").get<std::size_t>();

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw SchemaError("malformed instance record");
        ds.instances.push_back(detail::read_instance(ds.domain, j));
    }
    if (ds.instances.size() != count)
        throw SchemaError("dataset truncated: header count " + std::to_string(count) +
                          ", records " + std::to_string(ds.instances.size()));
    return ds;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path.string());
    const std::string text = serialize_dataset(ds);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for read: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str());
}

/// Conventional on-disk location: data/<domain>/<role>_<N>_<seed>.jsonl
inline std::filesystem::path dataset_path(const std::filesystem::path& root, Domain domain,
                                          Role role, int size_class, std::uint64_t seed) {
    return root / std::string(domain_tag(domain)) /
           (std::string(role_tag(role)) + "_" + std::to_string(size_class) + "_" +
            std::to_string(seed) + ".jsonl");
}

}  // namespace ahd
