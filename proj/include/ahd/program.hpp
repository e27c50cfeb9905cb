#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ahd/domain.hpp"
#include "ahd/instance.hpp"
#include "ahd/script/interpreter.hpp"
#include "ahd/script/parser.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Candidate heuristics are small scripts. Each domain binds one entry function
// with a fixed name and parameter list; parsing checks the binding, execution
// happens in a fresh sandboxed interpreter per call.
// ----------------------------------------------------------------------------

struct InterfaceSpec {
    std::string entry;
    std::vector<std::string> params;
};

inline const InterfaceSpec& domain_interface(Domain d) {
    static const InterfaceSpec tsp_c{
        "select_next_node", {"current_node", "destination_node", "unvisited_nodes",
                             "distance_matrix"}};
    static const InterfaceSpec cvrp_c{
        "select_next_node", {"current_node", "depot", "feasible_unvisited",
                             "capacity_remaining", "demands", "distance_matrix"}};
    static const InterfaceSpec tsp_aco{"heuristic", {"distance_matrix"}};
    static const InterfaceSpec cvrp_aco{
        "heuristic", {"distance_matrix", "coordinates", "demands", "capacity"}};
    static const InterfaceSpec op_aco{"heuristic", {"prize", "distance", "maxlen"}};
    static const InterfaceSpec mkp_aco{"heuristic", {"prize", "weight"}};
    switch (d) {
        case Domain::tsp_c: return tsp_c;
        case Domain::cvrp_c:
        case Domain::ovrp_c: return cvrp_c;
        case Domain::tsp_aco: return tsp_aco;
        case Domain::cvrp_aco: return cvrp_aco;
        case Domain::op_aco: return op_aco;
        case Domain::mkp_aco: return mkp_aco;
    }
    throw std::logic_error("unknown domain");
}

enum class ExecStatus { ok, parse_error, runtime_error, timeout, infeasible_output };

inline const char* exec_status_tag(ExecStatus s) {
    switch (s) {
        case ExecStatus::ok: return "ok";
        case ExecStatus::parse_error: return "parse_error";
        case ExecStatus::runtime_error: return "runtime_error";
        case ExecStatus::timeout: return "timeout";
        case ExecStatus::infeasible_output: return "infeasible_output";
    }
    return "?";
}

struct ExecutionOutcome {
    ExecStatus status = ExecStatus::ok;
    script::Value value;
    double wall_time = 0.0;
    std::string diagnostics;

    bool ok() const { return status == ExecStatus::ok; }
};

struct InterfaceMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HeuristicProgram {
    std::string source;
    Domain domain = Domain::tsp_c;
    std::shared_ptr<const script::Node> tree;  // module root
    std::string entry_name;
};

inline std::string interface_signature(const InterfaceSpec& spec) {
    std::string s = spec.entry + "(";
    for (std::size_t i = 0; i < spec.params.size(); ++i) s += (i ? ", " : "") + spec.params[i];
    return s + ")";
}

/// Parse and bind. Throws script::ParseError on syntax errors and
/// InterfaceMismatch when the entry function or its parameter list deviates
/// from the domain interface.
inline HeuristicProgram parse_program(const std::string& source, Domain domain) {
    if (source.empty()) throw script::ParseError("empty program", 1);
    std::shared_ptr<const script::Node> tree = script::parse_source(source);

    const InterfaceSpec& spec = domain_interface(domain);
    const script::Node* entry = nullptr;
    for (const auto& stmt : tree->children)
        if (stmt->kind == script::NodeKind::func_def && stmt->text == spec.entry)
            entry = stmt.get();
    if (!entry)
        throw InterfaceMismatch("program must define " + interface_signature(spec));
    std::vector<std::string> params;
    for (const auto& child : entry->children)
        if (child->kind == script::NodeKind::param) params.push_back(child->text);
    if (params != spec.params) {
        std::string got;
        for (std::size_t i = 0; i < params.size(); ++i) got += (i ? ", " : "") + params[i];
        throw InterfaceMismatch("parameter list must be exactly " + interface_signature(spec) +
                                ", got (" + got + ")");
    }
    return HeuristicProgram{source, domain, std::move(tree), spec.entry};
}

// ----------------------------------------------------------------------------
// Value conversion helpers between host data and script values.
// ----------------------------------------------------------------------------
namespace hostval {

inline script::Value from_vector(const std::vector<double>& v) {
    auto arr = script::make_array(v.size());
    for (double x : v) arr->push_back(script::Value(x));
    return script::Value(arr);
}

inline script::Value from_vector(const std::vector<int>& v) {
    auto arr = script::make_array(v.size());
    for (int x : v) arr->push_back(script::Value(static_cast<double>(x)));
    return script::Value(arr);
}

inline script::Value from_matrix(const Matrix& m) {
    auto rows = script::make_array(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = script::make_array(m.cols());
        for (std::size_t c = 0; c < m.cols(); ++c) row->push_back(script::Value(m(r, c)));
        rows->push_back(script::Value(row));
    }
    return script::Value(rows);
}

inline std::optional<Matrix> to_matrix(const script::Value& v, std::size_t rows,
                                       std::size_t cols) {
    if (!v.is_array() || v.array()->size() != rows) return std::nullopt;
    Matrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = (*v.array())[r];
        if (!row.is_array() || row.array()->size() != cols) return std::nullopt;
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& cell = (*row.array())[c];
            if (!cell.is_number() && !cell.is_bool()) return std::nullopt;
            out(r, c) = cell.as_number_unchecked();
        }
    }
    return out;
}

inline std::optional<std::vector<double>> to_vector(const script::Value& v, std::size_t n) {
    if (!v.is_array() || v.array()->size() != n) return std::nullopt;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& cell = (*v.array())[i];
        if (!cell.is_number() && !cell.is_bool()) return std::nullopt;
        out[i] = cell.as_number_unchecked();
    }
    return out;
}

}  // namespace hostval

// ----------------------------------------------------------------------------
// Sandbox execution: fresh interpreter per call, limits enforced, failures
// mapped onto the outcome taxonomy.
// ----------------------------------------------------------------------------

inline script::Limits selector_limits() {
    script::Limits lim;
    lim.wall_seconds = 0.05;
    lim.max_steps = 1'000'000;
    lim.max_cells = 4'000'000;
    return lim;
}

inline script::Limits matrix_limits() {
    script::Limits lim;
    lim.wall_seconds = 10.0;
    lim.max_steps = 200'000'000;
    lim.max_cells = 32'000'000;  // ~512 MB
    return lim;
}

inline ExecutionOutcome sandbox_execute(const HeuristicProgram& program,
                                        std::vector<script::Value> args,
                                        const script::Limits& limits) {
    ExecutionOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        script::Interpreter interp(*program.tree, limits);
        out.value = interp.call(program.entry_name, std::move(args));
        out.status = ExecStatus::ok;
    } catch (const script::TimeoutError& e) {
        out.status = ExecStatus::timeout;
        out.diagnostics = e.what();
    } catch (const script::RuntimeError& e) {
        out.status = ExecStatus::runtime_error;
        out.diagnostics = e.what();
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// ----------------------------------------------------------------------------
// Selector invocation (constructive domains).
// ----------------------------------------------------------------------------

struct SelectorCall {
    int current_node = 0;
    int anchor = 0;                       // destination node (TSP) or depot
    std::vector<int> feasible;            // candidate set shown to the program
    double capacity_remaining = 0.0;      // CVRP/OVRP only
    const std::vector<int>* demands = nullptr;
    const Matrix* distances = nullptr;
    bool allow_anchor_return = false;     // CVRP/OVRP: choosing the depot is legal
};

inline ExecutionOutcome invoke_selector(const HeuristicProgram& program, const SelectorCall& call,
                                        const script::Limits& limits = selector_limits()) {
    std::vector<script::Value> args;
    const script::Value dist = hostval::from_matrix(*call.distances);
    if (program.domain == Domain::tsp_c) {
        args = {script::Value(static_cast<double>(call.current_node)),
                script::Value(static_cast<double>(call.anchor)),
                hostval::from_vector(call.feasible), dist};
    } else {
        args = {script::Value(static_cast<double>(call.current_node)),
                script::Value(static_cast<double>(call.anchor)),
                hostval::from_vector(call.feasible),
                script::Value(call.capacity_remaining),
                hostval::from_vector(*call.demands), dist};
    }
    ExecutionOutcome out = sandbox_execute(program, std::move(args), limits);
    if (!out.ok()) return out;

    const script::Value& v = out.value;
    if (!v.is_number() && !v.is_bool()) {
        out.status = ExecStatus::infeasible_output;
        out.diagnostics = std::string("selector returned ") + v.type_name() + ", expected an index";
        return out;
    }
    const double raw = v.as_number_unchecked();
    if (raw != std::floor(raw)) {
        out.status = ExecStatus::infeasible_output;
        out.diagnostics = "selector returned a non-integer index";
        return out;
    }
    const int idx = static_cast<int>(raw);
    const bool in_feasible =
        std::find(call.feasible.begin(), call.feasible.end(), idx) != call.feasible.end();
    const bool depot_ok = call.allow_anchor_return && idx == call.anchor;
    if (!in_feasible && !depot_ok) {
        out.status = ExecStatus::infeasible_output;
        out.diagnostics = "selector returned node " + std::to_string(idx) +
                          " outside the feasible set";
    }
    return out;
}

// ----------------------------------------------------------------------------
// Matrix-heuristic invocation (ACO domains) with output sanitation.
// ----------------------------------------------------------------------------

inline constexpr double kEtaFloor = 1e-10;

/// Clamp negative, NaN, or infinite entries to the positive floor. The matrix
/// is usable only if at least one raw entry was strictly positive and finite;
/// otherwise the output carries no signal and the result is infeasible.
inline bool sanitize_eta(std::vector<double>& entries) {
    bool any_positive = false;
    for (double& e : entries) {
        if (std::isfinite(e) && e > 0.0)
            any_positive = true;
        else if (!std::isfinite(e) || e < 0.0)
            e = kEtaFloor;
    }
    return any_positive;
}

inline ExecutionOutcome invoke_matrix_heuristic(const HeuristicProgram& program,
                                                const Instance& instance,
                                                const script::Limits& limits = matrix_limits()) {
    std::vector<script::Value> args;
    std::size_t n = 0;
    bool vector_shape = false;
    switch (program.domain) {
        case Domain::tsp_aco: {
            const auto& inst = std::get<EuclideanInstance>(instance);
            n = static_cast<std::size_t>(inst.n);
            args = {hostval::from_matrix(inst.distances())};
            break;
        }
        case Domain::cvrp_aco: {
            const auto& inst = std::get<RoutingInstance>(instance);
            n = static_cast<std::size_t>(inst.base.n);
            args = {hostval::from_matrix(inst.base.distances()),
                    hostval::from_matrix(inst.base.coordinates),
                    hostval::from_vector(inst.demands),
                    script::Value(static_cast<double>(inst.capacity))};
            break;
        }
        case Domain::op_aco: {
            const auto& inst = std::get<OrienteeringInstance>(instance);
            n = static_cast<std::size_t>(inst.base.n);
            args = {hostval::from_vector(inst.prizes), hostval::from_matrix(inst.base.distances()),
                    script::Value(inst.max_length)};
            break;
        }
        case Domain::mkp_aco: {
            const auto& inst = std::get<KnapsackInstance>(instance);
            n = static_cast<std::size_t>(inst.n);
            vector_shape = true;
            args = {hostval::from_vector(inst.values), hostval::from_matrix(inst.weights)};
            break;
        }
        default:
            throw std::logic_error("invoke_matrix_heuristic requires an ACO domain");
    }

    ExecutionOutcome out = sandbox_execute(program, std::move(args), limits);
    if (!out.ok()) return out;

    if (vector_shape) {
        auto vec = hostval::to_vector(out.value, n);
        if (!vec) {
            out.status = ExecStatus::infeasible_output;
            out.diagnostics = "heuristic must return a numeric vector of length " +
                              std::to_string(n);
            return out;
        }
        if (!sanitize_eta(*vec)) {
            out.status = ExecStatus::infeasible_output;
            out.diagnostics = "heuristic vector has no positive finite entry";
            return out;
        }
        out.value = hostval::from_vector(*vec);
        return out;
    }
    auto mat = hostval::to_matrix(out.value, n, n);
    if (!mat) {
        out.status = ExecStatus::infeasible_output;
        out.diagnostics = "heuristic must return an " + std::to_string(n) + "x" +
                          std::to_string(n) + " numeric matrix";
        return out;
    }
    if (!sanitize_eta(mat->data())) {
        out.status = ExecStatus::infeasible_output;
        out.diagnostics = "heuristic matrix has no positive finite entry";
        return out;
    }
    out.value = hostval::from_matrix(*mat);
    return out;
}

/// Sanitized eta as host matrix; callers in the ACO solver use this after a
/// successful invoke_matrix_heuristic.
inline Matrix eta_matrix(const ExecutionOutcome& out, std::size_t rows, std::size_t cols) {
    auto m = hostval::to_matrix(out.value, rows, cols);
    if (!m) throw std::logic_error("outcome does not hold a matrix of the requested shape");
    return *m;
}

inline std::vector<double> eta_vector(const ExecutionOutcome& out, std::size_t n) {
    auto v = hostval::to_vector(out.value, n);
    if (!v) throw std::logic_error("outcome does not hold a vector of the requested length");
    return *v;
}

}  // namespace ahd
