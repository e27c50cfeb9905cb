#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ahd/dataset_io.hpp"
#include "ahd/episode.hpp"
#include "ahd/instance_gen.hpp"
#include "ahd/oracles.hpp"
#include "ahd/scoring.hpp"
#include "ahd/session.hpp"

namespace ahd::cli {

// ----------------------------------------------------------------------------
// Command surface. Each cmd_* takes a parsed argument struct plus output
// streams and returns a process exit code; run_cli maps flags onto them. The
// split keeps every command drivable in process by the tests.
// ----------------------------------------------------------------------------

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;  // unexpected exception
inline constexpr int kExitUsage = 2;     // bad flags or config contents
inline constexpr int kExitIo = 3;        // missing or malformed files
inline constexpr int kExitEndpoint = 4;  // policy endpoint unreachable
inline constexpr int kExitEval = 5;      // program failed or no heuristic produced

/// Carries the exit code alongside the message so helpers can fail precisely.
struct CliError : std::runtime_error {
    int code;
    CliError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
};

namespace detail {

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string fmt_pct(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f%%", v);
    return buf;
}

inline bool starts_with(const std::string& text, std::string_view prefix) {
    return text.size() >= prefix.size() && text.compare(0, prefix.size(), prefix) == 0;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Reference files. make-refs materializes exact optima next to a dataset;
// eval and report pick them up to print gaps. Instance ids fully determine
// the generated content, so lookups go by id rather than file identity.
// ----------------------------------------------------------------------------

inline constexpr const char* kRefsSchema = "ahd.refs.v1";

struct RefsFile {
    Domain domain = Domain::tsp_c;
    std::string method;
    std::string dataset_checksum;
    std::vector<std::pair<std::string, double>> optima;
};

/// Largest instance size the exact reference oracle accepts, or 0 when the
/// domain has no oracle at all.
inline int refs_size_limit(Domain d) {
    const std::string_view problem = domain_info(d).problem;
    if (problem == "tsp") return 13;
    if (problem == "cvrp" || problem == "ovrp") return 9;  // depot + 8 customers
    if (problem == "mkp") return 20;
    return 0;
}

inline std::string refs_method_name(Domain d) {
    const std::string_view problem = domain_info(d).problem;
    if (problem == "tsp") return "held_karp";
    if (problem == "cvrp") return "route_partition_dp";
    if (problem == "ovrp") return "route_partition_dp_open";
    if (problem == "mkp") return "branch_and_bound";
    throw CliError(kExitUsage,
                   "no exact reference oracle for domain " + std::string(domain_tag(d)));
}

inline double reference_optimum(Domain d, const Instance& inst) {
    const std::string_view problem = domain_info(d).problem;
    if (problem == "tsp") return exact_tsp(std::get<EuclideanInstance>(inst));
    if (problem == "cvrp") return exact_routing(std::get<RoutingInstance>(inst), false);
    if (problem == "ovrp") return exact_routing(std::get<RoutingInstance>(inst), true);
    if (problem == "mkp") return exact_mkp(std::get<KnapsackInstance>(inst));
    throw CliError(kExitUsage,
                   "no exact reference oracle for domain " + std::string(domain_tag(d)));
}

inline std::filesystem::path default_refs_path(const std::filesystem::path& dataset_path) {
    std::filesystem::path p = dataset_path;
    p.replace_extension(".refs.json");
    return p;
}

inline std::string serialize_refs(const RefsFile& r) {
    std::string out = "{\"schema\":\"";
    out += kRefsSchema;
    out += "\",\"domain\":\"";
    out += domain_tag(r.domain);
    out += "\",\"method\":\"" + r.method + "\",\"dataset_checksum\":\"" + r.dataset_checksum +
           "\",\"optima\":[";
    for (std::size_t i = 0; i < r.optima.size(); ++i) {
        if (i) out += ',';
        out += '[';
        ahd::detail::append_json_string(out, r.optima[i].first);
        out += ',' + format_double(r.optima[i].second) + ']';
    }
    return out + "]}\n";
}

inline RefsFile parse_refs(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw SchemaError("reference file is not JSON");
    if (j.value("schema", "") != kRefsSchema)
        throw SchemaError("unexpected reference schema: " + j.value("schema", ""));
    RefsFile r;
    try {
        r.domain = parse_domain(j.at("domain").get<std::string>());
        r.method = j.at("method").get<std::string>();
        r.dataset_checksum = j.at("dataset_checksum").get<std::string>();
        for (const auto& pair : j.at("optima"))
            r.optima.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("bad reference file: " + std::string(e.what()));
    }
    return r;
}

// ----------------------------------------------------------------------------
// gen-data
// ----------------------------------------------------------------------------

struct GenDataArgs {
    std::string domain;
    std::string role = "design";
    int n = 0;
    int count = 0;
    std::uint64_t seed = 0;
    std::string out_dir = "data";
};

inline Dataset generate_for(Domain domain, Role role, int n, int count, std::uint64_t seed) {
    switch (domain) {
        case Domain::tsp_c:
        case Domain::tsp_aco: return generate_tsp(n, count, seed, role, domain);
        case Domain::cvrp_c: return generate_cvrp(n, count, seed, CvrpVariant::constructive, role);
        case Domain::cvrp_aco: return generate_cvrp(n, count, seed, CvrpVariant::aco, role);
        case Domain::ovrp_c: return generate_ovrp(n, count, seed, role);
        case Domain::op_aco: return generate_op(n, count, seed, role);
        case Domain::mkp_aco: return generate_mkp(n, count, seed, role);
    }
    throw std::invalid_argument("unknown domain");
}

inline int cmd_gen_data(const GenDataArgs& a, std::ostream& out, std::ostream& err) {
    try {
        const Domain domain = parse_domain(a.domain);
        const Role role = parse_role(a.role);
        const Dataset ds = generate_for(domain, role, a.n, a.count, a.seed);
        const std::filesystem::path path = dataset_path(a.out_dir, domain, role, a.n, a.seed);
        save_dataset(ds, path);
        out << "wrote " << path.string() << "\n"
            << "instances: " << ds.instances.size() << "\n"
            << "checksum: " << checksum_hex(serialize_dataset(ds)) << "\n";
        return kExitOk;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

// ----------------------------------------------------------------------------
// make-refs
// ----------------------------------------------------------------------------

struct MakeRefsArgs {
    std::string dataset_path;
    std::optional<std::string> out_path;
};

inline int cmd_make_refs(const MakeRefsArgs& a, std::ostream& out, std::ostream& err) {
    try {
        Dataset ds;
        try {
            ds = load_dataset(a.dataset_path);
        } catch (const IoError& e) {
            throw CliError(kExitIo, e.what());
        } catch (const SchemaError& e) {
            throw CliError(kExitIo, e.what());
        }
        const std::string method = refs_method_name(ds.domain);
        const int limit = refs_size_limit(ds.domain);
        if (ds.size_class > limit)
            throw CliError(kExitUsage, "refusing: exact " + std::string(domain_tag(ds.domain)) +
                                           " references are gated at n <= " +
                                           std::to_string(limit) + ", dataset has n = " +
                                           std::to_string(ds.size_class));
        RefsFile refs;
        refs.domain = ds.domain;
        refs.method = method;
        refs.dataset_checksum = checksum_hex(serialize_dataset(ds));
        for (const Instance& inst : ds.instances)
            refs.optima.emplace_back(instance_id(inst), reference_optimum(ds.domain, inst));
        const std::filesystem::path path =
            a.out_path ? std::filesystem::path(*a.out_path) : default_refs_path(a.dataset_path);
        ahd::detail::write_text_file(path, serialize_refs(refs));
        out << "wrote " << path.string() << "\n"
            << "references: " << refs.optima.size() << "\n"
            << "method: " << method << "\n";
        return kExitOk;
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return e.code;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

// ----------------------------------------------------------------------------
// eval
// ----------------------------------------------------------------------------

/// Per-backbone solver parameter overrides; fields left empty fall through to
/// the domain defaults. Flags for the wrong backbone are a usage error rather
/// than silently ignored.
struct SolverOverrides {
    std::optional<int> start_node, ants, iterations;
    std::optional<double> decay, alpha, beta;
    std::optional<std::uint64_t> rng_seed;

    bool any() const {
        return start_node || ants || iterations || decay || alpha || beta || rng_seed;
    }

    std::optional<SolverConfig> resolve(Domain d) const {
        if (!any()) return std::nullopt;
        if (domain_backbone(d) == Backbone::constructive) {
            if (ants || iterations || decay || alpha || beta || rng_seed)
                throw CliError(kExitUsage, "colony flags apply to _aco domains only");
            return SolverConfig{ConstructiveConfig{d, start_node.value_or(0)}};
        }
        if (start_node)
            throw CliError(kExitUsage, "--start-node applies to constructive domains only");
        AcoConfig ac = aco_defaults(d);
        if (ants) ac.ants = *ants;
        if (iterations) ac.iterations = *iterations;
        if (decay) ac.decay = *decay;
        if (alpha) ac.alpha = *alpha;
        if (beta) ac.beta = *beta;
        if (rng_seed) ac.rng_seed = *rng_seed;
        return SolverConfig{ac};
    }

    SolverConfig resolve_or_default(Domain d) const {
        const std::optional<SolverConfig> cfg = resolve(d);
        return cfg ? *cfg : default_solver_config(d);
    }
};

struct EvalArgs {
    std::string program_path;
    std::string dataset_path;
    std::optional<std::string> refs_path;
    int repeats = 1;
    int jobs = 1;
    SolverOverrides solver;
};

namespace detail {

/// score_program with per-instance fan-out across worker threads. Results are
/// assembled in dataset order, so the outcome matches the sequential run: the
/// first failing instance wins and the mean accumulates left to right.
inline EvaluationResult score_parallel(const std::string& program_text, const Dataset& ds,
                                       const SolverConfig& cfg, int repeats, int jobs) {
    if (jobs <= 1 || ds.instances.size() <= 1)
        return score_program(parse_program(program_text, ds.domain), ds, cfg, repeats);

    const std::size_t count = ds.instances.size();
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    std::vector<EvaluationResult> partial(count);
    std::vector<std::exception_ptr> errors(workers);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                // Each worker parses its own program copy; execution state is
                // never shared across threads.
                const HeuristicProgram local = parse_program(program_text, ds.domain);
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    const Dataset one{ds.domain, ds.role, ds.size_class, ds.seed,
                                      {ds.instances[i]}};
                    partial[i] = score_program(local, one, cfg, repeats);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);

    for (const EvaluationResult& r : partial)
        if (!r.ok()) return r;
    EvaluationResult merged;
    for (const EvaluationResult& r : partial) merged.per_instance.push_back(r.per_instance[0]);
    merged.score = make_score(mean_of(merged.per_instance), domain_objective(ds.domain));
    return merged;
}

/// References ordered to match `costs`; nullopt (with `why` set) on a gap in
/// coverage.
inline std::optional<std::vector<double>> ordered_references(
    const RefsFile& refs, const std::vector<std::pair<std::string, double>>& costs,
    std::string* why) {
    std::map<std::string, double> lookup;
    for (const auto& [id, value] : refs.optima) lookup[id] = value;
    std::vector<double> ordered;
    ordered.reserve(costs.size());
    for (const auto& [id, value] : costs) {
        const auto it = lookup.find(id);
        if (it == lookup.end()) {
            if (why) *why = "references do not cover instance " + id;
            return std::nullopt;
        }
        ordered.push_back(it->second);
    }
    return ordered;
}

}  // namespace detail

inline int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    try {
        if (a.repeats < 1) throw CliError(kExitUsage, "--repeats must be >= 1");
        if (a.jobs < 1) throw CliError(kExitUsage, "--jobs must be >= 1");
        std::string program_text;
        Dataset ds;
        try {
            program_text = ahd::detail::read_text_file(a.program_path);
            ds = load_dataset(a.dataset_path);
        } catch (const IoError& e) {
            throw CliError(kExitIo, e.what());
        } catch (const SchemaError& e) {
            throw CliError(kExitIo, e.what());
        }
        try {
            parse_program(program_text, ds.domain);
        } catch (const script::ParseError& e) {
            err << "status: parse_error\n" << e.what() << "\n";
            return kExitEval;
        } catch (const InterfaceMismatch& e) {
            err << "status: parse_error\n" << e.what() << "\n";
            return kExitEval;
        }
        const SolverConfig cfg = a.solver.resolve_or_default(ds.domain);

        out << "dataset: " << a.dataset_path << " (" << domain_tag(ds.domain) << ", "
            << role_tag(ds.role) << ", n=" << ds.size_class << ", " << ds.instances.size()
            << " instances)\n";
        const EvaluationResult result =
            detail::score_parallel(program_text, ds, cfg, a.repeats, a.jobs);
        if (!result.ok()) {
            err << "status: " << exec_status_tag(result.status) << "\n"
                << result.diagnostics << "\n";
            return kExitEval;
        }
        out << "mean objective: " << detail::fmt6(result.score.raw_objective) << "\n";

        if (a.repeats > 1 && domain_backbone(ds.domain) == Backbone::aco) {
            const AcoConfig base = std::get<AcoConfig>(cfg);
            for (int r = 0; r < a.repeats; ++r) {
                AcoConfig one = base;
                one.rng_seed = base.rng_seed + static_cast<std::uint64_t>(r);
                const EvaluationResult rr =
                    detail::score_parallel(program_text, ds, SolverConfig{one}, 1, a.jobs);
                out << "repeat " << r << ": " << detail::fmt6(rr.score.raw_objective) << "\n";
            }
        }

        // Gap section when a committed reference file covers this dataset.
        std::optional<RefsFile> refs;
        std::filesystem::path refs_path;
        const bool explicit_refs = a.refs_path.has_value();
        refs_path = explicit_refs ? std::filesystem::path(*a.refs_path)
                                  : default_refs_path(a.dataset_path);
        if (explicit_refs || std::filesystem::exists(refs_path)) {
            try {
                refs = parse_refs(ahd::detail::read_text_file(refs_path));
            } catch (const IoError& e) {
                throw CliError(kExitIo, e.what());
            } catch (const SchemaError& e) {
                throw CliError(kExitIo, e.what());
            }
            if (refs->domain != ds.domain)
                throw CliError(kExitIo, "reference file is for domain " +
                                            std::string(domain_tag(refs->domain)));
        }

        std::vector<std::pair<std::string, double>> costs;
        for (std::size_t i = 0; i < ds.instances.size(); ++i)
            costs.emplace_back(instance_id(ds.instances[i]), result.per_instance[i]);

        std::optional<std::vector<double>> references;
        if (refs) {
            std::string why;
            references = detail::ordered_references(*refs, costs, &why);
            if (!references) {
                if (explicit_refs) throw CliError(kExitIo, why);
                out << "note: " << why << "; skipping gaps\n";
            } else if (refs->dataset_checksum != checksum_hex(serialize_dataset(ds))) {
                out << "note: references were built from a different dataset file\n";
            }
        }

        const Objective direction = domain_objective(ds.domain);
        std::optional<GapReport> gaps;
        if (references)
            gaps = gap_report(result.per_instance, *references, direction,
                              ReferenceSource::committed_reference);

        out << "per instance:\n";
        for (std::size_t i = 0; i < costs.size(); ++i) {
            out << "  " << costs[i].first << "  " << detail::fmt6(costs[i].second);
            if (gaps) out << "  gap " << detail::fmt_pct(gaps->per_instance_gaps[i]);
            out << "\n";
        }
        if (gaps) {
            out << "references: " << refs_path.string() << " (" << refs->method << ")\n";
            out << "mean gap: " << detail::fmt_pct(gaps->mean_gap) << "\n";
            out << "best gap: " << detail::fmt_pct(gaps->best_gap) << "\n";
        }
        return kExitOk;
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return e.code;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

// ----------------------------------------------------------------------------
// run-session
// ----------------------------------------------------------------------------

/// Everything run-session accepts, all optional so that flag, config-file,
/// and default layers merge cleanly (flags > config > defaults).
struct RunArgs {
    std::optional<std::string> config_path;
    std::optional<std::string> domain, dataset, policy, strategy, model, api_key_env,
        endpoint_path, out_dir, seed_program, final_out;
    std::optional<int> budget, rounds, round_budget, lanes, max_turns, repeats, jobs,
        timeout_seconds, max_retries, backoff_ms;
    SolverOverrides solver;
};

namespace detail {

struct ResolvedRun {
    Domain domain = Domain::tsp_c;
    std::string dataset;
    std::string strategy;
    std::string policy;
    int budget = 0, rounds = 0, round_budget = 0, lanes = 0, max_turns = 0, repeats = 1,
        jobs = 1, timeout_seconds = 60, max_retries = 3, backoff_ms = 500;
    std::string model, api_key_env, endpoint_path, out_dir;
    std::optional<std::string> seed_program, final_out;
    SolverOverrides solver;
};

inline void merge_config_json(RunArgs& a, const nlohmann::json& j) {
    static const std::set<std::string> known{
        "domain",        "dataset",     "policy",          "strategy",    "model",
        "api_key_env",   "endpoint_path", "out",           "seed_program", "final_out",
        "budget",        "rounds",      "round_budget",    "lanes",       "max_turns",
        "repeats",       "jobs",        "timeout_seconds", "max_retries", "backoff_ms",
        "solver"};
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            throw CliError(kExitUsage, "config: unknown key '" + item.key() + "'");

    const auto take_str = [&](const char* key, std::optional<std::string>& slot) {
        if (!j.contains(key) || slot) return;
        if (!j[key].is_string())
            throw CliError(kExitUsage, std::string("config: ") + key + " must be a string");
        slot = j[key].get<std::string>();
    };
    const auto take_int = [&](const char* key, std::optional<int>& slot) {
        if (!j.contains(key) || slot) return;
        if (!j[key].is_number_integer())
            throw CliError(kExitUsage, std::string("config: ") + key + " must be an integer");
        slot = j[key].get<int>();
    };
    take_str("domain", a.domain);
    take_str("dataset", a.dataset);
    take_str("policy", a.policy);
    take_str("strategy", a.strategy);
    take_str("model", a.model);
    take_str("api_key_env", a.api_key_env);
    take_str("endpoint_path", a.endpoint_path);
    take_str("out", a.out_dir);
    take_str("seed_program", a.seed_program);
    take_str("final_out", a.final_out);
    take_int("budget", a.budget);
    take_int("rounds", a.rounds);
    take_int("round_budget", a.round_budget);
    take_int("lanes", a.lanes);
    take_int("max_turns", a.max_turns);
    take_int("repeats", a.repeats);
    take_int("jobs", a.jobs);
    take_int("timeout_seconds", a.timeout_seconds);
    take_int("max_retries", a.max_retries);
    take_int("backoff_ms", a.backoff_ms);

    if (j.contains("solver")) {
        const nlohmann::json& s = j["solver"];
        if (!s.is_object()) throw CliError(kExitUsage, "config: solver must be an object");
        static const std::set<std::string> solver_known{"start_node", "ants",  "iterations",
                                                        "decay",      "alpha", "beta",
                                                        "rng_seed"};
        for (const auto& item : s.items())
            if (!solver_known.count(item.key()))
                throw CliError(kExitUsage, "config: unknown solver key '" + item.key() + "'");
        const auto take_solver_int = [&](const char* key, std::optional<int>& slot) {
            if (!s.contains(key) || slot) return;
            if (!s[key].is_number_integer())
                throw CliError(kExitUsage,
                               std::string("config: solver.") + key + " must be an integer");
            slot = s[key].get<int>();
        };
        const auto take_solver_num = [&](const char* key, std::optional<double>& slot) {
            if (!s.contains(key) || slot) return;
            if (!s[key].is_number())
                throw CliError(kExitUsage,
                               std::string("config: solver.") + key + " must be a number");
            slot = s[key].get<double>();
        };
        take_solver_int("start_node", a.solver.start_node);
        take_solver_int("ants", a.solver.ants);
        take_solver_int("iterations", a.solver.iterations);
        take_solver_num("decay", a.solver.decay);
        take_solver_num("alpha", a.solver.alpha);
        take_solver_num("beta", a.solver.beta);
        if (s.contains("rng_seed") && !a.solver.rng_seed) {
            if (!s["rng_seed"].is_number_integer() && !s["rng_seed"].is_number_unsigned())
                throw CliError(kExitUsage, "config: solver.rng_seed must be an integer");
            a.solver.rng_seed = s["rng_seed"].get<std::uint64_t>();
        }
    }
}

inline ResolvedRun resolve_run(const RunArgs& a) {
    ResolvedRun r;
    if (!a.domain) throw CliError(kExitUsage, "--domain is required (flag or config)");
    if (!a.dataset) throw CliError(kExitUsage, "--dataset is required (flag or config)");
    if (!a.policy) throw CliError(kExitUsage, "--policy is required (flag or config)");
    try {
        r.domain = parse_domain(*a.domain);
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, e.what());
    }
    r.dataset = *a.dataset;
    r.policy = *a.policy;
    r.strategy = a.strategy.value_or("episode");
    if (r.strategy != "episode" && r.strategy != "sr" && r.strategy != "ps")
        throw CliError(kExitUsage, "--strategy must be episode, sr, or ps");
    r.budget = a.budget.value_or(r.strategy == "episode" ? 30 : kSrGlobalBudget);
    r.rounds = a.rounds.value_or(kSrRounds);
    r.round_budget = a.round_budget.value_or(kSrRoundBudget);
    r.lanes = a.lanes.value_or(kPsLanes);
    r.max_turns = a.max_turns.value_or(kDefaultHorizon);
    r.repeats = a.repeats.value_or(1);
    r.jobs = a.jobs.value_or(1);
    r.timeout_seconds = a.timeout_seconds.value_or(60);
    r.max_retries = a.max_retries.value_or(3);
    r.backoff_ms = a.backoff_ms.value_or(500);
    r.model = a.model.value_or("");
    r.api_key_env = a.api_key_env.value_or("AHD_API_KEY");
    r.endpoint_path = a.endpoint_path.value_or("/v1/chat/completions");
    r.out_dir = a.out_dir.value_or("runs");
    r.seed_program = a.seed_program;
    r.final_out = a.final_out;
    r.solver = a.solver;

    if (r.budget < 1) throw CliError(kExitUsage, "--budget must be >= 1");
    if (r.rounds < 1) throw CliError(kExitUsage, "--rounds must be >= 1");
    if (r.round_budget < 1) throw CliError(kExitUsage, "--round-budget must be >= 1");
    if (r.lanes < 1) throw CliError(kExitUsage, "--lanes must be >= 1");
    if (r.max_turns < 1) throw CliError(kExitUsage, "--max-turns must be >= 1");
    if (r.repeats < 1) throw CliError(kExitUsage, "--repeats must be >= 1");
    if (r.jobs < 1) throw CliError(kExitUsage, "--jobs must be >= 1");
    if (r.max_retries < 0) throw CliError(kExitUsage, "--retries must be >= 0");
    if (r.strategy == "ps" && r.budget % r.lanes != 0)
        throw CliError(kExitUsage, "--budget must divide evenly across --lanes (budget " +
                                       std::to_string(r.budget) + ", lanes " +
                                       std::to_string(r.lanes) + ")");
    return r;
}

/// Resolved policy configuration: a scripted transcript (shared or per lane)
/// or a remote chat endpoint.
struct PolicySetup {
    bool scripted = false;
    bool per_lane = false;
    std::vector<std::vector<std::string>> lane_turns;  // [0] alone when shared
    RemoteEndpointConfig remote;
};

inline std::vector<std::string> read_turns(const nlohmann::json& arr) {
    std::vector<std::string> turns;
    for (const auto& t : arr) {
        if (!t.is_string())
            throw CliError(kExitUsage, "scripted policy: turns must be strings");
        turns.push_back(t.get<std::string>());
    }
    return turns;
}

inline PolicySetup resolve_policy(const ResolvedRun& run) {
    PolicySetup setup;
    const auto colon = run.policy.find(':');
    const std::string kind = run.policy.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : run.policy.substr(colon + 1);
    if (kind == "scripted") {
        if (rest.empty())
            throw CliError(kExitUsage, "--policy scripted:<file> needs a transcript path");
        std::string text;
        try {
            text = ahd::detail::read_text_file(rest);
        } catch (const IoError& e) {
            throw CliError(kExitIo, e.what());
        }
        nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw CliError(kExitUsage, "scripted policy: not a JSON object");
        setup.scripted = true;
        if (j.contains("lanes")) {
            if (run.strategy != "ps")
                throw CliError(kExitUsage, "scripted lanes form requires --strategy ps");
            if (!j["lanes"].is_array())
                throw CliError(kExitUsage, "scripted policy: lanes must be an array");
            for (const auto& lane : j["lanes"]) {
                if (!lane.is_array())
                    throw CliError(kExitUsage, "scripted policy: each lane must be an array");
                setup.lane_turns.push_back(read_turns(lane));
            }
            setup.per_lane = true;
            if (static_cast<int>(setup.lane_turns.size()) < run.lanes)
                throw CliError(kExitUsage, "scripted policy supplies " +
                                               std::to_string(setup.lane_turns.size()) +
                                               " lanes, run needs " +
                                               std::to_string(run.lanes));
        } else if (j.contains("turns") && j["turns"].is_array()) {
            setup.lane_turns.push_back(read_turns(j["turns"]));
        } else {
            throw CliError(kExitUsage, "scripted policy needs a turns or lanes array");
        }
        return setup;
    }
    if (kind == "remote") {
        if (rest.empty())
            throw CliError(kExitUsage, "--policy remote:<base-url> needs an endpoint URL");
        setup.remote.base_url = rest;
        setup.remote.path = run.endpoint_path;
        setup.remote.model = run.model;
        setup.remote.api_key_env = run.api_key_env;
        setup.remote.timeout_seconds = run.timeout_seconds;
        setup.remote.max_retries = run.max_retries;
        setup.remote.backoff_ms = run.backoff_ms;
        return setup;
    }
    throw CliError(kExitUsage, "--policy must be scripted:<file> or remote:<base-url>");
}

inline std::unique_ptr<ChatPolicy> lane_policy(const PolicySetup& setup, int lane) {
    if (setup.scripted) {
        const auto& turns =
            setup.per_lane ? setup.lane_turns[static_cast<std::size_t>(lane)]
                           : setup.lane_turns[0];
        return std::make_unique<ScriptedPolicy>(turns);
    }
    return std::make_unique<RemoteChatPolicy>(setup.remote);
}

}  // namespace detail

inline int cmd_run_session(const RunArgs& flags, std::ostream& out, std::ostream& err) {
    try {
        RunArgs merged = flags;
        if (merged.config_path) {
            std::string text;
            try {
                text = ahd::detail::read_text_file(*merged.config_path);
            } catch (const IoError& e) {
                throw CliError(kExitIo, e.what());
            }
            nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
            if (j.is_discarded() || !j.is_object())
                throw CliError(kExitUsage, "config: not a JSON object");
            detail::merge_config_json(merged, j);
        }
        const detail::ResolvedRun run = detail::resolve_run(merged);

        Dataset design;
        try {
            design = load_dataset(run.dataset);
        } catch (const IoError& e) {
            throw CliError(kExitIo, e.what());
        } catch (const SchemaError& e) {
            throw CliError(kExitIo, e.what());
        }
        std::optional<std::string> seed_text;
        if (run.seed_program) {
            try {
                seed_text = ahd::detail::read_text_file(*run.seed_program);
            } catch (const IoError& e) {
                throw CliError(kExitIo, e.what());
            }
        }
        const std::optional<SolverConfig> solver = run.solver.resolve(design.domain);
        const detail::PolicySetup policy_setup = detail::resolve_policy(run);
        const SessionStore store{run.out_dir};

        out << "domain: " << domain_tag(run.domain) << "\n"
            << "dataset: " << run.dataset << " (" << design.instances.size() << " instances, n="
            << design.size_class << ")\n"
            << "strategy: " << run.strategy << "\n"
            << "budget: " << run.budget << "\n"
            << "workspace: " << run.out_dir << "\n";

        std::optional<std::string> final_source;
        std::optional<double> best_objective;
        int calls = 0;
        bool endpoint_only_failures = false;

        if (run.strategy == "episode") {
            const std::unique_ptr<ChatPolicy> policy = detail::lane_policy(policy_setup, 0);
            Session session = create_session(store, run.domain, design, run.budget, seed_text,
                                             solver, run.repeats);
            out << "session: " << session.session_id << "\n"
                << "session dir: " << store.session_dir(session.session_id).string() << "\n";
            const EpisodeResult episode = run_episode(*policy, store, session, run.max_turns);
            calls = session.evaluator_calls_used;
            if (session.best_attempt_id)
                best_objective =
                    session.attempts[static_cast<std::size_t>(*session.best_attempt_id) - 1]
                        .mean_objective;
            final_source = episode.trajectory.final_source;
            out << "reward: " << detail::fmt6(episode.trajectory.reward) << "\n";
        } else if (run.strategy == "sr") {
            const std::unique_ptr<ChatPolicy> policy = detail::lane_policy(policy_setup, 0);
            SrOptions opt;
            opt.global_budget = run.budget;
            opt.rounds = run.rounds;
            opt.round_budget = run.round_budget;
            opt.max_turns = run.max_turns;
            opt.seed = seed_text;
            opt.solver = solver;
            opt.repeats = run.repeats;
            const SrResult sr =
                sequential_refinement(*policy, store, run.domain, design, opt);
            for (const RoundTrace& rt : sr.rounds) {
                out << "round " << rt.round << ": session " << rt.session_id << "  budget "
                    << rt.budget << "  calls " << rt.calls_used;
                if (rt.best_objective) out << "  best " << detail::fmt6(*rt.best_objective);
                if (rt.failed) out << "  failed (" << rt.failure << ")";
                out << "\n";
            }
            calls = sr.total_calls;
            final_source = sr.best_source;
            best_objective = sr.best_objective;
            endpoint_only_failures = !sr.rounds.empty();
            for (const RoundTrace& rt : sr.rounds)
                endpoint_only_failures = endpoint_only_failures && rt.failed &&
                                         detail::starts_with(rt.failure, "endpoint: ");
        } else {
            const int per_lane = run.budget / run.lanes;
            PsOptions opt;
            opt.max_turns = run.max_turns;
            opt.seed = seed_text;
            opt.solver = solver;
            opt.repeats = run.repeats;
            opt.jobs = run.jobs;
            const PolicyFactory factory = [&](int lane) {
                return detail::lane_policy(policy_setup, lane);
            };
            const PsResult ps = parallel_sampling(factory, store, run.domain, design, run.lanes,
                                                  per_lane, opt);
            for (const LaneResult& lr : ps.lanes) {
                out << "lane " << lr.lane << ": session " << lr.session_id << "  calls "
                    << lr.calls_used;
                if (lr.best_objective) out << "  best " << detail::fmt6(*lr.best_objective);
                if (lr.failed) out << "  failed (" << lr.failure << ")";
                out << "\n";
                calls += lr.calls_used;
            }
            out << "selected lane: " << ps.selected_lane << "\n";
            final_source = ps.selected_source;
            best_objective = ps.selected_objective;
        }

        out << "evaluator calls: " << calls << "\n";
        out << "best objective: "
            << (best_objective ? detail::fmt6(*best_objective) : std::string("n/a")) << "\n";
        if (!final_source) {
            err << "error: no final heuristic produced\n";
            return endpoint_only_failures ? kExitEndpoint : kExitEval;
        }
        const std::filesystem::path final_path =
            run.final_out ? std::filesystem::path(*run.final_out)
                          : std::filesystem::path(run.out_dir) / "final_heuristic.py";
        if (final_path.has_parent_path())
            std::filesystem::create_directories(final_path.parent_path());
        ahd::detail::write_text_file(final_path, *final_source + "\n");
        out << "final heuristic: " << final_path.string() << "\n";
        return kExitOk;
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return e.code;
    } catch (const PolicyTransportError& e) {
        err << "error: " << e.what() << "\n";
        return kExitEndpoint;
    } catch (const RunFailure& e) {
        err << "error: " << e.what() << "\n";
        return std::string(e.what()).find("endpoint: ") != std::string::npos ? kExitEndpoint
                                                                             : kExitEval;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

// ----------------------------------------------------------------------------
// report
// ----------------------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> session_dirs;
    std::vector<std::string> refs_paths;
    std::string jsonl_path = "report.jsonl";
};

namespace detail {

struct SessionRow {
    std::string dir;
    std::string session_id;
    Domain domain = Domain::tsp_c;
    int calls = 0;
    int budget = 0;
    std::optional<double> best_objective;
    std::optional<double> mean_gap, best_gap;
    std::string note;
};

inline Session load_session_row(const std::filesystem::path& raw) {
    std::filesystem::path dir = raw;
    if (dir.filename().empty()) dir = dir.parent_path();  // tolerate trailing slash
    return load_session_dir(dir);
}

inline std::string session_record_json(const SessionRow& row) {
    std::string out = "{\"record\":\"session\",\"domain\":\"";
    out += domain_tag(row.domain);
    out += "\",\"session_id\":";
    ahd::detail::append_json_string(out, row.session_id);
    out += ",\"dir\":";
    ahd::detail::append_json_string(out, row.dir);
    out += ",\"calls\":" + std::to_string(row.calls) +
           ",\"budget\":" + std::to_string(row.budget) + ",\"best_objective\":";
    out += row.best_objective ? format_double(*row.best_objective) : "null";
    out += ",\"mean_gap\":";
    out += row.mean_gap ? format_double(*row.mean_gap) : "null";
    out += ",\"best_gap\":";
    out += row.best_gap ? format_double(*row.best_gap) : "null";
    return out + "}";
}

}  // namespace detail

inline int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
    try {
        if (a.session_dirs.empty())
            throw CliError(kExitUsage, "at least one session directory is required");

        std::map<Domain, RefsFile> refs_by_domain;
        for (const std::string& path : a.refs_paths) {
            RefsFile refs;
            try {
                refs = parse_refs(ahd::detail::read_text_file(path));
            } catch (const IoError& e) {
                throw CliError(kExitIo, e.what());
            } catch (const SchemaError& e) {
                throw CliError(kExitIo, e.what());
            }
            if (refs_by_domain.count(refs.domain))
                throw CliError(kExitUsage, "duplicate reference file for domain " +
                                               std::string(domain_tag(refs.domain)));
            refs_by_domain.emplace(refs.domain, std::move(refs));
        }

        std::vector<detail::SessionRow> rows;
        for (const std::string& dir : a.session_dirs) {
            Session s;
            try {
                s = detail::load_session_row(dir);
            } catch (const std::exception& e) {
                throw CliError(kExitIo, dir + ": " + e.what());
            }
            detail::SessionRow row;
            row.dir = dir;
            row.session_id = s.session_id;
            row.domain = s.domain;
            row.calls = s.evaluator_calls_used;
            row.budget = s.budget;
            if (s.best_attempt_id) {
                const AttemptRecord& best =
                    s.attempts[static_cast<std::size_t>(*s.best_attempt_id) - 1];
                row.best_objective = best.mean_objective;
                const auto it = refs_by_domain.find(s.domain);
                if (it != refs_by_domain.end()) {
                    std::string why;
                    const auto references =
                        detail::ordered_references(it->second, best.per_instance_costs, &why);
                    if (references) {
                        std::vector<double> objectives;
                        for (const auto& [id, v] : best.per_instance_costs)
                            objectives.push_back(v);
                        const GapReport rep =
                            gap_report(objectives, *references, domain_objective(s.domain),
                                       ReferenceSource::committed_reference);
                        row.mean_gap = rep.mean_gap;
                        row.best_gap = rep.best_gap;
                    } else {
                        row.note = why;
                    }
                }
            }
            rows.push_back(std::move(row));
        }

        std::string jsonl;
        for (const DomainInfo& info : kDomainTable) {
            std::vector<const detail::SessionRow*> group;
            for (const detail::SessionRow& row : rows)
                if (row.domain == info.domain) group.push_back(&row);
            if (group.empty()) continue;

            out << "domain: " << info.tag << "\n";
            out << "  session  calls/budget  best objective  mean gap  best gap\n";
            double call_sum = 0.0;
            std::vector<double> best_objectives, mean_gaps;
            for (const detail::SessionRow* row : group) {
                out << "  " << row->session_id << "  " << row->calls << "/" << row->budget
                    << "  "
                    << (row->best_objective ? detail::fmt6(*row->best_objective)
                                            : std::string("n/a"))
                    << "  "
                    << (row->mean_gap ? detail::fmt_pct(*row->mean_gap) : std::string("n/a"))
                    << "  "
                    << (row->best_gap ? detail::fmt_pct(*row->best_gap) : std::string("n/a"));
                if (!row->note.empty()) out << "  (" << row->note << ")";
                out << "\n";
                call_sum += row->calls;
                if (row->best_objective) best_objectives.push_back(*row->best_objective);
                if (row->mean_gap) mean_gaps.push_back(*row->mean_gap);
                jsonl += detail::session_record_json(*row) + "\n";
            }
            const double mean_calls = call_sum / static_cast<double>(group.size());
            out << "  aggregate: runs " << group.size() << ", mean calls "
                << detail::fmt6(mean_calls);
            std::string agg = "{\"record\":\"aggregate\",\"domain\":\"";
            agg += info.tag;
            agg += "\",\"runs\":" + std::to_string(group.size()) +
                   ",\"mean_calls\":" + format_double(mean_calls) + ",\"mean_best_objective\":";
            if (!best_objectives.empty()) {
                out << ", mean best objective " << detail::fmt6(mean_of(best_objectives));
                agg += format_double(mean_of(best_objectives));
            } else {
                agg += "null";
            }
            agg += ",\"mean_gap\":";
            if (!mean_gaps.empty()) {
                out << ", mean gap " << detail::fmt_pct(mean_of(mean_gaps));
                agg += format_double(mean_of(mean_gaps));
            } else {
                agg += "null";
            }
            out << "\n";
            jsonl += agg + "}\n";
        }

        ahd::detail::write_text_file(a.jsonl_path, jsonl);
        out << "wrote " << a.jsonl_path << "\n";
        return kExitOk;
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return e.code;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

// ----------------------------------------------------------------------------
// Flag wiring
// ----------------------------------------------------------------------------

namespace detail {

inline void add_solver_flags(CLI::App* cmd, SolverOverrides& solver) {
    cmd->add_option("--start-node", solver.start_node,
                    "constructive start node (constructive domains)");
    cmd->add_option("--ants", solver.ants, "colony size (_aco domains)");
    cmd->add_option("--iterations", solver.iterations, "colony iterations (_aco domains)");
    cmd->add_option("--decay", solver.decay, "pheromone decay (_aco domains)");
    cmd->add_option("--alpha", solver.alpha, "pheromone exponent (_aco domains)");
    cmd->add_option("--beta", solver.beta, "heuristic exponent (_aco domains)");
    cmd->add_option("--rng-seed", solver.rng_seed, "colony rng seed (_aco domains)");
}

}  // namespace detail

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"heuristic design environment"};
    app.require_subcommand(1);
    app.footer(
        "exit codes: 0 ok, 2 usage, 3 file i/o, 4 policy endpoint, 5 evaluation failure.\n"
        "Every command is deterministic given its flags and seeds; the one exception is\n"
        "run-session against a remote policy endpoint.");

    GenDataArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a seeded instance dataset");
    gen_cmd->add_option("--domain", gen.domain, "domain tag, e.g. tsp_c or op_aco")->required();
    gen_cmd->add_option("--role", gen.role, "design or validation");
    gen_cmd->add_option("--n", gen.n, "instance size (nodes or items)")->required();
    gen_cmd->add_option("--count", gen.count, "instances to generate")->required();
    gen_cmd->add_option("--seed", gen.seed, "dataset seed");
    gen_cmd->add_option("--out", gen.out_dir, "output root directory");

    EvalArgs eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "score a heuristic program on a dataset");
    eval_cmd->add_option("--program", eval.program_path, "heuristic source file")->required();
    eval_cmd->add_option("--dataset", eval.dataset_path, "dataset file")->required();
    eval_cmd->add_option("--refs", eval.refs_path,
                         "reference file (default: <dataset>.refs.json when present)");
    eval_cmd->add_option("--repeats", eval.repeats, "colony repeats to average (_aco domains)");
    eval_cmd->add_option("--jobs", eval.jobs, "worker threads for instance scoring");
    detail::add_solver_flags(eval_cmd, eval.solver);

    MakeRefsArgs refs;
    CLI::App* refs_cmd =
        app.add_subcommand("make-refs", "compute exact reference optima for a dataset");
    refs_cmd->add_option("--dataset", refs.dataset_path, "dataset file")->required();
    refs_cmd->add_option("--out", refs.out_path, "output path (default <dataset>.refs.json)");

    RunArgs run;
    CLI::App* run_cmd =
        app.add_subcommand("run-session", "drive a design session against a chat policy");
    run_cmd->add_option("--config", run.config_path, "JSON run config; flags override it");
    run_cmd->add_option("--domain", run.domain, "domain tag");
    run_cmd->add_option("--dataset", run.dataset, "design dataset file");
    run_cmd->add_option("--policy", run.policy, "scripted:<file> or remote:<base-url>");
    run_cmd->add_option("--strategy", run.strategy, "episode, sr, or ps (default episode)");
    run_cmd->add_option("--budget", run.budget,
                        "total evaluator budget (default 30; sr/ps 100)");
    run_cmd->add_option("--rounds", run.rounds, "sr rounds (default 10)");
    run_cmd->add_option("--round-budget", run.round_budget, "sr per-round cap (default 30)");
    run_cmd->add_option("--lanes", run.lanes, "ps lanes (default 5)");
    run_cmd->add_option("--max-turns", run.max_turns, "episode horizon (default 40)");
    run_cmd->add_option("--repeats", run.repeats, "colony repeats per evaluation");
    run_cmd->add_option("--jobs", run.jobs, "worker threads for ps lanes");
    run_cmd->add_option("--model", run.model, "model name sent to the endpoint");
    run_cmd->add_option("--api-key-env", run.api_key_env,
                        "env var holding the bearer token (default AHD_API_KEY)");
    run_cmd->add_option("--endpoint-path", run.endpoint_path,
                        "chat completions path (default /v1/chat/completions)");
    run_cmd->add_option("--timeout", run.timeout_seconds, "endpoint timeout seconds");
    run_cmd->add_option("--retries", run.max_retries, "endpoint retries beyond the first try");
    run_cmd->add_option("--backoff-ms", run.backoff_ms, "initial retry backoff");
    run_cmd->add_option("--out", run.out_dir, "workspace root (default runs)");
    run_cmd->add_option("--seed-program", run.seed_program, "initial heuristic source file");
    run_cmd->add_option("--final-out", run.final_out,
                        "final heuristic path (default <out>/final_heuristic.py)");
    detail::add_solver_flags(run_cmd, run.solver);

    ReportArgs report;
    CLI::App* report_cmd =
        app.add_subcommand("report", "summarize session directories per domain");
    report_cmd->add_option("dirs", report.session_dirs, "session directories")->required();
    report_cmd->add_option("--refs", report.refs_paths,
                           "reference files for gap columns (repeatable)");
    report_cmd->add_option("--jsonl", report.jsonl_path,
                           "machine-readable output path (default report.jsonl)");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (gen_cmd->parsed()) return cmd_gen_data(gen, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eval, out, err);
    if (refs_cmd->parsed()) return cmd_make_refs(refs, out, err);
    if (run_cmd->parsed()) return cmd_run_session(run, out, err);
    if (report_cmd->parsed()) return cmd_report(report, out, err);
    err << "error: no subcommand\n";
    return kExitUsage;
}

}  // namespace ahd::cli
