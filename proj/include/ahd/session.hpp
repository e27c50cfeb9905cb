#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ahd/ast_novelty.hpp"
#include "ahd/dataset_io.hpp"
#include "ahd/instance_analysis.hpp"
#include "ahd/scoring.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Design sessions. A session binds one design dataset to an evaluator-call
// budget and records every candidate submission as an attempt. Submissions
// spend budget whether they succeed or not; diagnostic tool calls are free.
//
// On disk a session is a directory under <root>/sessions/<session_id>/ with
//   manifest.json   full state snapshot (includes wall-clock fields)
//   dataset.jsonl   the bound design dataset
//   events.jsonl    append-only log, deterministic fields only
//   attempts/N.py   candidate sources, one file per attempt
// events.jsonl is byte-identical across reruns of the same scripted episode;
// manifest.json is not, because it carries timestamps and wall times.
// ----------------------------------------------------------------------------

inline constexpr const char* kSessionSchema = "ahd.session.v1";
inline constexpr int kReminderThreshold = 3;

struct SessionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetExhausted : SessionError {
    using SessionError::SessionError;
};
struct SessionClosed : SessionError {
    using SessionError::SessionError;
};
struct UnknownSession : SessionError {
    using SessionError::SessionError;
};

struct AttemptRecord {
    int attempt_id = 0;  // 1-based, strictly increasing within a session
    std::string source;
    ExecStatus status = ExecStatus::ok;
    std::optional<double> mean_objective;  // engaged iff status == ok
    std::vector<std::pair<std::string, double>> per_instance_costs;  // iff ok
    bool is_best_so_far = false;
    double wall_time = 0.0;   // seconds; lives in the manifest, not the log
    std::string diagnostics;  // failure detail, empty on ok

    friend bool operator==(const AttemptRecord&, const AttemptRecord&) = default;
};

struct Session {
    std::string session_id;
    Domain domain = Domain::tsp_c;
    Dataset design;
    int budget = 0;
    int evaluator_calls_used = 0;
    std::vector<AttemptRecord> attempts;
    std::optional<int> best_attempt_id;
    std::optional<std::string> seed_heuristic;
    std::string created_at;
    bool closed = false;
    SolverConfig solver = ConstructiveConfig{};
    int repeats = 1;
    std::vector<std::string> events;  // JSON lines, first is the schema header

    int remaining() const { return budget - evaluator_calls_used; }

    friend bool operator==(const Session&, const Session&) = default;
};

/// Workspace handle. Sessions live under root()/sessions/<id>/.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path session_dir(const std::string& id) const {
        return root_ / "sessions" / id;
    }

    /// First unused <domain>-<seed>-<k> directory name.
    std::string next_session_id(Domain domain, std::uint64_t dataset_seed) const {
        const std::string stem =
            std::string(domain_tag(domain)) + "-" + std::to_string(dataset_seed) + "-";
        for (int k = 0;; ++k) {
            std::string id = stem + std::to_string(k);
            if (!std::filesystem::exists(session_dir(id))) return id;
        }
    }

private:
    std::filesystem::path root_;
};

namespace detail {

inline std::string utc_timestamp() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void append_json_string(std::string& out, std::string_view s) {
    out += '"';
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

inline std::string solver_config_json(const SolverConfig& cfg) {
    if (const auto* cc = std::get_if<ConstructiveConfig>(&cfg)) {
        return "{\"kind\":\"constructive\",\"domain\":\"" +
               std::string(domain_tag(cc->domain)) +
               "\",\"start_node\":" + std::to_string(cc->start_node) + "}";
    }
    const auto& ac = std::get<AcoConfig>(cfg);
    return "{\"kind\":\"aco\",\"ants\":" + std::to_string(ac.ants) +
           ",\"iterations\":" + std::to_string(ac.iterations) +
           ",\"decay\":" + format_double(ac.decay) + ",\"alpha\":" + format_double(ac.alpha) +
           ",\"beta\":" + format_double(ac.beta) +
           ",\"rng_seed\":" + std::to_string(ac.rng_seed) + "}";
}

inline SolverConfig parse_solver_config(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constructive") {
        return ConstructiveConfig{parse_domain(j.at("domain").get<std::string>()),
                                  j.at("start_node").get<int>()};
    }
    if (kind != "aco") throw SchemaError("unknown solver kind: " + kind);
    AcoConfig ac;
    ac.ants = j.at("ants").get<int>();
    ac.iterations = j.at("iterations").get<int>();
    ac.decay = j.at("decay").get<double>();
    ac.alpha = j.at("alpha").get<double>();
    ac.beta = j.at("beta").get<double>();
    ac.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return ac;
}

inline ExecStatus parse_exec_status(const std::string& tag) {
    for (const ExecStatus s : {ExecStatus::ok, ExecStatus::parse_error, ExecStatus::runtime_error,
                               ExecStatus::timeout, ExecStatus::infeasible_output})
        if (tag == exec_status_tag(s)) return s;
    throw SchemaError("unknown exec status: " + tag);
}

/// Ordered [["instance", cost], ...] so load preserves dataset order.
inline std::string per_instance_json(const std::vector<std::pair<std::string, double>>& costs) {
    std::string out = "[";
    for (std::size_t i = 0; i < costs.size(); ++i) {
        if (i) out += ',';
        out += "[";
        append_json_string(out, costs[i].first);
        out += "," + format_double(costs[i].second) + "]";
    }
    return out + "]";
}

inline std::string submit_event_json(const AttemptRecord& rec, int remaining) {
    std::string out = "{\"event\":\"submit\",\"attempt_id\":" + std::to_string(rec.attempt_id) +
                      ",\"source_checksum\":\"" + checksum_hex(rec.source) + "\",\"status\":\"" +
                      exec_status_tag(rec.status) + "\",\"mean_objective\":";
    out += rec.mean_objective ? format_double(*rec.mean_objective) : "null";
    out += ",\"per_instance\":" + per_instance_json(rec.per_instance_costs);
    out += ",\"best_so_far\":";
    out += rec.is_best_so_far ? "true" : "false";
    out += ",\"remaining\":" + std::to_string(remaining) + ",\"diagnostics\":";
    append_json_string(out, rec.diagnostics);
    return out + "}";
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short write to " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string manifest_json(const Session& s) {
    std::string out = "{\"schema\":\"";
    out += kSessionSchema;
    out += "\",\"session_id\":";
    append_json_string(out, s.session_id);
    out += ",\"domain\":\"" + std::string(domain_tag(s.domain)) + "\",\"created_at\":";
    append_json_string(out, s.created_at);
    out += ",\"closed\":";
    out += s.closed ? "true" : "false";
    out += ",\"budget\":" + std::to_string(s.budget) +
           ",\"evaluator_calls_used\":" + std::to_string(s.evaluator_calls_used) +
           ",\"repeats\":" + std::to_string(s.repeats) +
           ",\"solver\":" + solver_config_json(s.solver) + ",\"seed_heuristic\":";
    if (s.seed_heuristic)
        append_json_string(out, *s.seed_heuristic);
    else
        out += "null";
    out += ",\"best_attempt_id\":";
    out += s.best_attempt_id ? std::to_string(*s.best_attempt_id) : "null";
    out += ",\"attempts\":[";
    for (std::size_t i = 0; i < s.attempts.size(); ++i) {
        const AttemptRecord& rec = s.attempts[i];
        if (i) out += ',';
        out += "{\"attempt_id\":" + std::to_string(rec.attempt_id) + ",\"status\":\"" +
               exec_status_tag(rec.status) + "\",\"mean_objective\":";
        out += rec.mean_objective ? format_double(*rec.mean_objective) : "null";
        out += ",\"per_instance\":" + per_instance_json(rec.per_instance_costs);
        out += ",\"best_so_far\":";
        out += rec.is_best_so_far ? "true" : "false";
        out += ",\"wall_time\":" + format_double(rec.wall_time) + ",\"diagnostics\":";
        append_json_string(out, rec.diagnostics);
        out += "}";
    }
    return out + "]}";
}

}  // namespace detail

/// Write-through snapshot: manifest and log are rewritten, the dataset and
/// attempt sources are written once and never touched again.
inline void persist(const SessionStore& store, const Session& s) {
    namespace fs = std::filesystem;
    const fs::path dir = store.session_dir(s.session_id);
    fs::create_directories(dir / "attempts");

    if (!fs::exists(dir / "dataset.jsonl")) save_dataset(s.design, dir / "dataset.jsonl");
    for (const AttemptRecord& rec : s.attempts) {
        const fs::path src = dir / "attempts" / (std::to_string(rec.attempt_id) + ".py");
        if (!fs::exists(src)) detail::write_text_file(src, rec.source);
    }

    std::string log;
    for (const std::string& line : s.events) log += line + "\n";
    detail::write_text_file(dir / "events.jsonl", log);
    detail::write_text_file(dir / "manifest.json", detail::manifest_json(s) + "\n");
}

/// Load straight from a session directory; the manifest names the session.
inline Session load_session_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::exists(dir / "manifest.json"))
        throw UnknownSession("not a session directory: " + dir.string());

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(detail::read_text_file(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("bad session manifest: " + std::string(e.what()));
    }
    if (j.value("schema", "") != kSessionSchema)
        throw SchemaError("unexpected session schema: " + j.value("schema", ""));

    Session s;
    try {
        s.session_id = j.at("session_id").get<std::string>();
        s.domain = parse_domain(j.at("domain").get<std::string>());
        s.created_at = j.at("created_at").get<std::string>();
        s.closed = j.at("closed").get<bool>();
        s.budget = j.at("budget").get<int>();
        s.evaluator_calls_used = j.at("evaluator_calls_used").get<int>();
        s.repeats = j.at("repeats").get<int>();
        s.solver = detail::parse_solver_config(j.at("solver"));
        if (!j.at("seed_heuristic").is_null())
            s.seed_heuristic = j.at("seed_heuristic").get<std::string>();
        if (!j.at("best_attempt_id").is_null())
            s.best_attempt_id = j.at("best_attempt_id").get<int>();
        for (const auto& a : j.at("attempts")) {
            AttemptRecord rec;
            rec.attempt_id = a.at("attempt_id").get<int>();
            rec.status = detail::parse_exec_status(a.at("status").get<std::string>());
            if (!a.at("mean_objective").is_null())
                rec.mean_objective = a.at("mean_objective").get<double>();
            for (const auto& pair : a.at("per_instance"))
                rec.per_instance_costs.emplace_back(pair.at(0).get<std::string>(),
                                                    pair.at(1).get<double>());
            rec.is_best_so_far = a.at("best_so_far").get<bool>();
            rec.wall_time = a.at("wall_time").get<double>();
            rec.diagnostics = a.at("diagnostics").get<std::string>();
            rec.source = detail::read_text_file(dir / "attempts" /
                                                (std::to_string(rec.attempt_id) + ".py"));
            s.attempts.push_back(std::move(rec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("bad session manifest: " + std::string(e.what()));
    }

    s.design = load_dataset(dir / "dataset.jsonl");

    const std::string log = detail::read_text_file(dir / "events.jsonl");
    std::istringstream lines(log);
    for (std::string line; std::getline(lines, line);)
        if (!line.empty()) s.events.push_back(line);
    return s;
}

inline Session load_session(const SessionStore& store, const std::string& session_id) {
    if (!std::filesystem::exists(store.session_dir(session_id) / "manifest.json"))
        throw UnknownSession("unknown session: " + session_id);
    return load_session_dir(store.session_dir(session_id));
}

inline Session create_session(const SessionStore& store, Domain domain, const Dataset& design,
                              int budget, std::optional<std::string> seed_heuristic = {},
                              std::optional<SolverConfig> solver = {}, int repeats = 1) {
    if (design.role != Role::design)
        throw std::invalid_argument("sessions bind design datasets only");
    if (design.domain != domain) throw std::invalid_argument("dataset domain mismatch");
    if (design.instances.empty()) throw std::invalid_argument("empty design dataset");
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (seed_heuristic) parse_program(*seed_heuristic, domain);  // reject broken seeds up front

    Session s;
    s.session_id = store.next_session_id(domain, design.seed);
    s.domain = domain;
    s.design = design;
    s.budget = budget;
    s.seed_heuristic = std::move(seed_heuristic);
    s.created_at = detail::utc_timestamp();
    s.solver = solver ? *solver : default_solver_config(domain);
    s.repeats = repeats;

    std::string header = "{\"schema\":\"";
    header += kSessionSchema;
    header += "\",\"session_id\":";
    detail::append_json_string(header, s.session_id);
    header += "}";
    s.events.push_back(header);

    std::string ev = "{\"event\":\"create\",\"domain\":\"" +
                     std::string(domain_tag(domain)) + "\",\"budget\":" + std::to_string(budget) +
                     ",\"size_class\":" + std::to_string(design.size_class) +
                     ",\"dataset_seed\":" + std::to_string(design.seed) +
                     ",\"instances\":" + std::to_string(design.instances.size()) +
                     ",\"dataset_checksum\":\"" + checksum_hex(serialize_dataset(design)) +
                     "\",\"repeats\":" + std::to_string(repeats) +
                     ",\"solver\":" + detail::solver_config_json(s.solver) +
                     ",\"seed_heuristic_checksum\":";
    ev += s.seed_heuristic ? "\"" + checksum_hex(*s.seed_heuristic) + "\"" : "null";
    ev += "}";
    s.events.push_back(ev);

    persist(store, s);
    return s;
}

struct SubmitResult {
    AttemptRecord record;
    std::string feedback;
};

/// Evaluate a candidate on the design set. Spends one evaluator call no matter
/// how the evaluation ends; parse and interface failures count too, since the
/// novelty tool exists precisely to catch them for free.
inline SubmitResult submit_candidate(const SessionStore& store, Session& s,
                                     const std::string& source) {
    if (s.closed) throw SessionClosed("session " + s.session_id + " is closed");
    if (s.evaluator_calls_used >= s.budget)
        throw BudgetExhausted("evaluator budget exhausted after " + std::to_string(s.budget) +
                              " calls");

    AttemptRecord rec;
    rec.attempt_id = static_cast<int>(s.attempts.size()) + 1;
    rec.source = source;

    const auto start = std::chrono::steady_clock::now();
    EvaluationResult eval;
    try {
        const HeuristicProgram program = parse_program(source, s.domain);
        eval = score_program(program, s.design, s.solver, s.repeats);
    } catch (const script::ParseError& e) {
        eval.status = ExecStatus::parse_error;
        eval.diagnostics = e.what();
    } catch (const InterfaceMismatch& e) {
        eval.status = ExecStatus::parse_error;
        eval.diagnostics = e.what();
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.status = eval.status;
    rec.diagnostics = eval.diagnostics;

    if (eval.ok()) {
        rec.mean_objective = eval.score.raw_objective;
        for (std::size_t i = 0; i < eval.per_instance.size(); ++i)
            rec.per_instance_costs.emplace_back(instance_id(s.design.instances[i]),
                                                eval.per_instance[i]);
        bool better = true;
        if (s.best_attempt_id) {
            const AttemptRecord& best = s.attempts[static_cast<std::size_t>(*s.best_attempt_id) - 1];
            const double best_norm =
                make_score(*best.mean_objective, domain_objective(s.domain)).normalized;
            better = eval.score.normalized > best_norm;  // ties keep the earlier attempt
        }
        if (better) {
            rec.is_best_so_far = true;
            s.best_attempt_id = rec.attempt_id;
        }
    }

    s.evaluator_calls_used += 1;
    s.attempts.push_back(rec);
    s.events.push_back(detail::submit_event_json(rec, s.remaining()));
    persist(store, s);

    std::string feedback = "attempt " + std::to_string(rec.attempt_id) + ": status " +
                           exec_status_tag(rec.status);
    if (rec.mean_objective)
        feedback += "; mean objective " + detail::fixed4(*rec.mean_objective);
    else
        feedback += "; " + rec.diagnostics;
    feedback += "; best so far: ";
    feedback += rec.is_best_so_far ? "yes" : "no";
    feedback += "; remaining budget " + std::to_string(s.remaining());
    return SubmitResult{std::move(rec), std::move(feedback)};
}

struct ToolArgs {
    std::string scope;        // analyze_instances: summary | single_instance | contrastive_pair
    std::string instance_id;  // analyze_instances, single_instance scope only
    std::string code;         // ast_novelty: candidate source
    int top_k = 3;            // ast_novelty
};

namespace detail {

inline std::string run_analysis_tool(const Session& s, const ToolArgs& args) {
    AnalysisScope scope;
    if (args.scope == "summary")
        scope = AnalysisScope::summary;
    else if (args.scope == "single_instance")
        scope = AnalysisScope::single_instance;
    else if (args.scope == "contrastive_pair")
        scope = AnalysisScope::contrastive_pair;
    else
        throw std::invalid_argument("unknown scope: " + args.scope);
    return analyze_instances(DesignView(s.design), scope, args.instance_id).text;
}

inline std::string run_novelty_tool(const Session& s, const ToolArgs& args) {
    std::vector<HistoricalProgram> history;
    for (const AttemptRecord& rec : s.attempts)
        history.push_back({std::to_string(rec.attempt_id), rec.source});
    const AstNoveltyReport report = ast_novelty(args.code, history, args.top_k);

    std::string out = "novelty " + fixed4(report.novelty);
    if (!report.matches.empty()) {
        out += "\nclosest:";
        for (std::size_t i = 0; i < report.matches.size(); ++i) {
            const SimilarityBreakdown& m = report.matches[i];
            out += std::string(i ? ";" : "") + " attempt " + m.attempt_id + " (combined " +
                   fixed4(m.combined) + ", raw " + fixed4(m.raw_sim) + ", shape " +
                   fixed4(m.shape_sim) + ", node " + fixed4(m.node_sim) + ")";
        }
    }
    const CandidateSummary& cs = report.candidate_summary;
    out += "\ncandidate: nodes " + std::to_string(cs.nodes) + ", branches " +
           std::to_string(cs.branches) + ", loops " + std::to_string(cs.loops) + ", constants " +
           std::to_string(cs.constants) + ", calls " + std::to_string(cs.calls);
    out += "\nhint: " + report.hint;
    return out;
}

inline std::string tool_event_json(const std::string& tool, const ToolArgs& args, bool failed,
                                   const std::string& output) {
    std::string ev = "{\"event\":\"tool\",\"tool\":";
    append_json_string(ev, tool);
    ev += ",\"args\":{\"scope\":";
    append_json_string(ev, args.scope);
    ev += ",\"instance_id\":";
    append_json_string(ev, args.instance_id);
    ev += ",\"code_checksum\":";
    if (args.code.empty())
        ev += "null";
    else
        ev += "\"" + checksum_hex(args.code) + "\"";
    ev += ",\"top_k\":" + std::to_string(args.top_k) + "},\"error\":";
    ev += failed ? "true" : "false";
    ev += ",\"output\":";
    append_json_string(ev, output);
    return ev + "}";
}

}  // namespace detail

/// Dispatch a diagnostic tool. Never spends budget and never throws on bad
/// tool input: failures come back (and are logged) as error observations so
/// the episode keeps its turn structure.
inline std::string diagnostic_call(const SessionStore& store, Session& s, const std::string& tool,
                                   const ToolArgs& args) {
    if (s.closed) throw SessionClosed("session " + s.session_id + " is closed");

    std::string output;
    bool failed = false;
    try {
        if (tool == "analyze_instances" || tool == "instance_analysis" ||
            tool == "InstanceAnalysis") {
            output = detail::run_analysis_tool(s, args);
        } else if (tool == "ast_novelty" || tool == "ASTNoveltyAnalyzer") {
            output = detail::run_novelty_tool(s, args);
        } else {
            failed = true;
            output = "error: unknown tool: " + tool;
        }
    } catch (const std::exception& e) {
        failed = true;
        output = "error: " + std::string(e.what());
    }

    s.events.push_back(detail::tool_event_json(tool, args, failed, output));
    persist(store, s);
    return output;
}

/// Nudge when the budget runs low; silence otherwise.
inline std::optional<std::string> budget_reminder(const Session& s) {
    const int remaining = s.remaining();
    if (remaining == 0)
        return "evaluator budget exhausted; no further submissions are possible, finalize your "
               "best attempt now";
    if (remaining <= kReminderThreshold)
        return "only " + std::to_string(remaining) +
               " evaluator call(s) remain; prepare to finalize";
    return std::nullopt;
}

inline void close_session(const SessionStore& store, Session& s) {
    if (s.closed) return;
    s.closed = true;
    std::string ev = "{\"event\":\"close\",\"best_attempt_id\":";
    ev += s.best_attempt_id ? std::to_string(*s.best_attempt_id) : "null";
    ev += "}";
    s.events.push_back(ev);
    persist(store, s);
}

}  // namespace ahd
