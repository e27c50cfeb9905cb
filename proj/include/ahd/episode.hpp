#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ahd/baselines.hpp"
#include "ahd/policy.hpp"
#include "ahd/prompts.hpp"
#include "ahd/session.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Episode driver. One episode is a strict turn loop: the policy speaks, the
// output is parsed into exactly one action, the action is dispatched against
// the session, and the observation is appended to the conversation. Budget
// lives in the session; the driver only adds the horizon and the reward.
// ----------------------------------------------------------------------------

inline constexpr int kDefaultHorizon = 40;
inline constexpr int kSrGlobalBudget = 100;
inline constexpr int kSrRounds = 10;
inline constexpr int kSrRoundBudget = 30;
inline constexpr int kPsLanes = 5;

enum class ActionKind { tool_call, evaluate, final, malformed };

struct TurnAction {
    ActionKind kind = ActionKind::malformed;
    std::string tool;    // tool_call
    ToolArgs args;       // tool_call
    std::string source;  // evaluate and final
};

namespace detail {

inline std::string strip_margin(std::string text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

struct FencedBlock {
    std::string info;     // the word after the opening backticks
    std::string content;  // body between the fences
};

inline std::optional<FencedBlock> first_fenced_block(const std::string& text) {
    const std::size_t open = text.find("```");
    if (open == std::string::npos) return std::nullopt;
    const std::size_t line_end = text.find('\n', open);
    if (line_end == std::string::npos) return std::nullopt;
    const std::size_t close = text.find("```", line_end + 1);
    if (close == std::string::npos) return std::nullopt;
    FencedBlock block;
    block.info = strip_margin(text.substr(open + 3, line_end - open - 3));
    block.content = text.substr(line_end + 1, close - line_end - 1);
    return block;
}

/// Final answers may wrap the code in a fence; unwrap if so.
inline std::string extract_final_code(const std::string& tail) {
    const std::string trimmed = strip_margin(tail);
    if (trimmed.rfind("```", 0) == 0) {
        if (const auto block = first_fenced_block(trimmed)) return strip_margin(block->content);
        return "";
    }
    return trimmed;
}

inline std::optional<std::pair<std::string, ToolArgs>> parse_tool_block(
    const std::string& content) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    if (!j.is_object() || !j.contains("tool") || !j["tool"].is_string()) return std::nullopt;
    ToolArgs args;
    if (j.contains("args")) {
        const nlohmann::json& a = j["args"];
        if (!a.is_object()) return std::nullopt;
        args.scope = a.value("scope", "");
        args.instance_id = a.value("instance_id", "");
        args.code = a.value("code", "");
        args.top_k = a.value("top_k", 3);
    }
    return std::make_pair(j["tool"].get<std::string>(), args);
}

}  // namespace detail

/// Classify one model output. Precedence: final marker, then the first
/// fenced block (info `tool` is a tool call, anything else a candidate).
/// Everything unparseable is malformed, which is a value, not an error.
inline TurnAction parse_action(const std::string& output) {
    TurnAction action;
    const std::string marker = kFinalMarker;

    if (const std::size_t pos = output.find(marker); pos != std::string::npos) {
        const std::string code = detail::extract_final_code(output.substr(pos + marker.size()));
        if (code.empty()) return action;
        action.kind = ActionKind::final;
        action.source = code;
        return action;
    }

    const auto block = detail::first_fenced_block(output);
    if (!block) return action;
    if (block->info == "tool") {
        const auto call = detail::parse_tool_block(block->content);
        if (!call) return action;
        action.kind = ActionKind::tool_call;
        action.tool = call->first;
        action.args = call->second;
        return action;
    }
    const std::string code = detail::strip_margin(block->content);
    if (code.empty()) return action;
    action.kind = ActionKind::evaluate;
    action.source = code;
    return action;
}

struct TrajectoryStep {
    std::string state_digest;  // checksum of the conversation before the turn
    TurnAction action;
    std::string observation;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    std::optional<std::string> final_source;
    bool seed_returned_unchanged = false;  // advisory flag; the prompt forbids it
    double reward = 0.0;
};

/// Terminal reward. The three branches partition every outcome: no code at
/// all, code that does not survive evaluation, and the improvement delta over
/// the episode baseline in normalized-score space.
inline double compute_reward(const Trajectory& trajectory, const HeuristicProgram& baseline,
                             const Dataset& design, const std::optional<SolverConfig>& solver = {},
                             int repeats = 1) {
    if (!trajectory.final_source) return -2.0;
    const SolverConfig cfg = solver ? *solver : default_solver_config(design.domain);
    EvaluationResult final_eval;
    try {
        final_eval = score_program(parse_program(*trajectory.final_source, design.domain), design,
                                   cfg, repeats);
    } catch (const std::exception&) {
        return -1.5;
    }
    if (!final_eval.ok()) return -1.5;
    const EvaluationResult base_eval = score_program(baseline, design, cfg, repeats);
    if (!base_eval.ok()) throw std::invalid_argument("baseline heuristic failed evaluation");
    return final_eval.score.normalized - base_eval.score.normalized;
}

struct EpisodeResult {
    Trajectory trajectory;
    std::string session_id;
    int evaluator_calls_used = 0;
    std::vector<ChatMessage> conversation;
};

namespace detail {

inline std::string conversation_digest(const std::vector<ChatMessage>& conversation) {
    std::string all;
    for (const ChatMessage& m : conversation) {
        all += m.role;
        all += '\x1f';
        all += m.content;
        all += '\x1e';
    }
    return checksum_hex(all);
}

}  // namespace detail

/// Drive one episode over an open session. The session is mutated in place
/// and closed on exit; session-level errors surface as observations, only
/// policy transport failures propagate.
inline EpisodeResult run_episode(ChatPolicy& policy, const SessionStore& store, Session& session,
                                 int max_turns = kDefaultHorizon,
                                 const std::string& continuation_note = "") {
    if (session.closed) throw SessionClosed("session " + session.session_id + " is closed");
    if (max_turns < 1) throw std::invalid_argument("max_turns must be >= 1");

    const std::string initial_code =
        session.seed_heuristic ? *session.seed_heuristic : baseline_source(session.domain);
    std::string baseline_text = "n/a (baseline evaluation failed)";
    try {
        const EvaluationResult base = score_program(parse_program(initial_code, session.domain),
                                                    session.design, session.solver,
                                                    session.repeats);
        if (base.ok()) baseline_text = detail::fixed4(base.score.raw_objective);
    } catch (const std::exception&) {
    }

    const RenderedPrompts prompts =
        render_prompts(prompt_context(session.domain, initial_code, baseline_text));
    EpisodeResult result;
    result.session_id = session.session_id;
    std::vector<ChatMessage>& conversation = result.conversation;
    conversation.push_back({"system", prompts.system_text});
    std::string user_text = prompts.user_text;
    if (!continuation_note.empty()) user_text += "\n" + continuation_note;
    conversation.push_back({"user", user_text});

    Trajectory& trajectory = result.trajectory;
    for (int turn = 0; turn < max_turns; ++turn) {
        const std::string digest = detail::conversation_digest(conversation);
        const std::string output = policy.next_turn(conversation);
        conversation.push_back({"assistant", output});

        TurnAction action = parse_action(output);
        std::string observation;
        bool finished = false;
        switch (action.kind) {
            case ActionKind::malformed:
                observation =
                    "could not parse an action; reply with one tool block, one candidate code "
                    "block, or the final marker followed by the complete code";
                break;
            case ActionKind::tool_call:
                observation = diagnostic_call(store, session, action.tool, action.args);
                break;
            case ActionKind::evaluate:
                try {
                    observation = submit_candidate(store, session, action.source).feedback;
                } catch (const SessionError& e) {
                    observation = "error: " + std::string(e.what());
                }
                break;
            case ActionKind::final:
                trajectory.final_source = action.source;
                trajectory.seed_returned_unchanged =
                    action.source == detail::strip_margin(initial_code);
                observation = "final solution received";
                finished = true;
                break;
        }
        if (!finished) {
            if (const auto reminder = budget_reminder(session)) observation += "\n" + *reminder;
        }
        trajectory.steps.push_back({digest, std::move(action), observation});
        conversation.push_back({"user", trajectory.steps.back().observation});
        if (finished) break;
    }

    // Horizon exhausted without a final answer: fall back to the best
    // evaluated attempt; a truly code-free run keeps final_source empty.
    if (!trajectory.final_source && session.best_attempt_id)
        trajectory.final_source =
            session.attempts[static_cast<std::size_t>(*session.best_attempt_id) - 1].source;

    close_session(store, session);
    result.evaluator_calls_used = session.evaluator_calls_used;

    trajectory.reward = compute_reward(trajectory, parse_program(initial_code, session.domain),
                                       session.design, session.solver, session.repeats);
    return result;
}

// ----------------------------------------------------------------------------
// Inference scaling. Sequential refinement chains rounds in one logical
// search, re-seeding each round with the best heuristic so far; parallel
// sampling runs isolated lanes and picks the winner afterwards.
// ----------------------------------------------------------------------------

struct RoundTrace {
    int round = 0;  // 1-based
    std::string session_id;
    int budget = 0;
    int calls_used = 0;
    std::optional<std::string> final_source;
    std::optional<std::string> best_source;
    std::optional<double> best_objective;
    double reward = 0.0;
    bool failed = false;   // the episode threw; later rounds still run
    std::string failure;   // reason when failed; "endpoint: ..." for transport faults
};

struct SrResult {
    std::optional<std::string> best_source;
    std::optional<double> best_objective;
    std::vector<RoundTrace> rounds;
    int total_calls = 0;
};

struct SrOptions {
    int global_budget = kSrGlobalBudget;
    int rounds = kSrRounds;
    int round_budget = kSrRoundBudget;
    int max_turns = kDefaultHorizon;
    std::optional<std::string> seed;  // round-1 seed; absent means domain baseline
    std::optional<SolverConfig> solver;
    int repeats = 1;
};

inline SrResult sequential_refinement(ChatPolicy& policy, const SessionStore& store, Domain domain,
                                      const Dataset& design, const SrOptions& options = {}) {
    if (options.global_budget < 1) throw std::invalid_argument("global budget must be >= 1");
    if (options.rounds < 1) throw std::invalid_argument("rounds must be >= 1");
    if (options.round_budget < 1) throw std::invalid_argument("round budget must be >= 1");

    SrResult result;
    int remaining = options.global_budget;
    std::optional<std::string> seed = options.seed;
    double best_norm = -std::numeric_limits<double>::infinity();

    for (int round = 1; round <= options.rounds && remaining > 0; ++round) {
        const int budget = std::min(options.round_budget, remaining);
        Session session =
            create_session(store, domain, design, budget, seed, options.solver, options.repeats);
        RoundTrace trace;
        trace.round = round;
        trace.session_id = session.session_id;
        trace.budget = budget;

        std::string note;
        if (round > 1)
            note = "Continuation round " + std::to_string(round) +
                   ": the baseline code above is the best heuristic found so far. Global "
                   "evaluator budget remaining: " +
                   std::to_string(remaining) + " calls; this session may spend up to " +
                   std::to_string(budget) + ".";
        try {
            const EpisodeResult episode =
                run_episode(policy, store, session, options.max_turns, note);
            trace.final_source = episode.trajectory.final_source;
            trace.reward = episode.trajectory.reward;
        } catch (const PolicyTransportError& e) {
            trace.failed = true;
            trace.failure = std::string("endpoint: ") + e.what();
            if (!session.closed) close_session(store, session);
        } catch (const std::exception& e) {
            trace.failed = true;
            trace.failure = e.what();
            if (!session.closed) close_session(store, session);
        }
        trace.calls_used = session.evaluator_calls_used;
        remaining -= session.evaluator_calls_used;
        result.total_calls += session.evaluator_calls_used;

        if (session.best_attempt_id) {
            const AttemptRecord& best =
                session.attempts[static_cast<std::size_t>(*session.best_attempt_id) - 1];
            trace.best_source = best.source;
            trace.best_objective = best.mean_objective;
            const double norm =
                make_score(*best.mean_objective, domain_objective(domain)).normalized;
            if (norm > best_norm) {
                best_norm = norm;
                result.best_source = best.source;
                result.best_objective = best.mean_objective;
            }
        }
        result.rounds.push_back(std::move(trace));
        if (result.best_source) seed = result.best_source;  // inject as the next round's seed
    }
    return result;
}

struct LaneResult {
    int lane = 0;  // 0-based
    std::string session_id;
    int calls_used = 0;
    std::optional<std::string> best_source;
    std::optional<double> best_objective;
    std::optional<std::string> final_source;
    double reward = 0.0;
    bool failed = false;  // episode threw or nothing evaluated successfully
    std::string failure;  // reason when failed; "endpoint: ..." for transport faults
};

struct PsResult {
    std::optional<std::string> selected_source;
    std::optional<double> selected_objective;
    int selected_lane = -1;
    std::vector<LaneResult> lanes;
};

struct RunFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PsOptions {
    int max_turns = kDefaultHorizon;
    std::optional<std::string> seed;
    std::optional<SolverConfig> solver;
    int repeats = 1;
    int jobs = 1;  // worker threads for lane execution
};

using PolicyFactory = std::function<std::unique_ptr<ChatPolicy>(int lane)>;

/// Lanes share nothing but the policy endpoint configuration: each gets its
/// own session, conversation, and policy instance. Selection afterwards is by
/// design-set objective over the lanes that evaluated at least one candidate.
/// With `jobs > 1` the lane episodes run on worker threads; session ids are
/// allocated up front in lane order, so results never depend on scheduling.
inline PsResult parallel_sampling(const PolicyFactory& lane_policy, const SessionStore& store,
                                  Domain domain, const Dataset& design, int lanes,
                                  int per_lane_budget, const PsOptions& options = {}) {
    if (lanes < 1) throw std::invalid_argument("lanes must be >= 1");
    if (per_lane_budget < 1) throw std::invalid_argument("per-lane budget must be >= 1");
    if (options.jobs < 1) throw std::invalid_argument("jobs must be >= 1");

    std::vector<std::unique_ptr<ChatPolicy>> policies;
    std::vector<Session> sessions;
    policies.reserve(static_cast<std::size_t>(lanes));
    sessions.reserve(static_cast<std::size_t>(lanes));
    for (int lane = 0; lane < lanes; ++lane) {
        policies.push_back(lane_policy(lane));
        sessions.push_back(create_session(store, domain, design, per_lane_budget, options.seed,
                                          options.solver, options.repeats));
    }

    std::vector<LaneResult> lane_results(static_cast<std::size_t>(lanes));
    const auto run_lane = [&](int lane) {
        const auto idx = static_cast<std::size_t>(lane);
        Session& session = sessions[idx];
        LaneResult lr;
        lr.lane = lane;
        lr.session_id = session.session_id;
        try {
            const EpisodeResult episode =
                run_episode(*policies[idx], store, session, options.max_turns);
            lr.final_source = episode.trajectory.final_source;
            lr.reward = episode.trajectory.reward;
        } catch (const PolicyTransportError& e) {
            lr.failed = true;
            lr.failure = std::string("endpoint: ") + e.what();
            if (!session.closed) close_session(store, session);
        } catch (const std::exception& e) {
            lr.failed = true;
            lr.failure = e.what();
            if (!session.closed) close_session(store, session);
        }
        lr.calls_used = session.evaluator_calls_used;
        if (!lr.failed && session.best_attempt_id) {
            const AttemptRecord& best =
                session.attempts[static_cast<std::size_t>(*session.best_attempt_id) - 1];
            lr.best_source = best.source;
            lr.best_objective = best.mean_objective;
        } else if (!lr.failed) {
            lr.failed = true;
            lr.failure = "no successful evaluation";
        }
        lane_results[idx] = std::move(lr);
    };

    const int workers = std::min(options.jobs, lanes);
    if (workers <= 1) {
        for (int lane = 0; lane < lanes; ++lane) run_lane(lane);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int lane = next.fetch_add(1); lane < lanes; lane = next.fetch_add(1))
                    run_lane(lane);
            });
        for (std::thread& t : pool) t.join();
    }

    PsResult result;
    result.lanes = std::move(lane_results);
    for (const LaneResult& lr : result.lanes) {
        if (lr.failed) continue;
        if (!result.selected_objective ||
            improves(domain, *lr.best_objective, *result.selected_objective)) {
            result.selected_source = lr.best_source;
            result.selected_objective = lr.best_objective;
            result.selected_lane = lr.lane;
        }
    }
    if (!result.selected_source) {
        std::string why = "all lanes failed";
        for (const LaneResult& lr : result.lanes)
            why += "; lane " + std::to_string(lr.lane) + ": " + lr.failure;
        throw RunFailure(why);
    }
    return result;
}

}  // namespace ahd
