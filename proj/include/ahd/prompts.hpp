#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "ahd/program.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Prompt templates. One system prompt and one user prompt are shared by all
// domains; task identity flows in through named placeholders. The turn-format
// section of the system prompt is our own protocol concretization: the policy
// answers with exactly one tool block, one candidate block, or the final
// marker per turn.
// ----------------------------------------------------------------------------

struct MissingPlaceholder : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kFinalMarker = "#### FINAL SOLUTION ####";

inline constexpr const char* kSystemPromptTemplate =
    "Role. You are an expert in designing heuristic algorithms for {task_brief}. Your goal is "
    "to iteratively improve the current heuristic and optimize {objective_text}.\n"
    "\n"
    "Available diagnostic interfaces.\n"
    "1. InstanceAnalysis: summarize structural properties of the training instances, such as "
    "spacing, clustering, density, boundary statistics, and task-specific attributes when "
    "available.\n"
    "2. ASTNoveltyAnalyzer: compare the AST structure of a candidate against previously "
    "evaluated candidates. This interface is used only as a novelty checkpoint; final ranking "
    "is always determined by train evaluation.\n"
    "\n"
    "Interaction rules. Use diagnostic feedback and train evaluation results to revise the "
    "code over multiple turns. Do not submit the initial code unchanged. The final answer must "
    "contain only the complete Python code after the marker #### FINAL SOLUTION ####.\n"
    "\n"
    "Turn format. Reply with exactly one action per turn:\n"
    "- a diagnostic call as a fenced block tagged `tool` containing one JSON object, for "
    "example {\"tool\": \"analyze_instances\", \"args\": {\"scope\": \"summary\"}}; tools are "
    "analyze_instances (args: scope = summary | single_instance | contrastive_pair, optional "
    "instance_id) and ast_novelty (args: code, optional top_k);\n"
    "- a candidate for train evaluation as a fenced code block;\n"
    "- or the final answer: the marker line followed by the complete code.\n";

inline constexpr const char* kUserPromptTemplate =
    "Task request. Please design the required heuristic function using the following "
    "background.\n"
    "\n"
    "Problem description. {problem_description}\n"
    "\n"
    "Algorithmic context. {algorithm_details}\n"
    "\n"
    "Function interface. {function_signature}\n"
    "\n"
    "Current baseline code.\n"
    "{initial_code}\n"
    "\n"
    "Current baseline objective. {baseline_objective}\n"
    "\n"
    "Evaluation objective. Direction: {objective_direction}. Improve over the current baseline "
    "using only training-set feedback.\n"
    "\n"
    "Implementation constraints. The function name and signature must match {function_name} "
    "exactly. The returned value must satisfy all validity constraints in the problem "
    "description. The code must be deterministic and executable in the provided evaluator, "
    "which runs a restricted Python subset: def, if/elif/else, while, for over range or "
    "lists, assignments, arithmetic, comparisons, list literals and indexing, and builtins "
    "such as len, range, abs, sqrt, exp, log, floor, ceil, round, min, max, argmin, argmax, "
    "sum, mean, zeros, ones, full, append, sorted, copy, list, int, float, isnan, isinf. No "
    "imports.\n"
    "\n"
    "Observations appended during interaction. After each diagnostic call or train "
    "evaluation, the returned observation is appended to the conversation. You may then "
    "revise a candidate, call a diagnostic interface, submit a new implementation for train "
    "evaluation, or finalize the best successfully evaluated code.\n"
    "\n"
    "Final answer format. #### FINAL SOLUTION #### <complete Python code only>.\n";

struct PromptContext {
    std::string task_brief;
    std::string objective_text;
    std::string problem_description;
    std::string algorithm_details;
    std::string function_signature;
    std::string function_name;
    std::string initial_code;
    std::string baseline_objective;
    std::string objective_direction;
};

struct DomainPromptInfo {
    std::string_view task_brief;
    std::string_view unit;  // objective unit, capitalized as prose
    std::string_view description;
};

inline const DomainPromptInfo& domain_prompt_info(Domain d) {
    static const std::array<std::pair<Domain, DomainPromptInfo>, 7> table{{
        {Domain::tsp_c,
         {"the Traveling Salesman Problem under step-by-step tour construction", "Tour length",
          "Construct a tour that visits each node exactly once and returns to the start node. "
          "The heuristic chooses the next node during step-by-step route construction."}},
        {Domain::cvrp_c,
         {"the Capacitated Vehicle Routing Problem under step-by-step route construction",
          "Travel distance",
          "Serve customers with known demands using capacitated vehicles while minimizing "
          "total route length and respecting vehicle capacity."}},
        {Domain::ovrp_c,
         {"the Open Vehicle Routing Problem under step-by-step route construction",
          "Travel distance",
          "Construct open vehicle routes that serve all customers without requiring each "
          "route to return to the depot, while minimizing total travel distance."}},
        {Domain::tsp_aco,
         {"the Traveling Salesman Problem solved by ant colony optimization", "Tour length",
          "Design heuristic information for ACO so that shorter and structurally promising "
          "TSP edges receive higher transition desirability."}},
        {Domain::cvrp_aco,
         {"the Capacitated Vehicle Routing Problem solved by ant colony optimization",
          "Travel distance",
          "Design ACO heuristic information for customer transitions under vehicle-capacity "
          "constraints, balancing short travel and route feasibility."}},
        {Domain::op_aco,
         {"the Orienteering Problem solved by ant colony optimization", "Collected reward",
          "Select a subset of reward-bearing locations under a travel budget. The heuristic "
          "estimates transition desirability for reward collection within the budget."}},
        {Domain::mkp_aco,
         {"the Multidimensional Knapsack Problem solved by ant colony optimization",
          "Packed profit",
          "Select items for a multidimensional knapsack under multiple capacity constraints. "
          "The heuristic estimates item desirability for ACO-style solution construction."}},
    }};
    for (const auto& [domain, info] : table)
        if (domain == d) return info;
    throw std::logic_error("unknown domain");
}

/// Fill every slot except the episode-dependent baseline objective.
inline PromptContext prompt_context(Domain d, const std::string& initial_code,
                                    const std::string& baseline_objective) {
    const DomainPromptInfo& info = domain_prompt_info(d);
    const InterfaceSpec& spec = domain_interface(d);
    PromptContext ctx;
    ctx.task_brief = std::string(info.task_brief);
    ctx.objective_direction = is_minimization(d) ? "minimize" : "maximize";
    ctx.objective_text = std::string(info.unit) + " (" + ctx.objective_direction + ")";
    ctx.problem_description = std::string(info.description);
    ctx.algorithm_details =
        domain_backbone(d) == Backbone::constructive
            ? "A constructive solver builds the solution step by step and calls your function "
              "at every step to pick the next node among the feasible unvisited candidates. "
              "The baseline code below is the current heuristic to improve."
            : "An ant colony solver combines pheromone trails with the heuristic desirability "
              "values your function returns for the whole instance. Higher desirability makes "
              "a choice more likely. The baseline code below is the current heuristic to "
              "improve.";
    ctx.function_signature = "def " + interface_signature(spec) + ":";
    ctx.function_name = spec.entry;
    ctx.initial_code = initial_code;
    ctx.baseline_objective = baseline_objective;
    return ctx;
}

namespace detail {

inline void substitute_slot(std::string& text, std::string_view name, const std::string& value) {
    const std::string token = "{" + std::string(name) + "}";
    if (value.empty()) throw MissingPlaceholder("empty prompt slot: " + std::string(name));
    for (std::size_t pos = text.find(token); pos != std::string::npos;
         pos = text.find(token, pos + value.size()))
        text.replace(pos, token.size(), value);
}

}  // namespace detail

struct RenderedPrompts {
    std::string system_text;
    std::string user_text;
};

inline RenderedPrompts render_prompts(const PromptContext& ctx) {
    RenderedPrompts out{kSystemPromptTemplate, kUserPromptTemplate};
    detail::substitute_slot(out.system_text, "task_brief", ctx.task_brief);
    detail::substitute_slot(out.system_text, "objective_text", ctx.objective_text);
    detail::substitute_slot(out.user_text, "problem_description", ctx.problem_description);
    detail::substitute_slot(out.user_text, "algorithm_details", ctx.algorithm_details);
    detail::substitute_slot(out.user_text, "function_signature", ctx.function_signature);
    detail::substitute_slot(out.user_text, "function_name", ctx.function_name);
    detail::substitute_slot(out.user_text, "initial_code", ctx.initial_code);
    detail::substitute_slot(out.user_text, "baseline_objective", ctx.baseline_objective);
    detail::substitute_slot(out.user_text, "objective_direction", ctx.objective_direction);
    return out;
}

}  // namespace ahd
