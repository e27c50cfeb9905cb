#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ahd/aco.hpp"
#include "ahd/baselines.hpp"
#include "ahd/constructive.hpp"
#include "ahd/domain.hpp"
#include "ahd/instance.hpp"
#include "ahd/numeric.hpp"
#include "ahd/program.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Objective normalization and budgeted evaluation. A Score flips minimization
// objectives so that larger normalized values are always better; gaps are
// percentages against a reference and lower is always better.
// ----------------------------------------------------------------------------

struct Score {
    double raw_objective = 0.0;
    double normalized = 0.0;
    Objective direction = Objective::minimize;
};

inline Score make_score(double raw, Objective direction) {
    return Score{raw, direction == Objective::minimize ? -raw : raw, direction};
}

/// Percentage gap to a reference objective.
inline double gap(double f, double f_star, Objective direction) {
    if (f_star == 0.0) throw std::invalid_argument("zero reference objective");
    const double delta = direction == Objective::minimize ? f - f_star : f_star - f;
    return delta / std::abs(f_star) * 100.0;
}

enum class ReferenceSource { oracle, committed_reference };

struct GapReport {
    std::vector<double> per_instance_gaps;
    double mean_gap = 0.0;
    double best_gap = 0.0;
    ReferenceSource reference_source = ReferenceSource::oracle;
};

/// Mean of per-instance gaps. Note this is not the gap of mean objectives;
/// the two genuinely differ whenever references vary across instances.
inline GapReport gap_report(const std::vector<double>& objectives,
                            const std::vector<double>& references, Objective direction,
                            ReferenceSource source) {
    if (objectives.empty() || objectives.size() != references.size())
        throw std::invalid_argument("objective/reference length mismatch");
    GapReport rep;
    rep.reference_source = source;
    rep.best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < objectives.size(); ++i) {
        const double g = gap(objectives[i], references[i], direction);
        rep.per_instance_gaps.push_back(g);
        rep.best_gap = std::min(rep.best_gap, g);
    }
    rep.mean_gap = mean_of(rep.per_instance_gaps);
    return rep;
}

// ----------------------------------------------------------------------------
// Program evaluation over a dataset. All-or-nothing: one failing instance
// fails the whole evaluation, so a partial average never masquerades as a
// score.
// ----------------------------------------------------------------------------

using SolverConfig = std::variant<ConstructiveConfig, AcoConfig>;

inline SolverConfig default_solver_config(Domain d) {
    if (domain_backbone(d) == Backbone::constructive) return ConstructiveConfig{d, 0};
    return aco_defaults(d);
}

struct EvaluationResult {
    ExecStatus status = ExecStatus::ok;
    std::string diagnostics;           // failure detail, prefixed with the instance id
    Score score;                       // valid only when ok()
    std::vector<double> per_instance;  // raw objective per instance (mean over repeats)

    bool ok() const { return status == ExecStatus::ok; }
};

namespace detail {

inline void fail_evaluation(EvaluationResult& result, ExecStatus status,
                            const Instance& instance, const std::string& diagnostics) {
    result.status = status;
    result.diagnostics = instance_id(instance) + ": " + diagnostics;
    result.per_instance.clear();
}

/// One seeded colony run; eta has already passed sanitation.
inline double aco_objective(const Instance& instance, Domain domain,
                            const ExecutionOutcome& eta_out, const AcoConfig& cfg) {
    const std::size_t n = static_cast<std::size_t>(instance_size(instance));
    switch (domain) {
        case Domain::tsp_aco:
            return aco_solve(std::get<EuclideanInstance>(instance), eta_matrix(eta_out, n, n),
                             cfg)
                .best.objective;
        case Domain::cvrp_aco:
            return aco_solve(std::get<RoutingInstance>(instance), eta_matrix(eta_out, n, n), cfg)
                .best.objective;
        case Domain::op_aco:
            return aco_solve(std::get<OrienteeringInstance>(instance),
                             eta_matrix(eta_out, n, n), cfg)
                .best.objective;
        case Domain::mkp_aco:
            return aco_solve(std::get<KnapsackInstance>(instance), eta_vector(eta_out, n), cfg)
                .best.objective;
        default:
            throw std::logic_error("not an ACO domain");
    }
}

}  // namespace detail

/// Run the program over every instance of the dataset. Constructive domains
/// are deterministic and run once per instance; ACO domains average `repeats`
/// colony runs seeded base, base+1, ... per instance.
inline EvaluationResult score_program(const HeuristicProgram& program, const Dataset& dataset,
                                      const SolverConfig& config, int repeats = 1) {
    if (program.domain != dataset.domain)
        throw std::invalid_argument("program and dataset domains differ");
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");

    EvaluationResult result;
    const Objective direction = domain_objective(dataset.domain);
    const Backbone backbone = domain_backbone(dataset.domain);
    for (const Instance& instance : dataset.instances) {
        double value = 0.0;
        if (backbone == Backbone::constructive) {
            const auto& cc = std::get<ConstructiveConfig>(config);
            const ConstructResult r = construct_route(instance, program, cc);
            if (!r.ok()) {
                detail::fail_evaluation(result, r.status, instance, r.diagnostics);
                return result;
            }
            if (!r.solution.feasible) {
                detail::fail_evaluation(result, ExecStatus::infeasible_output, instance,
                                        "framework produced an infeasible solution");
                return result;
            }
            value = r.solution.objective;
        } else {
            const auto& ac = std::get<AcoConfig>(config);
            const ExecutionOutcome out = invoke_matrix_heuristic(program, instance);
            if (!out.ok()) {
                detail::fail_evaluation(result, out.status, instance, out.diagnostics);
                return result;
            }
            double sum = 0.0;
            for (int r = 0; r < repeats; ++r) {
                AcoConfig cfg = ac;
                cfg.rng_seed = ac.rng_seed + static_cast<std::uint64_t>(r);
                sum += detail::aco_objective(instance, dataset.domain, out, cfg);
            }
            value = sum / repeats;
        }
        result.per_instance.push_back(value);
    }
    result.score = make_score(mean_of(result.per_instance), direction);
    return result;
}

/// The committed starting heuristic, parsed and bound.
inline HeuristicProgram baseline_program(Domain d) {
    return parse_program(baseline_source(d), d);
}

}  // namespace ahd
