#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ahd/script/parser.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Structural-novelty diagnostics. A candidate program is compared against the
// session's prior attempts at the syntax-tree level: a sequence-alignment
// ratio over raw preorder tokens, the same ratio over normalized tokens (the
// shape tree), and a cosine over node-category counts, blended 1:2:1 with the
// shape component carrying the double weight.
// ----------------------------------------------------------------------------

// ============================================================================
// Sequence alignment
// ============================================================================

namespace detail {

/// Longest-matching-blocks ratio between two token sequences: repeatedly find
/// the longest common block, recurse on both flanks, and score
/// 2 * matched / (len_a + len_b). Block discovery prefers the earliest start
/// in `a`, which makes the ratio very nearly (not perfectly) symmetric.
class SequenceAligner {
public:
    SequenceAligner(const std::vector<std::string>& a, const std::vector<std::string>& b) {
        std::map<std::string, int> ids;
        const auto intern = [&](const std::vector<std::string>& src, std::vector<int>& dst) {
            dst.reserve(src.size());
            for (const std::string& tok : src)
                dst.push_back(ids.emplace(tok, static_cast<int>(ids.size())).first->second);
        };
        intern(a, a_);
        intern(b, b_);
        b_positions_.resize(ids.size());
        for (std::size_t j = 0; j < b_.size(); ++j) b_positions_[b_[j]].push_back(j);
    }

    double ratio() const {
        const std::size_t total = a_.size() + b_.size();
        if (total == 0) return 1.0;
        std::size_t matched = 0;
        std::vector<std::array<std::size_t, 4>> spans{{0, a_.size(), 0, b_.size()}};
        while (!spans.empty()) {
            const auto [alo, ahi, blo, bhi] = spans.back();
            spans.pop_back();
            const Block block = longest_match(alo, ahi, blo, bhi);
            if (block.size == 0) continue;
            matched += block.size;
            if (alo < block.a && blo < block.b) spans.push_back({alo, block.a, blo, block.b});
            if (block.a + block.size < ahi && block.b + block.size < bhi)
                spans.push_back({block.a + block.size, ahi, block.b + block.size, bhi});
        }
        return 2.0 * static_cast<double>(matched) / static_cast<double>(total);
    }

private:
    struct Block {
        std::size_t a = 0, b = 0, size = 0;
    };

    Block longest_match(std::size_t alo, std::size_t ahi, std::size_t blo,
                        std::size_t bhi) const {
        Block best{alo, blo, 0};
        std::vector<std::size_t> run(b_.size(), 0), next(b_.size(), 0);
        for (std::size_t i = alo; i < ahi; ++i) {
            std::fill(next.begin(), next.end(), 0);
            for (std::size_t j : b_positions_[a_[i]]) {
                if (j < blo || j >= bhi) continue;
                const std::size_t k = (j > blo ? run[j - 1] : 0) + 1;
                next[j] = k;
                if (k > best.size) best = Block{i - k + 1, j - k + 1, k};
            }
            run.swap(next);
        }
        return best;
    }

    std::vector<int> a_, b_;
    std::vector<std::vector<std::size_t>> b_positions_;
};

}  // namespace detail

/// Alignment ratio with the operands in a canonical order, making the score
/// independent of which program is the candidate and which the prior attempt.
inline double sequence_ratio(const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
    if (b < a) return detail::SequenceAligner(b, a).ratio();
    return detail::SequenceAligner(a, b).ratio();
}

// ============================================================================
// Similarity blend
// ============================================================================

inline constexpr double kRawWeight = 0.25;
inline constexpr double kShapeWeight = 0.50;
inline constexpr double kNodeWeight = 0.25;
inline constexpr double kNoveltyHintThreshold = 0.15;

inline double combined_similarity(double raw, double shape, double node) {
    return kRawWeight * raw + kShapeWeight * shape + kNodeWeight * node;
}

inline double cosine_similarity(const std::array<double, script::kNodeCategoryCount>& a,
                                const std::array<double, script::kNodeCategoryCount>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int c = 0; c < script::kNodeCategoryCount; ++c) {
        dot += a[c] * b[c];
        na += a[c] * a[c];
        nb += b[c] * b[c];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::min(1.0, dot / std::sqrt(na * nb));
}

struct SimilarityBreakdown {
    std::string attempt_id;
    double raw_sim = 0.0;
    double shape_sim = 0.0;
    double node_sim = 0.0;
    double combined = 0.0;
};

struct CandidateSummary {
    std::size_t nodes = 0;
    std::size_t branches = 0;
    std::size_t loops = 0;
    std::size_t constants = 0;
    std::size_t calls = 0;
};

struct AstNoveltyReport {
    std::vector<SimilarityBreakdown> matches;  // top-k by combined similarity
    double novelty = 1.0;                      // 1 - max combined over all history
    CandidateSummary candidate_summary;
    std::string hint;
};

/// A prior attempt as the novelty tool sees it.
struct HistoricalProgram {
    std::string id;
    std::string source;
};

namespace detail {

struct ProgramView {
    std::vector<std::string> raw_tokens;
    std::vector<std::string> shape_tokens;
    std::array<double, script::kNodeCategoryCount> categories{};

    explicit ProgramView(const script::Node& tree)
        : raw_tokens(script::preorder_tokens(tree, false)),
          shape_tokens(script::preorder_tokens(tree, true)),
          categories(script::category_counts(tree)) {}
};

}  // namespace detail

/// Compare a candidate against the attempt history. Throws script::ParseError
/// when the candidate does not parse; history entries that do not parse are
/// skipped (they carry no comparable tree).
inline AstNoveltyReport ast_novelty(const std::string& candidate_source,
                                    const std::vector<HistoricalProgram>& history, int top_k = 3,
                                    double hint_threshold = kNoveltyHintThreshold) {
    const script::NodePtr tree = script::parse_source(candidate_source);
    const detail::ProgramView candidate(*tree);

    AstNoveltyReport report;
    report.candidate_summary.nodes = script::node_count(*tree);
    const auto category = [&](script::NodeCategory c) {
        return static_cast<std::size_t>(candidate.categories[static_cast<std::size_t>(c)]);
    };
    report.candidate_summary.branches = category(script::NodeCategory::branch);
    report.candidate_summary.loops = category(script::NodeCategory::loop);
    report.candidate_summary.constants = category(script::NodeCategory::literal);
    report.candidate_summary.calls = category(script::NodeCategory::call);

    double max_combined = 0.0;
    bool any = false;
    for (const HistoricalProgram& attempt : history) {
        script::NodePtr prior_tree;
        try {
            prior_tree = script::parse_source(attempt.source);
        } catch (const script::ParseError&) {
            continue;
        }
        const detail::ProgramView prior(*prior_tree);
        SimilarityBreakdown sim;
        sim.attempt_id = attempt.id;
        sim.raw_sim = sequence_ratio(candidate.raw_tokens, prior.raw_tokens);
        sim.shape_sim = sequence_ratio(candidate.shape_tokens, prior.shape_tokens);
        sim.node_sim = cosine_similarity(candidate.categories, prior.categories);
        sim.combined = combined_similarity(sim.raw_sim, sim.shape_sim, sim.node_sim);
        max_combined = std::max(max_combined, sim.combined);
        any = true;
        report.matches.push_back(std::move(sim));
    }

    std::stable_sort(report.matches.begin(), report.matches.end(),
                     [](const SimilarityBreakdown& l, const SimilarityBreakdown& r) {
                         return l.combined > r.combined;
                     });
    if (top_k < 0) top_k = 0;
    if (report.matches.size() > static_cast<std::size_t>(top_k)) report.matches.resize(top_k);

    report.novelty = any ? 1.0 - max_combined : 1.0;
    if (!any)
        report.hint = "no prior attempts; evaluation reasonable";
    else if (report.novelty < hint_threshold)
        report.hint = "structurally close to attempt " + report.matches.front().attempt_id +
                      "; revise before evaluating";
    else
        report.hint = "structurally novel; evaluation reasonable";
    return report;
}

}  // namespace ahd
