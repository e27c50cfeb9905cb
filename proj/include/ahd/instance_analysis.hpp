#pragma once

#include <cmath>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ahd/instance.hpp"
#include "ahd/spatial.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// Instance-analysis diagnostics. Read-only feature extraction over the design
// set: spacing uniformity, cluster structure, density variation, boundary
// shape, and (for demand-bearing domains) the demand pattern. Outputs carry a
// model-facing text summary plus a flat metrics dictionary for logging.
// ----------------------------------------------------------------------------

/// Read-only gate: diagnostics take this view instead of a bare dataset, so a
/// validation set cannot reach a tool entry point by construction.
class DesignView {
public:
    explicit DesignView(const Dataset& data) : data_(&data) {
        if (data.role != Role::design)
            throw std::invalid_argument("diagnostics accept only design-role datasets");
    }

    const Dataset& get() const { return *data_; }

private:
    const Dataset* data_;
};

// ============================================================================
// Feature primitives
// ============================================================================

struct NnStats {
    double nn_cv = 0.0;
    double nn_mean_normalized = 0.0;
    bool degenerate = false;  // every point has a coincident twin
};

/// Spacing uniformity. The normalization constant is the expected
/// nearest-neighbor distance of a uniform scatter on the unit square,
/// 0.5 / sqrt(n).
inline NnStats nn_statistics(const Matrix& coords) {
    const std::vector<double> nn = nn_distances(coords);
    const double mean = mean_of(nn);
    if (mean == 0.0) return NnStats{0.0, 0.0, true};
    const double expected = 0.5 / std::sqrt(static_cast<double>(nn.size()));
    return NnStats{stddev_of(nn) / mean, mean / expected, false};
}

struct ClusterStats {
    int n_clusters = 0;
    std::optional<double> silhouette;  // present iff n_clusters >= 2
    bool degenerate = false;           // all points coincide
};

inline constexpr std::size_t kClusterMinPts = 4;

/// Density clustering with radius set to the 10th percentile of
/// nearest-neighbor distances.
inline ClusterStats cluster_structure(const Matrix& coords) {
    if (coords.rows() < 3) throw std::invalid_argument("cluster structure needs n >= 3");
    const std::vector<double> nn = nn_distances(coords);
    bool all_coincident = true;
    for (double d : nn)
        if (d != 0.0) all_coincident = false;
    if (all_coincident) return ClusterStats{1, std::nullopt, true};

    const double eps = quantile(nn, 0.10);
    const std::vector<int> labels = dbscan(coords, eps, kClusterMinPts);
    ClusterStats stats;
    stats.n_clusters = cluster_count(labels);
    if (stats.n_clusters >= 2) stats.silhouette = silhouette_score(coords, labels);
    return stats;
}

struct DensityHull {
    double density_cv = 0.0;
    double hull_fraction = 0.0;
    double hull_area_ratio = 0.0;
    bool collinear = false;  // hull has no area
};

/// Density variation over a g x g histogram of the bounding box plus convex
/// hull shape. Binning over the bounding box keeps density_cv invariant under
/// a common positive rescaling of the coordinates.
inline DensityHull density_and_hull(const Matrix& coords) {
    const std::size_t n = coords.rows();
    if (n < 3) throw std::invalid_argument("density and hull need n >= 3");
    const std::size_t g = std::max<std::size_t>(2, static_cast<std::size_t>(
                                                       std::sqrt(static_cast<double>(n)) / 2.0));
    const BoundingBox box = bounding_box(coords);
    std::vector<double> bins(g * g, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto bin = [&](double v, double lo, double span) -> std::size_t {
            if (span <= 0.0) return 0;
            const auto b = static_cast<std::size_t>((v - lo) / span * static_cast<double>(g));
            return std::min(b, g - 1);
        };
        const std::size_t bx = bin(coords(i, 0), box.min_x, box.width());
        const std::size_t by = bin(coords(i, 1), box.min_y, box.height());
        bins[by * g + bx] += 1.0;
    }

    DensityHull out;
    out.density_cv = stddev_of(bins) / mean_of(bins);
    const std::vector<std::size_t> hull = convex_hull(coords);
    out.hull_fraction = static_cast<double>(hull.size()) / static_cast<double>(n);
    const double hull_area = polygon_area(coords, hull);
    if (hull_area == 0.0 || box.area() == 0.0) {
        out.collinear = true;
        out.hull_area_ratio = 0.0;
    } else {
        out.hull_area_ratio = hull_area / box.area();
    }
    return out;
}

struct DemandStats {
    double demand_cv = 0.0;
    double demand_morans_i = 0.0;
    bool constant = false;  // autocorrelation undefined
};

inline constexpr std::size_t kMoranNeighbors = 5;

/// Demand dispersion and Moran's I under binary 5-nearest-neighbor weights:
/// I = (n / sum of weights) * (sum_ij w_ij z_i z_j / sum_i z_i^2).
inline DemandStats demand_pattern(const Matrix& coords, const std::vector<double>& demands) {
    const std::size_t n = coords.rows();
    if (demands.size() != n) throw std::invalid_argument("one demand per coordinate row");
    if (n < kMoranNeighbors + 1) throw std::invalid_argument("demand pattern needs n >= 6");

    const double mean = mean_of(demands);
    const double spread = stddev_of(demands);
    if (spread == 0.0) return DemandStats{0.0, 0.0, true};

    const KdTree tree(coords);
    double cross = 0.0, weight_sum = 0.0, z2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double zi = demands[i] - mean;
        z2 += zi * zi;
        for (std::size_t j : tree.knn(i, kMoranNeighbors)) {
            cross += zi * (demands[j] - mean);
            weight_sum += 1.0;
        }
    }
    DemandStats out;
    out.demand_cv = spread / mean;
    out.demand_morans_i = (static_cast<double>(n) / weight_sum) * (cross / z2);
    return out;
}

inline DemandStats demand_pattern(const Matrix& coords, const std::vector<int>& demands) {
    return demand_pattern(coords, std::vector<double>(demands.begin(), demands.end()));
}

// ============================================================================
// Per-instance feature record
// ============================================================================

struct InstanceFeatureSummary {
    double nn_cv = 0.0;
    double nn_mean_normalized = 0.0;
    double n_clusters = 0.0;  // integral per instance; fractional as a mean
    std::optional<double> silhouette;
    double density_cv = 0.0;
    double hull_fraction = 0.0;
    double hull_area_ratio = 0.0;
    std::optional<double> demand_cv;
    std::optional<double> demand_morans_i;
    std::vector<std::string> flags;  // degenerate-condition notes
};

namespace detail {

inline const Matrix& analysis_coordinates(const Instance& inst) {
    if (const auto* e = std::get_if<EuclideanInstance>(&inst)) return e->coordinates;
    if (const auto* r = std::get_if<RoutingInstance>(&inst)) return r->base.coordinates;
    if (const auto* o = std::get_if<OrienteeringInstance>(&inst)) return o->base.coordinates;
    throw std::invalid_argument("instance analysis needs spatial coordinates");
}

}  // namespace detail

inline InstanceFeatureSummary instance_features(const Instance& inst) {
    const Matrix& coords = detail::analysis_coordinates(inst);
    InstanceFeatureSummary f;

    const NnStats nn = nn_statistics(coords);
    f.nn_cv = nn.nn_cv;
    f.nn_mean_normalized = nn.nn_mean_normalized;
    if (nn.degenerate) f.flags.push_back("nn-degenerate");

    const ClusterStats clusters = cluster_structure(coords);
    f.n_clusters = clusters.n_clusters;
    f.silhouette = clusters.silhouette;
    if (clusters.degenerate) f.flags.push_back("coincident-points");

    const DensityHull density = density_and_hull(coords);
    f.density_cv = density.density_cv;
    f.hull_fraction = density.hull_fraction;
    f.hull_area_ratio = density.hull_area_ratio;
    if (density.collinear) f.flags.push_back("collinear");

    if (const auto* r = std::get_if<RoutingInstance>(&inst)) {
        // Demand stats describe the customers; the depot carries no demand.
        Matrix customers(r->base.n - 1, 2);
        std::vector<double> demands;
        std::size_t row = 0;
        for (int v = 0; v < r->base.n; ++v) {
            if (v == r->depot_index) continue;
            customers(row, 0) = r->base.coordinates(v, 0);
            customers(row, 1) = r->base.coordinates(v, 1);
            demands.push_back(r->demands[v]);
            ++row;
        }
        const DemandStats demand = demand_pattern(customers, demands);
        f.demand_cv = demand.demand_cv;
        f.demand_morans_i = demand.demand_morans_i;
        if (demand.constant) f.flags.push_back("constant-demands");
    }
    return f;
}

// ============================================================================
// Dataset-level analysis
// ============================================================================

enum class AnalysisScope { summary, single_instance, contrastive_pair };

struct InstanceAnalysis {
    std::string text;                                     // model-facing summary
    InstanceFeatureSummary aggregate;                     // see scope semantics
    std::vector<std::pair<std::string, double>> metrics;  // flat logging record
};

namespace detail {

inline std::string fixed4(double v) {
    const bool neg = v < 0.0;
    const auto scaled = static_cast<long long>(std::llround(std::abs(v) * 10000.0));
    std::string frac = std::to_string(scaled % 10000);
    frac.insert(0, 4 - frac.size(), '0');
    return (neg ? "-" : "") + std::to_string(scaled / 10000) + "." + frac;
}

struct FeatureColumn {
    const char* name;
    std::optional<double> (*get)(const InstanceFeatureSummary&);
};

inline constexpr FeatureColumn kFeatureColumns[] = {
    {"nn_cv", [](const InstanceFeatureSummary& f) { return std::optional<double>(f.nn_cv); }},
    {"nn_mean_normalized",
     [](const InstanceFeatureSummary& f) { return std::optional<double>(f.nn_mean_normalized); }},
    {"n_clusters",
     [](const InstanceFeatureSummary& f) { return std::optional<double>(f.n_clusters); }},
    {"silhouette", [](const InstanceFeatureSummary& f) { return f.silhouette; }},
    {"density_cv",
     [](const InstanceFeatureSummary& f) { return std::optional<double>(f.density_cv); }},
    {"hull_fraction",
     [](const InstanceFeatureSummary& f) { return std::optional<double>(f.hull_fraction); }},
    {"hull_area_ratio",
     [](const InstanceFeatureSummary& f) { return std::optional<double>(f.hull_area_ratio); }},
    {"demand_cv", [](const InstanceFeatureSummary& f) { return f.demand_cv; }},
    {"demand_morans_i", [](const InstanceFeatureSummary& f) { return f.demand_morans_i; }},
};

inline void set_feature(InstanceFeatureSummary& f, std::size_t column, double v) {
    switch (column) {
        case 0: f.nn_cv = v; break;
        case 1: f.nn_mean_normalized = v; break;
        case 2: f.n_clusters = v; break;
        case 3: f.silhouette = v; break;
        case 4: f.density_cv = v; break;
        case 5: f.hull_fraction = v; break;
        case 6: f.hull_area_ratio = v; break;
        case 7: f.demand_cv = v; break;
        case 8: f.demand_morans_i = v; break;
        default: throw std::logic_error("unknown feature column");
    }
}

inline std::string describe_instance(const std::string& id, const InstanceFeatureSummary& f) {
    std::string text = "instance " + id + ":\n";
    for (const FeatureColumn& col : kFeatureColumns)
        if (const auto v = col.get(f)) text += "  " + std::string(col.name) + " = " + fixed4(*v) + "\n";
    for (const std::string& flag : f.flags) text += "  flag: " + flag + "\n";
    return text;
}

}  // namespace detail

/// Dataset-level diagnostics.
///   summary           - per-instance features aggregated as mean/min/max; the
///                       returned record holds the means.
///   single_instance   - the named instance's features.
///   contrastive_pair  - the most dissimilar pair under z-scored Euclidean
///                       feature distance; the returned record holds the
///                       absolute per-feature gaps of that pair.
inline InstanceAnalysis analyze_instances(const DesignView& design, AnalysisScope scope,
                                          const std::string& instance_id = "") {
    const Dataset& data = design.get();
    if (data.instances.empty()) throw std::invalid_argument("empty design set");
    if (scope == AnalysisScope::single_instance && instance_id.empty())
        throw std::invalid_argument("single_instance scope needs an instance_id");
    if (scope != AnalysisScope::single_instance && !instance_id.empty())
        throw std::invalid_argument("instance_id only applies to single_instance scope");

    constexpr std::size_t kColumns = std::size(detail::kFeatureColumns);
    InstanceAnalysis out;

    if (scope == AnalysisScope::single_instance) {
        for (const Instance& inst : data.instances) {
            if (instance_id != ahd::instance_id(inst)) continue;
            out.aggregate = instance_features(inst);
            out.text = detail::describe_instance(instance_id, out.aggregate);
            for (std::size_t c = 0; c < kColumns; ++c)
                if (const auto v = detail::kFeatureColumns[c].get(out.aggregate))
                    out.metrics.emplace_back(detail::kFeatureColumns[c].name, *v);
            return out;
        }
        throw std::invalid_argument("unknown instance id: " + instance_id);
    }

    std::vector<InstanceFeatureSummary> features;
    features.reserve(data.instances.size());
    for (const Instance& inst : data.instances) features.push_back(instance_features(inst));

    if (scope == AnalysisScope::summary) {
        out.text = "design set: " + std::to_string(data.instances.size()) + " instances, domain " +
                   std::string(domain_tag(data.domain)) + ", size " +
                   std::to_string(data.size_class) + "\n";
        for (std::size_t c = 0; c < kColumns; ++c) {
            double sum = 0.0, lo = 0.0, hi = 0.0;
            std::size_t defined = 0;
            for (const InstanceFeatureSummary& f : features) {
                const auto v = detail::kFeatureColumns[c].get(f);
                if (!v) continue;
                if (defined == 0) lo = hi = *v;
                lo = std::min(lo, *v);
                hi = std::max(hi, *v);
                sum += *v;
                ++defined;
            }
            if (defined == 0) continue;
            const double mean = sum / static_cast<double>(defined);
            const std::string name = detail::kFeatureColumns[c].name;
            detail::set_feature(out.aggregate, c, mean);
            out.metrics.emplace_back(name + ".mean", mean);
            out.metrics.emplace_back(name + ".min", lo);
            out.metrics.emplace_back(name + ".max", hi);
            out.text += name + ": mean " + detail::fixed4(mean) + " (min " + detail::fixed4(lo) +
                        ", max " + detail::fixed4(hi) + ")\n";
        }
        for (std::size_t i = 0; i < features.size(); ++i)
            for (const std::string& flag : features[i].flags)
                out.text += "flag on " + ahd::instance_id(data.instances[i]) + ": " + flag + "\n";
        return out;
    }

    // contrastive_pair
    if (features.size() < 2)
        throw std::invalid_argument("contrastive_pair needs at least two instances");
    std::vector<std::vector<double>> z(features.size(), std::vector<double>(kColumns, 0.0));
    for (std::size_t c = 0; c < kColumns; ++c) {
        std::vector<double> defined;
        for (const InstanceFeatureSummary& f : features)
            if (const auto v = detail::kFeatureColumns[c].get(f)) defined.push_back(*v);
        if (defined.size() < 2) continue;  // absent or constant-by-absence: contributes 0
        const double mean = mean_of(defined);
        const double spread = stddev_of(defined);
        if (spread == 0.0) continue;
        for (std::size_t i = 0; i < features.size(); ++i)
            if (const auto v = detail::kFeatureColumns[c].get(features[i]))
                z[i][c] = (*v - mean) / spread;
    }
    std::size_t best_a = 0, best_b = 1;
    double best_dist = -1.0;
    for (std::size_t a = 0; a < features.size(); ++a)
        for (std::size_t b = a + 1; b < features.size(); ++b) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < kColumns; ++c) {
                const double diff = z[a][c] - z[b][c];
                d2 += diff * diff;
            }
            if (d2 > best_dist) {
                best_dist = d2;
                best_a = a;
                best_b = b;
            }
        }

    const std::string id_a = ahd::instance_id(data.instances[best_a]);
    const std::string id_b = ahd::instance_id(data.instances[best_b]);
    out.text = "most dissimilar pair: " + id_a + " vs " + id_b + " (standardized distance " +
               detail::fixed4(std::sqrt(best_dist)) + ")\n";
    out.metrics.emplace_back("pair.first_index", static_cast<double>(best_a));
    out.metrics.emplace_back("pair.second_index", static_cast<double>(best_b));
    out.metrics.emplace_back("pair.distance", std::sqrt(best_dist));

    std::vector<std::pair<double, std::size_t>> gaps;  // (|z gap|, column)
    for (std::size_t c = 0; c < kColumns; ++c)
        gaps.emplace_back(std::abs(z[best_a][c] - z[best_b][c]), c);
    std::sort(gaps.begin(), gaps.end(), [](const auto& l, const auto& r) {
        return l.first > r.first || (l.first == r.first && l.second < r.second);
    });
    for (const auto& [zgap, c] : gaps) {
        const auto va = detail::kFeatureColumns[c].get(features[best_a]);
        const auto vb = detail::kFeatureColumns[c].get(features[best_b]);
        if (!va || !vb) continue;
        const std::string name = detail::kFeatureColumns[c].name;
        detail::set_feature(out.aggregate, c, std::abs(*va - *vb));
        out.metrics.emplace_back("gap." + name, std::abs(*va - *vb));
        if (zgap > 0.0)
            out.text += name + ": " + detail::fixed4(*va) + " vs " + detail::fixed4(*vb) + "\n";
    }
    return out;
}

}  // namespace ahd
