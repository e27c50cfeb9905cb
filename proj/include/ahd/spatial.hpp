#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ahd/numeric.hpp"

namespace ahd {

// ----------------------------------------------------------------------------
// 2-D geometry toolbox backing the instance-analysis diagnostics: a kd-tree
// for neighbor queries, density clustering, silhouette widths, and convex
// hulls. Everything is exact and deterministic; ties break on the lower index.
// ----------------------------------------------------------------------------

/// Point list adapter over an n x 2 coordinate matrix.
struct PointSet {
    const Matrix* coords;

    std::size_t size() const { return coords->rows(); }
    double x(std::size_t i) const { return (*coords)(i, 0); }
    double y(std::size_t i) const { return (*coords)(i, 1); }

    double dist2(std::size_t a, std::size_t b) const {
        const double dx = x(a) - x(b), dy = y(a) - y(b);
        return dx * dx + dy * dy;
    }
};

// ============================================================================
// Kd-tree
// ============================================================================

class KdTree {
public:
    explicit KdTree(const Matrix& coords) : pts_{&coords}, order_(coords.rows()) {
        if (coords.cols() != 2) throw std::invalid_argument("kd-tree expects n x 2 coordinates");
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
        build(0, order_.size(), 0);
    }

    /// Indices of the k nearest points to `query`, excluding `query` itself,
    /// ordered by (distance, index).
    std::vector<std::size_t> knn(std::size_t query, std::size_t k) const {
        if (k == 0) return {};
        std::vector<std::pair<double, std::size_t>> best;  // sorted ascending
        best.reserve(k + 1);
        search(0, order_.size(), 0, query, k, best);
        std::vector<std::size_t> out;
        out.reserve(best.size());
        for (const auto& [d2, idx] : best) out.push_back(idx);
        return out;
    }

    /// Distance from `query` to its nearest other point.
    double nearest_distance(std::size_t query) const {
        const auto nn = knn(query, 1);
        if (nn.empty()) throw std::logic_error("nearest_distance needs at least two points");
        return std::sqrt(pts_.dist2(query, nn[0]));
    }

    /// All indices within `radius` of point `center` (inclusive), center
    /// itself included, sorted ascending.
    std::vector<std::size_t> within(std::size_t center, double radius) const {
        std::vector<std::size_t> out;
        range(0, order_.size(), 0, center, radius * radius, out);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    PointSet pts_;
    std::vector<std::size_t> order_;  // in-place kd ordering: median layout per segment

    double axis_value(std::size_t i, int axis) const { return axis ? pts_.y(i) : pts_.x(i); }

    void build(std::size_t lo, std::size_t hi, int axis) {
        if (hi - lo <= 1) return;
        const std::size_t mid = (lo + hi) / 2;
        std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                         [&](std::size_t a, std::size_t b) {
                             const double va = axis_value(a, axis), vb = axis_value(b, axis);
                             return va < vb || (va == vb && a < b);
                         });
        build(lo, mid, 1 - axis);
        build(mid + 1, hi, 1 - axis);
    }

    void search(std::size_t lo, std::size_t hi, int axis, std::size_t query, std::size_t k,
                std::vector<std::pair<double, std::size_t>>& best) const {
        if (lo >= hi) return;
        const std::size_t mid = (lo + hi) / 2;
        const std::size_t node = order_[mid];
        if (node != query) {
            const std::pair<double, std::size_t> cand{pts_.dist2(query, node), node};
            if (best.size() < k || cand < best.back()) {
                best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
                if (best.size() > k) best.pop_back();
            }
        }
        const double delta = axis_value(query, axis) - axis_value(node, axis);
        const std::size_t near_lo = delta < 0 ? lo : mid + 1;
        const std::size_t near_hi = delta < 0 ? mid : hi;
        const std::size_t far_lo = delta < 0 ? mid + 1 : lo;
        const std::size_t far_hi = delta < 0 ? hi : mid;
        search(near_lo, near_hi, 1 - axis, query, k, best);
        if (best.size() < k || delta * delta <= best.back().first)
            search(far_lo, far_hi, 1 - axis, query, k, best);
    }

    void range(std::size_t lo, std::size_t hi, int axis, std::size_t center, double r2,
               std::vector<std::size_t>& out) const {
        if (lo >= hi) return;
        const std::size_t mid = (lo + hi) / 2;
        const std::size_t node = order_[mid];
        if (pts_.dist2(center, node) <= r2) out.push_back(node);
        const double delta = axis_value(center, axis) - axis_value(node, axis);
        const std::size_t near_lo = delta < 0 ? lo : mid + 1;
        const std::size_t near_hi = delta < 0 ? mid : hi;
        const std::size_t far_lo = delta < 0 ? mid + 1 : lo;
        const std::size_t far_hi = delta < 0 ? hi : mid;
        range(near_lo, near_hi, 1 - axis, center, r2, out);
        if (delta * delta <= r2) range(far_lo, far_hi, 1 - axis, center, r2, out);
    }
};

/// Per-point nearest-neighbor distances. Requires n >= 2.
inline std::vector<double> nn_distances(const Matrix& coords) {
    if (coords.rows() < 2) throw std::invalid_argument("need at least two points");
    const KdTree tree(coords);
    std::vector<double> out(coords.rows());
    for (std::size_t i = 0; i < coords.rows(); ++i) out[i] = tree.nearest_distance(i);
    return out;
}

/// Linear-interpolation quantile of an unsorted sample, p in [0,1].
inline double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile level outside [0,1]");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

// ============================================================================
// Density clustering
// ============================================================================

inline constexpr int kNoise = -1;

/// Classic density clustering. A point is core when its radius-eps ball holds
/// at least min_pts points (itself included); clusters grow from core points,
/// border points join the first cluster that reaches them. Returns one label
/// per point: 0..k-1 or kNoise.
inline std::vector<int> dbscan(const Matrix& coords, double eps, std::size_t min_pts) {
    const std::size_t n = coords.rows();
    const KdTree tree(coords);
    constexpr int kUnvisited = -2;
    std::vector<int> labels(n, kUnvisited);
    int cluster = 0;
    for (std::size_t p = 0; p < n; ++p) {
        if (labels[p] != kUnvisited) continue;
        const auto neighborhood = tree.within(p, eps);
        if (neighborhood.size() < min_pts) {
            labels[p] = kNoise;
            continue;
        }
        labels[p] = cluster;
        std::vector<std::size_t> frontier(neighborhood.begin(), neighborhood.end());
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            const std::size_t q = frontier[i];
            if (labels[q] == kNoise) labels[q] = cluster;
            if (labels[q] != kUnvisited) continue;
            labels[q] = cluster;
            const auto reach = tree.within(q, eps);
            if (reach.size() >= min_pts)
                frontier.insert(frontier.end(), reach.begin(), reach.end());
        }
        ++cluster;
    }
    return labels;
}

inline int cluster_count(const std::vector<int>& labels) {
    int max_label = -1;
    for (int l : labels) max_label = std::max(max_label, l);
    return max_label + 1;
}

/// Mean silhouette width over clustered points; noise is left out. Singleton
/// clusters contribute width 0. Requires at least two clusters.
inline double silhouette_score(const Matrix& coords, const std::vector<int>& labels) {
    const std::size_t n = coords.rows();
    const int k = cluster_count(labels);
    if (k < 2) throw std::invalid_argument("silhouette needs at least two clusters");
    const PointSet pts{&coords};

    std::vector<std::size_t> cluster_size(k, 0);
    for (int l : labels)
        if (l >= 0) ++cluster_size[l];

    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0) continue;
        ++counted;
        if (cluster_size[labels[i]] < 2) continue;  // lone member: width 0
        std::vector<double> mean_dist(k, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && labels[j] >= 0)
                mean_dist[labels[j]] += std::sqrt(pts.dist2(i, j));
        double a = 0.0, b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (cluster_size[c] == 0) continue;
            if (c == labels[i])
                a = mean_dist[c] / static_cast<double>(cluster_size[c] - 1);
            else
                b = std::min(b, mean_dist[c] / static_cast<double>(cluster_size[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    if (counted == 0) throw std::invalid_argument("silhouette over empty clustering");
    return total / static_cast<double>(counted);
}

// ============================================================================
// Convex hull
// ============================================================================

/// Monotone-chain hull over the distinct points, counterclockwise, collinear
/// boundary points dropped. All-collinear input yields the two extremes (or
/// one index when every point coincides).
inline std::vector<std::size_t> convex_hull(const Matrix& coords) {
    const PointSet pts{&coords};
    std::vector<std::size_t> idx(pts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return pts.x(a) < pts.x(b) || (pts.x(a) == pts.x(b) && pts.y(a) < pts.y(b));
    });
    idx.erase(std::unique(idx.begin(), idx.end(),
                          [&](std::size_t a, std::size_t b) {
                              return pts.x(a) == pts.x(b) && pts.y(a) == pts.y(b);
                          }),
              idx.end());
    if (idx.size() <= 2) return idx;

    const auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
        return (pts.x(a) - pts.x(o)) * (pts.y(b) - pts.y(o)) -
               (pts.y(a) - pts.y(o)) * (pts.x(b) - pts.x(o));
    };
    std::vector<std::size_t> hull(2 * idx.size());
    std::size_t h = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {  // lower chain
        while (h >= 2 && cross(hull[h - 2], hull[h - 1], idx[i]) <= 0.0) --h;
        hull[h++] = idx[i];
    }
    const std::size_t lower = h + 1;
    for (std::size_t i = idx.size() - 1; i-- > 0;) {  // upper chain
        while (h >= lower && cross(hull[h - 2], hull[h - 1], idx[i]) <= 0.0) --h;
        hull[h++] = idx[i];
    }
    hull.resize(h - 1);  // last point repeats the first
    return hull;
}

/// Shoelace area of the hull polygon (vertices in chain order).
inline double polygon_area(const Matrix& coords, const std::vector<std::size_t>& hull) {
    if (hull.size() < 3) return 0.0;
    const PointSet pts{&coords};
    double twice = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const std::size_t a = hull[i], b = hull[(i + 1) % hull.size()];
        twice += pts.x(a) * pts.y(b) - pts.x(b) * pts.y(a);
    }
    return std::abs(twice) / 2.0;
}

struct BoundingBox {
    double min_x, min_y, max_x, max_y;

    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    double area() const { return width() * height(); }
};

inline BoundingBox bounding_box(const Matrix& coords) {
    if (coords.rows() == 0) throw std::invalid_argument("bounding box of an empty set");
    const PointSet pts{&coords};
    BoundingBox box{pts.x(0), pts.y(0), pts.x(0), pts.y(0)};
    for (std::size_t i = 1; i < pts.size(); ++i) {
        box.min_x = std::min(box.min_x, pts.x(i));
        box.min_y = std::min(box.min_y, pts.y(i));
        box.max_x = std::max(box.max_x, pts.x(i));
        box.max_y = std::max(box.max_y, pts.y(i));
    }
    return box;
}

}  // namespace ahd
