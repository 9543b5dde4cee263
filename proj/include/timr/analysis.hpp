#ifndef TIMR_ANALYSIS_HPP
#define TIMR_ANALYSIS_HPP

// Interval labeling of context/target pairs, multi-label k-NN evaluation
// in mapping or input space, the interval cluster-distance matrix, and the
// temporal sensitivity profile of a trained model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "timr/gae.hpp"
#include "timr/numerics.hpp"

namespace timr::analysis {

inline constexpr int kMaxInterval = 24; // labels clamped to [-24, 24]

// Sorted, duplicate-free set of signed semitone intervals.
using IntervalLabelSet = std::vector<int>;

// All intervals q - p with p active anywhere in the context and q active in
// the target, regardless of temporal distance; |q - p| > 24 is dropped.
// Row indices equal semitone offsets, so this works on roll rows directly.
inline IntervalLabelSet label_pair(const gae::ContextPair& pair) {
    std::vector<bool> context_active(pair.context.cols(), false);
    for (std::size_t l = 0; l < pair.context.rows(); ++l)
        for (std::size_t i = 0; i < pair.context.cols(); ++i)
            if (pair.context(l, i) != 0.0) context_active[i] = true;

    IntervalLabelSet labels;
    for (std::size_t qi = 0; qi < pair.target.size(); ++qi) {
        if (pair.target[qi] == 0.0) continue;
        for (std::size_t pi = 0; pi < context_active.size(); ++pi) {
            if (!context_active[pi]) continue;
            const int interval = static_cast<int>(qi) - static_cast<int>(pi);
            if (std::abs(interval) <= kMaxInterval) labels.push_back(interval);
        }
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

struct LabeledPoint {
    Vec features;
    IntervalLabelSet labels;
};

struct FoldStats {
    double precision = 0.0;
    double recall = 0.0;
    std::size_t points = 0;        // points that entered the averages
    std::size_t skipped_empty = 0; // empty true label set, excluded
};

struct KnnReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<FoldStats> folds;
    std::size_t skipped_empty = 0;
};

namespace detail_knn {

inline std::size_t intersection_size(const IntervalLabelSet& a, const IntervalLabelSet& b) {
    std::size_t n = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else {
            ++n;
            ++ia;
            ++ib;
        }
    }
    return n;
}

inline double squared_distance(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline void finalize(KnnReport& report) {
    double p = 0.0, r = 0.0;
    std::size_t n = 0;
    for (const auto& f : report.folds) {
        p += f.precision * static_cast<double>(f.points);
        r += f.recall * static_cast<double>(f.points);
        n += f.points;
        report.skipped_empty += f.skipped_empty;
    }
    report.precision = n ? p / static_cast<double>(n) : 0.0;
    report.recall = n ? r / static_cast<double>(n) : 0.0;
    report.f1 = (report.precision + report.recall) > 0.0
                    ? 2.0 * report.precision * report.recall / (report.precision + report.recall)
                    : 0.0;
}

} // namespace detail_knn

// Multi-label k-NN: the prediction for a test point is the union of the
// label sets of its k nearest training points (Euclidean; distance ties
// broken by lower training index). Per-point precision/recall against the
// true set; points with an empty true set are counted but excluded from the
// averages.
inline FoldStats knn_fold(const std::vector<LabeledPoint>& train, const std::vector<LabeledPoint>& test,
                          std::size_t k) {
    detail::require(!train.empty() && !test.empty(), "knn: empty train or test set");
    detail::require(k > 0 && k <= train.size(),
                    "knn: k=" + std::to_string(k) + " exceeds train size " + std::to_string(train.size()));

    FoldStats stats;
    std::vector<std::pair<double, std::size_t>> dist(train.size());
    for (const auto& point : test) {
        detail::require(point.features.size() == train.front().features.size(),
                        "knn: feature dimensionality mismatch");
        for (std::size_t i = 0; i < train.size(); ++i)
            dist[i] = {detail_knn::squared_distance(point.features, train[i].features), i};
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

        IntervalLabelSet predicted;
        for (std::size_t i = 0; i < k; ++i) {
            const auto& labels = train[dist[i].second].labels;
            predicted.insert(predicted.end(), labels.begin(), labels.end());
        }
        std::sort(predicted.begin(), predicted.end());
        predicted.erase(std::unique(predicted.begin(), predicted.end()), predicted.end());

        if (point.labels.empty()) {
            ++stats.skipped_empty;
            continue;
        }
        const std::size_t tp = detail_knn::intersection_size(predicted, point.labels);
        stats.precision += predicted.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted.size());
        stats.recall += static_cast<double>(tp) / static_cast<double>(point.labels.size());
        ++stats.points;
    }
    if (stats.points) {
        stats.precision /= static_cast<double>(stats.points);
        stats.recall /= static_cast<double>(stats.points);
    }
    return stats;
}

inline KnnReport knn_classify(const std::vector<LabeledPoint>& train, const std::vector<LabeledPoint>& test,
                              std::size_t k) {
    KnnReport report;
    report.folds.push_back(knn_fold(train, test, k));
    detail_knn::finalize(report);
    return report;
}

// Contiguous-fold cross-validation over one labeled set; fold i is the test
// split, the rest trains.
inline KnnReport knn_crossval(const std::vector<LabeledPoint>& points, std::size_t k, std::size_t folds = 10) {
    detail::require(folds >= 2 && points.size() >= folds, "knn_crossval: need at least `folds` points");
    KnnReport report;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t lo = f * points.size() / folds;
        const std::size_t hi = (f + 1) * points.size() / folds;
        std::vector<LabeledPoint> train, test;
        train.reserve(points.size() - (hi - lo));
        test.reserve(hi - lo);
        for (std::size_t i = 0; i < points.size(); ++i)
            (i >= lo && i < hi ? test : train).push_back(points[i]);
        report.folds.push_back(knn_fold(train, test, k));
    }
    detail_knn::finalize(report);
    return report;
}

// ---- cluster distance matrix -----------------------------------------------------

struct ClusterDistanceMatrix {
    Matrix dist;               // K x K, K = 49, ordered -24 .. +24
    std::vector<bool> present; // labels with at least one member
    static int label_of_row(std::size_t r) { return static_cast<int>(r) - kMaxInterval; }
};

// Center of interval i = mean of all feature vectors whose label set
// contains i (a point participates in every cluster it is labeled with).
// Rows/cols of absent labels are zero and flagged in `present`.
inline ClusterDistanceMatrix cluster_distance_matrix(const std::vector<LabeledPoint>& points) {
    detail::require(!points.empty(), "cluster_distance_matrix: no points");
    const std::size_t k_labels = 2 * kMaxInterval + 1;
    const std::size_t dim = points.front().features.size();

    std::vector<Vec> centers(k_labels, Vec(dim, 0.0));
    std::vector<std::size_t> counts(k_labels, 0);
    for (const auto& point : points) {
        detail::require(point.features.size() == dim, "cluster_distance_matrix: dimensionality mismatch");
        for (int label : point.labels) {
            if (std::abs(label) > kMaxInterval) continue;
            const std::size_t r = static_cast<std::size_t>(label + kMaxInterval);
            for (std::size_t d = 0; d < dim; ++d) centers[r][d] += point.features[d];
            ++counts[r];
        }
    }

    ClusterDistanceMatrix out;
    out.dist = Matrix(k_labels, k_labels);
    out.present.assign(k_labels, false);
    for (std::size_t r = 0; r < k_labels; ++r) {
        if (counts[r] == 0) continue;
        out.present[r] = true;
        for (std::size_t d = 0; d < dim; ++d) centers[r][d] /= static_cast<double>(counts[r]);
    }
    for (std::size_t i = 0; i < k_labels; ++i)
        for (std::size_t j = i + 1; j < k_labels; ++j) {
            if (!out.present[i] || !out.present[j]) continue;
            const double d = distance(centers[i], centers[j]);
            out.dist(i, j) = d;
            out.dist(j, i) = d;
        }
    return out;
}

// ---- sensitivity -----------------------------------------------------------------

// d(sum of reconstruction outputs)/d(context), mapping held fixed at the
// pair's own mapping; absolute values summed over pitch per context frame,
// averaged over the corpus. Profile index 0 is the oldest frame.
inline std::vector<double> sensitivity(const gae::GaeParams& p, const std::vector<gae::ContextPair>& pairs,
                                       gae::OutputKind kind) {
    detail::require(!pairs.empty(), "sensitivity: empty corpus");
    const std::size_t l_frames = pairs.front().context.rows();
    const std::size_t p_dim = p.input_dim();
    std::vector<double> profile(l_frames, 0.0);

    for (const auto& pair : pairs) {
        const gae::Mapping m = gae::infer_mapping(p, pair);
        const Vec q = matvec_t(p.w1, m);
        const Vec pf = matvec_t(p.w0, q);
        const Vec fu = matvec(p.u, pair.context.data());
        const Vec g = hadamard(pf, fu);
        const Vec a = matvec_t(p.v, g);

        // dS/da, S = sum over output units
        Vec da(p_dim);
        for (std::size_t i = 0; i < p_dim; ++i) {
            if (kind == gae::OutputKind::Binary) {
                const double s = gae::detail2::sigmoid(a[i]);
                da[i] = s * (1.0 - s);
            } else {
                da[i] = 1.0;
            }
        }
        const Vec dg = matvec(p.v, da);
        const Vec dfu = hadamard(dg, pf);
        const Vec dc = matvec_t(p.u, dfu); // dS/d(context), length L*P

        for (std::size_t l = 0; l < l_frames; ++l) {
            double acc = 0.0;
            for (std::size_t i = 0; i < p_dim; ++i) acc += std::abs(dc[l * p_dim + i]);
            profile[l] += acc;
        }
    }
    for (double& v : profile) v /= static_cast<double>(pairs.size());
    return profile;
}

} // namespace timr::analysis

#endif // TIMR_ANALYSIS_HPP
