#ifndef TIMR_DISCOVERY_HPP
#define TIMR_DISCOVERY_HPP

// Repeated-section discovery on mapping trajectories: reciprocal-distance
// self-similarity matrix (diagonal blanked, normalized, smoothed along
// diagonals, renormalized), weighted diagonal scoring, threshold tracing
// with longest-first suppression per diagonal offset, union-find grouping
// of the recovered occurrences, and a frame-overlap section evaluator.
//
// Score scale: the weighted window sum is divided by m = min(10, N), not by
// the number of terms (m + 1), and the weights grow to (1 + m)/m. On an
// all-ones matrix the score starts at 3.0 for N = 1 and settles near 0.66
// for long diagonals, so useful thresholds for a [0,1]-normalized matrix
// sit around 0.66 * expected diagonal brightness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "timr/numerics.hpp"

namespace timr::discover {

struct SimilarityMatrix {
    Matrix x;                      // T x T, symmetric, in [0, 1]
    double seconds_per_frame = 0;  // 0 for symbolic (metrical) frames
    bool degenerate = false;       // constant before normalization
};

inline constexpr std::size_t kSmoothKernel = 15; // identity kernel size
inline constexpr double kDistanceEps = 1e-6;

namespace detail_ssm {

inline void min_max_normalize(Matrix& m, bool* degenerate) {
    double lo = m.data()[0], hi = m.data()[0];
    for (double v : m.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo <= 0.0) {
        if (degenerate) *degenerate = true;
        m.fill(0.0);
        return;
    }
    const double inv = 1.0 / (hi - lo);
    for (double& v : m.data()) v = (v - lo) * inv;
}

} // namespace detail_ssm

// X(a,b) = 1 / (|m_a - m_b| + eps); main diagonal overwritten with the
// matrix minimum; min-max normalized; convolved with the 15x15 identity
// kernel (zero padding, 1/15 scale); renormalized to [0,1].
inline SimilarityMatrix build_ssm(const Matrix& trajectory) {
    detail::require(trajectory.rows() >= 2, "build_ssm: need at least 2 mappings");
    const std::size_t t = trajectory.rows();

    SimilarityMatrix out;
    out.x = Matrix(t, t);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < t; ++a) {
        out.x(a, a) = 0.0; // placeholder, overwritten below
        for (std::size_t b = a + 1; b < t; ++b) {
            const double v = 1.0 / (distance(trajectory.row_span(a), trajectory.row_span(b)) + kDistanceEps);
            out.x(a, b) = v;
            out.x(b, a) = v;
            lo = std::min(lo, v);
        }
    }
    for (std::size_t a = 0; a < t; ++a) out.x(a, a) = lo;

    detail_ssm::min_max_normalize(out.x, &out.degenerate);

    // smooth along diagonals: out(a,b) = (1/15) sum_{d=-7..7} in(a+d, b+d)
    Matrix smooth(t, t);
    const int half = static_cast<int>(kSmoothKernel) / 2;
    for (std::size_t a = 0; a < t; ++a)
        for (std::size_t b = 0; b < t; ++b) {
            double acc = 0.0;
            for (int d = -half; d <= half; ++d) {
                const std::int64_t aa = static_cast<std::int64_t>(a) + d;
                const std::int64_t bb = static_cast<std::int64_t>(b) + d;
                if (aa < 0 || bb < 0 || aa >= static_cast<std::int64_t>(t) || bb >= static_cast<std::int64_t>(t))
                    continue;
                acc += out.x(static_cast<std::size_t>(aa), static_cast<std::size_t>(bb));
            }
            smooth(a, b) = acc / static_cast<double>(kSmoothKernel);
        }
    out.x = std::move(smooth);
    detail_ssm::min_max_normalize(out.x, nullptr);
    return out;
}

// ---- diagonal scoring and tracing ---------------------------------------------

// s(i,j,N) = sum_{k=N-m}^{N} X(i+k, j+k) * w_k / m with m = min(10, N) and
// w_k = (1 + k + m - N) / m; the trailing window weights later cells more.
inline double score_diagonal(const Matrix& x, std::size_t i, std::size_t j, std::size_t n) {
    detail::require(n >= 1, "score_diagonal: N must be >= 1");
    detail::require(i + n < x.rows() && j + n < x.cols(), "score_diagonal: diagonal out of bounds");
    const std::size_t m = std::min<std::size_t>(10, n);
    const double md = static_cast<double>(m);
    double s = 0.0;
    for (std::size_t k = n - m; k <= n; ++k) {
        const double w = (1.0 + static_cast<double>(k) + md - static_cast<double>(n)) / md;
        s += x(i + k, j + k) * w / md;
    }
    return s;
}

struct DiagonalHit {
    std::size_t i = 0, j = 0; // start, i < j
    std::size_t n = 0;        // length in frames
    double score = 0.0;       // score at the recorded length
};

// For every upper-triangle start, N grows from 1 until the score first
// undercuts gamma (or the boundary stops it); the last N that still scored
// >= gamma becomes a candidate. Per diagonal offset, candidates are then
// accepted longest-first (ties: smaller start) and a candidate whose start
// cell lies inside an accepted hit's [i, i+N) range is suppressed.
inline std::vector<DiagonalHit> trace_diagonals(const Matrix& x, double gamma) {
    detail::require(gamma > 0.0, "trace_diagonals: gamma must be positive");
    const std::size_t t = x.rows();
    std::vector<DiagonalHit> hits;
    std::vector<DiagonalHit> candidates;
    std::vector<char> consumed;

    for (std::size_t offset = 1; offset < t; ++offset) {
        candidates.clear();
        const std::size_t starts = t - offset; // cells (i, i+offset), i in [0, starts)
        for (std::size_t i = 0; i + 1 < starts; ++i) {
            const std::size_t n_max = starts - 1 - i; // need i + offset + N <= t - 1
            std::size_t n_last = 0;
            double s_last = 0.0;
            for (std::size_t n = 1; n <= n_max; ++n) {
                const double s = score_diagonal(x, i, i + offset, n);
                if (s < gamma) break;
                n_last = n;
                s_last = s;
            }
            if (n_last >= 1) candidates.push_back({i, i + offset, n_last, s_last});
        }
        if (candidates.empty()) continue;

        std::sort(candidates.begin(), candidates.end(), [](const DiagonalHit& a, const DiagonalHit& b) {
            return a.n != b.n ? a.n > b.n : a.i < b.i;
        });
        consumed.assign(starts, 0);
        for (const auto& cand : candidates) {
            if (consumed[cand.i]) continue;
            hits.push_back(cand);
            for (std::size_t k = cand.i; k < std::min(cand.i + cand.n, starts); ++k) consumed[k] = 1;
        }
    }
    // deterministic order: by offset, then start
    std::sort(hits.begin(), hits.end(), [](const DiagonalHit& a, const DiagonalHit& b) {
        const std::size_t da = a.j - a.i, db = b.j - b.i;
        return da != db ? da < db : a.i < b.i;
    });
    return hits;
}

// ---- grouping -------------------------------------------------------------------

struct SectionOccurrence {
    std::size_t start = 0; // half-open frame interval
    std::size_t end = 0;

    bool operator==(const SectionOccurrence&) const = default;
};

struct PatternGroup {
    std::vector<SectionOccurrence> occurrences; // >= 2, pairwise distinct
};

namespace detail_group {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

inline bool within_tolerance(const SectionOccurrence& a, const SectionOccurrence& b, std::size_t tol) {
    const auto diff = [](std::size_t x, std::size_t y) { return x > y ? x - y : y - x; };
    return diff(a.start, b.start) <= tol && diff(a.end, b.end) <= tol;
}

} // namespace detail_group

// Hits longer than min_len_frames each contribute their two occurrences;
// a hit links its own pair, and any two occurrences whose start and end
// both lie within merge_tol_frames are treated as the same section. Within
// a group, near-duplicate occurrences collapse onto the lexicographically
// smallest representative. Groups keep >= 2 distinct occurrences and come
// out sorted by earliest start.
inline std::vector<PatternGroup> extract_groups(const std::vector<DiagonalHit>& hits,
                                                std::size_t min_len_frames, std::size_t merge_tol_frames) {
    std::vector<SectionOccurrence> occ;
    std::vector<std::pair<std::size_t, std::size_t>> hit_links;
    for (const auto& h : hits) {
        if (h.n <= min_len_frames) continue;
        occ.push_back({h.i, h.i + h.n});
        occ.push_back({h.j, h.j + h.n});
        hit_links.emplace_back(occ.size() - 2, occ.size() - 1);
    }
    if (occ.empty()) return {};

    detail_group::UnionFind uf(occ.size());
    for (const auto& [a, b] : hit_links) uf.unite(a, b);
    for (std::size_t a = 0; a < occ.size(); ++a)
        for (std::size_t b = a + 1; b < occ.size(); ++b)
            if (detail_group::within_tolerance(occ[a], occ[b], merge_tol_frames)) uf.unite(a, b);

    std::vector<std::vector<SectionOccurrence>> components(occ.size());
    for (std::size_t a = 0; a < occ.size(); ++a) components[uf.find(a)].push_back(occ[a]);

    std::vector<PatternGroup> groups;
    for (auto& members : components) {
        if (members.empty()) continue;
        std::sort(members.begin(), members.end(), [](const SectionOccurrence& a, const SectionOccurrence& b) {
            return std::tie(a.start, a.end) < std::tie(b.start, b.end);
        });
        // collapse near-duplicates onto earlier representatives
        PatternGroup g;
        for (const auto& m : members) {
            bool absorbed = false;
            for (const auto& rep : g.occurrences)
                if (detail_group::within_tolerance(m, rep, merge_tol_frames)) {
                    absorbed = true;
                    break;
                }
            if (!absorbed) g.occurrences.push_back(m);
        }
        if (g.occurrences.size() >= 2) groups.push_back(std::move(g));
    }
    std::sort(groups.begin(), groups.end(), [](const PatternGroup& a, const PatternGroup& b) {
        return a.occurrences.front().start < b.occurrences.front().start;
    });
    return groups;
}

// ---- evaluation -----------------------------------------------------------------

struct SectionScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

namespace detail_eval {

inline double jaccard(const SectionOccurrence& a, const SectionOccurrence& b) {
    const std::size_t inter_lo = std::max(a.start, b.start);
    const std::size_t inter_hi = std::min(a.end, b.end);
    const std::size_t inter = inter_hi > inter_lo ? inter_hi - inter_lo : 0;
    const std::size_t uni = (a.end - a.start) + (b.end - b.start) - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Mean Jaccard under greedy one-to-one occurrence matching; unmatched
// occurrences on either side count as zero.
inline double group_overlap(const PatternGroup& a, const PatternGroup& b) {
    struct Cand {
        double j;
        std::size_t ia, ib;
    };
    std::vector<Cand> cands;
    for (std::size_t ia = 0; ia < a.occurrences.size(); ++ia)
        for (std::size_t ib = 0; ib < b.occurrences.size(); ++ib)
            cands.push_back({jaccard(a.occurrences[ia], b.occurrences[ib]), ia, ib});
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        return x.j != y.j ? x.j > y.j : std::tie(x.ia, x.ib) < std::tie(y.ia, y.ib);
    });
    std::vector<char> used_a(a.occurrences.size(), 0), used_b(b.occurrences.size(), 0);
    double total = 0.0;
    for (const auto& c : cands) {
        if (used_a[c.ia] || used_b[c.ib]) continue;
        used_a[c.ia] = used_b[c.ib] = 1;
        total += c.j;
    }
    return total / static_cast<double>(std::max(a.occurrences.size(), b.occurrences.size()));
}

} // namespace detail_eval

// Greedy one-to-one matching of found groups to truth groups by mean
// frame-overlap Jaccard; a match is correct when the mean Jaccard >= 0.5.
inline SectionScores evaluate_sections(const std::vector<PatternGroup>& found,
                                       const std::vector<PatternGroup>& truth) {
    SectionScores out;
    if (found.empty() || truth.empty()) {
        out.precision = 0.0;
        out.recall = 0.0;
        out.f1 = 0.0;
        if (found.empty() && truth.empty()) out.precision = out.recall = out.f1 = 1.0;
        return out;
    }
    struct Cand {
        double overlap;
        std::size_t f, t;
    };
    std::vector<Cand> cands;
    for (std::size_t f = 0; f < found.size(); ++f)
        for (std::size_t t = 0; t < truth.size(); ++t)
            cands.push_back({detail_eval::group_overlap(found[f], truth[t]), f, t});
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return a.overlap != b.overlap ? a.overlap > b.overlap : std::tie(a.f, a.t) < std::tie(b.f, b.t);
    });
    std::vector<char> used_f(found.size(), 0), used_t(truth.size(), 0);
    std::size_t correct = 0;
    for (const auto& c : cands) {
        if (used_f[c.f] || used_t[c.t] || c.overlap < 0.5) continue;
        used_f[c.f] = used_t[c.t] = 1;
        ++correct;
    }
    out.precision = static_cast<double>(correct) / static_cast<double>(found.size());
    out.recall = static_cast<double>(correct) / static_cast<double>(truth.size());
    out.f1 = (out.precision + out.recall) > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

// ---- sections text format ---------------------------------------------------------

// One group per line: `group_id start:end start:end ...` in frames. Audio
// variant starts with an `@sr,hop` header line and uses seconds.
inline std::string format_sections(const std::vector<PatternGroup>& groups, double sample_rate = 0,
                                   std::size_t hop = 0) {
    std::ostringstream out;
    const bool seconds = sample_rate > 0 && hop > 0;
    if (seconds) out << "@" << sample_rate << "," << hop << "\n";
    const double frame_sec = seconds ? static_cast<double>(hop) / sample_rate : 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        out << g;
        for (const auto& o : groups[g].occurrences) {
            if (seconds)
                out << " " << static_cast<double>(o.start) * frame_sec << ":"
                    << static_cast<double>(o.end) * frame_sec;
            else out << " " << o.start << ":" << o.end;
        }
        out << "\n";
    }
    return out.str();
}

inline std::vector<PatternGroup> parse_sections(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    double sample_rate = 0;
    std::size_t hop = 0;
    std::vector<PatternGroup> groups;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (line[0] == '@') {
            const auto comma = line.find(',');
            if (comma == std::string::npos)
                throw std::runtime_error("sections: bad @sr,hop header at line " + std::to_string(lineno));
            sample_rate = std::stod(line.substr(1, comma - 1));
            hop = std::stoul(line.substr(comma + 1));
            continue;
        }
        std::istringstream ls(line);
        std::string token;
        if (!(ls >> token)) continue; // group id, unused beyond ordering
        PatternGroup g;
        while (ls >> token) {
            const auto colon = token.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("sections: expected start:end at line " + std::to_string(lineno));
            const double a = std::stod(token.substr(0, colon));
            const double b = std::stod(token.substr(colon + 1));
            SectionOccurrence o;
            if (sample_rate > 0 && hop > 0) {
                o.start = static_cast<std::size_t>(std::llround(a * sample_rate / static_cast<double>(hop)));
                o.end = static_cast<std::size_t>(std::llround(b * sample_rate / static_cast<double>(hop)));
            } else {
                o.start = static_cast<std::size_t>(std::llround(a));
                o.end = static_cast<std::size_t>(std::llround(b));
            }
            if (o.end <= o.start)
                throw std::runtime_error("sections: empty occurrence at line " + std::to_string(lineno));
            g.occurrences.push_back(o);
        }
        if (!g.occurrences.empty()) groups.push_back(std::move(g));
    }
    return groups;
}

} // namespace timr::discover

#endif // TIMR_DISCOVERY_HPP
