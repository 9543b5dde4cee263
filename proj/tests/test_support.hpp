#ifndef TIMR_TEST_SUPPORT_HPP
#define TIMR_TEST_SUPPORT_HPP

// Shared test machinery: a straight-line re-implementation of the model's
// forward maps (the oracle the library is checked against), parameter
// packing for finite-difference checks, and the synthetic melody corpus
// used by the trainer and acceptance tests. Everything here is deliberately
// written with plain nested loops, independent of the library's linear
// algebra helpers.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "timr/gae.hpp"
#include "timr/numerics.hpp"
#include "timr/trainer.hpp"

namespace timr::testing {

// ---- straight-line GAE oracle ------------------------------------------------

inline Vec oracle_mapping(const gae::GaeParams& p, const gae::ContextPair& pair) {
    const std::size_t f_dim = p.u.rows();
    const std::size_t lp = p.u.cols();
    const std::size_t p_dim = p.v.cols();
    const std::size_t h1_dim = p.w0.rows();
    const std::size_t h2_dim = p.w1.rows();

    std::vector<double> cflat(lp);
    for (std::size_t l = 0; l < pair.context.rows(); ++l)
        for (std::size_t i = 0; i < p_dim; ++i) cflat[l * p_dim + i] = pair.context(l, i);

    std::vector<double> fu(f_dim, 0.0), fv(f_dim, 0.0), hf(f_dim);
    for (std::size_t f = 0; f < f_dim; ++f) {
        for (std::size_t j = 0; j < lp; ++j) fu[f] += p.u(f, j) * cflat[j];
        for (std::size_t j = 0; j < p_dim; ++j) fv[f] += p.v(f, j) * pair.target[j];
        hf[f] = fu[f] * fv[f];
    }
    std::vector<double> h1(h1_dim, 0.0);
    for (std::size_t h = 0; h < h1_dim; ++h) {
        for (std::size_t f = 0; f < f_dim; ++f) h1[h] += p.w0(h, f) * hf[f];
        h1[h] = std::tanh(h1[h]);
    }
    std::vector<double> m(h2_dim, 0.0);
    for (std::size_t h = 0; h < h2_dim; ++h) {
        for (std::size_t g = 0; g < h1_dim; ++g) m[h] += p.w1(h, g) * h1[g];
        m[h] = std::tanh(m[h]);
    }
    return m;
}

inline Vec oracle_reconstruct_shifted(const gae::GaeParams& p, const gae::ContextPair& pair, const Vec& m,
                                      int delta, gae::OutputKind kind) {
    const std::size_t f_dim = p.u.rows();
    const std::size_t p_dim = p.v.cols();
    const std::size_t l_frames = pair.context.rows();
    const std::size_t h1_dim = p.w0.rows();
    const std::size_t h2_dim = p.w1.rows();

    std::vector<double> q(h1_dim, 0.0);
    for (std::size_t g = 0; g < h1_dim; ++g)
        for (std::size_t h = 0; h < h2_dim; ++h) q[g] += p.w1(h, g) * m[h];
    std::vector<double> pf(f_dim, 0.0);
    for (std::size_t f = 0; f < f_dim; ++f)
        for (std::size_t g = 0; g < h1_dim; ++g) pf[f] += p.w0(g, f) * q[g];

    const int pd = static_cast<int>(p_dim);
    const int d = ((delta % pd) + pd) % pd;
    std::vector<double> scflat(l_frames * p_dim);
    for (std::size_t l = 0; l < l_frames; ++l)
        for (int i = 0; i < pd; ++i)
            scflat[l * p_dim + static_cast<std::size_t>(i)] = pair.context(l, static_cast<std::size_t>((i + d) % pd));

    std::vector<double> fus(f_dim, 0.0);
    for (std::size_t f = 0; f < f_dim; ++f)
        for (std::size_t j = 0; j < scflat.size(); ++j) fus[f] += p.u(f, j) * scflat[j];

    std::vector<double> a(p_dim, 0.0);
    for (std::size_t i = 0; i < p_dim; ++i)
        for (std::size_t f = 0; f < f_dim; ++f) a[i] += p.v(f, i) * pf[f] * fus[f];

    for (double& x : a)
        if (kind == gae::OutputKind::Binary) x = 1.0 / (1.0 + std::exp(-x));
    return a;
}

inline double oracle_loss(const Vec& target, const Vec& recon, gae::OutputKind kind) {
    double total = 0.0;
    if (kind == gae::OutputKind::Binary) {
        for (std::size_t i = 0; i < target.size(); ++i)
            total -= target[i] * std::log(recon[i]) + (1.0 - target[i]) * std::log(1.0 - recon[i]);
    } else {
        for (std::size_t i = 0; i < target.size(); ++i) total += (target[i] - recon[i]) * (target[i] - recon[i]);
        total /= static_cast<double>(target.size());
    }
    return total;
}

// The full shifted objective computed through the oracle path only.
inline double oracle_objective(const gae::GaeParams& p, const gae::ContextPair& pair, int delta,
                               gae::OutputKind kind) {
    const Vec m = oracle_mapping(p, pair);
    const Vec recon = oracle_reconstruct_shifted(p, pair, m, delta, kind);
    const int pd = static_cast<int>(pair.target.size());
    const int d = ((delta % pd) + pd) % pd;
    Vec ts(pair.target.size());
    for (int i = 0; i < pd; ++i) ts[static_cast<std::size_t>(i)] = pair.target[static_cast<std::size_t>((i + d) % pd)];
    return oracle_loss(ts, recon, kind);
}

// ---- parameter packing for finite differences ---------------------------------

inline Vec pack_params(const gae::GaeParams& p) {
    Vec flat;
    flat.reserve(p.u.size() + p.v.size() + p.w0.size() + p.w1.size());
    for (const Matrix* m : {&p.u, &p.v, &p.w0, &p.w1})
        flat.insert(flat.end(), m->data().begin(), m->data().end());
    return flat;
}

inline gae::GaeParams unpack_params(const Vec& flat, const gae::GaeParams& shape) {
    gae::GaeParams p = shape;
    std::size_t at = 0;
    for (Matrix* m : {&p.u, &p.v, &p.w0, &p.w1}) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(at),
                  flat.begin() + static_cast<std::ptrdiff_t>(at + m->size()), m->data().begin());
        at += m->size();
    }
    return p;
}

inline Vec pack_grads(const gae::Gradients& g) {
    Vec flat;
    for (const Matrix* m : {&g.u, &g.v, &g.w0, &g.w1})
        flat.insert(flat.end(), m->data().begin(), m->data().end());
    return flat;
}

// Scale-guarded relative error: true relative error for healthy magnitudes,
// absolute error against the guard for near-zero components (central
// differences at eps=1e-5 carry ~1e-10 absolute noise).
inline double grad_rel_error(double analytic, double numeric, double guard = 1e-4) {
    const double mag = std::max(std::abs(analytic), std::abs(numeric));
    if (mag < guard) return std::abs(analytic - numeric) / guard;
    return std::abs(analytic - numeric) / mag;
}

// ---- random instances -----------------------------------------------------------

inline gae::ModelConfig tiny_config(std::size_t p_dim, std::size_t l, std::size_t f, std::size_t h1,
                                    std::size_t h2, gae::OutputKind kind) {
    gae::ModelConfig mc;
    mc.input_dim = p_dim;
    mc.context_frames = l;
    mc.factor_dim = f;
    mc.map_dim_1 = h1;
    mc.map_dim_2 = h2;
    mc.output_kind = kind;
    mc.shift_range = static_cast<int>(p_dim) - 1;
    return mc;
}

inline gae::ContextPair random_pair(Rng& rng, std::size_t l, std::size_t p_dim, gae::OutputKind kind) {
    gae::ContextPair pair;
    pair.context = Matrix(l, p_dim);
    pair.target.resize(p_dim);
    for (double& x : pair.context.data())
        x = kind == gae::OutputKind::Binary ? (rng.bernoulli(0.3) ? 1.0 : 0.0) : rng.uniform(-1, 1);
    for (double& x : pair.target)
        x = kind == gae::OutputKind::Binary ? (rng.bernoulli(0.3) ? 1.0 : 0.0) : rng.uniform(-1, 1);
    return pair;
}

// ---- synthetic melody corpus ------------------------------------------------------

// Pieces are built from a short motif repeated at random transpositions:
// a random-walk melody line, occasionally thickened with a consonant second
// voice, staying well inside the 60-row register so that in-range
// transpositions exist for every pair.
inline Matrix synthetic_piece(Rng& rng, std::size_t frames = 64, std::size_t rows = 60) {
    const std::size_t motif_len = 8;
    std::vector<int> melody(motif_len);
    std::vector<int> second(motif_len, -1);
    int row = 24 + static_cast<int>(rng.uniform_int(0, 8));
    for (std::size_t i = 0; i < motif_len; ++i) {
        row += static_cast<int>(rng.uniform_int(-4, 4));
        row = std::clamp(row, 22, 38);
        melody[i] = row;
        if (rng.bernoulli(0.4)) {
            static const int kOffsets[] = {-3, -4, -5, -7, -12};
            second[i] = row + kOffsets[rng.uniform_int(0, 4)];
        }
    }

    Matrix piece(frames, rows);
    std::size_t frame = 0;
    while (frame < frames) {
        const int delta = static_cast<int>(rng.uniform_int(-10, 10));
        for (std::size_t i = 0; i < motif_len && frame < frames; ++i, ++frame) {
            const int a = std::clamp(melody[i] + delta, 0, static_cast<int>(rows) - 1);
            piece(frame, static_cast<std::size_t>(a)) = 1.0;
            if (second[i] >= 0) {
                const int b = std::clamp(second[i] + delta, 0, static_cast<int>(rows) - 1);
                piece(frame, static_cast<std::size_t>(b)) = 1.0;
            }
        }
    }
    return piece;
}

inline std::vector<Matrix> synthetic_corpus(Rng& rng, std::size_t pieces, std::size_t frames = 64) {
    std::vector<Matrix> out;
    out.reserve(pieces);
    for (std::size_t i = 0; i < pieces; ++i) out.push_back(synthetic_piece(rng, frames));
    return out;
}

// Largest-magnitude in-range transposition bounds for a binary pair: the
// active rows must stay inside [0, rows). Returns {max_down, max_up}.
inline std::pair<int, int> transposition_bounds(const gae::ContextPair& pair) {
    const int p = static_cast<int>(pair.target.size());
    int lo = p, hi = -1;
    auto scan = [&](const double* row) {
        for (int i = 0; i < p; ++i)
            if (row[i] != 0.0) {
                lo = std::min(lo, i);
                hi = std::max(hi, i);
            }
    };
    for (std::size_t l = 0; l < pair.context.rows(); ++l) scan(pair.context.row(l));
    scan(pair.target.data());
    if (hi < 0) return {0, 0};
    return {lo, p - 1 - hi};
}

// Transpose a binary pair up by delta rows (delta may be negative).
// shift() moves content toward lower indices for positive arguments, so
// "up by delta" is shift(x, -delta).
inline gae::ContextPair transpose_pair(const gae::ContextPair& pair, int delta) {
    gae::ContextPair out;
    out.context = gae::shift_frames(pair.context, -delta);
    out.target = gae::shift(pair.target, -delta);
    return out;
}

// ---- diagonal tracer oracle --------------------------------------------------------

// Independent re-implementation of the diagonal score, the sequential stop
// rule and the longest-first suppression; the library tracer is required to
// match it hit for hit.
inline double oracle_score_diagonal(const Matrix& x, std::size_t i, std::size_t j, std::size_t n) {
    const std::size_t m = std::min<std::size_t>(10, n);
    double s = 0;
    for (std::size_t k = n - m; k <= n; ++k) {
        const double w = (1.0 + static_cast<double>(k) + static_cast<double>(m) - static_cast<double>(n)) /
                         static_cast<double>(m);
        s += x(i + k, j + k) * w / static_cast<double>(m);
    }
    return s;
}

struct OracleHit {
    std::size_t i, j, n;
    double score;
};

inline std::vector<OracleHit> oracle_trace_diagonals(const Matrix& x, double gamma) {
    const std::size_t t = x.rows();
    std::vector<OracleHit> all;
    for (std::size_t d = 1; d < t; ++d) {
        std::vector<OracleHit> cands;
        for (std::size_t i = 0; i + d < t; ++i) {
            std::size_t best = 0;
            double best_score = 0;
            for (std::size_t n = 1; i + d + n <= t - 1; ++n) {
                const double s = oracle_score_diagonal(x, i, i + d, n);
                if (s < gamma) break;
                best = n;
                best_score = s;
            }
            if (best) cands.push_back({i, i + d, best, best_score});
        }
        std::sort(cands.begin(), cands.end(),
                  [](const OracleHit& a, const OracleHit& b) { return a.n != b.n ? a.n > b.n : a.i < b.i; });
        std::vector<char> taken(t, 0);
        for (const auto& c : cands) {
            if (taken[c.i]) continue;
            all.push_back(c);
            for (std::size_t k = c.i; k < c.i + c.n && k < t; ++k) taken[k] = 1;
        }
    }
    std::sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
        const std::size_t da = a.j - a.i, db = b.j - b.i;
        return da != db ? da < db : a.i < b.i;
    });
    return all;
}

// ---- misc -------------------------------------------------------------------------

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               (tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

} // namespace timr::testing

#endif // TIMR_TEST_SUPPORT_HPP
