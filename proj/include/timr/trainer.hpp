#ifndef TIMR_TRAINER_HPP
#define TIMR_TRAINER_HPP

// SGD over a corpus of context/target pairs with the shift-augmented
// objective: per batch, one transposition distance delta is drawn, the
// mapping is inferred from the (dropout-masked) untransposed pair, and the
// loss scores the reconstruction of the shifted target from the shifted
// context. Regularizers: L2 on U and V, L1 sparsity on the mapping layer,
// and a column-norm deviation penalty on U and V, plus a hard column-norm
// cap applied after every update.
//
// The hot path works on transposed copies of U and V (contexts and targets
// are sparse binary for symbolic data, and the transposed layout turns all
// context-side products into contiguous row operations that skip zeros).
// Spec-shaped per-pair gradients (gae::grads) stay the reference; a test
// pins the two paths to each other.
//
// Determinism contract: given (seed, corpus, configs) the full parameter
// stream is reproducible. Per step the RNG is consumed in a fixed order:
// batch_size index draws, one delta draw, then batch_size * L * P dropout
// draws (drawn regardless of dropout_p so the stream shape never changes).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "timr/gae.hpp"
#include "timr/numerics.hpp"

namespace timr::train {

struct TrainConfig {
    long total_steps = 5000;
    std::size_t batch_size = 32;
    double lr_start = 1e-3;
    double lr_end = 0.0;
    double dropout_p = 0.5;       // input only; target is never masked
    double l2_weight = 1e-4;      // U, V only
    double sparsity_weight = 1e-4;
    double norm_dev_weight = 1e-3;
    double max_col_norm = 2.0;
    std::uint64_t seed = 0;
    long checkpoint_every = 0; // 0 disables periodic checkpoints
    std::string checkpoint_path;

    void validate() const {
        detail::require(total_steps >= 0, "TrainConfig: total_steps must be >= 0");
        detail::require(batch_size > 0, "TrainConfig: batch_size must be positive");
        detail::require(dropout_p >= 0.0 && dropout_p < 1.0, "TrainConfig: dropout_p must be in [0,1)");
        detail::require(lr_start > lr_end && lr_end >= 0.0,
                        "TrainConfig: need lr_start > lr_end >= 0");
        detail::require(l2_weight >= 0.0 && sparsity_weight >= 0.0 && norm_dev_weight >= 0.0,
                        "TrainConfig: regularizer weights must be >= 0");
        detail::require(max_col_norm > 0.0, "TrainConfig: max_col_norm must be positive");
    }
};

struct TrainReport {
    std::vector<double> data_loss; // per-step batch mean
    std::vector<double> reg_loss;  // per-step regularizer value
    std::vector<double> lr;        // per-step learning rate
    gae::GaeParams params;
    double wall_seconds = 0.0;
    long steps = 0;
};

// One pair per time step t in [L-1, T-2]: context = frames[t-L+1 .. t]
// (oldest first), target = frame t+1. Pieces shorter than L+1 frames yield
// no pairs; the caller decides how loudly to warn.
inline std::vector<gae::ContextPair> make_pairs(const Matrix& frames, std::size_t context_frames) {
    detail::require(context_frames > 0, "make_pairs: context_frames must be positive");
    const std::size_t t_total = frames.rows();
    const std::size_t p = frames.cols();
    std::vector<gae::ContextPair> pairs;
    if (t_total < context_frames + 1) return pairs;
    pairs.reserve(t_total - context_frames);
    for (std::size_t t = context_frames - 1; t + 1 < t_total; ++t) {
        gae::ContextPair pair;
        pair.context = Matrix(context_frames, p);
        for (std::size_t l = 0; l < context_frames; ++l) {
            const double* src = frames.row(t - context_frames + 1 + l);
            std::copy(src, src + p, pair.context.row(l));
        }
        pair.target.assign(frames.row(t + 1), frames.row(t + 1) + p);
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

namespace detail_train {

inline void tanh_inplace(Matrix& m) {
    for (double& x : m.data()) x = std::tanh(x);
}

inline Matrix ew_mul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] * b.data()[i];
    return c;
}

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    constexpr std::size_t kBlock = 32;
    for (std::size_t i0 = 0; i0 < m.rows(); i0 += kBlock)
        for (std::size_t j0 = 0; j0 < m.cols(); j0 += kBlock) {
            const std::size_t i1 = std::min(i0 + kBlock, m.rows());
            const std::size_t j1 = std::min(j0 + kBlock, m.cols());
            for (std::size_t i = i0; i < i1; ++i)
                for (std::size_t j = j0; j < j1; ++j) t(j, i) = m(i, j);
        }
    return t;
}

// Weights in the trainer's working layout: U and V transposed.
struct WorkingParams {
    Matrix ut; // (L*P) x F
    Matrix vt; // P x F
    Matrix w0; // H1 x F
    Matrix w1; // H2 x H1

    static WorkingParams from_spec(const gae::GaeParams& p) {
        return {transpose(p.u), transpose(p.v), p.w0, p.w1};
    }

    gae::GaeParams to_spec() const { return {transpose(ut), transpose(vt), w0, w1}; }
};

struct BatchGrads {
    double data_loss = 0.0; // batch mean
    double sparsity_value = 0.0;
    Matrix dut, dvt, dw0, dw1;
};

// Batched gradient of (1/B) sum_b L(shift(y_b, delta), recon') plus the
// sparsity term sw * mean|m|. Inputs are the already-masked contexts (cm),
// their shifted copies (cs), targets (y) and shifted targets (ys), one pair
// per row.
inline BatchGrads batch_gradients(const WorkingParams& w, const Matrix& cm, const Matrix& cs,
                                  const Matrix& y, const Matrix& ys, gae::OutputKind kind,
                                  double sparsity_weight) {
    const std::size_t b = cm.rows();
    const std::size_t out_dim = y.cols();
    const double inv_b = 1.0 / static_cast<double>(b);

    // forward
    const Matrix fu = matmul(cm, w.ut);  // B x F
    const Matrix fv = matmul(y, w.vt);   // B x F
    const Matrix hf = ew_mul(fu, fv);
    Matrix h1 = matmul_nt(hf, w.w0); // B x H1
    tanh_inplace(h1);
    Matrix m = matmul_nt(h1, w.w1); // B x H2
    tanh_inplace(m);
    const Matrix q = matmul(m, w.w1);    // B x H1
    const Matrix pf = matmul(q, w.w0);   // B x F
    const Matrix fus = matmul(cs, w.ut); // B x F
    const Matrix g = ew_mul(pf, fus);
    const Matrix a = matmul_nt(g, w.vt); // B x P

    BatchGrads out;
    Matrix da(b, out_dim);
    if (kind == gae::OutputKind::Binary) {
        for (std::size_t r = 0; r < b; ++r)
            for (std::size_t i = 0; i < out_dim; ++i) {
                const double av = a(r, i);
                out.data_loss += gae::detail2::softplus(av) - ys(r, i) * av;
                da(r, i) = (gae::detail2::sigmoid(av) - ys(r, i)) * inv_b;
            }
    } else {
        const double inv_p = 1.0 / static_cast<double>(out_dim);
        for (std::size_t r = 0; r < b; ++r)
            for (std::size_t i = 0; i < out_dim; ++i) {
                const double diff = a(r, i) - ys(r, i);
                out.data_loss += diff * diff * inv_p;
                da(r, i) = 2.0 * diff * inv_p * inv_b;
            }
    }
    out.data_loss *= inv_b;

    // backward, reconstruction path
    out.dvt = matmul_tn(da, g);          // P x F
    const Matrix dg = matmul(da, w.vt);  // B x F
    const Matrix dp = ew_mul(dg, fus);
    const Matrix dfus = ew_mul(dg, pf);
    out.dut = matmul_tn(cs, dfus); // (L*P) x F
    out.dw0 = matmul_tn(q, dp);    // H1 x F
    const Matrix dq = matmul_nt(dp, w.w0); // B x H1
    out.dw1 = matmul_tn(m, dq);            // H2 x H1
    Matrix dm = matmul_nt(dq, w.w1);       // B x H2

    if (sparsity_weight > 0.0) {
        const double scale = sparsity_weight / static_cast<double>(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double mv = m.data()[i];
            out.sparsity_value += scale * std::abs(mv);
            dm.data()[i] += mv > 0.0 ? scale : (mv < 0.0 ? -scale : 0.0);
        }
    }

    // backward, mapping path
    Matrix dz1(b, m.cols());
    for (std::size_t i = 0; i < m.size(); ++i)
        dz1.data()[i] = dm.data()[i] * (1.0 - m.data()[i] * m.data()[i]);
    matmul_tn_acc(out.dw1, dz1, h1);
    const Matrix dh1m = matmul(dz1, w.w1); // B x H1
    Matrix dz0(b, h1.cols());
    for (std::size_t i = 0; i < h1.size(); ++i)
        dz0.data()[i] = dh1m.data()[i] * (1.0 - h1.data()[i] * h1.data()[i]);
    matmul_tn_acc(out.dw0, dz0, hf);
    const Matrix dhf = matmul(dz0, w.w0); // B x F
    const Matrix dfu = ew_mul(dhf, fv);
    const Matrix dfv = ew_mul(dhf, fu);
    matmul_tn_acc(out.dut, cm, dfu);
    matmul_tn_acc(out.dvt, y, dfv);

    return out;
}

inline double sum_squares(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return s;
}

// Norm-deviation penalty over the rows of a transposed weight matrix
// (= columns of the spec-shape matrix). Returns the penalty value and adds
// its gradient, scaled by weight, into grad.
inline double norm_dev_penalty(const Matrix& wt, double weight, Matrix* grad) {
    std::vector<double> norms(wt.rows());
    double mean = 0.0;
    for (std::size_t r = 0; r < wt.rows(); ++r) {
        norms[r] = norm2(wt.row_span(r));
        mean += norms[r];
    }
    mean /= static_cast<double>(wt.rows());
    double value = 0.0;
    for (std::size_t r = 0; r < wt.rows(); ++r) {
        const double dev = norms[r] - mean;
        value += dev * dev;
        if (grad && norms[r] > 0.0) {
            const double coef = weight * 2.0 * dev / norms[r];
            const double* src = wt.row(r);
            double* dst = grad->row(r);
            for (std::size_t c = 0; c < wt.cols(); ++c) dst[c] += coef * src[c];
        }
    }
    return value;
}

// Rescale rows with norm above the cap back onto the cap.
inline void clip_row_norms(Matrix& wt, double max_norm) {
    for (std::size_t r = 0; r < wt.rows(); ++r) {
        const double n = norm2(wt.row_span(r));
        if (n > max_norm) {
            const double s = max_norm / n;
            double* row = wt.row(r);
            for (std::size_t c = 0; c < wt.cols(); ++c) row[c] *= s;
        }
    }
}

} // namespace detail_train

// ---- regularizers as a standalone operation ----------------------------------

struct RegTerms {
    double value = 0.0;
    gae::Gradients grads;
};

// Total regularizer over a batch:
//   l2_weight * (|U|^2 + |V|^2)
//   + sparsity_weight * mean|m|  (mean over batch and mapping components)
//   + norm_dev_weight * sum_cols (|col| - mean_norm)^2  over U and V
// The sparsity gradient flows through the mapping inference, so this takes
// the batch of pairs rather than precomputed mappings.
inline RegTerms regularizer_terms(const gae::GaeParams& p, const std::vector<gae::ContextPair>& batch,
                                  const TrainConfig& tc) {
    detail::require(!batch.empty(), "regularizer_terms: empty batch");
    RegTerms out{0.0, gae::Gradients(p)};

    out.value += tc.l2_weight * (detail_train::sum_squares(p.u) + detail_train::sum_squares(p.v));
    for (std::size_t i = 0; i < p.u.size(); ++i)
        out.grads.u.data()[i] += 2.0 * tc.l2_weight * p.u.data()[i];
    for (std::size_t i = 0; i < p.v.size(); ++i)
        out.grads.v.data()[i] += 2.0 * tc.l2_weight * p.v.data()[i];

    // column norms: work on transposed copies so columns are contiguous
    {
        const Matrix ut = detail_train::transpose(p.u);
        const Matrix vt = detail_train::transpose(p.v);
        Matrix dut(ut.rows(), ut.cols());
        Matrix dvt(vt.rows(), vt.cols());
        out.value += tc.norm_dev_weight * detail_train::norm_dev_penalty(ut, tc.norm_dev_weight, &dut);
        out.value += tc.norm_dev_weight * detail_train::norm_dev_penalty(vt, tc.norm_dev_weight, &dvt);
        const Matrix du = detail_train::transpose(dut);
        const Matrix dv = detail_train::transpose(dvt);
        for (std::size_t i = 0; i < du.size(); ++i) out.grads.u.data()[i] += du.data()[i];
        for (std::size_t i = 0; i < dv.size(); ++i) out.grads.v.data()[i] += dv.data()[i];
    }

    if (tc.sparsity_weight > 0.0) {
        const std::size_t h2 = p.map_dim_2();
        const double scale = tc.sparsity_weight / static_cast<double>(batch.size() * h2);
        for (const auto& pair : batch) {
            // forward through the mapping, then push d(sw*|m|)/dm back
            const Vec fu = matvec(p.u, pair.context.data());
            const Vec fv = matvec(p.v, pair.target);
            const Vec hf = hadamard(fu, fv);
            Vec h1 = matvec(p.w0, hf);
            for (double& x : h1) x = std::tanh(x);
            Vec m = matvec(p.w1, h1);
            for (double& x : m) x = std::tanh(x);

            Vec dz1(m.size());
            for (std::size_t i = 0; i < m.size(); ++i) {
                out.value += scale * std::abs(m[i]);
                const double sgn = m[i] > 0.0 ? scale : (m[i] < 0.0 ? -scale : 0.0);
                dz1[i] = sgn * (1.0 - m[i] * m[i]);
            }
            add_outer(out.grads.w1, dz1, h1);
            const Vec dh1 = matvec_t(p.w1, dz1);
            Vec dz0(h1.size());
            for (std::size_t i = 0; i < h1.size(); ++i) dz0[i] = dh1[i] * (1.0 - h1[i] * h1[i]);
            add_outer(out.grads.w0, dz0, hf);
            const Vec dhf = matvec_t(p.w0, dz0);
            add_outer(out.grads.u, hadamard(dhf, fv), pair.context.data());
            add_outer(out.grads.v, hadamard(dhf, fu), pair.target);
        }
    }
    return out;
}

// ---- initialization --------------------------------------------------------------

// Per-matrix init scales measured from the corpus. Fan-in-based scaling
// assumes dense unit-variance inputs; on sparse binary rolls (~10 active
// bits out of 540) it leaves the factor products around 1e-2 and the
// gradients into U and V too damped to move within a few thousand steps.
// Here the scales are derived from the input second moments so the factor
// products and both tanh pre-activations start near half-unit scale, with
// U and V column norms held beneath the hard cap.
inline gae::GaeParams init_params_for_corpus(const std::vector<gae::ContextPair>& corpus,
                                             const gae::ModelConfig& mc, const TrainConfig& tc, Rng& rng) {
    mc.validate();
    detail::require(!corpus.empty(), "init_params_for_corpus: empty corpus");

    const std::size_t probe = std::min<std::size_t>(corpus.size(), 256);
    double c2 = 0.0, y2 = 0.0;
    for (std::size_t i = 0; i < probe; ++i) {
        for (double v : corpus[i].context.data()) c2 += v * v;
        for (double v : corpus[i].target) y2 += v * v;
    }
    const double keep_p = 1.0 - tc.dropout_p;
    c2 /= static_cast<double>(probe) * keep_p; // dropout scaling inflates second moments by 1/keep
    y2 /= static_cast<double>(probe);

    const double f_dim = static_cast<double>(mc.factor_dim);
    const double cap_sigma = 0.45 * tc.max_col_norm / std::sqrt(f_dim);
    const double sigma_u = c2 > 0.0 ? std::min(1.0 / std::sqrt(c2), cap_sigma) : cap_sigma;
    const double sigma_v = y2 > 0.0 ? std::min(1.0 / std::sqrt(y2), cap_sigma) : cap_sigma;

    const double fu_rms = sigma_u * std::sqrt(std::max(c2, 1e-12));
    const double fv_rms = sigma_v * std::sqrt(std::max(y2, 1e-12));
    const double hf_rms = std::max(fu_rms * fv_rms, 1e-12);
    const double sigma_w0 = 0.5 / (std::sqrt(f_dim) * hf_rms);
    const double sigma_w1 = 0.5 / (std::sqrt(static_cast<double>(mc.map_dim_1)) * 0.45);

    auto draw = [&rng](Matrix& m, double sigma) {
        const double bound = sigma * std::sqrt(3.0); // uniform with this std
        for (double& x : m.data()) x = rng.uniform(-bound, bound);
    };
    gae::GaeParams p;
    p.u = Matrix(mc.factor_dim, mc.context_frames * mc.input_dim);
    p.v = Matrix(mc.factor_dim, mc.input_dim);
    p.w0 = Matrix(mc.map_dim_1, mc.factor_dim);
    p.w1 = Matrix(mc.map_dim_2, mc.map_dim_1);
    draw(p.u, sigma_u);
    draw(p.v, sigma_v);
    draw(p.w0, sigma_w0);
    draw(p.w1, sigma_w1);
    return p;
}

// ---- the training loop --------------------------------------------------------

inline TrainReport train(const std::vector<gae::ContextPair>& corpus, const gae::ModelConfig& mc,
                         const TrainConfig& tc, const gae::GaeParams* start_params = nullptr) {
    mc.validate();
    tc.validate();
    detail::require(!corpus.empty(), "train: empty corpus");
    for (const auto& pair : corpus)
        detail::require(pair.context.rows() == mc.context_frames && pair.context.cols() == mc.input_dim &&
                            pair.target.size() == mc.input_dim,
                        "train: pair shape does not match model config");

    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(tc.seed);

    gae::GaeParams init = start_params ? *start_params : init_params_for_corpus(corpus, mc, tc, rng);
    detail::require(init.input_dim() == mc.input_dim && init.context_frames() == mc.context_frames,
                    "train: params do not match model config");
    auto w = detail_train::WorkingParams::from_spec(init);

    const std::size_t lp = mc.context_frames * mc.input_dim;
    const std::size_t p_dim = mc.input_dim;
    const std::size_t b = tc.batch_size;
    const double keep_p = 1.0 - tc.dropout_p;
    const double inv_keep = 1.0 / keep_p;

    TrainReport report;
    report.data_loss.reserve(tc.total_steps);
    report.reg_loss.reserve(tc.total_steps);
    report.lr.reserve(tc.total_steps);

    Matrix cm(std::max<std::size_t>(b, 1), lp), cs(std::max<std::size_t>(b, 1), lp);
    Matrix y(std::max<std::size_t>(b, 1), p_dim), ys(std::max<std::size_t>(b, 1), p_dim);
    std::vector<std::size_t> batch_ids(b);

    for (long step = 0; step < tc.total_steps; ++step) {
        const double frac = static_cast<double>(step) / static_cast<double>(tc.total_steps);
        const double lr = tc.lr_start * (1.0 - frac) + tc.lr_end * frac;

        for (std::size_t i = 0; i < b; ++i)
            batch_ids[i] = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(corpus.size()) - 1));
        const int delta = static_cast<int>(rng.uniform_int(-mc.shift_range, mc.shift_range));

        for (std::size_t i = 0; i < b; ++i) {
            const auto& pair = corpus[batch_ids[i]];
            double* cm_row = cm.row(i);
            const double* src = pair.context.data().data();
            for (std::size_t e = 0; e < lp; ++e) {
                const bool keep = rng.bernoulli(keep_p);
                cm_row[e] = keep ? src[e] * inv_keep : 0.0;
            }
            // per-frame circular shift of the masked context
            double* cs_row = cs.row(i);
            const int d = ((delta % static_cast<int>(p_dim)) + static_cast<int>(p_dim)) % static_cast<int>(p_dim);
            for (std::size_t l = 0; l < mc.context_frames; ++l)
                for (std::size_t j = 0; j < p_dim; ++j)
                    cs_row[l * p_dim + j] = cm_row[l * p_dim + (j + d) % p_dim];
            double* y_row = y.row(i);
            double* ys_row = ys.row(i);
            for (std::size_t j = 0; j < p_dim; ++j) {
                y_row[j] = pair.target[j];
                ys_row[j] = pair.target[(j + d) % p_dim];
            }
        }

        auto bg = detail_train::batch_gradients(w, cm, cs, y, ys, mc.output_kind, tc.sparsity_weight);

        double reg_value = bg.sparsity_value;
        reg_value += tc.l2_weight * (detail_train::sum_squares(w.ut) + detail_train::sum_squares(w.vt));
        if (tc.l2_weight > 0.0) {
            for (std::size_t i = 0; i < w.ut.size(); ++i)
                bg.dut.data()[i] += 2.0 * tc.l2_weight * w.ut.data()[i];
            for (std::size_t i = 0; i < w.vt.size(); ++i)
                bg.dvt.data()[i] += 2.0 * tc.l2_weight * w.vt.data()[i];
        }
        reg_value +=
            tc.norm_dev_weight *
            detail_train::norm_dev_penalty(w.ut, tc.norm_dev_weight, tc.norm_dev_weight > 0.0 ? &bg.dut : nullptr);
        reg_value +=
            tc.norm_dev_weight *
            detail_train::norm_dev_penalty(w.vt, tc.norm_dev_weight, tc.norm_dev_weight > 0.0 ? &bg.dvt : nullptr);

        if (!std::isfinite(bg.data_loss) || !std::isfinite(reg_value)) {
            std::string ids;
            for (std::size_t i = 0; i < b; ++i) ids += (i ? "," : "") + std::to_string(batch_ids[i]);
            throw std::runtime_error("train: non-finite loss at step " + std::to_string(step) + " (lr=" +
                                     std::to_string(lr) + ", batch=[" + ids + "])");
        }

        for (std::size_t i = 0; i < w.ut.size(); ++i) w.ut.data()[i] -= lr * bg.dut.data()[i];
        for (std::size_t i = 0; i < w.vt.size(); ++i) w.vt.data()[i] -= lr * bg.dvt.data()[i];
        for (std::size_t i = 0; i < w.w0.size(); ++i) w.w0.data()[i] -= lr * bg.dw0.data()[i];
        for (std::size_t i = 0; i < w.w1.size(); ++i) w.w1.data()[i] -= lr * bg.dw1.data()[i];

        detail_train::clip_row_norms(w.ut, tc.max_col_norm);
        detail_train::clip_row_norms(w.vt, tc.max_col_norm);

        report.data_loss.push_back(bg.data_loss);
        report.reg_loss.push_back(reg_value);
        report.lr.push_back(lr);

        if (tc.checkpoint_every > 0 && !tc.checkpoint_path.empty() &&
            (step + 1) % tc.checkpoint_every == 0) {
            gae::save_checkpoint(tc.checkpoint_path, mc, w.to_spec());
        }
    }

    report.params = w.to_spec();
    report.steps = tc.total_steps;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

} // namespace timr::train

#endif // TIMR_TRAINER_HPP
