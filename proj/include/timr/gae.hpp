#ifndef TIMR_GAE_HPP
#define TIMR_GAE_HPP

// Gated autoencoder over (temporal context, next frame) pairs.
//
// Mapping inference:    m = tanh(W1 tanh(W0 (U c . V y)))
// Reconstruction:       x~ = sig_g(V^T (W0^T W1^T m . U c))
// Shifted variant feeds a per-frame circularly shifted context into the
// reconstruction path and scores against the equally shifted target, which
// is what pushes the mapping toward transposition invariance during
// training. The backward pass differentiates the whole composite: U and V
// enter through both the mapping and the reconstruction path.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "timr/container.hpp"
#include "timr/numerics.hpp"

namespace timr::gae {

enum class OutputKind { Binary, Real };

inline std::string to_string(OutputKind k) { return k == OutputKind::Binary ? "binary" : "real"; }

inline OutputKind output_kind_from_string(const std::string& s) {
    if (s == "binary") return OutputKind::Binary;
    if (s == "real") return OutputKind::Real;
    throw std::invalid_argument("output_kind must be 'binary' or 'real', got '" + s + "'");
}

struct ModelConfig {
    std::size_t input_dim = 60;     // P
    std::size_t context_frames = 9; // L
    std::size_t factor_dim = 1024;  // F
    std::size_t map_dim_1 = 128;    // H1
    std::size_t map_dim_2 = 64;     // H2
    OutputKind output_kind = OutputKind::Binary;
    int shift_range = 30; // delta sampled in [-shift_range, shift_range]

    static ModelConfig symbolic_defaults() { return {}; }

    static ModelConfig audio_defaults() {
        ModelConfig c;
        c.input_dim = 120;
        c.factor_dim = 512;
        c.output_kind = OutputKind::Real;
        c.shift_range = 60;
        return c;
    }

    void validate() const {
        detail::require(input_dim > 0 && context_frames > 0 && factor_dim > 0 && map_dim_1 > 0 &&
                            map_dim_2 > 0,
                        "ModelConfig: all dimensions must be positive");
        detail::require(shift_range >= 0 && static_cast<std::size_t>(shift_range) < input_dim,
                        "ModelConfig: shift_range must be in [0, input_dim)");
    }
};

struct GaeParams {
    Matrix u;  // F x (L*P)
    Matrix v;  // F x P
    Matrix w0; // H1 x F
    Matrix w1; // H2 x H1

    std::size_t factor_dim() const { return u.rows(); }
    std::size_t input_dim() const { return v.cols(); }
    std::size_t context_frames() const { return u.cols() / v.cols(); }
    std::size_t map_dim_1() const { return w0.rows(); }
    std::size_t map_dim_2() const { return w1.rows(); }

    void validate() const {
        detail::require(!u.empty() && !v.empty() && !w0.empty() && !w1.empty(), "GaeParams: empty matrix");
        detail::require(u.rows() == v.rows(), "GaeParams: U and V factor dims differ");
        detail::require(u.cols() % v.cols() == 0, "GaeParams: U cols not a multiple of input dim");
        detail::require(w0.cols() == u.rows(), "GaeParams: W0 cols must equal factor dim");
        detail::require(w1.cols() == w0.rows(), "GaeParams: W1 cols must equal W0 rows");
    }
};

struct ContextPair {
    Matrix context; // L x P, oldest frame first
    Vec target;     // P
};

// The learned interval code; values in (-1, 1).
using Mapping = Vec;

struct Gradients {
    Matrix u, v, w0, w1;

    explicit Gradients(const GaeParams& p)
        : u(p.u.rows(), p.u.cols()), v(p.v.rows(), p.v.cols()), w0(p.w0.rows(), p.w0.cols()),
          w1(p.w1.rows(), p.w1.cols()) {}

    bool all_finite() const {
        return u.all_finite() && v.all_finite() && w0.all_finite() && w1.all_finite();
    }
};

// Glorot-style uniform init keeps the factor products in tanh's linear
// regime at step 0. Draw order is fixed (U, V, W0, W1, row-major) so a seed
// pins the full parameter state.
inline GaeParams init_params(const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    auto draw = [&rng](Matrix& m, std::size_t fan_in, std::size_t fan_out) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& x : m.data()) x = rng.uniform(-bound, bound);
    };
    GaeParams p;
    p.u = Matrix(cfg.factor_dim, cfg.context_frames * cfg.input_dim);
    p.v = Matrix(cfg.factor_dim, cfg.input_dim);
    p.w0 = Matrix(cfg.map_dim_1, cfg.factor_dim);
    p.w1 = Matrix(cfg.map_dim_2, cfg.map_dim_1);
    draw(p.u, cfg.context_frames * cfg.input_dim, cfg.factor_dim);
    draw(p.v, cfg.input_dim, cfg.factor_dim);
    draw(p.w0, cfg.factor_dim, cfg.map_dim_1);
    draw(p.w1, cfg.map_dim_1, cfg.map_dim_2);
    return p;
}

// ---- shift ------------------------------------------------------------------

// out[i] = x[(i + delta) mod M]; circular, so it is a bijection for every
// delta and composes additively.
inline Vec shift(std::span<const double> x, int delta) {
    const std::int64_t m = static_cast<std::int64_t>(x.size());
    detail::require(m > 0, "shift: empty vector");
    Vec out(x.size());
    const std::int64_t d = ((delta % m) + m) % m;
    for (std::int64_t i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>((i + d) % m)];
    return out;
}

// Transposition of a context: each frame shifted independently.
inline Matrix shift_frames(const Matrix& frames, int delta) {
    Matrix out(frames.rows(), frames.cols());
    for (std::size_t r = 0; r < frames.rows(); ++r) {
        const Vec s = shift(frames.row_span(r), delta);
        std::copy(s.begin(), s.end(), out.row(r));
    }
    return out;
}

// ---- forward ----------------------------------------------------------------

namespace detail2 {

inline double sigmoid(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

inline double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }

inline void check_pair(const GaeParams& p, const Matrix& context, std::span<const double> target) {
    p.validate();
    detail::require(context.cols() == p.input_dim(),
                    "gae: context frame width " + std::to_string(context.cols()) +
                        " does not match input dim " + std::to_string(p.input_dim()));
    detail::require(context.rows() * context.cols() == p.u.cols(),
                    "gae: context has " + std::to_string(context.rows()) + " frames, model expects " +
                        std::to_string(p.context_frames()));
    detail::require(target.size() == p.input_dim(), "gae: target length mismatch");
}

} // namespace detail2

inline Vec apply_output(std::span<const double> preact, OutputKind kind) {
    Vec r(preact.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = kind == OutputKind::Binary ? detail2::sigmoid(preact[i]) : preact[i];
    return r;
}

inline Mapping infer_mapping(const GaeParams& p, const ContextPair& pair) {
    detail2::check_pair(p, pair.context, pair.target);
    const Vec fu = matvec(p.u, pair.context.data());
    const Vec fv = matvec(p.v, pair.target);
    const Vec hf = hadamard(fu, fv);
    Vec h1 = matvec(p.w0, hf);
    for (double& x : h1) x = std::tanh(x);
    Vec m = matvec(p.w1, h1);
    for (double& x : m) x = std::tanh(x);
    return m;
}

inline Vec reconstruct(const GaeParams& p, const Matrix& context, const Mapping& m, OutputKind kind) {
    p.validate();
    detail::require(context.rows() * context.cols() == p.u.cols(), "reconstruct: context shape mismatch");
    detail::require(m.size() == p.map_dim_2(), "reconstruct: mapping length mismatch");
    const Vec q = matvec_t(p.w1, m);
    const Vec pf = matvec_t(p.w0, q);
    const Vec fu = matvec(p.u, context.data());
    const Vec g = hadamard(pf, fu);
    const Vec a = matvec_t(p.v, g);
    return apply_output(a, kind);
}

// Reconstruction of the transposed target from the transposed context and
// the mapping of the untransposed pair. delta = 0 reduces to reconstruct().
inline Vec reconstruct_shifted(const GaeParams& p, const ContextPair& pair, const Mapping& m, int delta,
                               OutputKind kind) {
    return reconstruct(p, shift_frames(pair.context, delta), m, kind);
}

inline double loss(std::span<const double> target, std::span<const double> recon, OutputKind kind) {
    detail::require(target.size() == recon.size(), "loss: length mismatch");
    double total = 0.0;
    if (kind == OutputKind::Binary) {
        for (std::size_t i = 0; i < target.size(); ++i)
            total -= target[i] * std::log(recon[i]) + (1.0 - target[i]) * std::log(1.0 - recon[i]);
    } else {
        for (std::size_t i = 0; i < target.size(); ++i) {
            const double d = target[i] - recon[i];
            total += d * d;
        }
        total /= static_cast<double>(target.size());
    }
    if (!std::isfinite(total)) throw std::runtime_error("loss: non-finite value");
    return total;
}

// ---- joint gradient ---------------------------------------------------------

struct GradResult {
    double loss = 0.0;
    Gradients grads;
};

// Analytic gradient of the shifted objective
//   L(shift(y, delta), sig_g(V^T (W0^T W1^T m(c, y) . U shift(c, delta))))
// with respect to all four weight matrices. No stop-gradient on m: each
// matrix collects contributions from every path it enters.
//
// extra_grad_m, when non-empty, is added to dL/dm before the mapping-path
// backward; the trainer uses it to push activation penalties through the
// same pass.
inline GradResult grads(const GaeParams& p, const ContextPair& pair, int delta, OutputKind kind,
                        std::span<const double> extra_grad_m = {}) {
    detail2::check_pair(p, pair.context, pair.target);
    const std::size_t out_dim = p.input_dim();

    // forward, keeping everything the backward needs
    const Vec& c = pair.context.data();
    const Matrix cs_frames = shift_frames(pair.context, delta);
    const Vec& cs = cs_frames.data();
    const Vec ts = shift(pair.target, delta);

    const Vec fu = matvec(p.u, c);
    const Vec fv = matvec(p.v, pair.target);
    const Vec hf = hadamard(fu, fv);
    Vec h1 = matvec(p.w0, hf);
    for (double& x : h1) x = std::tanh(x);
    Vec m = matvec(p.w1, h1);
    for (double& x : m) x = std::tanh(x);

    const Vec q = matvec_t(p.w1, m);
    const Vec pf = matvec_t(p.w0, q);
    const Vec fus = matvec(p.u, cs);
    const Vec g = hadamard(pf, fus);
    const Vec a = matvec_t(p.v, g);

    double data_loss = 0.0;
    Vec da(out_dim); // dL/da
    if (kind == OutputKind::Binary) {
        for (std::size_t i = 0; i < out_dim; ++i) {
            data_loss += detail2::softplus(a[i]) - ts[i] * a[i];
            da[i] = detail2::sigmoid(a[i]) - ts[i];
        }
    } else {
        for (std::size_t i = 0; i < out_dim; ++i) {
            const double diff = a[i] - ts[i];
            data_loss += diff * diff;
            da[i] = 2.0 * diff / static_cast<double>(out_dim);
        }
        data_loss /= static_cast<double>(out_dim);
    }
    if (!std::isfinite(data_loss)) throw std::runtime_error("grads: non-finite loss");

    GradResult res{data_loss, Gradients(p)};
    Gradients& gr = res.grads;

    // reconstruction path
    add_outer(gr.v, g, da);                 // dV += g da^T
    const Vec dg = matvec(p.v, da);         // dL/dg
    const Vec dp = hadamard(dg, fus);       // dL/dp
    const Vec dfus = hadamard(dg, pf);      // dL/d(U cs)
    add_outer(gr.u, dfus, cs);              // dU += dfus cs^T
    add_outer(gr.w0, q, dp);                // dW0 += q dp^T
    const Vec dq = matvec(p.w0, dp);        // dL/dq
    add_outer(gr.w1, m, dq);                // dW1 += m dq^T
    Vec dm = matvec(p.w1, dq);              // dL/dm

    if (!extra_grad_m.empty()) {
        detail::require(extra_grad_m.size() == dm.size(), "grads: extra mapping gradient length mismatch");
        for (std::size_t i = 0; i < dm.size(); ++i) dm[i] += extra_grad_m[i];
    }

    // mapping path
    Vec dz1(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) dz1[i] = dm[i] * (1.0 - m[i] * m[i]);
    add_outer(gr.w1, dz1, h1);
    Vec dh1 = matvec_t(p.w1, dz1);
    Vec dz0(h1.size());
    for (std::size_t i = 0; i < h1.size(); ++i) dz0[i] = dh1[i] * (1.0 - h1[i] * h1[i]);
    add_outer(gr.w0, dz0, hf);
    const Vec dhf = matvec_t(p.w0, dz0);
    const Vec dfu = hadamard(dhf, fv);
    const Vec dfv = hadamard(dhf, fu);
    add_outer(gr.u, dfu, c);
    add_outer(gr.v, dfv, pair.target);

    if (!gr.all_finite()) throw std::runtime_error("grads: non-finite gradient");
    return res;
}

// ---- checkpoint I/O ---------------------------------------------------------

// Text header (key=value per line, "end" terminator) followed by the four
// weight matrices as float64 containers in the order U, V, W0, W1.
inline void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg,
                            const GaeParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
    out << "timr-checkpoint 1\n";
    out << "input_dim=" << cfg.input_dim << "\n";
    out << "context_frames=" << cfg.context_frames << "\n";
    out << "factor_dim=" << cfg.factor_dim << "\n";
    out << "map_dim_1=" << cfg.map_dim_1 << "\n";
    out << "map_dim_2=" << cfg.map_dim_2 << "\n";
    out << "output_kind=" << to_string(cfg.output_kind) << "\n";
    out << "shift_range=" << cfg.shift_range << "\n";
    out << "end\n";
    io::write_container(out, params.u, io::Dtype::F64);
    io::write_container(out, params.v, io::Dtype::F64);
    io::write_container(out, params.w0, io::Dtype::F64);
    io::write_container(out, params.w1, io::Dtype::F64);
}

struct Checkpoint {
    ModelConfig config;
    GaeParams params;
};

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "timr-checkpoint 1")
        throw std::runtime_error("checkpoint: bad header in " + path.string());
    ModelConfig cfg;
    while (std::getline(in, line)) {
        if (line == "end") break;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("checkpoint: malformed header line '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "input_dim") cfg.input_dim = std::stoul(value);
        else if (key == "context_frames") cfg.context_frames = std::stoul(value);
        else if (key == "factor_dim") cfg.factor_dim = std::stoul(value);
        else if (key == "map_dim_1") cfg.map_dim_1 = std::stoul(value);
        else if (key == "map_dim_2") cfg.map_dim_2 = std::stoul(value);
        else if (key == "output_kind") cfg.output_kind = output_kind_from_string(value);
        else if (key == "shift_range") cfg.shift_range = std::stoi(value);
        else throw std::runtime_error("checkpoint: unknown header key '" + key + "'");
    }
    cfg.validate();
    Checkpoint ck{cfg, {}};
    ck.params.u = io::read_container(in);
    ck.params.v = io::read_container(in);
    ck.params.w0 = io::read_container(in);
    ck.params.w1 = io::read_container(in);
    ck.params.validate();
    detail::require(ck.params.input_dim() == cfg.input_dim &&
                        ck.params.context_frames() == cfg.context_frames &&
                        ck.params.factor_dim() == cfg.factor_dim &&
                        ck.params.map_dim_1() == cfg.map_dim_1 && ck.params.map_dim_2() == cfg.map_dim_2,
                    "checkpoint: weight shapes disagree with header");
    return ck;
}

} // namespace timr::gae

#endif // TIMR_GAE_HPP
