#ifndef TIMR_NUMERICS_HPP
#define TIMR_NUMERICS_HPP

// Dense row-major matrices, a seedable RNG, and finite-difference
// utilities. Everything downstream (model, trainer, analysis) sits on
// this header; no BLAS, dimensions checked on every public entry.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace timr {

using Vec = std::vector<double>;

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace detail

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        detail::require(rows > 0 && cols > 0, "Matrix: dimensions must be positive");
    }

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols, 0.0); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }
    std::span<const double> row_span(std::size_t r) const { return {row(r), cols_}; }

    Vec& data() { return data_; }
    const Vec& data() const { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec data_;
};

// Deterministic 64-bit generator (std::mt19937_64 core). All sampling
// goes through the methods below so the stream is identical across
// platforms and standard library versions; identical seed, identical
// sample sequence.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer in [lo, hi] inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        detail::require(lo <= hi, "Rng::uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(engine_()); // full 64-bit range
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

// ---- vector / matrix products ----------------------------------------------

// y = m * v
inline Vec matvec(const Matrix& m, std::span<const double> v) {
    detail::require(v.size() == m.cols(), "matvec: vector length " + std::to_string(v.size()) +
                                              " does not match matrix cols " + std::to_string(m.cols()));
    Vec y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* r = m.row(i);
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        std::size_t j = 0;
        const std::size_t n4 = m.cols() & ~std::size_t(3);
        for (; j < n4; j += 4) {
            s0 += r[j] * v[j];
            s1 += r[j + 1] * v[j + 1];
            s2 += r[j + 2] * v[j + 2];
            s3 += r[j + 3] * v[j + 3];
        }
        for (; j < m.cols(); ++j) s0 += r[j] * v[j];
        y[i] = (s0 + s1) + (s2 + s3);
    }
    return y;
}

// y = m^T * v
inline Vec matvec_t(const Matrix& m, std::span<const double> v) {
    detail::require(v.size() == m.rows(), "matvec_t: vector length " + std::to_string(v.size()) +
                                              " does not match matrix rows " + std::to_string(m.rows()));
    Vec y(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* r = m.row(i);
        const double vi = v[i];
        for (std::size_t j = 0; j < m.cols(); ++j) y[j] += vi * r[j];
    }
    return y;
}

inline Vec hadamard(std::span<const double> a, std::span<const double> b) {
    detail::require(a.size() == b.size(), "hadamard: length mismatch " + std::to_string(a.size()) +
                                              " vs " + std::to_string(b.size()));
    Vec y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] * b[i];
    return y;
}

// a += scale * u v^T
inline void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v, double scale = 1.0) {
    detail::require(u.size() == a.rows() && v.size() == a.cols(), "add_outer: shape mismatch");
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* r = a.row(i);
        const double ui = scale * u[i];
        for (std::size_t j = 0; j < a.cols(); ++j) r[j] += ui * v[j];
    }
}

// c += a * b
inline void matmul_acc(Matrix& c, const Matrix& a, const Matrix& b) {
    detail::require(a.cols() == b.rows() && c.rows() == a.rows() && c.cols() == b.cols(),
                    "matmul_acc: shape mismatch");
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* crow = c.row(i);
        const double* arow = a.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double av = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += av * brow[j];
        }
    }
}

// c += a * b^T  (rows of a dotted with rows of b)
inline void matmul_nt_acc(Matrix& c, const Matrix& a, const Matrix& b) {
    detail::require(a.cols() == b.cols() && c.rows() == a.rows() && c.cols() == b.rows(),
                    "matmul_nt_acc: shape mismatch");
    const std::size_t n = a.cols();
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.row(j);
            double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
            std::size_t k = 0;
            for (; k < n4; k += 4) {
                s0 += arow[k] * brow[k];
                s1 += arow[k + 1] * brow[k + 1];
                s2 += arow[k + 2] * brow[k + 2];
                s3 += arow[k + 3] * brow[k + 3];
            }
            for (; k < n; ++k) s0 += arow[k] * brow[k];
            crow[j] += (s0 + s1) + (s2 + s3);
        }
    }
}

// c += a^T * b
inline void matmul_tn_acc(Matrix& c, const Matrix& a, const Matrix& b) {
    detail::require(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols(),
                    "matmul_tn_acc: shape mismatch");
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const double* arow = a.row(r);
        const double* brow = b.row(r);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double av = arow[i];
            if (av == 0.0) continue; // context batches are mostly zeros
            double* crow = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += av * brow[j];
        }
    }
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols(), 0.0);
    matmul_acc(c, a, b);
    return c;
}

inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.rows(), 0.0);
    matmul_nt_acc(c, a, b);
    return c;
}

inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    Matrix c(a.cols(), b.cols(), 0.0);
    matmul_tn_acc(c, a, b);
    return c;
}

inline Matrix identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

// ---- small vector helpers ---------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
    detail::require(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
    detail::require(a.size() == b.size(), "distance: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// ---- finite differences -----------------------------------------------------

// Central-difference gradient estimate of a scalar function. This is the
// oracle against which all analytic gradients are checked, so it stays
// deliberately simple: component i is (f(x+eps e_i) - f(x-eps e_i)) / (2 eps).
inline Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double eps) {
    detail::require(eps > 0.0, "finite_diff_grad: eps must be positive");
    Vec g(x.size());
    Vec probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        probe[i] = orig + eps;
        const double fp = f(probe);
        probe[i] = orig - eps;
        const double fm = f(probe);
        probe[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("finite_diff_grad: non-finite function value at component " +
                                     std::to_string(i));
        g[i] = (fp - fm) / (2.0 * eps);
    }
    return g;
}

} // namespace timr

#endif // TIMR_NUMERICS_HPP
