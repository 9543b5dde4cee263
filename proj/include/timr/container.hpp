#ifndef TIMR_CONTAINER_HPP
#define TIMR_CONTAINER_HPP

// The one flat matrix container used for piano rolls, spectrograms,
// mapping trajectories, SSMs and checkpoint weights.
//
//   magic   "TIMR"
//   version u16 LE          (currently 1)
//   dtype   u8              (0 byte-binary, 1 float32, 2 float64)
//   rows    u32 LE
//   cols    u32 LE
//   payload rows*cols values, row-major, little-endian
//
// Also here: plain (P2) PGM export for matrix images.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "timr/numerics.hpp"

namespace timr::io {

enum class Dtype : std::uint8_t { Binary = 0, F32 = 1, F64 = 2 };

inline constexpr std::uint16_t kContainerVersion = 1;

namespace detail {

inline void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void get_bytes(std::istream& in, void* p, std::size_t n, const char* what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw std::runtime_error(std::string("container: truncated while reading ") + what);
}

template <typename T>
void put_le(std::ostream& out, T v) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    put_bytes(out, buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const char* what) {
    unsigned char buf[sizeof(T)];
    get_bytes(in, buf, sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
}

inline void put_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_le(out, bits);
}

inline void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_le(out, bits);
}

inline float get_f32(std::istream& in, const char* what) {
    const std::uint32_t bits = get_le<std::uint32_t>(in, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline double get_f64(std::istream& in, const char* what) {
    const std::uint64_t bits = get_le<std::uint64_t>(in, what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace detail

inline void write_container(std::ostream& out, const Matrix& m, Dtype dtype) {
    detail::put_bytes(out, "TIMR", 4);
    detail::put_le<std::uint16_t>(out, kContainerVersion);
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) {
        switch (dtype) {
        case Dtype::Binary:
            detail::put_le<std::uint8_t>(out, v != 0.0 ? 1 : 0);
            break;
        case Dtype::F32:
            detail::put_f32(out, static_cast<float>(v));
            break;
        case Dtype::F64:
            detail::put_f64(out, v);
            break;
        }
    }
    if (!out) throw std::runtime_error("container: write failed");
}

inline Matrix read_container(std::istream& in, Dtype* dtype_out = nullptr) {
    char magic[4];
    detail::get_bytes(in, magic, 4, "magic");
    if (std::memcmp(magic, "TIMR", 4) != 0) throw std::runtime_error("container: bad magic");
    const auto version = detail::get_le<std::uint16_t>(in, "version");
    if (version != kContainerVersion)
        throw std::runtime_error("container: unsupported version " + std::to_string(version));
    const auto dtype_raw = detail::get_le<std::uint8_t>(in, "dtype");
    if (dtype_raw > 2) throw std::runtime_error("container: unknown dtype " + std::to_string(dtype_raw));
    const Dtype dtype = static_cast<Dtype>(dtype_raw);
    const auto rows = detail::get_le<std::uint32_t>(in, "rows");
    const auto cols = detail::get_le<std::uint32_t>(in, "cols");
    if (rows == 0 || cols == 0) throw std::runtime_error("container: zero dimension");
    Matrix m(rows, cols);
    for (double& v : m.data()) {
        switch (dtype) {
        case Dtype::Binary: {
            const auto b = detail::get_le<std::uint8_t>(in, "payload");
            if (b > 1) throw std::runtime_error("container: binary payload value out of {0,1}");
            v = b;
            break;
        }
        case Dtype::F32:
            v = detail::get_f32(in, "payload");
            break;
        case Dtype::F64:
            v = detail::get_f64(in, "payload");
            break;
        }
    }
    if (dtype_out) *dtype_out = dtype;
    return m;
}

inline void write_container_file(const std::filesystem::path& path, const Matrix& m, Dtype dtype) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("container: cannot open " + path.string() + " for writing");
    write_container(out, m, dtype);
}

inline Matrix read_container_file(const std::filesystem::path& path, Dtype* dtype_out = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("container: cannot open " + path.string());
    return read_container(in, dtype_out);
}

// Plain-text PGM (P2), values min-max scaled to 0..255. Constant matrices
// come out all-zero.
inline void write_pgm(std::ostream& out, const Matrix& m) {
    double lo = m.data()[0], hi = m.data()[0];
    for (double v : m.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;
    out << "P2\n" << m.cols() << " " << m.rows() << "\n255\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            int g = 0;
            if (span > 0.0) g = static_cast<int>(std::lround((m(r, c) - lo) / span * 255.0));
            out << g << (c + 1 == m.cols() ? "" : " ");
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("pgm: write failed");
}

inline void write_pgm_file(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("pgm: cannot open " + path.string() + " for writing");
    write_pgm(out, m);
}

} // namespace timr::io

#endif // TIMR_CONTAINER_HPP
