#ifndef TIMR_AUDIO_HPP
#define TIMR_AUDIO_HPP

// Audio ingestion: RIFF/WAVE reading (PCM16 / float32, mono or stereo),
// linear resampling, a naive constant-Q magnitude spectrogram (per-bin
// Hann-windowed inner products, no FFT kernel), and per-frame contrast
// normalization.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <vector>

#include "timr/numerics.hpp"

namespace timr::audio {

struct AudioBuffer {
    std::vector<double> samples; // mono, in [-1, 1]
    double sample_rate = 22050.0;
};

struct CqtConfig {
    std::size_t bins = 120;
    std::size_t bins_per_octave = 24;
    double f_min = 65.4;
    std::size_t hop = 1984;

    double bin_frequency(std::size_t k) const {
        return f_min * std::pow(2.0, static_cast<double>(k) / static_cast<double>(bins_per_octave));
    }

    double q_factor() const { return 1.0 / (std::pow(2.0, 1.0 / static_cast<double>(bins_per_octave)) - 1.0); }

    void validate(double sample_rate) const {
        detail::require(bins > 0 && bins_per_octave > 0 && hop > 0 && f_min > 0.0, "CqtConfig: bad fields");
        detail::require(bin_frequency(bins - 1) < sample_rate / 2.0,
                        "CqtConfig: top bin frequency reaches Nyquist");
    }
};

struct Spectrogram {
    Matrix frames; // T x bins
    CqtConfig config;
};

// ---- WAV ----------------------------------------------------------------------

namespace detail_wav {

inline std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

inline std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

} // namespace detail_wav

// PCM16 and IEEE float32, 1 or 2 channels; stereo is averaged to mono.
inline AudioBuffer read_wav(std::span<const std::uint8_t> bytes) {
    using namespace detail_wav;
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw std::runtime_error("wav: not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::size_t data_at = 0, data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t len = le32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (len < 16 || body + 16 > bytes.size()) throw std::runtime_error("wav: truncated fmt chunk");
            format = le16(bytes, body);
            channels = le16(bytes, body + 2);
            rate = le32(bytes, body + 4);
            bits = le16(bytes, body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data_at = body;
            data_len = len;
            if (data_at + data_len > bytes.size()) throw std::runtime_error("wav: truncated data chunk");
        }
        pos = body + len + (len & 1); // chunks are word-aligned
    }

    if (!have_fmt) throw std::runtime_error("wav: missing fmt chunk");
    if (data_at == 0) throw std::runtime_error("wav: missing data chunk");
    if (channels < 1 || channels > 2)
        throw std::runtime_error("wav: unsupported channel count " + std::to_string(channels));
    if (rate == 0) throw std::runtime_error("wav: zero sample rate");

    const bool pcm16 = format == 1 && bits == 16;
    const bool f32 = format == 3 && bits == 32;
    if (!pcm16 && !f32)
        throw std::runtime_error("wav: unsupported codec (format " + std::to_string(format) + ", " +
                                 std::to_string(bits) + " bits); need PCM16 or float32");

    const std::size_t bytes_per_sample = pcm16 ? 2 : 4;
    const std::size_t frame_bytes = bytes_per_sample * channels;
    const std::size_t n_frames = data_len / frame_bytes;
    if (n_frames == 0) throw std::runtime_error("wav: empty data chunk");

    AudioBuffer out;
    out.sample_rate = rate;
    out.samples.resize(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t ch = 0; ch < channels; ++ch) {
            const std::size_t at = data_at + i * frame_bytes + ch * bytes_per_sample;
            if (pcm16) {
                const std::int16_t raw = static_cast<std::int16_t>(le16(bytes, at));
                acc += static_cast<double>(raw) / 32768.0;
            } else {
                const std::uint32_t bits32 = le32(bytes, at);
                float v;
                std::memcpy(&v, &bits32, 4);
                acc += v;
            }
        }
        double s = acc / channels;
        out.samples[i] = std::clamp(s, -1.0, 1.0);
    }
    return out;
}

inline AudioBuffer resample_linear(const AudioBuffer& a, double target_rate) {
    detail::require(target_rate > 0.0, "resample: target rate must be positive");
    detail::require(!a.samples.empty() && a.sample_rate > 0.0, "resample: empty buffer");
    if (target_rate == a.sample_rate) return a;
    const double ratio = target_rate / a.sample_rate;
    const std::size_t n_out = static_cast<std::size_t>(
        std::llround(static_cast<double>(a.samples.size()) * ratio));
    AudioBuffer out;
    out.sample_rate = target_rate;
    out.samples.resize(std::max<std::size_t>(n_out, 1));
    const std::size_t last = a.samples.size() - 1;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const double src = static_cast<double>(i) / ratio;
        const std::size_t j = std::min(static_cast<std::size_t>(src), last);
        const double frac = src - static_cast<double>(j);
        const double x0 = a.samples[j];
        const double x1 = a.samples[std::min(j + 1, last)];
        out.samples[i] = x0 + frac * (x1 - x0);
    }
    return out;
}

// ---- constant-Q spectrogram -----------------------------------------------------

// Frame t is centered on sample t*hop; per bin k the window length is
// N_k = round(Q * sr / f_k), Hann-weighted, and the magnitude of the
// windowed inner product with e^{-2 pi i f_k n / sr} is scaled by
// 2 / sum(window) so a unit-amplitude on-bin sine reads close to 1.
// Signal edges are zero-padded. Frame count = floor(samples / hop).
inline Spectrogram cqt(const AudioBuffer& a, const CqtConfig& cfg = {}) {
    cfg.validate(a.sample_rate);
    const std::size_t n = a.samples.size();
    const std::size_t t_frames = n / cfg.hop;
    if (t_frames == 0) throw std::runtime_error("cqt: audio shorter than one hop");

    const double q = cfg.q_factor();

    // per-bin Hann-weighted cos/sin kernels
    std::vector<std::vector<double>> kcos(cfg.bins), ksin(cfg.bins);
    std::vector<double> inv_wsum(cfg.bins);
    for (std::size_t k = 0; k < cfg.bins; ++k) {
        const double fk = cfg.bin_frequency(k);
        const std::size_t nk = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(q * a.sample_rate / fk)));
        kcos[k].resize(nk);
        ksin[k].resize(nk);
        const double omega = 2.0 * std::numbers::pi * fk / a.sample_rate;
        double wsum = 0.0;
        for (std::size_t i = 0; i < nk; ++i) {
            const double w =
                0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nk - 1)));
            wsum += w;
            kcos[k][i] = w * std::cos(omega * static_cast<double>(i));
            ksin[k][i] = w * std::sin(omega * static_cast<double>(i));
        }
        inv_wsum[k] = 2.0 / wsum;
    }

    Spectrogram out;
    out.config = cfg;
    out.frames = Matrix(t_frames, cfg.bins);
    for (std::size_t t = 0; t < t_frames; ++t) {
        const std::int64_t center = static_cast<std::int64_t>(t * cfg.hop);
        for (std::size_t k = 0; k < cfg.bins; ++k) {
            const std::int64_t nk = static_cast<std::int64_t>(kcos[k].size());
            const std::int64_t start = center - nk / 2;
            const std::int64_t lo = std::max<std::int64_t>(0, -start);
            const std::int64_t hi = std::min<std::int64_t>(nk, static_cast<std::int64_t>(n) - start);
            double re = 0.0, im = 0.0;
            const double* kc = kcos[k].data();
            const double* ks = ksin[k].data();
            const double* x = a.samples.data() + start;
            for (std::int64_t i = lo; i < hi; ++i) {
                re += x[i] * kc[i];
                im += x[i] * ks[i];
            }
            out.frames(t, k) = std::hypot(re, im) * inv_wsum[k];
        }
    }
    return out;
}

// Per-frame standardization: subtract the frame mean, divide by
// sqrt(variance + 1e-8); silent frames come out all zero.
inline Spectrogram contrast_normalize(const Spectrogram& s) {
    constexpr double kEps = 1e-8;
    Spectrogram out = s;
    const std::size_t cols = out.frames.cols();
    for (std::size_t t = 0; t < out.frames.rows(); ++t) {
        double* row = out.frames.row(t);
        double mean = 0.0;
        for (std::size_t k = 0; k < cols; ++k) mean += row[k];
        mean /= static_cast<double>(cols);
        double var = 0.0;
        for (std::size_t k = 0; k < cols; ++k) {
            const double d = row[k] - mean;
            var += d * d;
        }
        var /= static_cast<double>(cols);
        const double inv = 1.0 / std::sqrt(var + kEps);
        for (std::size_t k = 0; k < cols; ++k) row[k] = (row[k] - mean) * inv;
    }
    return out;
}

} // namespace timr::audio

#endif // TIMR_AUDIO_HPP
