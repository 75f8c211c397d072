#include "rumble/dsp.hpp"

#include <algorithm>
#include <cmath>

namespace rumble::dsp {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDbEps = 1e-12;
} // namespace

std::vector<std::vector<double>> frame_signal(const TimeSeries& x, double frame_ms,
                                              double overlap_fraction) {
    x.validate();
    if (overlap_fraction < 0.0 || overlap_fraction >= 1.0)
        throw ConfigError("overlap_fraction must be in [0, 1)");
    const auto frame_len =
        static_cast<std::size_t>(std::llround(frame_ms / 1000.0 * x.sample_rate));
    if (frame_len < 2)
        throw SizeError("frame length below 2 samples");
    if (x.size() < frame_len)
        throw SizeError("signal shorter than one frame");
    const auto hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(frame_len * (1.0 - overlap_fraction)));

    const std::size_t n_full = 1 + (x.size() - frame_len) / hop;
    const bool tail = (n_full - 1) * hop + frame_len < x.size();

    std::vector<std::vector<double>> frames;
    frames.reserve(n_full + (tail ? 1 : 0));
    for (std::size_t i = 0; i < n_full + (tail ? 1 : 0); ++i) {
        std::vector<double> f(frame_len, 0.0);
        const std::size_t start = i * hop;
        const std::size_t avail = std::min(frame_len, x.size() - start);
        std::copy_n(x.samples.begin() + static_cast<std::ptrdiff_t>(start), avail, f.begin());
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<double> hamming_window(std::size_t length) {
    if (length < 2)
        throw SizeError("Hamming window needs at least 2 points");
    std::vector<double> w(length);
    for (std::size_t n = 0; n < length; ++n)
        w[n] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(n) /
                                      static_cast<double>(length - 1));
    return w;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

namespace {

// In-place iterative radix-2 Cooley-Tukey. Length must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

} // namespace

std::vector<std::complex<double>> dft(const std::vector<double>& frame) {
    if (frame.empty())
        throw SizeError("empty frame");
    const std::size_t n_eff = next_pow2(frame.size());
    std::vector<std::complex<double>> a(n_eff, {0.0, 0.0});
    for (std::size_t i = 0; i < frame.size(); ++i)
        a[i] = {frame[i], 0.0};
    fft_radix2(a);
    return a;
}

std::vector<double> dft_magnitude(const std::vector<double>& frame) {
    const auto spec = dft(frame);
    std::vector<double> mag(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k)
        mag[k] = std::abs(spec[k]);
    return mag;
}

Spectrogram stft_spectrogram(const TimeSeries& x, double frame_ms, double overlap_fraction) {
    const auto frames = frame_signal(x, frame_ms, overlap_fraction);
    const std::size_t frame_len = frames.front().size();
    const std::size_t hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(frame_len * (1.0 - overlap_fraction)));
    const auto window = hamming_window(frame_len);
    const std::size_t n_eff = next_pow2(frame_len);
    const std::size_t n_bins = n_eff / 2 + 1;

    Spectrogram s;
    s.values = Matrix(frames.size(), n_bins);
    s.frame_times.resize(frames.size());
    s.bin_freqs.resize(n_bins);
    s.scale = Scale::Power;
    s.frame_len = frame_len;
    s.hop = hop;
    for (std::size_t k = 0; k < n_bins; ++k)
        s.bin_freqs[k] = static_cast<double>(k) * x.sample_rate / static_cast<double>(n_eff);

    std::vector<double> buf(frame_len);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        for (std::size_t n = 0; n < frame_len; ++n)
            buf[n] = frames[i][n] * window[n];
        const auto spec = dft(buf);
        for (std::size_t k = 0; k < n_bins; ++k)
            s.values(i, k) = std::norm(spec[k]);
        s.frame_times[i] =
            (static_cast<double>(i * hop) + 0.5 * static_cast<double>(frame_len)) / x.sample_rate;
    }
    return s;
}

Spectrogram to_decibel(const Spectrogram& s, double floor_db) {
    if (s.scale != Scale::Power)
        throw StateError("to_decibel expects a power-scale spectrogram");
    Spectrogram out = s;
    out.values = s.values.map([floor_db](double v) {
        return std::max(10.0 * std::log10(v + kDbEps), floor_db);
    });
    out.scale = Scale::Decibel;
    return out;
}

} // namespace rumble::dsp
