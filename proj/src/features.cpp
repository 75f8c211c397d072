#include "rumble/features.hpp"

#include <algorithm>
#include <cmath>

#include "rumble/errors.hpp"

namespace rumble::features {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLogFloor = 1e-10;

double sample_variance(const std::vector<double>& x) {
    if (x.size() < 2)
        return 0.0;
    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= static_cast<double>(x.size());
    double acc = 0.0;
    for (double v : x)
        acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(x.size() - 1);
}

std::vector<double> diff(const std::vector<double>& x) {
    std::vector<double> d(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        d[i] = x[i + 1] - x[i];
    return d;
}
} // namespace

const char* kind_name(FeatureKind k) {
    switch (k) {
    case FeatureKind::Mfcc:
        return "mfcc";
    case FeatureKind::Hjorth:
        return "hjorth";
    case FeatureKind::Sed:
        return "sed";
    }
    throw StateError("unknown feature kind");
}

FeatureKind kind_from_name(const std::string& name) {
    if (name == "mfcc")
        return FeatureKind::Mfcc;
    if (name == "hjorth")
        return FeatureKind::Hjorth;
    if (name == "sed")
        return FeatureKind::Sed;
    throw DataError("unknown feature kind: " + name);
}

const char* label_name(Label l) {
    return l == Label::Rumble ? "rumble" : "background";
}

Label label_from_name(const std::string& name) {
    if (name == "rumble")
        return Label::Rumble;
    if (name == "background")
        return Label::Background;
    throw DataError("unknown label: " + name);
}

void FeatureVector::validate() const {
    if (values.empty())
        throw DataError("feature vector is empty");
    if (kind == FeatureKind::Hjorth && values.size() != 3)
        throw DataError("hjorth feature vector must have 3 values");
    for (double v : values)
        if (!std::isfinite(v))
            throw DataError("feature vector contains a non-finite value");
}

double mel_from_hz(double f) {
    if (f < 0.0)
        throw RangeError("frequency must be non-negative");
    return 2595.0 * std::log10(1.0 + f / 700.0);
}

double hz_from_mel(double m) {
    if (m < 0.0)
        throw RangeError("mel value must be non-negative");
    return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

MelFilterBank build_mel_filterbank(std::size_t n_filters, std::size_t n_fft,
                                   double sample_rate, double f_min, double f_max) {
    if (n_filters < 1)
        throw ConfigError("need at least one mel filter");
    if (n_fft < 2)
        throw ConfigError("n_fft must be at least 2");
    if (!(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0))
        throw ConfigError("mel range must satisfy 0 <= f_min < f_max <= sample_rate/2");

    MelFilterBank fb;
    fb.n_filters = n_filters;
    fb.n_fft_bins = n_fft;
    fb.freq_min = f_min;
    fb.freq_max = f_max;
    fb.bin_points.resize(n_filters + 2);

    const double mel_lo = mel_from_hz(f_min);
    const double mel_hi = mel_from_hz(f_max);
    for (std::size_t p = 0; p < n_filters + 2; ++p) {
        const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(p) /
                                        static_cast<double>(n_filters + 1);
        fb.bin_points[p] = hz_from_mel(mel) / sample_rate * static_cast<double>(n_fft);
    }

    fb.weights = Matrix(n_filters, n_fft);
    for (std::size_t m = 0; m < n_filters; ++m) {
        const double left = fb.bin_points[m];
        const double center = fb.bin_points[m + 1];
        const double right = fb.bin_points[m + 2];
        bool any = false;
        for (std::size_t k = 0; k < n_fft; ++k) {
            const double kk = static_cast<double>(k);
            double w = 0.0;
            if (kk >= left && kk <= center)
                w = 2.0 * (kk - left) / (center - left);
            else if (kk > center && kk <= right)
                w = 2.0 * (right - kk) / (right - center);
            fb.weights(m, k) = w;
            any = any || w > 0.0;
        }
        if (!any)
            ++fb.empty_filters;
    }
    return fb;
}

std::vector<double> mel_spectrum(const std::vector<double>& frame_mag,
                                 const MelFilterBank& fb) {
    if (frame_mag.size() != fb.n_fft_bins)
        throw SizeError("magnitude spectrum length does not match the filter bank");
    std::vector<double> s(fb.n_filters, 0.0);
    for (std::size_t m = 0; m < fb.n_filters; ++m) {
        double acc = 0.0;
        for (std::size_t k = 0; k < fb.n_fft_bins; ++k)
            acc += frame_mag[k] * frame_mag[k] * fb.weights(m, k);
        s[m] = acc;
    }
    return s;
}

std::vector<double> log_dct(const std::vector<double>& mel_spec, std::size_t n_coeffs) {
    const std::size_t m_count = mel_spec.size();
    if (n_coeffs > m_count)
        throw ConfigError("more cepstral coefficients than mel filters");
    std::vector<double> c(n_coeffs, 0.0);
    for (std::size_t n = 0; n < n_coeffs; ++n) {
        double acc = 0.0;
        for (std::size_t m = 0; m < m_count; ++m)
            acc += std::log10(mel_spec[m] + kLogFloor) *
                   std::cos(kPi * static_cast<double>(n) *
                            (static_cast<double>(m) + 0.5) / static_cast<double>(m_count));
        c[n] = acc;
    }
    return c;
}

std::vector<double> mfcc(const std::vector<double>& frame, const MelFilterBank& fb,
                         std::size_t n_coeffs) {
    const auto window = dsp::hamming_window(frame.size());
    std::vector<double> tapered(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i)
        tapered[i] = frame[i] * window[i];
    const auto mag = dsp::dft_magnitude(tapered);
    return log_dct(mel_spectrum(mag, fb), n_coeffs);
}

double hjorth_activity(const std::vector<double>& x) {
    if (x.size() < 2)
        throw SizeError("activity needs at least two samples");
    return sample_variance(x);
}

HjorthParams hjorth(const std::vector<double>& x) {
    if (x.size() < 3)
        throw SizeError("hjorth parameters need at least three samples");
    const double var_x = sample_variance(x);
    if (var_x <= 0.0)
        throw DegenerateSignalError("constant signal: mobility undefined");
    const auto dx = diff(x);
    const double var_dx = sample_variance(dx);
    if (var_dx <= 0.0)
        throw DegenerateSignalError("linear signal: complexity undefined");
    const auto ddx = diff(dx);
    const double var_ddx = sample_variance(ddx);

    HjorthParams p;
    p.activity = var_x;
    p.mobility = std::sqrt(var_dx / var_x);
    p.complexity = std::sqrt(var_ddx / var_dx) / p.mobility;
    return p;
}

std::vector<double> spectral_energy_distribution(const dsp::Spectrogram& s,
                                                 std::size_t n_bands) {
    if (s.scale != dsp::Scale::Power)
        throw StateError("band energies are defined on power-scale spectrograms");
    if (n_bands < 1)
        throw ConfigError("need at least one band");
    const std::size_t n_bins = s.n_bins();
    if (n_bins < n_bands)
        throw SizeError("fewer frequency bins than bands");

    const std::size_t base = n_bins / n_bands;
    const std::size_t rem = n_bins % n_bands;
    std::vector<double> energies(n_bands, 0.0);
    std::size_t bin = 0;
    for (std::size_t band = 0; band < n_bands; ++band) {
        const std::size_t width = base + (band < rem ? 1 : 0);
        for (std::size_t w = 0; w < width; ++w, ++bin) {
            for (std::size_t frame = 0; frame < s.n_frames(); ++frame) {
                const double v = s.values(frame, bin);
                energies[band] += v * v;
            }
        }
    }
    return energies;
}

} // namespace rumble::features
