#include "rumble/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace rumble::frontend {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_rate(const TimeSeries& x, const FrontEndConfig& cfg) {
    if (std::abs(x.sample_rate - cfg.sample_rate) > 1e-9)
        throw ConfigError("series sample rate does not match the configuration");
}

void check_unit(const TimeSeries& x, Unit expected) {
    if (x.unit != expected)
        throw UnitError(std::string("expected ") + unit_name(expected) + ", got " +
                        unit_name(x.unit));
}

// Pair poles so each section gets a conjugate pair (or two reals).
std::vector<std::pair<std::complex<double>, std::complex<double>>>
pair_conjugates(std::vector<std::complex<double>> poles) {
    std::vector<std::pair<std::complex<double>, std::complex<double>>> pairs;
    std::vector<bool> used(poles.size(), false);
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (used[i])
            continue;
        used[i] = true;
        std::size_t best = i;
        double best_dist = 1e300;
        for (std::size_t j = i + 1; j < poles.size(); ++j) {
            if (used[j])
                continue;
            const double d = std::abs(poles[j] - std::conj(poles[i]));
            if (d < best_dist) {
                best_dist = d;
                best = j;
            }
        }
        if (best == i)
            throw NumericError("unpaired pole in filter design");
        used[best] = true;
        pairs.emplace_back(poles[i], poles[best]);
    }
    return pairs;
}

} // namespace

void FrontEndConfig::validate() const {
    if (sample_rate <= 0.0)
        throw ConfigError("sample_rate must be positive");
    if (!(band_low > 0.0 && band_low < band_high && band_high < sample_rate / 2.0))
        throw ConfigError("band edges must satisfy 0 < low < high < sample_rate/2");
    if (filter_order < 1)
        throw ConfigError("filter_order must be at least 1");
    if (adc_bits < 1 || adc_bits > 30)
        throw ConfigError("adc_bits must be in [1, 30]");
    if (adc_vref <= 0.0)
        throw ConfigError("adc_vref must be positive");
    if (gain_stage1 <= 0.0 || gain_stage2 <= 0.0)
        throw ConfigError("amplifier gains must be positive");
    if (geophone_sensitivity <= 0.0 || geophone_natural_freq <= 0.0 || geophone_damping <= 0.0)
        throw ConfigError("geophone parameters must be positive");
    if (!std::isfinite(dc_offset))
        throw ConfigError("dc_offset must be finite");
}

BiquadCascade::BiquadCascade(std::vector<Biquad> sections) : sections_(std::move(sections)) {
    if (sections_.empty())
        throw SizeError("cascade needs at least one section");
}

std::vector<double> BiquadCascade::filter(const std::vector<double>& x) const {
    std::vector<double> y = x;
    for (const auto& s : sections_) {
        double z1 = 0.0, z2 = 0.0;
        for (auto& v : y) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

double BiquadCascade::magnitude(double freq, double sample_rate) const {
    const double w = 2.0 * kPi * freq / sample_rate;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    double mag = 1.0;
    for (const auto& s : sections_) {
        const auto num = s.b0 + s.b1 * z1 + s.b2 * z2;
        const auto den = 1.0 + s.a1 * z1 + s.a2 * z2;
        mag *= std::abs(num) / std::abs(den);
    }
    return mag;
}

double BiquadCascade::gain_db(double freq, double sample_rate) const {
    return 20.0 * std::log10(magnitude(freq, sample_rate) + 1e-300);
}

BiquadCascade design_butterworth_bandpass(const FrontEndConfig& cfg) {
    cfg.validate();
    const int n = cfg.filter_order;
    const double fs = cfg.sample_rate;
    const double wl = 2.0 * fs * std::tan(kPi * cfg.band_low / fs);
    const double wh = 2.0 * fs * std::tan(kPi * cfg.band_high / fs);
    const double w0_sq = wl * wh;
    const double bw = wh - wl;

    // analog low-pass prototype poles on the unit circle
    std::vector<std::complex<double>> analog;
    analog.reserve(2 * static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double theta = kPi * (2.0 * k + n + 1.0) / (2.0 * n);
        const std::complex<double> p(std::cos(theta), std::sin(theta));
        const std::complex<double> pb = p * bw;
        const std::complex<double> disc = std::sqrt(pb * pb - 4.0 * w0_sq);
        analog.push_back(0.5 * (pb + disc));
        analog.push_back(0.5 * (pb - disc));
    }

    const double c = 2.0 * fs;
    std::vector<std::complex<double>> digital;
    digital.reserve(analog.size());
    std::complex<double> den_prod(1.0, 0.0);
    for (const auto& s : analog) {
        digital.push_back((c + s) / (c - s));
        den_prod *= (c - s);
    }
    const double k_total = std::pow(bw * c, n) / den_prod.real();
    const double k_section = std::copysign(std::pow(std::abs(k_total), 1.0 / n), k_total);

    std::vector<Biquad> sections;
    for (const auto& [p1, p2] : pair_conjugates(digital)) {
        Biquad s;
        s.b0 = k_section;
        s.b1 = 0.0;
        s.b2 = -k_section;
        s.a1 = -(p1 + p2).real();
        s.a2 = (p1 * p2).real();
        sections.push_back(s);
    }
    return BiquadCascade(std::move(sections));
}

BiquadCascade design_geophone_highpass(const FrontEndConfig& cfg) {
    cfg.validate();
    const double fs = cfg.sample_rate;
    const double wn = 2.0 * fs * std::tan(kPi * cfg.geophone_natural_freq / fs);
    const double zeta = cfg.geophone_damping;
    const double c = 2.0 * fs;
    // bilinear transform of s^2 / (s^2 + 2 zeta wn s + wn^2)
    const double a0 = c * c + 2.0 * zeta * wn * c + wn * wn;
    Biquad s;
    s.b0 = c * c / a0;
    s.b1 = -2.0 * c * c / a0;
    s.b2 = c * c / a0;
    s.a1 = (2.0 * wn * wn - 2.0 * c * c) / a0;
    s.a2 = (c * c - 2.0 * zeta * wn * c + wn * wn) / a0;
    return BiquadCascade({s});
}

TimeSeries geophone_transduce(const TimeSeries& ground_velocity, const FrontEndConfig& cfg) {
    ground_velocity.validate();
    check_unit(ground_velocity, Unit::GroundVelocity);
    check_rate(ground_velocity, cfg);
    std::vector<double> v(ground_velocity.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = ground_velocity.samples[i] * cfg.geophone_sensitivity;
    const auto hp = design_geophone_highpass(cfg);
    return TimeSeries{hp.filter(v), ground_velocity.sample_rate, Unit::Volts};
}

TimeSeries amplify_stage1(const TimeSeries& x, const FrontEndConfig& cfg) {
    x.validate();
    check_unit(x, Unit::Volts);
    TimeSeries out = x;
    for (auto& v : out.samples)
        v *= cfg.gain_stage1;
    return out;
}

TimeSeries butterworth_bandpass(const TimeSeries& x, const FrontEndConfig& cfg) {
    x.validate();
    check_unit(x, Unit::Volts);
    check_rate(x, cfg);
    const auto bp = design_butterworth_bandpass(cfg);
    return TimeSeries{bp.filter(x.samples), x.sample_rate, Unit::Volts};
}

TimeSeries amplify_clip_clamp(const TimeSeries& x, const FrontEndConfig& cfg) {
    x.validate();
    check_unit(x, Unit::Volts);
    cfg.validate();
    TimeSeries out = x;
    for (auto& v : out.samples)
        v = std::clamp(v * cfg.gain_stage2 + cfg.dc_offset, 0.0, cfg.adc_vref);
    return out;
}

TimeSeries adc_quantize(const TimeSeries& x, const FrontEndConfig& cfg) {
    x.validate();
    check_unit(x, Unit::Volts);
    cfg.validate();
    const double full_scale = static_cast<double>((1u << cfg.adc_bits) - 1u);
    TimeSeries out = x;
    out.unit = Unit::AdcCode;
    for (auto& v : out.samples) {
        if (v < 0.0 || v > cfg.adc_vref)
            throw RangeError("ADC input outside [0, vref]; clip stage missing");
        v = std::floor(v / cfg.adc_vref * full_scale + 0.5);
    }
    return out;
}

double adc_sensitivity(const FrontEndConfig& cfg) {
    cfg.validate();
    return cfg.adc_vref / static_cast<double>((1u << cfg.adc_bits) - 1u);
}

double system_sensitivity(const FrontEndConfig& cfg, double total_gain) {
    if (total_gain <= 0.0)
        throw ConfigError("total gain must be positive");
    return adc_sensitivity(cfg) / (total_gain * cfg.geophone_sensitivity);
}

ChainResult run_chain(const TimeSeries& ground_velocity, const FrontEndConfig& cfg) {
    cfg.validate();
    const auto v1 = geophone_transduce(ground_velocity, cfg);
    const auto v2 = amplify_stage1(v1, cfg);
    const auto v3 = butterworth_bandpass(v2, cfg);

    std::size_t clipped = 0;
    for (double v : v3.samples) {
        const double mapped = v * cfg.gain_stage2 + cfg.dc_offset;
        if (mapped < 0.0 || mapped > cfg.adc_vref)
            ++clipped;
    }
    const auto v4 = amplify_clip_clamp(v3, cfg);
    ChainResult r;
    r.codes = adc_quantize(v4, cfg);
    r.clipped_fraction =
        v3.samples.empty() ? 0.0
                           : static_cast<double>(clipped) / static_cast<double>(v3.samples.size());
    return r;
}

} // namespace rumble::frontend
