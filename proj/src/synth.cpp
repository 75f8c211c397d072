#include "rumble/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "rumble/errors.hpp"
#include "rumble/io.hpp"
#include "rumble/rng.hpp"

namespace rumble::synth {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kBandTop = 150.0;   ///< Hz, acquisition passband upper edge
constexpr double kRampSeconds = 0.1; ///< onset/offset ramp length

double contour_offset(const std::vector<ContourPoint>& c, double t) {
    if (c.empty())
        return 0.0;
    if (t <= c.front().time_s)
        return c.front().offset_hz;
    if (t >= c.back().time_s)
        return c.back().offset_hz;
    for (std::size_t i = 1; i < c.size(); ++i) {
        if (t <= c[i].time_s) {
            const ContourPoint& a = c[i - 1];
            const ContourPoint& b = c[i];
            double u = (t - a.time_s) / (b.time_s - a.time_s);
            return a.offset_hz + u * (b.offset_hz - a.offset_hz);
        }
    }
    return c.back().offset_hz;
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw ConfigError(std::string(what) + " must be finite");
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Random-phase harmonic sum with a_k ~ k^(-exponent/2), band-limited to
/// f_max. Modes stay below n/2 so they are orthogonal on the sample grid,
/// which makes the rms exact and the mean zero.
std::vector<double> harmonic_noise(std::size_t n, double fs, double exponent, double f_max,
                                   double rms, Rng& rng) {
    std::vector<double> x(n, 0.0);
    std::size_t k_max = (n >= 2) ? (n - 1) / 2 : 0;
    k_max = std::min(k_max, static_cast<std::size_t>(
                                std::floor(f_max * static_cast<double>(n) / fs + 1e-9)));
    if (k_max == 0 || rms <= 0.0)
        return x;

    std::vector<double> amp(k_max);
    std::vector<double> pha(k_max);
    double power = 0.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
        double a = std::pow(static_cast<double>(k), -exponent / 2.0);
        amp[k - 1] = a;
        pha[k - 1] = rng.uniform(0.0, kTwoPi);
        power += 0.5 * a * a;
    }
    double scale = rms / std::sqrt(power);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 1; k <= k_max; ++k)
            s += amp[k - 1] * std::cos(kTwoPi * static_cast<double>(k) * static_cast<double>(i) /
                                           static_cast<double>(n) +
                                       pha[k - 1]);
        x[i] = scale * s;
    }
    return x;
}

} // namespace

void RumbleSpec::validate() const {
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
        throw ConfigError("sample rate must be positive");
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw ConfigError("duration must be positive");
    if (n_harmonics < 1)
        throw ConfigError("need at least one harmonic");
    require_finite(fundamental, "fundamental");
    require_finite(amplitude, "amplitude");
    require_finite(noise_floor, "noise floor");
    if (amplitude < 0.0)
        throw ConfigError("amplitude must be non-negative");
    if (noise_floor < 0.0)
        throw ConfigError("noise floor must be non-negative");
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw ConfigError("snr_db must be a number or +inf");

    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < freq_contour.size(); ++i) {
        const ContourPoint& p = freq_contour[i];
        require_finite(p.time_s, "contour time");
        require_finite(p.offset_hz, "contour offset");
        if (i > 0 && !(p.time_s > freq_contour[i - 1].time_s))
            throw ConfigError("contour times must be strictly increasing");
        lo = std::min(lo, p.offset_hz);
        hi = std::max(hi, p.offset_hz);
    }
    if (!(fundamental + lo > 0.0))
        throw ConfigError("instantaneous fundamental must stay positive");
    double top = (fundamental + hi) * static_cast<double>(n_harmonics);
    if (top > kBandTop + 1e-9)
        throw ConfigError("highest harmonic exceeds the 150 Hz passband");
}

TimeSeries gen_rumble(const RumbleSpec& spec) {
    spec.validate();
    const double fs = spec.sample_rate;
    const std::size_t n =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.duration * fs)));

    std::vector<double> x(n, 0.0);
    double noise_std = spec.noise_floor;
    if (spec.amplitude > 0.0) {
        const std::size_t ramp = std::min<std::size_t>(
            static_cast<std::size_t>(std::llround(kRampSeconds * fs)), n / 2);
        std::vector<double> phase(spec.n_harmonics, 0.0);
        double energy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double t = static_cast<double>(i) / fs;
            double f0 = spec.fundamental + contour_offset(spec.freq_contour, t);
            double s = 0.0;
            for (std::size_t h = 1; h <= spec.n_harmonics; ++h) {
                double& ph = phase[h - 1];
                ph += kTwoPi * static_cast<double>(h) * f0 / fs;
                s += spec.amplitude / static_cast<double>(h) * std::sin(ph);
            }
            double env = 1.0;
            if (ramp > 0) {
                if (i < ramp)
                    env = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(i) / ramp);
                std::size_t j = n - 1 - i;
                if (j < ramp)
                    env = std::min(env, 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(j) / ramp));
            }
            x[i] = env * s;
            energy += x[i] * x[i];
        }
        if (std::isinf(spec.snr_db)) {
            noise_std = 0.0;
        } else {
            double signal_power = energy / static_cast<double>(n);
            noise_std = std::sqrt(signal_power * std::pow(10.0, -spec.snr_db / 10.0));
        }
    }

    if (noise_std > 0.0) {
        Rng rng(spec.seed);
        auto noise = harmonic_noise(n, fs, 0.0, kBandTop, noise_std, rng);
        for (std::size_t i = 0; i < n; ++i)
            x[i] += noise[i];
    }
    return TimeSeries{std::move(x), fs, Unit::GroundVelocity};
}

void NoiseProfile::validate() const {
    require_finite(exponent, "noise exponent");
    require_finite(rms, "noise rms");
    require_finite(transient_amplitude, "transient amplitude");
    require_finite(transient_duration, "transient duration");
    if (rms < 0.0 || transient_amplitude < 0.0)
        throw ConfigError("noise levels must be non-negative");
    if (transient_duration <= 0.0)
        throw ConfigError("transient duration must be positive");
}

TimeSeries gen_background(double duration, double sample_rate, std::uint64_t seed,
                          const NoiseProfile& profile) {
    profile.validate();
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw ConfigError("duration must be positive");
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
        throw ConfigError("sample rate must be positive");

    const std::size_t n =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration * sample_rate)));
    Rng rng(seed);
    std::vector<double> x = harmonic_noise(n, sample_rate, profile.exponent, kBandTop,
                                           profile.rms, rng);

    for (std::size_t b = 0; b < profile.n_transients; ++b) {
        double center = rng.uniform(0.1, 0.9) * duration;
        double sigma = profile.transient_duration / 4.0;
        auto burst = harmonic_noise(n, sample_rate, 0.0, kBandTop,
                                    profile.transient_amplitude, rng);
        for (std::size_t i = 0; i < n; ++i) {
            double t = static_cast<double>(i) / sample_rate;
            double g = std::exp(-0.5 * ((t - center) / sigma) * ((t - center) / sigma));
            if (g > 1e-8)
                x[i] += g * burst[i];
        }
    }
    return TimeSeries{std::move(x), sample_rate, Unit::GroundVelocity};
}

void CorpusConfig::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw ConfigError("duration must be positive");
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
        throw ConfigError("sample rate must be positive");
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw ConfigError("snr_db must be a number or +inf");
    if (!(fundamental_min > 0.0) || fundamental_max < fundamental_min)
        throw ConfigError("bad fundamental range");
    if (harmonics_min < 1 || harmonics_max < harmonics_min)
        throw ConfigError("bad harmonic range");
    if (!(base_amplitude > 0.0) || !std::isfinite(base_amplitude))
        throw ConfigError("base amplitude must be positive");
    if (amplitude_jitter < 1.0 || background_rms_jitter < 1.0)
        throw ConfigError("jitter factors must be >= 1");
    if (max_drift_hz < 0.0 || !std::isfinite(max_drift_hz))
        throw ConfigError("drift range must be non-negative");
    if (!(fundamental_min - max_drift_hz > 0.0))
        throw ConfigError("drift can push the fundamental to zero");
    double top = (fundamental_max + max_drift_hz) * static_cast<double>(harmonics_max);
    if (top > kBandTop + 1e-9)
        throw ConfigError("highest harmonic exceeds the 150 Hz passband");
    background.validate();
    frontend.validate();
}

std::vector<CorpusItem> gen_corpus(const CorpusConfig& cfg) {
    cfg.validate();
    Rng master(cfg.seed);
    std::vector<CorpusItem> items;
    items.reserve(cfg.n_rumbles + cfg.n_background);

    for (std::size_t r = 0; r < cfg.n_rumbles; ++r) {
        RumbleSpec spec;
        spec.fundamental = master.uniform(cfg.fundamental_min, cfg.fundamental_max);
        spec.n_harmonics =
            cfg.harmonics_min + master.below(cfg.harmonics_max - cfg.harmonics_min + 1);
        spec.duration = cfg.duration;
        spec.sample_rate = cfg.sample_rate;
        spec.snr_db = cfg.snr_db;
        double lj = std::log(cfg.amplitude_jitter);
        spec.amplitude = cfg.base_amplitude * std::exp(master.uniform(-lj, lj));
        if (cfg.max_drift_hz > 0.0) {
            double a = master.uniform(-cfg.max_drift_hz, cfg.max_drift_hz);
            double b = master.uniform(-cfg.max_drift_hz, cfg.max_drift_hz);
            spec.freq_contour = {{0.0, a}, {cfg.duration, b}};
        }
        spec.seed = master.engine()();

        CorpusItem item;
        char id[32];
        std::snprintf(id, sizeof id, "rumble_%03zu", r);
        item.source_id = id;
        item.is_rumble = true;
        item.spec = spec;
        item.velocity = gen_rumble(spec);
        item.codes = frontend::run_chain(item.velocity, cfg.frontend).codes;
        items.push_back(std::move(item));
    }

    for (std::size_t b = 0; b < cfg.n_background; ++b) {
        NoiseProfile prof = cfg.background;
        double lj = std::log(cfg.background_rms_jitter);
        prof.rms *= std::exp(master.uniform(-lj, lj));
        prof.transient_amplitude *= std::exp(master.uniform(-lj, lj));
        prof.n_transients = master.below(cfg.max_transients + 1);
        std::uint64_t seed = master.engine()();

        CorpusItem item;
        char id[32];
        std::snprintf(id, sizeof id, "background_%03zu", b);
        item.source_id = id;
        item.is_rumble = false;
        item.spec.seed = seed;
        item.spec.duration = cfg.duration;
        item.spec.sample_rate = cfg.sample_rate;
        item.velocity = gen_background(cfg.duration, cfg.sample_rate, seed, prof);
        item.codes = frontend::run_chain(item.velocity, cfg.frontend).codes;
        items.push_back(std::move(item));
    }
    return items;
}

std::string corpus_manifest_csv(const std::vector<CorpusItem>& items) {
    std::string out = "source_id,label,seed,duration_s,fundamental_hz,n_harmonics,"
                      "amplitude_m_per_s,snr_db\n";
    for (const CorpusItem& it : items) {
        out += it.source_id;
        out += it.is_rumble ? ",rumble," : ",background,";
        out += std::to_string(it.spec.seed);
        out += ',';
        out += format_double(it.spec.duration);
        out += ',';
        if (it.is_rumble) {
            out += format_double(it.spec.fundamental);
            out += ',';
            out += std::to_string(it.spec.n_harmonics);
            out += ',';
            out += format_double(it.spec.amplitude);
            out += ',';
            out += format_double(it.spec.snr_db);
        } else {
            out += ",,,";
        }
        out += '\n';
    }
    return out;
}

void write_corpus(const std::string& dir, const std::vector<CorpusItem>& items) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create directory " + dir);
    std::filesystem::path base(dir);
    for (const CorpusItem& it : items) {
        io::write_wav_pcm16((base / (it.source_id + ".wav")).string(), it.codes);
        io::write_timeseries_csv((base / (it.source_id + "_velocity.csv")).string(), it.velocity);
    }
    io::write_text_file((base / "manifest.csv").string(), corpus_manifest_csv(items));
}

} // namespace rumble::synth
