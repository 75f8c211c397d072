#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rumble/frontend.hpp"
#include "rumble/timeseries.hpp"

namespace rumble::synth {

/// One knot of a piecewise-linear frequency contour. The offset is added to
/// the fundamental; times outside the knot range clamp to the nearest knot.
struct ContourPoint {
    double time_s = 0.0;
    double offset_hz = 0.0;
};

/// Parameters of one synthetic rumble call.
struct RumbleSpec {
    double fundamental = 20.0;   ///< Hz
    std::size_t n_harmonics = 3; ///< including the fundamental
    double duration = 3.0;       ///< seconds
    std::vector<ContourPoint> freq_contour; ///< empty means a flat contour
    double amplitude = 2e-6;     ///< peak ground velocity of the fundamental, m/s
    double snr_db = std::numeric_limits<double>::infinity();
    double noise_floor = 0.0;    ///< noise std in m/s, used when amplitude == 0
    std::uint64_t seed = 0;
    double sample_rate = 475.0;  ///< Hz

    /// Throws ConfigError when the contour is not strictly increasing in
    /// time, the instantaneous fundamental can reach zero, or the highest
    /// harmonic leaves the 150 Hz passband.
    void validate() const;
};

/// Harmonic stack with 1/h amplitude rolloff, 100 ms raised-cosine onset and
/// offset ramps, and additive white Gaussian noise at the requested SNR.
/// With amplitude 0 the output is pure noise with std noise_floor.
TimeSeries gen_rumble(const RumbleSpec& spec);

/// Background noise shape: 1/f^exponent colored floor plus short broadband
/// transients (wind gusts, footfalls).
struct NoiseProfile {
    double exponent = 1.0;             ///< spectral slope of the floor
    double rms = 1e-7;                 ///< m/s, colored-floor level
    std::size_t n_transients = 2;
    double transient_amplitude = 5e-7; ///< m/s, peak std inside a burst
    double transient_duration = 0.08;  ///< seconds (Gaussian window sigma * 4)

    void validate() const;
};

/// Colored noise via a random-phase harmonic sum, plus Gaussian-windowed
/// white-noise bursts at random positions.
TimeSeries gen_background(double duration, double sample_rate, std::uint64_t seed,
                          const NoiseProfile& profile);

/// Corpus-level generation parameters. Per-clip specs are drawn from the
/// ranges below with a deterministic per-item seed derived from `seed`.
struct CorpusConfig {
    std::size_t n_rumbles = 20;
    std::size_t n_background = 20;
    std::uint64_t seed = 42;
    double duration = 3.0;
    double sample_rate = 475.0;
    double snr_db = 10.0;

    double fundamental_min = 16.0; ///< Hz
    double fundamental_max = 24.0; ///< Hz
    std::size_t harmonics_min = 2;
    std::size_t harmonics_max = 5;
    double base_amplitude = 1e-6;  ///< m/s, keeps the ADC out of clipping
    double amplitude_jitter = 2.5; ///< uniform factor in [1/j, j]
    double max_drift_hz = 2.0;     ///< contour endpoint offset range

    /// Background level overlaps the quiet end of the rumble range so the
    /// classes are not separable on gross energy alone.
    NoiseProfile background{1.0, 4e-7, 2, 2e-6, 0.08};
    double background_rms_jitter = 3.0;
    std::size_t max_transients = 4;

    frontend::FrontEndConfig frontend;

    void validate() const;
};

/// One generated clip, kept both as clean ground velocity and as the
/// quantized ADC codes after the full acquisition chain.
struct CorpusItem {
    std::string source_id;
    bool is_rumble = false;
    TimeSeries velocity; ///< ground velocity, m/s
    TimeSeries codes;    ///< acquisition-chain output
    RumbleSpec spec;     ///< populated for rumbles only
};

/// Generates n_rumbles + n_background clips and runs each through the
/// acquisition chain so downstream features see realistic quantized data.
std::vector<CorpusItem> gen_corpus(const CorpusConfig& cfg);

/// Manifest describing every clip: source_id, label, and the generation
/// parameters (empty fields for background clips).
std::string corpus_manifest_csv(const std::vector<CorpusItem>& items);

/// Writes <id>.wav (ADC codes), <id>_velocity.csv (clean ground velocity)
/// and manifest.csv into dir. Creates the directory if needed.
void write_corpus(const std::string& dir, const std::vector<CorpusItem>& items);

} // namespace rumble::synth
