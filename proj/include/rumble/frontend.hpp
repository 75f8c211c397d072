#pragma once

#include <cstdint>
#include <vector>

#include "rumble/timeseries.hpp"

namespace rumble::frontend {

/// Acquisition chain parameters. Defaults follow the reference hardware:
/// 80 V/(m/s) geophone with 5 Hz natural frequency, two amplifier stages
/// with a combined gain of 3000, a 5-150 Hz third-order Butterworth
/// bandpass, and a 16-bit ADC at 3.3 V reference sampled at 475 Hz.
struct FrontEndConfig {
    double geophone_sensitivity = 80.0; ///< V per m/s
    double geophone_natural_freq = 5.0; ///< Hz
    double geophone_damping = 0.7;      ///< damping ratio of the proof mass
    double gain_stage1 = 500.0;
    double gain_stage2 = 6.0;
    double band_low = 5.0;   ///< Hz
    double band_high = 150.0; ///< Hz
    int filter_order = 3;    ///< per band edge
    int adc_bits = 16;
    double adc_vref = 3.3;     ///< volts
    double sample_rate = 475.0; ///< Hz
    double dc_offset = 1.65;   ///< volts, centers the ADC input range

    double total_gain() const { return gain_stage1 * gain_stage2; }
    void validate() const;
};

/// Second-order IIR section, denominator normalized (a0 = 1).
struct Biquad {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

/// Cascade of biquad sections applied with zero initial state.
class BiquadCascade {
  public:
    explicit BiquadCascade(std::vector<Biquad> sections);

    std::vector<double> filter(const std::vector<double>& x) const;
    double magnitude(double freq, double sample_rate) const;
    double gain_db(double freq, double sample_rate) const;
    const std::vector<Biquad>& sections() const { return sections_; }

  private:
    std::vector<Biquad> sections_;
};

/// Digital Butterworth bandpass (bilinear transform with prewarped edges).
/// filter_order sections; -3 dB at band_low and band_high.
BiquadCascade design_butterworth_bandpass(const FrontEndConfig& cfg);

/// Second-order high-pass modeling the geophone proof-mass response.
BiquadCascade design_geophone_highpass(const FrontEndConfig& cfg);

/// Ground velocity -> volts: sensitivity gain plus the proof-mass high-pass.
TimeSeries geophone_transduce(const TimeSeries& ground_velocity, const FrontEndConfig& cfg);

/// First amplifier stage: plain gain, volts -> volts.
TimeSeries amplify_stage1(const TimeSeries& x, const FrontEndConfig& cfg);

/// Bandpass stage of the chain; volts -> volts.
TimeSeries butterworth_bandpass(const TimeSeries& x, const FrontEndConfig& cfg);

/// Second amplifier stage with DC offset, clipped to [0, adc_vref].
TimeSeries amplify_clip_clamp(const TimeSeries& x, const FrontEndConfig& cfg);

/// Uniform quantizer: code = round(v / vref * (2^bits - 1)), round half up.
/// Input outside [0, adc_vref] raises a range error.
TimeSeries adc_quantize(const TimeSeries& x, const FrontEndConfig& cfg);

/// One code step in volts: adc_vref / (2^bits - 1).
double adc_sensitivity(const FrontEndConfig& cfg);

/// Smallest resolvable ground velocity:
/// adc_sensitivity / (total_gain * geophone_sensitivity).
double system_sensitivity(const FrontEndConfig& cfg, double total_gain);

/// Output of the full acquisition chain.
struct ChainResult {
    TimeSeries codes;
    double clipped_fraction = 0.0; ///< samples limited by the clamp stage
};

/// transduce -> stage-1 gain -> bandpass -> stage-2 gain/offset/clip -> ADC.
ChainResult run_chain(const TimeSeries& ground_velocity, const FrontEndConfig& cfg);

} // namespace rumble::frontend
