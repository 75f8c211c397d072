#pragma once

#include <string>
#include <vector>

#include "rumble/dsp.hpp"
#include "rumble/matrix.hpp"

namespace rumble::features {

/// Triangular mel filter bank over the full DFT grid.
struct MelFilterBank {
    std::size_t n_filters = 0;
    std::size_t n_fft_bins = 0; ///< full (two-sided) DFT length
    double freq_min = 0.0, freq_max = 0.0;
    Matrix weights;                ///< [n_filters x n_fft_bins]
    std::vector<double> bin_points; ///< fractional bin of each boundary, M+2 entries
    std::size_t empty_filters = 0; ///< filters with no nonzero weight
};

enum class FeatureKind { Mfcc, Hjorth, Sed };
enum class Label { Rumble, Background };

const char* kind_name(FeatureKind k);
FeatureKind kind_from_name(const std::string& name);
const char* label_name(Label l);
Label label_from_name(const std::string& name);

/// One labeled feature row.
struct FeatureVector {
    FeatureKind kind = FeatureKind::Mfcc;
    std::vector<double> values;
    Label label = Label::Background;
    std::string source_id;

    void validate() const;
};

/// m = 2595 log10(1 + f/700).
double mel_from_hz(double f);

/// Inverse of mel_from_hz.
double hz_from_mel(double m);

/// M triangular filters with peak weight 2, feet equally spaced on the mel
/// axis between f_min and f_max and expressed as fractional DFT bins.
MelFilterBank build_mel_filterbank(std::size_t n_filters, std::size_t n_fft,
                                   double sample_rate, double f_min = 5.0,
                                   double f_max = 150.0);

/// s(m) = sum_k |X(k)|^2 H_m(k) over the full DFT grid.
std::vector<double> mel_spectrum(const std::vector<double>& frame_mag,
                                 const MelFilterBank& fb);

/// DCT of the log mel spectrum:
/// c(n) = sum_m log10(s(m) + 1e-10) cos(pi n (m + 0.5) / M).
std::vector<double> log_dct(const std::vector<double>& mel_spec, std::size_t n_coeffs);

/// Full cepstrum pipeline for one frame: Hamming window, magnitude
/// spectrum, mel filtering, log-DCT truncated to n_coeffs.
std::vector<double> mfcc(const std::vector<double>& frame, const MelFilterBank& fb,
                         std::size_t n_coeffs = 12);

struct HjorthParams {
    double activity = 0.0;
    double mobility = 0.0;
    double complexity = 0.0;
};

/// Sample variance of the signal (activity alone is defined even where
/// mobility is not).
double hjorth_activity(const std::vector<double>& x);

/// Activity, mobility sqrt(Var(dx)/Var(x)), complexity H_m(dx)/H_m(x).
/// Zero variance in x or dx makes the ratios undefined and raises a
/// degenerate-signal error.
HjorthParams hjorth(const std::vector<double>& x);

/// Band energies: frequency bins split into n_bands contiguous groups (the
/// low bands absorb the remainder), E_k = sum of squared values per group.
std::vector<double> spectral_energy_distribution(const dsp::Spectrogram& s,
                                                 std::size_t n_bands = 25);

} // namespace rumble::features
