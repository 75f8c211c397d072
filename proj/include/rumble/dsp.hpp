#pragma once

#include <complex>
#include <vector>

#include "rumble/matrix.hpp"
#include "rumble/timeseries.hpp"

namespace rumble::dsp {

/// Scale tag of a spectrogram's values.
enum class Scale { Power, Decibel };

/// Time x frequency matrix with axis metadata. Rows are frames (axis 0),
/// columns are frequency bins (axis 1).
struct Spectrogram {
    Matrix values;                  ///< [n_frames x n_bins]
    std::vector<double> frame_times; ///< seconds, frame centers
    std::vector<double> bin_freqs;   ///< Hz, strictly increasing
    Scale scale = Scale::Power;
    std::size_t frame_len = 0;      ///< samples per frame before padding
    std::size_t hop = 0;            ///< samples between frame starts

    std::size_t n_frames() const { return values.rows(); }
    std::size_t n_bins() const { return values.cols(); }
};

/// Split a signal into frames of round(frame_ms/1000 * fs) samples with the
/// given overlap. hop = floor(L * (1 - overlap)). If samples remain past the
/// last full frame a trailing partial frame is emitted, zero padded.
std::vector<std::vector<double>> frame_signal(const TimeSeries& x,
                                              double frame_ms = 25.0,
                                              double overlap_fraction = 0.5);

/// Hamming window w[n] = 0.54 - 0.46 cos(2 pi n / (L-1)).
std::vector<double> hamming_window(std::size_t length);

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

/// Full complex DFT of a real frame, zero padded to the next power of two.
/// Output length is the effective (padded) N.
std::vector<std::complex<double>> dft(const std::vector<double>& frame);

/// Magnitudes |X(k)| for k = 0..N_eff-1, N_eff = next_pow2(frame length).
std::vector<double> dft_magnitude(const std::vector<double>& frame);

/// STFT power spectrogram: frame, Hamming window, zero pad to a power of
/// two, keep the one-sided bins k = 0..N/2 as |X(k)|^2.
Spectrogram stft_spectrogram(const TimeSeries& x, double frame_ms = 25.0,
                             double overlap_fraction = 0.5);

/// 10*log10(power + eps) floored at floor_db. Input must be power scale.
Spectrogram to_decibel(const Spectrogram& s, double floor_db = -100.0);

} // namespace rumble::dsp
