#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rumble/timeseries.hpp"

namespace rumble::wavelet {

/// Analysis/synthesis filter pairs of an orthogonal wavelet.
struct FilterBank {
    std::vector<double> dec_lo, dec_hi, rec_lo, rec_hi;
    std::size_t length() const { return rec_lo.size(); }
};

/// Daubechies-3 filter bank (6 taps, closed-form coefficients).
const FilterBank& db3_filters();

/// Pyramidal DWT output. details[0] is the finest level.
struct WaveletDecomposition {
    std::vector<double> approx;
    std::vector<std::vector<double>> details;
    std::vector<std::size_t> level_lengths; ///< input length at each level
    std::string wavelet = "db3";

    std::size_t levels() const { return details.size(); }
};

/// One analysis step with half-sample symmetric extension. Returns
/// (approx, detail), each of length floor((n + filter_len - 1)/2).
std::pair<std::vector<double>, std::vector<double>>
dwt_single(const std::vector<double>& x, const FilterBank& fb = db3_filters());

/// One synthesis step, cropped to out_len samples.
std::vector<double> idwt_single(const std::vector<double>& approx,
                                const std::vector<double>& detail, std::size_t out_len,
                                const FilterBank& fb = db3_filters());

/// Multi-level db3 analysis. Requires length >= 6 * 2^levels.
WaveletDecomposition db3_decompose(const TimeSeries& x, std::size_t levels = 4);

/// Inverse of db3_decompose; returns the sample vector.
std::vector<double> db3_reconstruct(const WaveletDecomposition& d);

/// sign(x) * max(|x| - threshold, 0) elementwise.
std::vector<double> soft_threshold(const std::vector<double>& x, double threshold);

/// Universal threshold sigma * sqrt(2 ln N) with the noise level estimated
/// as median(|finest detail|) / 0.6745.
double universal_threshold(const std::vector<double>& finest_detail, std::size_t signal_len);

/// Wavelet denoising: decompose, soft-threshold every detail level with the
/// universal threshold, reconstruct.
TimeSeries db3_denoise(const TimeSeries& x, std::size_t levels = 4);

} // namespace rumble::wavelet
