#pragma once

#include <array>
#include <utility>

#include "rumble/dsp.hpp"
#include "rumble/matrix.hpp"

namespace rumble::enhance {

/// Gaussian-smoothed gradient products of a spectrogram. Axis 0 is time,
/// axis 1 is frequency.
struct StructureTensorField {
    Matrix j_tt, j_ff, j_tf;
    double sigma = 1.5;
};

/// Per-pixel anisotropy measure in [0, 1].
struct CoherenceMap {
    Matrix c;
    double epsilon_guard = 1e-12;
};

/// Separable Gaussian blur, reflect boundary, kernel truncated at 4 sigma.
Matrix gaussian_smooth(const Matrix& m, double sigma);

/// Central differences along one axis, one-sided at the borders.
/// axis 0 differentiates across rows (time), axis 1 across columns.
Matrix gradient(const Matrix& m, int axis);

/// Curvature-based line emphasis: R = max(0, -lambda_min(Hessian)) of the
/// sigma_r-smoothed values, blended multiplicatively:
/// out = s * (1 + R / max(R)). A flat input comes back unchanged.
dsp::Spectrogram ridge_filter(const dsp::Spectrogram& s, double sigma_r = 1.5);

/// Gradient products j_tt, j_ff, j_tf, each smoothed at the given sigma.
StructureTensorField structure_tensor(const dsp::Spectrogram& s, double sigma = 1.5);
StructureTensorField structure_tensor(const Matrix& values, double sigma = 1.5);

/// Per-pixel eigenvalues of the 2x2 tensor, returned as (larger, smaller).
std::pair<Matrix, Matrix> tensor_eigenvalues(const StructureTensorField& t);

/// c = (l1 - l2)/(l1 + l2), 0 where the denominator falls below eps.
CoherenceMap coherence(const Matrix& l1, const Matrix& l2, double eps = 1e-12);

/// Default percentile-step offsets, top quartile first.
inline constexpr std::array<double, 4> kDefaultDeltas{5.0, 2.0, -2.0, -5.0};

/// Coherence-weighted enhancement: ridge filter the values, convert to
/// decibels, and weight each pixel by (1 + coherence of the input).
dsp::Spectrogram enhance_coherence(const dsp::Spectrogram& s, double sigma = 1.5,
                                   double sigma_r = 1.5);

/// Percentile-step stage: per pixel add deltas[0]/[1]/[2]/[3] depending on
/// which of the 75th/50th/25th percentiles the value strictly exceeds.
dsp::Spectrogram threshold_adjust(const dsp::Spectrogram& s,
                                  const std::array<double, 4>& deltas = kDefaultDeltas);

/// threshold_adjust followed by a Gaussian blur (default sigma 1).
dsp::Spectrogram enhance_threshold(const dsp::Spectrogram& s, double blur_sigma = 1.0,
                                   const std::array<double, 4>& deltas = kDefaultDeltas);

/// Linear-interpolation percentile of the flattened values, p in [0, 100].
double percentile(std::vector<double> values, double p);

/// Global structural similarity of two equally-sized value grids. Values
/// are shifted so the joint minimum is zero; L is the joint range.
double ssim(const Matrix& x, const Matrix& y, double k1 = 0.01, double k2 = 0.03);
double ssim(const dsp::Spectrogram& x, const dsp::Spectrogram& y, double k1 = 0.01,
            double k2 = 0.03);

} // namespace rumble::enhance
