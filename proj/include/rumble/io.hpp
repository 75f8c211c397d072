#pragma once

#include <string>
#include <vector>

#include "rumble/classify.hpp"
#include "rumble/dsp.hpp"
#include "rumble/features.hpp"
#include "rumble/matrix.hpp"
#include "rumble/timeseries.hpp"

namespace rumble::io {

/// Whole-file helpers. Missing or unwritable paths raise IoError.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Two-column CSV "time_s,<unit name>". Values are printed with %.17g so
/// doubles survive a round trip bit for bit.
void write_timeseries_csv(const std::string& path, const TimeSeries& x);

/// Reads the CSV above. The sample rate is inferred from the time column,
/// which must be uniform to within a quarter of a sample period.
TimeSeries read_timeseries_csv(const std::string& path);

/// 16-bit little-endian mono PCM. Samples are stored as code - 32768, so
/// the series must carry integral ADC codes in [0, 65535] and an integral
/// sample rate.
void write_wav_pcm16(const std::string& path, const TimeSeries& codes);
TimeSeries read_wav_pcm16(const std::string& path);

/// Binary spectrogram: magic "SPG1", u32 rows, u32 cols, f64 row-major
/// values, f64 frame times (rows), f64 bin frequencies (cols), all
/// little-endian. Scale, frame length and hop travel in a JSON sidecar at
/// "<path>.meta.json"; a missing sidecar reads back as power scale.
void write_spectrogram_spg1(const std::string& path, const dsp::Spectrogram& s);
dsp::Spectrogram read_spectrogram_spg1(const std::string& path);

/// CSV spectrogram: header "time_s,<bin freq>..."; each row starts with the
/// frame time. Uses the same sidecar convention as the binary format.
void write_spectrogram_csv(const std::string& path, const dsp::Spectrogram& s);
dsp::Spectrogram read_spectrogram_csv(const std::string& path);

/// Feature matrix CSV with header "kind,source_id,label,v0..v{n-1}".
/// All rows must share one kind and dimension; source ids must be free of
/// commas and newlines.
void write_features_csv(const std::string& path,
                        const std::vector<features::FeatureVector>& rows);
std::vector<features::FeatureVector> read_features_csv(const std::string& path);

/// Models as JSON. Linear models: {kind, weights[], bias, hyperparams{},
/// standardization{means[], stds[]}}. Trees use kind "tree" with a node
/// array {feature, threshold, left, right, leaf}.
void write_model_json(const std::string& path, const classify::Model& model);
classify::Model read_model_json(const std::string& path);

/// 8-bit grayscale PNG of a matrix, min-max normalized; matrix row r maps
/// to scanline r. A constant matrix renders black.
void write_matrix_png(const std::string& path, const Matrix& m);

}  // namespace rumble::io
