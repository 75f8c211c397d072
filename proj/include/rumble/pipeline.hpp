#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rumble/classify.hpp"
#include "rumble/config.hpp"
#include "rumble/dsp.hpp"
#include "rumble/features.hpp"
#include "rumble/synth.hpp"
#include "rumble/timeseries.hpp"

namespace rumble::pipeline {

/// Reads a time series by extension: .wav as ADC codes, anything else as
/// the CSV format.
TimeSeries read_signal(const std::string& path);

/// Copy with the sample mean subtracted (DC blocking before analysis).
TimeSeries remove_mean(const TimeSeries& x);

/// Whole-clip power spectrum as a single-frame spectrogram, suitable for
/// band-energy features.
dsp::Spectrogram clip_power_spectrum(const TimeSeries& x);

/// One feature vector describing a whole clip:
/// mfcc = per-frame coefficients averaged over the clip's frames,
/// hjorth = activity/mobility/complexity of the time series,
/// sed = band energies of the whole-clip spectrum.
features::FeatureVector clip_features(features::FeatureKind kind, const TimeSeries& codes,
                                      const PipelineConfig& cfg, features::Label label,
                                      const std::string& source_id);

/// A row of a corpus manifest.
struct CorpusEntry {
    std::string source_id;
    features::Label label = features::Label::Background;
    std::string wav_path;
};

/// Parses dir/manifest.csv and resolves the per-clip WAV paths.
std::vector<CorpusEntry> read_manifest(const std::string& dir);

/// Feature dataset of a whole corpus directory for one feature kind.
classify::Dataset corpus_dataset(const std::string& dir, features::FeatureKind kind,
                                 const PipelineConfig& cfg);

/// Trainer bound to the configured algorithm and hyperparameters.
classify::Trainer make_trainer(const TrainingConfig& t);

struct SimulateResult {
    std::string codes_path;
    double clipped_fraction = 0.0;
    std::size_t n_samples = 0;
};

/// Full acquisition chain over a ground-velocity file.
SimulateResult cmd_simulate(const std::string& input_path, const PipelineConfig& cfg,
                            const std::string& out_dir);

/// Full acquisition chain over a synthesized rumble.
SimulateResult cmd_simulate(const synth::RumbleSpec& spec, const PipelineConfig& cfg,
                            const std::string& out_dir);

struct SynthResult {
    std::size_t n_items = 0;
    std::string manifest_path;
};

/// Generates a labeled corpus into out_dir.
SynthResult cmd_synth(const synth::CorpusConfig& cfg, const std::string& out_dir);

struct SpectrogramResult {
    std::string spg_path;
    std::string csv_path;
    std::string png_path;
    std::size_t n_frames = 0;
    std::size_t n_bins = 0;
};

/// Power spectrogram of a signal file; writes binary, CSV and a PNG of the
/// decibel map.
SpectrogramResult cmd_spectrogram(const std::string& input_path, const PipelineConfig& cfg,
                                  const std::string& out_dir);

struct EnhanceResult {
    std::string coherence_path;
    std::string threshold_path;
    std::string coherence_png;
    std::string threshold_png;
    std::string ssim_path;
    double ssim_coherence = 0.0;
    double ssim_threshold = 0.0;
};

/// Runs both enhancement stages on a power spectrogram file and reports
/// each stage's SSIM against the decibel view of the input.
EnhanceResult cmd_enhance(const std::string& spg_path, const PipelineConfig& cfg,
                          const std::string& out_dir);

struct FeaturesResult {
    std::vector<std::string> paths;
    std::size_t n_clips = 0;
};

/// Extracts per-clip features from a corpus directory. kind is one of
/// "mfcc", "hjorth", "sed" or "all".
FeaturesResult cmd_features(const std::string& corpus_dir, const std::string& kind,
                            const PipelineConfig& cfg, const std::string& out_dir);

struct TrainResult {
    std::string model_path;
    std::string split_path;
    double train_accuracy = 0.0;
    classify::CvResult cv;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

/// Splits a feature file, trains the configured algorithm on the train
/// side, cross-validates on the whole set, and saves model plus split.
TrainResult cmd_train(const std::string& features_path, const PipelineConfig& cfg,
                      const std::string& out_dir);

struct EvaluateResult {
    classify::EvalReport report;
    std::string report_path;
    std::size_t n_rows = 0;
};

/// Evaluates a saved model on a feature file. With a split file only the
/// rows marked test are scored; otherwise all rows are.
EvaluateResult cmd_evaluate(const std::string& features_path, const std::string& model_path,
                            const std::string& split_path, const std::string& out_dir);

struct LeaderboardResult {
    std::vector<classify::LeaderboardRow> rows;
    std::string csv_path;
    std::string txt_path;
};

/// Feature-kind x algorithm leaderboard over a corpus directory.
LeaderboardResult cmd_leaderboard(const std::string& corpus_dir, const PipelineConfig& cfg,
                                  const std::string& out_dir);

/// SSIM between two stored spectrograms (same scale required).
double cmd_ssim(const std::string& path_a, const std::string& path_b);

} // namespace rumble::pipeline
