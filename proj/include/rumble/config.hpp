#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "rumble/frontend.hpp"

namespace rumble {

/// Short-time analysis parameters shared by the spectrogram and feature
/// stages.
struct StftConfig {
    double frame_ms = 25.0;
    double overlap = 0.5;

    void validate() const;
};

/// Spectrogram enhancement parameters: tensor smoothing, ridge smoothing,
/// post-threshold blur and the four percentile step offsets.
struct EnhancementConfig {
    double sigma = 1.5;
    double sigma_r = 1.5;
    double blur_sigma = 1.0;
    std::array<double, 4> deltas{5.0, 2.0, -2.0, -5.0};

    void validate() const;
};

/// Feature extraction parameters: mel filter count, cepstral coefficient
/// count and spectral band count.
struct FeaturesConfig {
    std::size_t n_mel_filters = 20;
    std::size_t n_coeffs = 12;
    std::size_t n_bands = 25;

    void validate() const;
};

/// Training parameters. `split` is the train fraction; the strings "paper"
/// (0.2) and "conventional" (0.8) are accepted in config files.
struct TrainingConfig {
    std::string algorithm = "ridge";
    double alpha = 1.0;      ///< ridge penalty
    double c = 1.0;          ///< svm hinge weight
    double step = 1.0;       ///< gradient step (svm initial / logistic fixed)
    std::size_t epochs = 0;  ///< 0 picks the trainer default
    std::size_t max_depth = 4;
    double split = 0.2;
    std::size_t k = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PipelineConfig {
    frontend::FrontEndConfig frontend;
    StftConfig stft;
    EnhancementConfig enhancement;
    FeaturesConfig features;
    TrainingConfig training;

    void validate() const;
};

/// Parses a JSON config document. Every section and key is optional and
/// falls back to the defaults above; unknown keys raise ConfigError.
PipelineConfig parse_config(const std::string& json_text);

/// parse_config over the contents of a file.
PipelineConfig load_config(const std::string& path);

} // namespace rumble
