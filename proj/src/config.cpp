#include "rumble/config.hpp"

#include <cmath>
#include <initializer_list>
#include <string>

#include "json.hpp"
#include "rumble/classify.hpp"
#include "rumble/errors.hpp"
#include "rumble/io.hpp"

namespace rumble {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
    if (!j.is_object())
        throw ConfigError("config section '" + where + "' must be an object");
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            known = known || item.key() == k;
        if (!known)
            throw ConfigError("unknown config key '" + item.key() + "' in section '" + where +
                              "'");
    }
}

double to_double(const json& j, const std::string& where) {
    if (!j.is_number())
        throw ConfigError("config value '" + where + "' must be a number");
    return j.get<double>();
}

std::size_t to_size(const json& j, const std::string& where) {
    double v = to_double(j, where);
    if (v < 0.0 || v != std::floor(v))
        throw ConfigError("config value '" + where + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::uint64_t to_u64(const json& j, const std::string& where) {
    if (j.is_number_unsigned())
        return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    throw ConfigError("config value '" + where + "' must be a non-negative integer");
}

void parse_frontend(const json& j, frontend::FrontEndConfig& c) {
    require_object(j, "frontend");
    check_keys(j, "frontend",
               {"geophone_sensitivity", "geophone_natural_freq", "geophone_damping",
                "gain_stage1", "gain_stage2", "band_low", "band_high", "filter_order",
                "adc_bits", "adc_vref", "sample_rate", "dc_offset"});
    if (j.contains("geophone_sensitivity"))
        c.geophone_sensitivity = to_double(j["geophone_sensitivity"], "frontend.geophone_sensitivity");
    if (j.contains("geophone_natural_freq"))
        c.geophone_natural_freq = to_double(j["geophone_natural_freq"], "frontend.geophone_natural_freq");
    if (j.contains("geophone_damping"))
        c.geophone_damping = to_double(j["geophone_damping"], "frontend.geophone_damping");
    if (j.contains("gain_stage1"))
        c.gain_stage1 = to_double(j["gain_stage1"], "frontend.gain_stage1");
    if (j.contains("gain_stage2"))
        c.gain_stage2 = to_double(j["gain_stage2"], "frontend.gain_stage2");
    if (j.contains("band_low"))
        c.band_low = to_double(j["band_low"], "frontend.band_low");
    if (j.contains("band_high"))
        c.band_high = to_double(j["band_high"], "frontend.band_high");
    if (j.contains("filter_order"))
        c.filter_order = static_cast<int>(to_size(j["filter_order"], "frontend.filter_order"));
    if (j.contains("adc_bits"))
        c.adc_bits = static_cast<int>(to_size(j["adc_bits"], "frontend.adc_bits"));
    if (j.contains("adc_vref"))
        c.adc_vref = to_double(j["adc_vref"], "frontend.adc_vref");
    if (j.contains("sample_rate"))
        c.sample_rate = to_double(j["sample_rate"], "frontend.sample_rate");
    if (j.contains("dc_offset"))
        c.dc_offset = to_double(j["dc_offset"], "frontend.dc_offset");
}

void parse_stft(const json& j, StftConfig& c) {
    require_object(j, "stft");
    check_keys(j, "stft", {"frame_ms", "overlap"});
    if (j.contains("frame_ms"))
        c.frame_ms = to_double(j["frame_ms"], "stft.frame_ms");
    if (j.contains("overlap"))
        c.overlap = to_double(j["overlap"], "stft.overlap");
}

void parse_enhancement(const json& j, EnhancementConfig& c) {
    require_object(j, "enhancement");
    check_keys(j, "enhancement", {"sigma", "sigma_r", "blur_sigma", "deltas"});
    if (j.contains("sigma"))
        c.sigma = to_double(j["sigma"], "enhancement.sigma");
    if (j.contains("sigma_r"))
        c.sigma_r = to_double(j["sigma_r"], "enhancement.sigma_r");
    if (j.contains("blur_sigma"))
        c.blur_sigma = to_double(j["blur_sigma"], "enhancement.blur_sigma");
    if (j.contains("deltas")) {
        const json& d = j["deltas"];
        if (!d.is_array() || d.size() != 4)
            throw ConfigError("enhancement.deltas must be an array of four numbers");
        for (std::size_t i = 0; i < 4; ++i)
            c.deltas[i] = to_double(d[i], "enhancement.deltas");
    }
}

void parse_features(const json& j, FeaturesConfig& c) {
    require_object(j, "features");
    check_keys(j, "features", {"M", "C", "n_bands"});
    if (j.contains("M"))
        c.n_mel_filters = to_size(j["M"], "features.M");
    if (j.contains("C"))
        c.n_coeffs = to_size(j["C"], "features.C");
    if (j.contains("n_bands"))
        c.n_bands = to_size(j["n_bands"], "features.n_bands");
}

void parse_training(const json& j, TrainingConfig& c) {
    require_object(j, "training");
    check_keys(j, "training",
               {"algorithm", "alpha", "c", "step", "epochs", "max_depth", "split", "k", "seed"});
    if (j.contains("algorithm")) {
        if (!j["algorithm"].is_string())
            throw ConfigError("training.algorithm must be a string");
        c.algorithm = j["algorithm"].get<std::string>();
    }
    if (j.contains("alpha"))
        c.alpha = to_double(j["alpha"], "training.alpha");
    if (j.contains("c"))
        c.c = to_double(j["c"], "training.c");
    if (j.contains("step"))
        c.step = to_double(j["step"], "training.step");
    if (j.contains("epochs"))
        c.epochs = to_size(j["epochs"], "training.epochs");
    if (j.contains("max_depth"))
        c.max_depth = to_size(j["max_depth"], "training.max_depth");
    if (j.contains("split")) {
        const json& s = j["split"];
        if (s.is_string()) {
            const auto name = s.get<std::string>();
            if (name == "paper")
                c.split = classify::kPaperTrainFraction;
            else if (name == "conventional")
                c.split = classify::kConventionalTrainFraction;
            else
                throw ConfigError("training.split name must be 'paper' or 'conventional'");
        } else {
            c.split = to_double(s, "training.split");
        }
    }
    if (j.contains("k"))
        c.k = to_size(j["k"], "training.k");
    if (j.contains("seed"))
        c.seed = to_u64(j["seed"], "training.seed");
}

} // namespace

void StftConfig::validate() const {
    if (!(frame_ms > 0.0) || !std::isfinite(frame_ms))
        throw ConfigError("stft.frame_ms must be positive");
    if (overlap < 0.0 || overlap >= 1.0)
        throw ConfigError("stft.overlap must lie in [0, 1)");
}

void EnhancementConfig::validate() const {
    if (!(sigma > 0.0) || !(sigma_r > 0.0) || !(blur_sigma > 0.0))
        throw ConfigError("enhancement smoothing widths must be positive");
    for (double d : deltas)
        if (!std::isfinite(d))
            throw ConfigError("enhancement.deltas must be finite");
}

void FeaturesConfig::validate() const {
    if (n_mel_filters < 1)
        throw ConfigError("features.M must be at least 1");
    if (n_coeffs < 1)
        throw ConfigError("features.C must be at least 1");
    if (n_bands < 1)
        throw ConfigError("features.n_bands must be at least 1");
}

void TrainingConfig::validate() const {
    if (algorithm != "ridge" && algorithm != "svm_linear" && algorithm != "logistic" &&
        algorithm != "tree")
        throw ConfigError("training.algorithm must be one of ridge, svm_linear, logistic, tree");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ConfigError("training.alpha must be non-negative");
    if (!(c > 0.0) || !std::isfinite(c))
        throw ConfigError("training.c must be positive");
    if (!(step > 0.0) || !std::isfinite(step))
        throw ConfigError("training.step must be positive");
    if (!(split > 0.0) || !(split < 1.0))
        throw ConfigError("training.split must lie in (0, 1)");
    if (k < 2)
        throw ConfigError("training.k must be at least 2");
}

void PipelineConfig::validate() const {
    frontend.validate();
    stft.validate();
    enhancement.validate();
    features.validate();
    training.validate();
}

PipelineConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    require_object(j, "<root>");
    check_keys(j, "<root>", {"frontend", "stft", "enhancement", "features", "training"});

    PipelineConfig cfg;
    if (j.contains("frontend"))
        parse_frontend(j["frontend"], cfg.frontend);
    if (j.contains("stft"))
        parse_stft(j["stft"], cfg.stft);
    if (j.contains("enhancement"))
        parse_enhancement(j["enhancement"], cfg.enhancement);
    if (j.contains("features"))
        parse_features(j["features"], cfg.features);
    if (j.contains("training"))
        parse_training(j["training"], cfg.training);
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    return parse_config(io::read_text_file(path));
}

} // namespace rumble
