#include "rumble/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "rumble/enhance.hpp"
#include "rumble/errors.hpp"
#include "rumble/frontend.hpp"
#include "rumble/io.hpp"

namespace rumble::pipeline {

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string stem_of(const std::string& path) {
    return fs::path(path).stem().string();
}

fs::path ensure_out_dir(const std::string& out_dir) {
    fs::path p(out_dir.empty() ? "." : out_dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw IoError("cannot create output directory " + p.string());
    return p;
}

bool has_wav_extension(const std::string& path) {
    auto ext = fs::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".wav";
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string::npos)
            pos = text.size();
        std::string line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty())
            lines.push_back(line);
        start = pos + 1;
    }
    return lines;
}

SimulateResult simulate_series(const TimeSeries& velocity, const PipelineConfig& cfg,
                               const std::string& out_dir, const std::string& stem) {
    cfg.frontend.validate();
    auto chain = frontend::run_chain(velocity, cfg.frontend);
    auto out = ensure_out_dir(out_dir);
    SimulateResult r;
    r.codes_path = (out / (stem + "_codes.wav")).string();
    r.clipped_fraction = chain.clipped_fraction;
    r.n_samples = chain.codes.samples.size();
    io::write_wav_pcm16(r.codes_path, chain.codes);
    return r;
}

} // namespace

TimeSeries read_signal(const std::string& path) {
    if (has_wav_extension(path))
        return io::read_wav_pcm16(path);
    return io::read_timeseries_csv(path);
}

TimeSeries remove_mean(const TimeSeries& x) {
    TimeSeries out = x;
    if (out.samples.empty())
        return out;
    double m = 0.0;
    for (double v : out.samples)
        m += v;
    m /= static_cast<double>(out.samples.size());
    for (double& v : out.samples)
        v -= m;
    return out;
}

dsp::Spectrogram clip_power_spectrum(const TimeSeries& x) {
    const auto spec = dsp::dft(x.samples);
    const std::size_t n_fft = spec.size();
    const std::size_t n_bins = n_fft / 2 + 1;

    dsp::Spectrogram s;
    s.values = Matrix(1, n_bins);
    s.frame_times = {0.5 * x.duration()};
    s.bin_freqs.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        s.bin_freqs[k] = static_cast<double>(k) * x.sample_rate / static_cast<double>(n_fft);
        s.values(0, k) = std::norm(spec[k]);
    }
    s.scale = dsp::Scale::Power;
    s.frame_len = x.samples.size();
    s.hop = x.samples.size();
    return s;
}

features::FeatureVector clip_features(features::FeatureKind kind, const TimeSeries& codes,
                                      const PipelineConfig& cfg, features::Label label,
                                      const std::string& source_id) {
    cfg.stft.validate();
    cfg.features.validate();
    const TimeSeries centered = remove_mean(codes);

    features::FeatureVector fv;
    fv.kind = kind;
    fv.label = label;
    fv.source_id = source_id;

    switch (kind) {
    case features::FeatureKind::Mfcc: {
        const auto frames = dsp::frame_signal(centered, cfg.stft.frame_ms, cfg.stft.overlap);
        const auto fb = features::build_mel_filterbank(
            cfg.features.n_mel_filters, dsp::next_pow2(frames.front().size()),
            centered.sample_rate);
        std::vector<double> acc(cfg.features.n_coeffs, 0.0);
        for (const auto& frame : frames) {
            const auto c = features::mfcc(frame, fb, cfg.features.n_coeffs);
            for (std::size_t j = 0; j < acc.size(); ++j)
                acc[j] += c[j];
        }
        for (double& v : acc)
            v /= static_cast<double>(frames.size());
        fv.values = std::move(acc);
        break;
    }
    case features::FeatureKind::Hjorth: {
        const auto h = features::hjorth(centered.samples);
        fv.values = {h.activity, h.mobility, h.complexity};
        break;
    }
    case features::FeatureKind::Sed: {
        fv.values = features::spectral_energy_distribution(clip_power_spectrum(centered),
                                                           cfg.features.n_bands);
        break;
    }
    }
    fv.validate();
    return fv;
}

std::vector<CorpusEntry> read_manifest(const std::string& dir) {
    const fs::path base(dir);
    const auto text = io::read_text_file((base / "manifest.csv").string());
    const auto lines = split_lines(text);
    if (lines.empty() || lines.front().rfind("source_id,label", 0) != 0)
        throw DataError("manifest must start with a source_id,label header");

    std::vector<CorpusEntry> entries;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_fields(lines[i]);
        if (fields.size() < 2 || fields[0].empty())
            throw DataError("manifest row " + std::to_string(i) + " lacks source_id,label");
        CorpusEntry e;
        e.source_id = fields[0];
        e.label = features::label_from_name(fields[1]);
        e.wav_path = (base / (fields[0] + ".wav")).string();
        entries.push_back(std::move(e));
    }
    return entries;
}

classify::Dataset corpus_dataset(const std::string& dir, features::FeatureKind kind,
                                 const PipelineConfig& cfg) {
    classify::Dataset data;
    for (const auto& e : read_manifest(dir)) {
        const auto codes = io::read_wav_pcm16(e.wav_path);
        data.rows.push_back(clip_features(kind, codes, cfg, e.label, e.source_id));
    }
    data.validate();
    return data;
}

classify::Trainer make_trainer(const TrainingConfig& t) {
    t.validate();
    if (t.algorithm == "ridge") {
        return [alpha = t.alpha](const classify::Dataset& d) {
            return classify::Model{classify::train_ridge(d, alpha)};
        };
    }
    if (t.algorithm == "svm_linear") {
        const std::size_t epochs = t.epochs ? t.epochs : 300;
        return [c = t.c, epochs, step = t.step](const classify::Dataset& d) {
            return classify::Model{classify::train_svm_linear(d, c, epochs, step)};
        };
    }
    if (t.algorithm == "logistic") {
        const std::size_t epochs = t.epochs ? t.epochs : 2000;
        return [step = t.step, epochs](const classify::Dataset& d) {
            return classify::Model{classify::train_logistic(d, step, epochs)};
        };
    }
    return [depth = t.max_depth](const classify::Dataset& d) {
        return classify::Model{classify::train_tree(d, depth)};
    };
}

SimulateResult cmd_simulate(const std::string& input_path, const PipelineConfig& cfg,
                            const std::string& out_dir) {
    return simulate_series(read_signal(input_path), cfg, out_dir, stem_of(input_path));
}

SimulateResult cmd_simulate(const synth::RumbleSpec& spec, const PipelineConfig& cfg,
                            const std::string& out_dir) {
    return simulate_series(synth::gen_rumble(spec), cfg, out_dir, "synthetic");
}

SynthResult cmd_synth(const synth::CorpusConfig& cfg, const std::string& out_dir) {
    const auto out = ensure_out_dir(out_dir);
    const auto items = synth::gen_corpus(cfg);
    synth::write_corpus(out.string(), items);
    SynthResult r;
    r.n_items = items.size();
    r.manifest_path = (out / "manifest.csv").string();
    return r;
}

SpectrogramResult cmd_spectrogram(const std::string& input_path, const PipelineConfig& cfg,
                                  const std::string& out_dir) {
    cfg.stft.validate();
    const auto ts = remove_mean(read_signal(input_path));
    const auto s = dsp::stft_spectrogram(ts, cfg.stft.frame_ms, cfg.stft.overlap);
    const auto out = ensure_out_dir(out_dir);
    const auto stem = stem_of(input_path);

    SpectrogramResult r;
    r.spg_path = (out / (stem + "_spectrogram.spg1")).string();
    r.csv_path = (out / (stem + "_spectrogram.csv")).string();
    r.png_path = (out / (stem + "_spectrogram.png")).string();
    r.n_frames = s.frame_times.size();
    r.n_bins = s.bin_freqs.size();
    io::write_spectrogram_spg1(r.spg_path, s);
    io::write_spectrogram_csv(r.csv_path, s);
    io::write_matrix_png(r.png_path, dsp::to_decibel(s).values);
    return r;
}

EnhanceResult cmd_enhance(const std::string& spg_path, const PipelineConfig& cfg,
                          const std::string& out_dir) {
    cfg.enhancement.validate();
    const auto s = io::read_spectrogram_spg1(spg_path);
    const auto a1 = enhance::enhance_coherence(s, cfg.enhancement.sigma, cfg.enhancement.sigma_r);
    const auto a2 =
        enhance::enhance_threshold(a1, cfg.enhancement.blur_sigma, cfg.enhancement.deltas);
    const auto orig_db = dsp::to_decibel(s);

    const auto out = ensure_out_dir(out_dir);
    const auto stem = stem_of(spg_path);
    EnhanceResult r;
    r.coherence_path = (out / (stem + "_coherence.spg1")).string();
    r.threshold_path = (out / (stem + "_threshold.spg1")).string();
    r.coherence_png = (out / (stem + "_coherence.png")).string();
    r.threshold_png = (out / (stem + "_threshold.png")).string();
    r.ssim_path = (out / (stem + "_ssim.csv")).string();
    r.ssim_coherence = enhance::ssim(a1, orig_db);
    r.ssim_threshold = enhance::ssim(a2, orig_db);

    io::write_spectrogram_spg1(r.coherence_path, a1);
    io::write_spectrogram_spg1(r.threshold_path, a2);
    io::write_matrix_png(r.coherence_png, a1.values);
    io::write_matrix_png(r.threshold_png, a2.values);
    io::write_text_file(r.ssim_path, "stage,ssim\ncoherence," + g17(r.ssim_coherence) +
                                         "\nthreshold," + g17(r.ssim_threshold) + "\n");
    return r;
}

FeaturesResult cmd_features(const std::string& corpus_dir, const std::string& kind,
                            const PipelineConfig& cfg, const std::string& out_dir) {
    std::vector<features::FeatureKind> kinds;
    if (kind == "all") {
        kinds = {features::FeatureKind::Mfcc, features::FeatureKind::Hjorth,
                 features::FeatureKind::Sed};
    } else {
        kinds = {features::kind_from_name(kind)};
    }

    const auto out = ensure_out_dir(out_dir);
    FeaturesResult r;
    for (auto k : kinds) {
        const auto data = corpus_dataset(corpus_dir, k, cfg);
        r.n_clips = data.rows.size();
        const auto path =
            (out / (std::string("features_") + features::kind_name(k) + ".csv")).string();
        io::write_features_csv(path, data.rows);
        r.paths.push_back(path);
    }
    return r;
}

TrainResult cmd_train(const std::string& features_path, const PipelineConfig& cfg,
                      const std::string& out_dir) {
    const TrainingConfig& t = cfg.training;
    classify::Dataset data;
    data.rows = io::read_features_csv(features_path);

    const auto trainer = make_trainer(t);
    const auto split = classify::split_dataset(data, t.split, t.seed);
    const auto model = trainer(split.train);
    const auto cv = classify::kfold_cv(data, t.k, trainer, t.seed);

    const auto out = ensure_out_dir(out_dir);
    TrainResult r;
    r.model_path = (out / ("model_" + t.algorithm + ".json")).string();
    r.split_path = (out / ("split_" + t.algorithm + ".csv")).string();
    r.cv = cv;
    r.n_train = split.train.rows.size();
    r.n_test = split.test.rows.size();
    r.train_accuracy = classify::evaluate(model, split.train).accuracy.value_or(0.0);

    io::write_model_json(r.model_path, model);
    std::string roles = "source_id,role\n";
    for (const auto& row : split.train.rows)
        roles += row.source_id + ",train\n";
    for (const auto& row : split.test.rows)
        roles += row.source_id + ",test\n";
    io::write_text_file(r.split_path, roles);
    return r;
}

EvaluateResult cmd_evaluate(const std::string& features_path, const std::string& model_path,
                            const std::string& split_path, const std::string& out_dir) {
    classify::Dataset data;
    data.rows = io::read_features_csv(features_path);

    if (!split_path.empty()) {
        const auto lines = split_lines(io::read_text_file(split_path));
        if (lines.empty() || lines.front() != "source_id,role")
            throw DataError("split file must start with a source_id,role header");
        std::set<std::string> test_ids;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto fields = split_fields(lines[i]);
            if (fields.size() != 2 || (fields[1] != "train" && fields[1] != "test"))
                throw DataError("split row " + std::to_string(i) + " must be id,train|test");
            if (fields[1] == "test")
                test_ids.insert(fields[0]);
        }
        std::vector<features::FeatureVector> kept;
        for (auto& row : data.rows)
            if (test_ids.count(row.source_id))
                kept.push_back(std::move(row));
        data.rows = std::move(kept);
    }

    const auto model = io::read_model_json(model_path);
    EvaluateResult r;
    r.report = classify::evaluate(model, data);
    r.n_rows = data.rows.size();

    const auto out = ensure_out_dir(out_dir);
    r.report_path = (out / "eval_report.csv").string();
    auto opt = [](const std::optional<double>& v) { return v ? g17(*v) : std::string(); };
    std::string text = "metric,value\n";
    text += "tp," + std::to_string(r.report.tp) + "\n";
    text += "fp," + std::to_string(r.report.fp) + "\n";
    text += "tn," + std::to_string(r.report.tn) + "\n";
    text += "fn," + std::to_string(r.report.fn) + "\n";
    text += "accuracy," + opt(r.report.accuracy) + "\n";
    text += "sensitivity," + opt(r.report.sensitivity) + "\n";
    text += "specificity," + opt(r.report.specificity) + "\n";
    text += "precision," + opt(r.report.precision) + "\n";
    text += "recall," + opt(r.report.recall) + "\n";
    text += "balanced_accuracy," + opt(r.report.balanced_accuracy) + "\n";
    text += "f1," + opt(r.report.f1) + "\n";
    io::write_text_file(r.report_path, text);
    return r;
}

LeaderboardResult cmd_leaderboard(const std::string& corpus_dir, const PipelineConfig& cfg,
                                  const std::string& out_dir) {
    const TrainingConfig& t = cfg.training;
    std::map<features::FeatureKind, classify::Dataset> data;
    for (auto k : {features::FeatureKind::Mfcc, features::FeatureKind::Hjorth,
                   features::FeatureKind::Sed})
        data.emplace(k, corpus_dataset(corpus_dir, k, cfg));

    LeaderboardResult r;
    r.rows = classify::leaderboard(data, classify::default_registry(), t.split, t.k, t.seed);

    const auto out = ensure_out_dir(out_dir);
    r.csv_path = (out / "leaderboard.csv").string();
    r.txt_path = (out / "leaderboard.txt").string();
    io::write_text_file(r.csv_path, classify::leaderboard_csv(r.rows));
    io::write_text_file(r.txt_path, classify::render_leaderboard(r.rows));
    return r;
}

double cmd_ssim(const std::string& path_a, const std::string& path_b) {
    const auto a = io::read_spectrogram_spg1(path_a);
    const auto b = io::read_spectrogram_spg1(path_b);
    return enhance::ssim(a, b);
}

} // namespace rumble::pipeline
