#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "rumble/classify.hpp"
#include "rumble/config.hpp"
#include "rumble/dsp.hpp"
#include "rumble/errors.hpp"
#include "rumble/frontend.hpp"
#include "rumble/io.hpp"
#include "rumble/pipeline.hpp"
#include "rumble/synth.hpp"

using namespace rumble;
using doctest::Approx;
using features::FeatureKind;
using features::Label;

namespace {

namespace fs = std::filesystem;

std::string tmp_path(const std::string& name) {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "rumble_pipeline_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return (dir / name).string();
}

synth::CorpusConfig small_corpus() {
    synth::CorpusConfig cfg;
    cfg.n_rumbles = 4;
    cfg.n_background = 4;
    cfg.seed = 11;
    cfg.duration = 2.0;
    return cfg;
}

TimeSeries demo_codes() {
    synth::RumbleSpec spec;
    spec.seed = 3;
    spec.snr_db = 10.0;
    spec.duration = 2.0;
    spec.amplitude = 1e-6;
    const TimeSeries velocity = synth::gen_rumble(spec);
    return frontend::run_chain(velocity, frontend::FrontEndConfig{}).codes;
}

} // namespace

TEST_CASE("empty config document yields the defaults") {
    const PipelineConfig cfg = parse_config("{}");
    CHECK(cfg.frontend.sample_rate == 475.0);
    CHECK(cfg.frontend.adc_bits == 16);
    CHECK(cfg.stft.frame_ms == 25.0);
    CHECK(cfg.stft.overlap == 0.5);
    CHECK(cfg.enhancement.sigma == 1.5);
    CHECK(cfg.enhancement.sigma_r == 1.5);
    CHECK(cfg.enhancement.blur_sigma == 1.0);
    CHECK(cfg.enhancement.deltas == std::array<double, 4>{5.0, 2.0, -2.0, -5.0});
    CHECK(cfg.features.n_mel_filters == 20);
    CHECK(cfg.features.n_coeffs == 12);
    CHECK(cfg.features.n_bands == 25);
    CHECK(cfg.training.algorithm == "ridge");
    CHECK(cfg.training.alpha == 1.0);
    CHECK(cfg.training.split == Approx(classify::kPaperTrainFraction));
    CHECK(cfg.training.k == 5);
    CHECK(cfg.training.seed == 0);
}

TEST_CASE("config overrides reach every section") {
    const PipelineConfig cfg = parse_config(R"({
        "frontend": {"gain_stage1": 250.0, "adc_bits": 12},
        "stft": {"frame_ms": 100.0, "overlap": 0.25},
        "enhancement": {"sigma": 2.0, "deltas": [4.0, 1.0, -1.0, -4.0]},
        "features": {"M": 10, "C": 8, "n_bands": 30},
        "training": {"algorithm": "logistic", "step": 0.5, "epochs": 100,
                     "split": "conventional", "k": 3, "seed": 9}
    })");
    CHECK(cfg.frontend.gain_stage1 == 250.0);
    CHECK(cfg.frontend.adc_bits == 12);
    CHECK(cfg.frontend.gain_stage2 == 6.0);
    CHECK(cfg.stft.frame_ms == 100.0);
    CHECK(cfg.stft.overlap == 0.25);
    CHECK(cfg.enhancement.sigma == 2.0);
    CHECK(cfg.enhancement.sigma_r == 1.5);
    CHECK(cfg.enhancement.deltas == std::array<double, 4>{4.0, 1.0, -1.0, -4.0});
    CHECK(cfg.features.n_mel_filters == 10);
    CHECK(cfg.features.n_coeffs == 8);
    CHECK(cfg.features.n_bands == 30);
    CHECK(cfg.training.algorithm == "logistic");
    CHECK(cfg.training.step == 0.5);
    CHECK(cfg.training.epochs == 100);
    CHECK(cfg.training.split == Approx(classify::kConventionalTrainFraction));
    CHECK(cfg.training.k == 3);
    CHECK(cfg.training.seed == 9);
}

TEST_CASE("split accepts numbers and the two named fractions") {
    CHECK(parse_config(R"({"training": {"split": 0.5}})").training.split == 0.5);
    CHECK(parse_config(R"({"training": {"split": "paper"}})").training.split ==
          Approx(classify::kPaperTrainFraction));
    CHECK(parse_config(R"({"training": {"split": "conventional"}})").training.split ==
          Approx(classify::kConventionalTrainFraction));
    CHECK_THROWS_AS(parse_config(R"({"training": {"split": "half"}})"), ConfigError);
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_AS(parse_config(R"({"bogus": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"frontend": {"gain": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"stft": {"frames_ms": 25.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"enhancement": {"radius": 2.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"features": {"n_coeffs": 12}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"training": {"lr": 0.1}})"), ConfigError);
}

TEST_CASE("malformed or out-of-range configs are rejected") {
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"stft": {"overlap": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"stft": {"frame_ms": 0.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"training": {"algorithm": "mlp"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"training": {"k": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"training": {"split": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"enhancement": {"deltas": [1.0, 2.0, 3.0]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"enhancement": {"sigma": -1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"features": {"M": 0}})"), ConfigError);
}

TEST_CASE("load_config raises IoError for a missing file") {
    CHECK_THROWS_AS(load_config(tmp_path("no_such_config.json")), IoError);
}

TEST_CASE("clip features have the configured shapes") {
    const TimeSeries codes = demo_codes();
    const PipelineConfig cfg;

    const auto mfcc = pipeline::clip_features(FeatureKind::Mfcc, codes, cfg, Label::Rumble, "a");
    CHECK(mfcc.kind == FeatureKind::Mfcc);
    CHECK(mfcc.values.size() == cfg.features.n_coeffs);
    CHECK(mfcc.label == Label::Rumble);
    CHECK(mfcc.source_id == "a");

    const auto hjorth =
        pipeline::clip_features(FeatureKind::Hjorth, codes, cfg, Label::Background, "b");
    CHECK(hjorth.values.size() == 3);
    CHECK(hjorth.values[0] > 0.0);

    const auto sed = pipeline::clip_features(FeatureKind::Sed, codes, cfg, Label::Rumble, "c");
    CHECK(sed.values.size() == cfg.features.n_bands);
    double total = 0.0;
    for (double v : sed.values) {
        CHECK(v >= 0.0);
        total += v;
    }
    const auto spectrum = pipeline::clip_power_spectrum(pipeline::remove_mean(codes));
    double expected = 0.0;
    for (std::size_t i = 0; i < spectrum.n_bins(); ++i)
        expected += spectrum.values(0, i) * spectrum.values(0, i);
    CHECK(total == Approx(expected).epsilon(1e-12));
}

TEST_CASE("feature sizes follow the config") {
    const TimeSeries codes = demo_codes();
    PipelineConfig cfg;
    cfg.features.n_coeffs = 7;
    cfg.features.n_bands = 10;
    CHECK(pipeline::clip_features(FeatureKind::Mfcc, codes, cfg, Label::Rumble, "a").values.size()
          == 7);
    CHECK(pipeline::clip_features(FeatureKind::Sed, codes, cfg, Label::Rumble, "a").values.size()
          == 10);
}

TEST_CASE("synth command writes a corpus the manifest reader can walk") {
    const std::string dir = tmp_path("corpus");
    const auto r = pipeline::cmd_synth(small_corpus(), dir);
    CHECK(r.n_items == 8);
    CHECK(fs::exists(r.manifest_path));

    const auto entries = pipeline::read_manifest(dir);
    REQUIRE(entries.size() == 8);
    CHECK(entries[0].source_id == "rumble_000");
    CHECK(entries[0].label == Label::Rumble);
    CHECK(entries[7].source_id == "background_003");
    CHECK(entries[7].label == Label::Background);
    for (const auto& e : entries)
        CHECK(fs::exists(e.wav_path));

    const PipelineConfig cfg;
    const auto data = pipeline::corpus_dataset(dir, FeatureKind::Mfcc, cfg);
    CHECK(data.size() == 8);
    CHECK(data.kind() == FeatureKind::Mfcc);
    CHECK(data.dim() == cfg.features.n_coeffs);
    CHECK(data.count(Label::Rumble) == 4);
}

TEST_CASE("features, train and evaluate round-trip through files") {
    const std::string dir = tmp_path("corpus");
    if (!fs::exists(dir + "/manifest.csv"))
        pipeline::cmd_synth(small_corpus(), dir);

    PipelineConfig cfg;
    cfg.training.k = 2;
    const std::string feat_dir = tmp_path("feats");
    const auto fr = pipeline::cmd_features(dir, "all", cfg, feat_dir);
    CHECK(fr.n_clips == 8);
    REQUIRE(fr.paths.size() == 3);
    for (const auto& p : fr.paths)
        CHECK(fs::exists(p));
    CHECK(io::read_features_csv(fr.paths[0]).size() == 8);

    const std::string model_dir = tmp_path("model");
    const auto tr = pipeline::cmd_train(feat_dir + "/features_mfcc.csv", cfg, model_dir);
    CHECK(fs::exists(tr.model_path));
    CHECK(fs::exists(tr.split_path));
    CHECK(tr.n_train + tr.n_test == 8);
    CHECK(tr.cv.fold_accuracies.size() == 2);
    CHECK(tr.train_accuracy >= 0.0);
    CHECK(tr.train_accuracy <= 1.0);

    const std::string eval_dir = tmp_path("eval");
    const auto er = pipeline::cmd_evaluate(feat_dir + "/features_mfcc.csv", tr.model_path,
                                           tr.split_path, eval_dir);
    CHECK(er.n_rows == tr.n_test);
    CHECK(er.report.tp + er.report.fp + er.report.tn + er.report.fn == er.n_rows);
    CHECK(er.report.accuracy.has_value());
    CHECK(fs::exists(er.report_path));

    const auto all = pipeline::cmd_evaluate(feat_dir + "/features_mfcc.csv", tr.model_path, "",
                                            eval_dir);
    CHECK(all.n_rows == 8);
}

TEST_CASE("single-kind feature extraction writes one file") {
    const std::string dir = tmp_path("corpus");
    if (!fs::exists(dir + "/manifest.csv"))
        pipeline::cmd_synth(small_corpus(), dir);
    const auto fr = pipeline::cmd_features(dir, "sed", PipelineConfig{}, tmp_path("feats_sed"));
    REQUIRE(fr.paths.size() == 1);
    const auto rows = io::read_features_csv(fr.paths[0]);
    REQUIRE(rows.size() == 8);
    CHECK(rows[0].kind == FeatureKind::Sed);
    CHECK_THROWS_AS(pipeline::cmd_features(dir, "cepstral", PipelineConfig{}, tmp_path("x")),
                    DataError);
}

TEST_CASE("simulate runs the chain over a velocity file or a synthetic spec") {
    synth::RumbleSpec spec;
    spec.seed = 5;
    spec.duration = 2.0;
    spec.snr_db = 12.0;
    const PipelineConfig cfg;

    const auto rs = pipeline::cmd_simulate(spec, cfg, tmp_path("sim_spec"));
    CHECK(rs.n_samples == 950);
    CHECK(rs.clipped_fraction == 0.0);
    const TimeSeries codes = io::read_wav_pcm16(rs.codes_path);
    CHECK(codes.size() == 950);
    CHECK(codes.unit == Unit::AdcCode);

    const std::string vel_path = tmp_path("ground.csv");
    io::write_timeseries_csv(vel_path, synth::gen_rumble(spec));
    const auto rf = pipeline::cmd_simulate(vel_path, cfg, tmp_path("sim_file"));
    CHECK(rf.n_samples == 950);
    const TimeSeries again = io::read_wav_pcm16(rf.codes_path);
    CHECK(again.samples == codes.samples);
}

TEST_CASE("zero ground velocity maps to a constant mid-scale code file") {
    const std::string vel_path = tmp_path("still_ground.csv");
    io::write_timeseries_csv(
        vel_path, TimeSeries{std::vector<double>(475, 0.0), 475.0, Unit::GroundVelocity});
    const auto r = pipeline::cmd_simulate(vel_path, PipelineConfig{}, tmp_path("sim_zero"));
    CHECK(r.clipped_fraction == 0.0);
    const TimeSeries codes = io::read_wav_pcm16(r.codes_path);
    for (double c : codes.samples)
        CHECK(c == 32768.0);
}

TEST_CASE("spectrogram command writes binary, csv and png views") {
    synth::RumbleSpec spec;
    spec.seed = 5;
    spec.duration = 2.0;
    const PipelineConfig cfg;
    const auto sim = pipeline::cmd_simulate(spec, cfg, tmp_path("sim_spg"));

    PipelineConfig spg_cfg;
    spg_cfg.stft.frame_ms = 250.0;
    const auto sr = pipeline::cmd_spectrogram(sim.codes_path, spg_cfg, tmp_path("spg"));
    CHECK(fs::exists(sr.spg_path));
    CHECK(fs::exists(sr.csv_path));
    CHECK(fs::exists(sr.png_path));

    const auto s = io::read_spectrogram_spg1(sr.spg_path);
    CHECK(s.n_frames() == sr.n_frames);
    CHECK(s.n_bins() == sr.n_bins);
    CHECK(s.scale == dsp::Scale::Power);
}

TEST_CASE("enhance command runs both stages and reports their similarity") {
    synth::RumbleSpec spec;
    spec.seed = 5;
    spec.duration = 2.0;
    PipelineConfig cfg;
    cfg.stft.frame_ms = 250.0;
    const auto sim = pipeline::cmd_simulate(spec, cfg, tmp_path("sim_enh"));
    const auto sr = pipeline::cmd_spectrogram(sim.codes_path, cfg, tmp_path("spg_enh"));

    const auto er = pipeline::cmd_enhance(sr.spg_path, cfg, tmp_path("enh"));
    CHECK(fs::exists(er.coherence_path));
    CHECK(fs::exists(er.threshold_path));
    CHECK(fs::exists(er.coherence_png));
    CHECK(fs::exists(er.threshold_png));
    CHECK(fs::exists(er.ssim_path));
    CHECK(er.ssim_coherence > -1.0);
    CHECK(er.ssim_coherence < 1.0);
    CHECK(er.ssim_threshold > -1.0);
    CHECK(er.ssim_threshold < 1.0);
    CHECK(io::read_text_file(er.ssim_path).rfind("stage,ssim\n", 0) == 0);

    CHECK(io::read_spectrogram_spg1(er.coherence_path).scale == dsp::Scale::Decibel);
    CHECK(io::read_spectrogram_spg1(er.threshold_path).scale == dsp::Scale::Decibel);

    SUBCASE("a decibel input is rejected") {
        const std::string db_path = tmp_path("already_db.spg1");
        io::write_spectrogram_spg1(db_path, dsp::to_decibel(io::read_spectrogram_spg1(sr.spg_path)));
        CHECK_THROWS_AS(pipeline::cmd_enhance(db_path, cfg, tmp_path("enh_db")), StateError);
    }

    SUBCASE("ssim of a file against itself is one") {
        CHECK(pipeline::cmd_ssim(er.coherence_path, er.coherence_path) == Approx(1.0));
        CHECK_THROWS_AS(pipeline::cmd_ssim(sr.spg_path, er.coherence_path), StateError);
    }
}

TEST_CASE("regenerating a corpus yields byte-identical artifacts") {
    const std::string a = tmp_path("rerun_a");
    const std::string b = tmp_path("rerun_b");
    pipeline::cmd_synth(small_corpus(), a);
    pipeline::cmd_synth(small_corpus(), b);
    CHECK(io::read_text_file(a + "/manifest.csv") == io::read_text_file(b + "/manifest.csv"));
    CHECK(io::read_text_file(a + "/rumble_000.wav") == io::read_text_file(b + "/rumble_000.wav"));

    const PipelineConfig cfg;
    pipeline::cmd_features(a, "mfcc", cfg, a + "/feats");
    pipeline::cmd_features(b, "mfcc", cfg, b + "/feats");
    CHECK(io::read_text_file(a + "/feats/features_mfcc.csv") ==
          io::read_text_file(b + "/feats/features_mfcc.csv"));
}

#ifdef RUMBLE_CLI_BIN

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RUMBLE_CLI_BIN) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST_CASE("cli maps failures onto documented exit codes") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("definitely-not-a-subcommand") == 2);
    CHECK(run_cli("ssim " + tmp_path("missing_a.spg1") + " " + tmp_path("missing_b.spg1")) == 2);

    const std::string dir = tmp_path("cli");
    CHECK(run_cli("synth --rumbles 2 --backgrounds 2 --duration 1.5 --seed 4 --out " + dir) == 0);
    CHECK(fs::exists(dir + "/manifest.csv"));
    CHECK(run_cli("features " + dir + " --kind hjorth --out " + dir) == 0);
    CHECK(run_cli("train " + dir + "/features_hjorth.csv --algorithm tree --k 2 --out " + dir) ==
          0);
    CHECK(fs::exists(dir + "/model_tree.json"));

    CHECK(run_cli("spectrogram " + dir + "/rumble_000.wav --frame-ms 250 --out " + dir) == 0);
    const std::string spg = dir + "/rumble_000_spectrogram.spg1";
    const std::string db = dir + "/rumble_000_db.spg1";
    io::write_spectrogram_spg1(db, dsp::to_decibel(io::read_spectrogram_spg1(spg)));
    CHECK(run_cli("enhance " + db + " --out " + dir) == 3);

    const std::string bad_cfg = tmp_path("bad_cfg.json");
    io::write_text_file(bad_cfg, R"({"stft": {"frames_ms": 10}})");
    CHECK(run_cli("spectrogram " + dir + "/rumble_000.wav --config " + bad_cfg + " --out " + dir) ==
          2);
}

#endif
