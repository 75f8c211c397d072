#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rumble/classify.hpp"
#include "rumble/config.hpp"
#include "rumble/errors.hpp"
#include "rumble/pipeline.hpp"
#include "rumble/synth.hpp"

namespace {

using namespace rumble;

double parse_split(const std::string& text) {
    if (text == "paper")
        return classify::kPaperTrainFraction;
    if (text == "conventional")
        return classify::kConventionalTrainFraction;
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size())
            throw ConfigError("bad split value '" + text + "'");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad split value '" + text + "'");
    }
}

std::string metric(const std::optional<double>& v) {
    if (!v)
        return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

int run(int argc, char** argv) {
    CLI::App app{"infrasonic rumble detection pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON config file");
    auto* seed_opt = app.add_option("--seed", seed, "override every seeded stage");
    app.add_option("--out", out_dir, "output directory");

    auto* sim = app.add_subcommand("simulate", "run the acquisition chain over a velocity file");
    std::string sim_input;
    bool sim_synth = false;
    synth::RumbleSpec sim_spec;
    sim->add_option("input", sim_input, "ground-velocity CSV");
    sim->add_flag("--synth", sim_synth, "synthesize the input rumble instead");
    sim->add_option("--fundamental", sim_spec.fundamental, "Hz");
    sim->add_option("--harmonics", sim_spec.n_harmonics, "harmonic count");
    sim->add_option("--duration", sim_spec.duration, "seconds");
    sim->add_option("--amplitude", sim_spec.amplitude, "peak ground velocity, m/s");
    sim->add_option("--snr", sim_spec.snr_db, "dB");

    auto* syn = app.add_subcommand("synth", "generate a labeled corpus");
    synth::CorpusConfig corpus;
    syn->add_option("--rumbles", corpus.n_rumbles, "rumble clip count");
    syn->add_option("--backgrounds", corpus.n_background, "background clip count");
    syn->add_option("--duration", corpus.duration, "clip length, seconds");
    syn->add_option("--snr", corpus.snr_db, "rumble SNR, dB");

    auto* spg = app.add_subcommand("spectrogram", "short-time power spectrogram of a signal");
    std::string spg_input;
    double frame_ms = 0.0, overlap = -1.0;
    spg->add_option("input", spg_input, "WAV or CSV signal")->required();
    auto* frame_opt = spg->add_option("--frame-ms", frame_ms, "frame length, ms");
    auto* overlap_opt = spg->add_option("--overlap", overlap, "frame overlap fraction");

    auto* enh = app.add_subcommand("enhance", "coherence and threshold enhancement stages");
    std::string enh_input;
    double sigma = 0.0, sigma_r = 0.0, blur = 0.0;
    enh->add_option("input", enh_input, "power spectrogram (.spg1)")->required();
    auto* sigma_opt = enh->add_option("--sigma", sigma, "tensor smoothing sigma");
    auto* sigma_r_opt = enh->add_option("--sigma-r", sigma_r, "ridge smoothing sigma");
    auto* blur_opt = enh->add_option("--blur", blur, "post-threshold blur sigma");

    auto* fea = app.add_subcommand("features", "per-clip features of a corpus directory");
    std::string fea_dir, fea_kind = "all";
    fea->add_option("corpus", fea_dir, "corpus directory with manifest.csv")->required();
    fea->add_option("--kind", fea_kind, "mfcc, hjorth, sed or all");

    auto* trn = app.add_subcommand("train", "split a feature file and fit a model");
    std::string trn_features, trn_algorithm, trn_split;
    double trn_alpha = 0.0, trn_c = 0.0, trn_step = 0.0;
    std::size_t trn_epochs = 0, trn_depth = 0, trn_k = 0;
    trn->add_option("features", trn_features, "features CSV")->required();
    auto* alg_opt = trn->add_option("--algorithm", trn_algorithm, "ridge, svm_linear, logistic or tree");
    auto* alpha_opt = trn->add_option("--alpha", trn_alpha, "ridge penalty");
    auto* c_opt = trn->add_option("--c", trn_c, "svm hinge weight");
    auto* step_opt = trn->add_option("--step", trn_step, "gradient step size");
    auto* epochs_opt = trn->add_option("--epochs", trn_epochs, "gradient epochs");
    auto* depth_opt = trn->add_option("--max-depth", trn_depth, "tree depth limit");
    auto* split_opt = trn->add_option("--split", trn_split, "train fraction, or paper/conventional");
    auto* k_opt = trn->add_option("--k", trn_k, "cross-validation folds");

    auto* eva = app.add_subcommand("evaluate", "score a saved model on a feature file");
    std::string eva_features, eva_model, eva_split;
    eva->add_option("features", eva_features, "features CSV")->required();
    eva->add_option("model", eva_model, "model JSON")->required();
    eva->add_option("--split-file", eva_split, "restrict scoring to rows marked test");

    auto* led = app.add_subcommand("leaderboard", "feature x algorithm ranking over a corpus");
    std::string led_dir;
    std::string led_split;
    std::size_t led_k = 0;
    led->add_option("corpus", led_dir, "corpus directory with manifest.csv")->required();
    auto* led_split_opt = led->add_option("--split", led_split, "train fraction, or paper/conventional");
    auto* led_k_opt = led->add_option("--k", led_k, "cross-validation folds");

    auto* ssm = app.add_subcommand("ssim", "structural similarity of two spectrograms");
    std::string ssm_a, ssm_b;
    ssm->add_option("a", ssm_a, "first spectrogram (.spg1)")->required();
    ssm->add_option("b", ssm_b, "second spectrogram (.spg1)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    PipelineConfig cfg;
    if (!config_path.empty())
        cfg = load_config(config_path);
    if (seed_opt->count() > 0) {
        cfg.training.seed = seed;
        corpus.seed = seed;
        sim_spec.seed = seed;
    }

    if (sim->parsed()) {
        pipeline::SimulateResult r;
        if (sim_synth) {
            r = pipeline::cmd_simulate(sim_spec, cfg, out_dir);
        } else {
            if (sim_input.empty())
                throw ConfigError("simulate needs an input file or --synth");
            r = pipeline::cmd_simulate(sim_input, cfg, out_dir);
        }
        std::printf("wrote %s (%zu samples, clipping %.2f%%)\n", r.codes_path.c_str(),
                    r.n_samples, 100.0 * r.clipped_fraction);
        return 0;
    }

    if (syn->parsed()) {
        corpus.sample_rate = cfg.frontend.sample_rate;
        corpus.frontend = cfg.frontend;
        auto r = pipeline::cmd_synth(corpus, out_dir);
        std::printf("wrote %zu clips and %s\n", r.n_items, r.manifest_path.c_str());
        return 0;
    }

    if (spg->parsed()) {
        if (frame_opt->count() > 0)
            cfg.stft.frame_ms = frame_ms;
        if (overlap_opt->count() > 0)
            cfg.stft.overlap = overlap;
        auto r = pipeline::cmd_spectrogram(spg_input, cfg, out_dir);
        std::printf("wrote %s (%zu frames x %zu bins)\n", r.spg_path.c_str(), r.n_frames,
                    r.n_bins);
        return 0;
    }

    if (enh->parsed()) {
        if (sigma_opt->count() > 0)
            cfg.enhancement.sigma = sigma;
        if (sigma_r_opt->count() > 0)
            cfg.enhancement.sigma_r = sigma_r;
        if (blur_opt->count() > 0)
            cfg.enhancement.blur_sigma = blur;
        auto r = pipeline::cmd_enhance(enh_input, cfg, out_dir);
        std::printf("ssim coherence %.4f threshold %.4f\n", r.ssim_coherence, r.ssim_threshold);
        std::printf("wrote %s and %s\n", r.coherence_path.c_str(), r.threshold_path.c_str());
        return 0;
    }

    if (fea->parsed()) {
        auto r = pipeline::cmd_features(fea_dir, fea_kind, cfg, out_dir);
        for (const auto& p : r.paths)
            std::printf("wrote %s (%zu clips)\n", p.c_str(), r.n_clips);
        return 0;
    }

    if (trn->parsed()) {
        if (alg_opt->count() > 0)
            cfg.training.algorithm = trn_algorithm;
        if (alpha_opt->count() > 0)
            cfg.training.alpha = trn_alpha;
        if (c_opt->count() > 0)
            cfg.training.c = trn_c;
        if (step_opt->count() > 0)
            cfg.training.step = trn_step;
        if (epochs_opt->count() > 0)
            cfg.training.epochs = trn_epochs;
        if (depth_opt->count() > 0)
            cfg.training.max_depth = trn_depth;
        if (split_opt->count() > 0)
            cfg.training.split = parse_split(trn_split);
        if (k_opt->count() > 0)
            cfg.training.k = trn_k;
        auto r = pipeline::cmd_train(trn_features, cfg, out_dir);
        std::printf("wrote %s (train %zu / test %zu, train accuracy %.4f)\n",
                    r.model_path.c_str(), r.n_train, r.n_test, r.train_accuracy);
        std::printf("cv accuracy %s\n", r.cv.formatted().c_str());
        return 0;
    }

    if (eva->parsed()) {
        auto r = pipeline::cmd_evaluate(eva_features, eva_model, eva_split, out_dir);
        std::printf("scored %zu rows: accuracy %s ba %s f1 %s\n", r.n_rows,
                    metric(r.report.accuracy).c_str(), metric(r.report.balanced_accuracy).c_str(),
                    metric(r.report.f1).c_str());
        std::printf("wrote %s\n", r.report_path.c_str());
        return 0;
    }

    if (led->parsed()) {
        if (led_split_opt->count() > 0)
            cfg.training.split = parse_split(led_split);
        if (led_k_opt->count() > 0)
            cfg.training.k = led_k;
        auto r = pipeline::cmd_leaderboard(led_dir, cfg, out_dir);
        std::fputs(classify::render_leaderboard(r.rows).c_str(), stdout);
        std::printf("wrote %s\n", r.csv_path.c_str());
        return 0;
    }

    double v = pipeline::cmd_ssim(ssm_a, ssm_b);
    std::printf("%.4f\n", v);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const UnitError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const StateError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const SizeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const RangeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
