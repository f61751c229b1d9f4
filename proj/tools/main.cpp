// Command-line harness for the log-polar face recognition pipeline:
// single-image transforms, training, evaluation, hidden-layer sweeps,
// synthetic data generation, and the self-test property suite.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lpface/bundle.hpp"
#include "lpface/dataset.hpp"
#include "lpface/errors.hpp"
#include "lpface/image.hpp"
#include "lpface/logpolar.hpp"
#include "lpface/pipeline.hpp"
#include "lpface/selfcheck.hpp"
#include "lpface/synthetic.hpp"

namespace {

using namespace lpface;

constexpr int kExitSuccess = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDiverged = 3;

Dataset load_dataset(const std::string& dir, const std::string& layout, int width, int height) {
    if (layout == "orl") {
        return load_orl(dir);
    }
    return load_generic(dir, width, height);
}

Dataset select_subset(const Dataset& full, const SplitSpec& spec, const std::string& subset) {
    if (subset == "all") {
        return full;
    }
    const SplitResult parts = split(full, spec);
    return subset == "train" ? parts.train : parts.test;
}

void print_metrics(const Metrics& m) {
    std::printf("test samples:          %d\n", m.total());
    std::printf("recognition rate:      %.4f %%\n", m.recognition_rate);
    std::printf("error rate:            %.4f %%\n", 100.0 - m.recognition_rate);
    std::printf("false rejection rate:  %.4f %%\n", m.false_rejection_rate);
}

std::optional<ReferenceResults> pick_reference(const std::string& name, PipelineMode mode) {
    if (name == "orl") {
        return orl_reference(mode);
    }
    if (name == "otcbvs") {
        return otcbvs_reference(mode);
    }
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"log-polar face recognition pipeline (eigenspace + MLP classifier)"};
    app.require_subcommand(1);

    // ---- transform ----
    std::string tr_in, tr_out;
    LogPolarConfig tr_cfg;
    int tr_fill = 0;
    auto* cmd_transform =
        app.add_subcommand("transform", "log-polar transform of a single PGM image");
    cmd_transform->add_option("input", tr_in, "input PGM")->required();
    cmd_transform->add_option("output", tr_out, "output PGM")->required();
    cmd_transform->add_option("--base", tr_cfg.base, "output sizing base Z")
        ->check(CLI::Range(2, 1024));
    cmd_transform->add_option("--r-min", tr_cfg.r_min, "inner radius cutoff (pixels)");
    cmd_transform->add_option("--fill", tr_fill, "out-of-frame fill intensity")
        ->check(CLI::Range(0, 255));

    // ---- shared train/eval/sweep options ----
    struct DataOpts {
        std::string dir;
        std::string layout = "orl";
        int width = kOrlWidth;
        int height = kOrlHeight;
        std::string config_path;
        std::string subset;
        int per_class_train = -1;
        long long split_seed = -1;
        std::string split_mode;
    };
    auto add_data_opts = [](CLI::App* cmd, DataOpts& opts, const char* default_subset) {
        opts.subset = default_subset;
        cmd->add_option("--data", opts.dir, "dataset directory")->required();
        cmd->add_option("--layout", opts.layout, "dataset layout")
            ->check(CLI::IsMember({"orl", "generic"}));
        cmd->add_option("--width", opts.width, "generic layout: resize target width")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--height", opts.height, "generic layout: resize target height")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--config", opts.config_path, "run configuration file");
        cmd->add_option("--subset", opts.subset,
                        std::string("portion of the split to use (default ") + default_subset +
                            ")")
            ->check(CLI::IsMember({"train", "test", "all"}));
        cmd->add_option("--per-class-train", opts.per_class_train,
                        "training samples per subject (default 5)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--split-seed", opts.split_seed, "split shuffle seed")
            ->check(CLI::Range(0LL, 4294967295LL));
        cmd->add_option("--split-mode", opts.split_mode, "split mode")
            ->check(CLI::IsMember({"first_k", "seeded_random"}));
    };
    struct TrainOpts {
        std::string mode = "logpolar";
        std::string out;
        int features = 40;
        int hidden1 = 40;
        int hidden2 = 25;
        double learning_rate = 0.0;
        double momentum = 0.0;
        double rate_increment = 0.0;
        double rate_decay = 0.0;
        double smoothing = 0.0;
        int epochs = 0;
        double gradient_goal = 0.0;
        double error_goal = 0.0;
        long long seed = -1;
        int base = 0;
        double r_min = 0.0;
        int fill = -1;
    };
    auto add_model_opts = [](CLI::App* cmd, TrainOpts& opts) {
        cmd->add_option("--mode", opts.mode, "pipeline mode")
            ->check(CLI::IsMember({"visual", "logpolar"}));
        cmd->add_option("--features", opts.features, "eigenspace width / network input (default 40)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--hidden2", opts.hidden2, "second hidden layer width (default 25)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--learning-rate", opts.learning_rate, "initial learning rate (default 0.02)");
        cmd->add_option("--momentum", opts.momentum, "momentum factor (default 0.9)");
        cmd->add_option("--rate-increment", opts.rate_increment,
                        "additive rate increase on gradient sign agreement (default 0.001)");
        cmd->add_option("--rate-decay", opts.rate_decay,
                        "multiplicative rate decrease on disagreement (default 0.5)");
        cmd->add_option("--smoothing", opts.smoothing,
                        "smoothed-gradient history weight (default 0.7)");
        cmd->add_option("--gradient-goal", opts.gradient_goal,
                        "stop when the gradient norm drops here (default 1e-6)");
        cmd->add_option("--error-goal", opts.error_goal,
                        "stop when the total error drops here (default 0)");
        cmd->add_option("--seed", opts.seed, "weight initialization seed")
            ->check(CLI::Range(0LL, 4294967295LL));
        cmd->add_option("--base", opts.base, "log-polar sizing base Z")
            ->check(CLI::Range(2, 1024));
        cmd->add_option("--r-min", opts.r_min, "log-polar inner radius cutoff");
        cmd->add_option("--fill", opts.fill, "log-polar fill intensity")
            ->check(CLI::Range(0, 255));
    };

    // ---- train ----
    DataOpts train_data;
    TrainOpts train_model;
    auto* cmd_train = app.add_subcommand("train", "train a model bundle on a dataset");
    add_data_opts(cmd_train, train_data, "train");
    add_model_opts(cmd_train, train_model);
    cmd_train->add_option("--hidden1", train_model.hidden1, "first hidden layer width (default 40)")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--epochs", train_model.epochs, "epoch cap (default 70000)")
        ->check(CLI::PositiveNumber);
    cmd_train->add_option("--out", train_model.out, "output bundle path")->required();

    // ---- eval ----
    DataOpts eval_data;
    std::string eval_bundle, eval_curve_csv, eval_summary_csv;
    std::string eval_reference = "orl";
    double eval_threshold = 0.0;
    auto* cmd_eval = app.add_subcommand("eval", "evaluate a bundle on a dataset");
    add_data_opts(cmd_eval, eval_data, "test");
    cmd_eval->add_option("--bundle", eval_bundle, "trained bundle path")->required();
    cmd_eval->add_option("--csv", eval_curve_csv, "write per-prefix rate curve CSV here");
    cmd_eval->add_option("--summary", eval_summary_csv,
                         "write metric,measured,reference summary CSV here");
    cmd_eval->add_option("--reference", eval_reference,
                         "reference column source for the summary CSV")
        ->check(CLI::IsMember({"orl", "otcbvs", "none"}));
    cmd_eval->add_option("--threshold", eval_threshold,
                         "false-rejection score threshold (default 0)");

    // ---- sweep ----
    DataOpts sweep_data;
    TrainOpts sweep_model;
    std::vector<int> sweep_sizes;
    int sweep_epochs = 1000;
    std::string sweep_csv;
    auto* cmd_sweep =
        app.add_subcommand("sweep", "train one network per first-hidden-layer size");
    add_data_opts(cmd_sweep, sweep_data, "train");
    add_model_opts(cmd_sweep, sweep_model);
    cmd_sweep->add_option("--sizes", sweep_sizes, "first hidden layer sizes, e.g. 5,10,20,40")
        ->required()
        ->delimiter(',');
    cmd_sweep->add_option("--epochs", sweep_epochs, "epoch budget per size (default 1000)")
        ->check(CLI::PositiveNumber);
    cmd_sweep->add_option("--csv", sweep_csv, "write hidden1,epoch,total_error CSV here");

    // ---- synth ----
    std::string synth_out;
    std::string synth_layout = "orl";
    SyntheticDatasetConfig synth_cfg;
    auto* cmd_synth =
        app.add_subcommand("synth", "render a synthetic labeled face dataset to disk");
    cmd_synth->add_option("--out", synth_out, "output directory")->required();
    cmd_synth->add_option("--layout", synth_layout, "tree layout to write")
        ->check(CLI::IsMember({"orl", "generic"}));
    cmd_synth->add_option("--subjects", synth_cfg.subjects, "number of subjects (default 10)")
        ->check(CLI::PositiveNumber);
    cmd_synth->add_option("--per-subject", synth_cfg.per_subject,
                          "images per subject (default 10)")
        ->check(CLI::PositiveNumber);
    cmd_synth->add_option("--width", synth_cfg.width, "image width (default 92)")
        ->check(CLI::PositiveNumber);
    cmd_synth->add_option("--height", synth_cfg.height, "image height (default 112)")
        ->check(CLI::PositiveNumber);
    long long synth_seed = -1;
    cmd_synth->add_option("--seed", synth_seed, "jitter seed")
        ->check(CLI::Range(0LL, 4294967295LL));

    // ---- selftest ----
    app.add_subcommand("selftest", "run the property and convergence self-tests");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    // Defaults <- config file <- explicit flags, in that order.
    auto resolve_config = [](const DataOpts& data, CLI::App* cmd) {
        RunConfig cfg;
        if (!data.config_path.empty()) {
            cfg = load_run_config(data.config_path);
        }
        if (data.per_class_train > 0) {
            cfg.split.per_class_train = data.per_class_train;
        }
        if (cmd->count("--split-seed") > 0) {
            cfg.split.seed = static_cast<std::uint32_t>(data.split_seed);
        }
        if (!data.split_mode.empty()) {
            cfg.split.mode = data.split_mode == "first_k" ? SplitSpec::Mode::first_k
                                                          : SplitSpec::Mode::seeded_random;
        }
        return cfg;
    };
    auto apply_model_flags = [](RunConfig& cfg, const TrainOpts& model, CLI::App* cmd) {
        if (cmd->count("--learning-rate") > 0) cfg.mlp.learning_rate = model.learning_rate;
        if (cmd->count("--momentum") > 0) cfg.mlp.momentum = model.momentum;
        if (cmd->count("--rate-increment") > 0) cfg.mlp.rate_increment = model.rate_increment;
        if (cmd->count("--rate-decay") > 0) cfg.mlp.rate_decay = model.rate_decay;
        if (cmd->count("--smoothing") > 0) cfg.mlp.smoothing = model.smoothing;
        if (cmd->count("--epochs") > 0) cfg.mlp.max_epochs = model.epochs;
        if (cmd->count("--gradient-goal") > 0) cfg.mlp.gradient_goal = model.gradient_goal;
        if (cmd->count("--error-goal") > 0) cfg.mlp.error_goal = model.error_goal;
        if (cmd->count("--seed") > 0) cfg.mlp.seed = static_cast<std::uint32_t>(model.seed);
        if (cmd->count("--base") > 0) cfg.logpolar.base = model.base;
        if (cmd->count("--r-min") > 0) cfg.logpolar.r_min = model.r_min;
        if (cmd->count("--fill") > 0) cfg.logpolar.fill = static_cast<std::uint8_t>(model.fill);
    };

    try {
        if (cmd_transform->parsed()) {
            tr_cfg.fill = static_cast<std::uint8_t>(tr_fill);
            const GrayImage img = read_pgm_file(tr_in);
            const GrayImage out = log_polar_transform(img, tr_cfg);
            write_pgm_file(out, tr_out);
            std::printf("%dx%d -> log-polar %dx%d -> %s\n", img.width, img.height, out.width,
                        out.height, tr_out.c_str());
            return kExitSuccess;
        }

        if (cmd_train->parsed()) {
            RunConfig cfg = resolve_config(train_data, cmd_train);
            apply_model_flags(cfg, train_model, cmd_train);
            const PipelineMode mode = pipeline_mode_from_string(train_model.mode);
            const Dataset full = load_dataset(train_data.dir, train_data.layout,
                                              train_data.width, train_data.height);
            const Dataset train_set = select_subset(full, cfg.split, train_data.subset);
            std::printf("training on %zu samples, %d classes, mode %s\n",
                        train_set.samples.size(), train_set.num_classes,
                        to_string(mode));
            const auto t0 = std::chrono::steady_clock::now();
            const ModelBundle bundle =
                train_pipeline(train_set, mode, cfg.logpolar, cfg.mlp, train_model.features,
                               train_model.hidden1, train_model.hidden2);
            const auto t1 = std::chrono::steady_clock::now();
            save_bundle(bundle, train_model.out);
            const double seconds = std::chrono::duration<double>(t1 - t0).count();
            std::printf("eigenspace: %d pixels -> %d components%s\n", bundle.eigenspace.dim(),
                        bundle.eigenspace.components(),
                        bundle.info.feature_padding ? " (zero-padded)" : "");
            std::printf("network layers: %d-%d-%d-%d\n", bundle.feature_width,
                        train_model.hidden1, train_model.hidden2, bundle.num_classes);
            std::printf("stopped after %d epochs (%s), final error %.6g, %.1fs\n",
                        bundle.info.epochs_run, bundle.info.stop_reason.c_str(),
                        bundle.info.final_error, seconds);
            std::printf("bundle written to %s\n", train_model.out.c_str());
            return kExitSuccess;
        }

        if (cmd_eval->parsed()) {
            const RunConfig cfg = resolve_config(eval_data, cmd_eval);
            const ModelBundle bundle = load_bundle(eval_bundle);
            const Dataset full = load_dataset(eval_data.dir, eval_data.layout, eval_data.width,
                                              eval_data.height);
            const Dataset test_set = select_subset(full, cfg.split, eval_data.subset);
            const Metrics metrics = evaluate(bundle, test_set, eval_threshold);
            print_metrics(metrics);
            if (!eval_curve_csv.empty()) {
                write_curve_csv(metrics, eval_curve_csv);
                std::printf("rate curve written to %s\n", eval_curve_csv.c_str());
            }
            if (!eval_summary_csv.empty()) {
                write_summary_csv(metrics, pick_reference(eval_reference, bundle.mode),
                                  eval_summary_csv);
                std::printf("summary written to %s\n", eval_summary_csv.c_str());
            }
            return kExitSuccess;
        }

        if (cmd_sweep->parsed()) {
            RunConfig cfg = resolve_config(sweep_data, cmd_sweep);
            apply_model_flags(cfg, sweep_model, cmd_sweep);
            const PipelineMode mode = pipeline_mode_from_string(sweep_model.mode);
            const Dataset full = load_dataset(sweep_data.dir, sweep_data.layout,
                                              sweep_data.width, sweep_data.height);
            const Dataset train_set = select_subset(full, cfg.split, sweep_data.subset);
            const auto traces =
                sweep_hidden1(train_set, mode, cfg.logpolar, cfg.mlp, sweep_sizes, sweep_epochs,
                              sweep_model.features, sweep_model.hidden2);
            for (const SweepTrace& t : traces) {
                if (t.failed) {
                    std::printf("hidden1 %3d: failed (%s)\n", t.hidden1, t.message.c_str());
                } else {
                    std::printf("hidden1 %3d: final error %.6g after %zu epochs\n", t.hidden1,
                                t.error_trace.back(), t.error_trace.size());
                }
            }
            if (!sweep_csv.empty()) {
                write_sweep_csv(traces, sweep_csv);
                std::printf("sweep traces written to %s\n", sweep_csv.c_str());
            }
            return kExitSuccess;
        }

        if (cmd_synth->parsed()) {
            if (synth_seed >= 0) {
                synth_cfg.seed = static_cast<std::uint32_t>(synth_seed);
            }
            const Dataset ds = synthetic_dataset(synth_cfg);
            if (synth_layout == "orl") {
                write_orl_tree(ds, synth_out);
            } else {
                write_generic_tree(ds, synth_out);
            }
            std::printf("wrote %zu images (%d subjects) to %s\n", ds.samples.size(),
                        ds.num_classes, synth_out.c_str());
            return kExitSuccess;
        }

        // selftest
        return run_selftest(std::cout) ? kExitSuccess : kExitData;
    } catch (const TrainingDiverged& e) {
        std::cerr << "training diverged: " << e.what() << '\n';
        return kExitDiverged;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
