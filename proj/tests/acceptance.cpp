// Acceptance harness: one criterion per invocation, chosen with
// --criterion N (1..5). Criteria 3 and 4 evaluate against the public ORL
// face database; point --orl (or the LPFACE_ORL_DIR environment variable)
// at the directory holding s1..s40. Without it those criteria are skipped
// with exit code 77 so a test driver can report them as skipped rather
// than failed.
//
// Output: one "CRITERION <n> PASS|FAIL|SKIP: <summary>" line, preceded by
// the individual measurements that justify it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "lpface/dataset.hpp"
#include "lpface/errors.hpp"
#include "lpface/mlp.hpp"
#include "lpface/pipeline.hpp"
#include "lpface/selfcheck.hpp"
#include "lpface/synthetic.hpp"

namespace {

using namespace lpface;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kSkip = 77;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int report(int criterion, int code, const std::string& summary) {
    const char* verdict = code == kPass ? "PASS" : code == kSkip ? "SKIP" : "FAIL";
    std::printf("CRITERION %d %s: %s\n", criterion, verdict, summary.c_str());
    return code;
}

/// ORL images if a directory was supplied, otherwise empty.
Dataset try_load_orl(const std::string& orl_dir, int criterion, int* early_exit) {
    *early_exit = -1;
    if (orl_dir.empty()) {
        *early_exit = report(criterion, kSkip,
                             "ORL dataset not supplied (use --orl DIR or LPFACE_ORL_DIR)");
        return {};
    }
    try {
        return load_orl(orl_dir);
    } catch (const Error& e) {
        *early_exit = report(criterion, kFail,
                             std::string("cannot ingest ORL directory: ") + e.what());
        return {};
    }
}

// ---- criterion 1: the deterministic property suite ----------------------

int criterion_property_suite(const std::string& orl_dir) {
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<GrayImage> fixtures;
    if (!orl_dir.empty()) {
        const Dataset orl = load_orl(orl_dir);
        for (std::size_t i = 0; i < orl.samples.size() && fixtures.size() < 6; i += 10) {
            fixtures.push_back(orl.samples[i].image);
        }
        std::printf("fixtures: %zu ORL images\n", fixtures.size());
    } else {
        fixtures = selfcheck_fixtures();
        std::printf("fixtures: %zu rendered faces at ORL geometry\n", fixtures.size());
    }

    const std::vector<CheckResult> first = run_property_suite(fixtures);
    const std::vector<CheckResult> second = run_property_suite(fixtures);

    bool all_pass = true;
    for (const CheckResult& r : first) {
        std::printf("  [%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        all_pass = all_pass && r.pass;
    }

    bool deterministic = first.size() == second.size();
    for (std::size_t i = 0; deterministic && i < first.size(); ++i) {
        deterministic = first[i].pass == second[i].pass && first[i].detail == second[i].detail;
    }

    const double elapsed = seconds_since(t0);
    std::printf("two full suite runs in %.2fs (budget 60s)\n", elapsed);

    if (!all_pass) {
        return report(1, kFail, "property checks failed");
    }
    if (!deterministic) {
        return report(1, kFail, "suite results differ between two runs");
    }
    if (elapsed >= 60.0) {
        return report(1, kFail, "suite exceeded the one-minute budget");
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu checks, identical across runs, %.2fs", first.size(),
                  elapsed);
    return report(1, kPass, buf);
}

// ---- criterion 2: XOR convergence ---------------------------------------

int criterion_xor() {
    const Batch batch = {
        {{-1.0, -1.0}, {-1.0}},
        {{-1.0, +1.0}, {+1.0}},
        {{+1.0, -1.0}, {+1.0}},
        {{+1.0, +1.0}, {-1.0}},
    };
    Hyperparams hp;
    hp.max_epochs = 5000;
    hp.error_goal = 0.01;
    hp.gradient_goal = 0.0;

    int converged = 0;
    for (std::uint32_t seed : {1u, 2u, 3u, 4u, 5u}) {
        hp.seed = seed;
        Network net = init_network({2, 4, 1}, seed);
        const TrainResult result = train(net, batch, hp);
        const bool ok = result.final_error < 0.01 && result.epochs_run <= 5000;
        converged += ok ? 1 : 0;
        std::printf("  seed %u: E = %.6g after %d epochs (%s)\n", seed, result.final_error,
                    result.epochs_run, ok ? "converged" : "not converged");
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d of 5 seeds reached E < 0.01 (need 4)", converged);
    return report(2, converged >= 4 ? kPass : kFail, buf);
}

// ---- criterion 3: wider first hidden layer lowers the final error -------

int criterion_figure6(const std::string& orl_dir) {
    int early = -1;
    const Dataset orl = try_load_orl(orl_dir, 3, &early);
    if (early >= 0) {
        return early;
    }

    SplitSpec spec;
    spec.per_class_train = 5;
    const SplitResult parts = split(orl, spec);

    Hyperparams hp;
    hp.seed = 1;
    // Stop a run once the summed error is down to 0.05 per pattern: past that
    // point the per-weight rates keep growing (+a each agreeing epoch) until
    // one oversized step saturates the outputs, from which gradients cannot
    // recover. "Final error under a budget" still means the error the run
    // ends with, converged or capped.
    hp.error_goal = 0.05 * static_cast<double>(parts.train.samples.size());
    const int budget = 2000;
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<SweepTrace> traces =
        sweep_hidden1(parts.train, PipelineMode::log_polar, LogPolarConfig{}, hp, {10, 40},
                      budget, 40, 25);
    std::printf("sweep of {10, 40} over %d epochs took %.1fs\n", budget, seconds_since(t0));

    for (const SweepTrace& t : traces) {
        if (t.failed) {
            return report(3, kFail, "training failed for hidden1 = " +
                                        std::to_string(t.hidden1) + ": " + t.message);
        }
        std::printf("  hidden1 %2d: final E = %.6g\n", t.hidden1, t.error_trace.back());
    }

    const double e10 = traces[0].error_trace.back();
    const double e40 = traces[1].error_trace.back();
    char buf[96];
    std::snprintf(buf, sizeof buf, "final E(40) = %.6g %s final E(10) = %.6g", e40,
                  e40 <= e10 ? "<=" : ">", e10);
    return report(3, e40 <= e10 ? kPass : kFail, buf);
}

// ---- criterion 4: ORL end-to-end recognition -----------------------------

int criterion_orl_end_to_end(const std::string& orl_dir) {
    int early = -1;
    const Dataset orl = try_load_orl(orl_dir, 4, &early);
    if (early >= 0) {
        return early;
    }

    SplitSpec spec;
    spec.per_class_train = 5;
    const SplitResult parts = split(orl, spec);
    std::printf("ORL: %zu train / %zu test images, %d subjects\n", parts.train.samples.size(),
                parts.test.samples.size(), orl.num_classes);

    Hyperparams hp;  // published settings: eta 0.02, momentum 0.9, cap 70000
    // Earlier stop at 0.05 error per pattern: close enough to the targets to
    // classify the training set perfectly, and reached before the adaptive
    // rates grow into the step size that saturates the outputs for good.
    hp.error_goal = 0.05 * static_cast<double>(parts.train.samples.size());
    // Slow the additive rate growth: at the published 0.001 per epoch the
    // per-weight rates outgrow this task's curvature after a few hundred
    // epochs and a single oversized step can pin the output units.
    hp.rate_increment = 1e-4;

    double sum_lp = 0.0, sum_visual = 0.0, sum_gap = 0.0;
    Metrics last_lp, last_visual;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint32_t seed : {1u, 2u, 3u}) {
        hp.seed = seed;
        const ModelBundle lp = train_pipeline(parts.train, PipelineMode::log_polar,
                                              LogPolarConfig{}, hp, 40, 40, 25);
        const ModelBundle visual = train_pipeline(parts.train, PipelineMode::visual,
                                                  LogPolarConfig{}, hp, 40, 40, 25);
        const Metrics m_lp = evaluate(lp, parts.test);
        const Metrics m_visual = evaluate(visual, parts.test);
        std::printf(
            "  seed %u: log-polar %.2f%% (%d epochs), visual %.2f%% (%d epochs), gap %+.2f\n",
            seed, m_lp.recognition_rate, lp.info.epochs_run, m_visual.recognition_rate,
            visual.info.epochs_run, m_lp.recognition_rate - m_visual.recognition_rate);
        sum_lp += m_lp.recognition_rate;
        sum_visual += m_visual.recognition_rate;
        sum_gap += m_lp.recognition_rate - m_visual.recognition_rate;
        last_lp = m_lp;
        last_visual = m_visual;
    }
    const double mean_lp = sum_lp / 3.0;
    const double mean_visual = sum_visual / 3.0;
    const double mean_gap = sum_gap / 3.0;
    std::printf("means: log-polar %.2f%%, visual %.2f%%, gap %.2f points; %.0fs total\n",
                mean_lp, mean_visual, mean_gap, seconds_since(t0));

    // (c) measured rates next to the published reference error rates.
    write_summary_csv(last_lp, orl_reference(PipelineMode::log_polar),
                      "acceptance_logpolar_summary.csv");
    write_summary_csv(last_visual, orl_reference(PipelineMode::visual),
                      "acceptance_visual_summary.csv");
    std::printf("summaries: acceptance_logpolar_summary.csv, acceptance_visual_summary.csv\n");

    if (mean_lp < 90.0) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "mean log-polar recognition %.2f%% below 90%%", mean_lp);
        return report(4, kFail, buf);
    }
    if (mean_gap < 3.0) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "log-polar lead %.2f points below 3", mean_gap);
        return report(4, kFail, buf);
    }
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "log-polar %.2f%% (>= 90), lead %.2f points (>= 3), references in CSVs",
                  mean_lp, mean_gap);
    return report(4, kPass, buf);
}

// ---- criterion 5: OTCBVS-shaped ingestion --------------------------------

int criterion_otcbvs_ingestion() {
    // The OTCBVS benchmark itself is access-restricted; its published
    // rates are reference points only. This exercises the generic loader
    // on a tree of the same shape: 16 subjects x 125 images = 2000.
    SyntheticDatasetConfig cfg;
    cfg.subjects = 16;
    cfg.per_subject = 125;
    cfg.width = 46;
    cfg.height = 56;

    const auto t0 = std::chrono::steady_clock::now();
    const Dataset rendered = synthetic_dataset(cfg);
    const std::string dir = "acceptance_otcbvs_shaped_tree";
    write_generic_tree(rendered, dir);
    const Dataset loaded = load_generic(dir, 46, 56);
    std::printf("wrote and reloaded %zu images across %d classes in %.1fs\n",
                loaded.samples.size(), loaded.num_classes, seconds_since(t0));

    bool geometry_ok = true;
    for (const Sample& s : loaded.samples) {
        geometry_ok = geometry_ok && s.image.width == 46 && s.image.height == 56;
    }

    if (loaded.samples.size() != 2000 || loaded.num_classes != 16 || !geometry_ok) {
        return report(5, kFail, "expected 2000 images in 16 classes at 46x56");
    }
    std::printf("quantitative OTCBVS rates (87.84%% visual, 96.36%% log-polar) are "
                "reference-only: the dataset is access-restricted\n");
    return report(5, kPass, "ingestion of a 2000-image, 16-class generic tree");
}

}  // namespace

int main(int argc, char** argv) {
    int criterion = 0;
    std::string orl_dir;
    if (const char* env = std::getenv("LPFACE_ORL_DIR")) {
        orl_dir = env;
    }

    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            criterion = std::atoi(argv[++i]);
        } else if (std::strcmp(argv[i], "--orl") == 0 && i + 1 < argc) {
            orl_dir = argv[++i];
        } else {
            std::fprintf(stderr, "usage: acceptance --criterion N [--orl ORL_DIR]\n");
            return kFail;
        }
    }
    if (criterion < 1 || criterion > 5) {
        std::fprintf(stderr, "usage: acceptance --criterion N (N in 1..5)\n");
        return kFail;
    }

    try {
        switch (criterion) {
            case 1: return criterion_property_suite(orl_dir);
            case 2: return criterion_xor();
            case 3: return criterion_figure6(orl_dir);
            case 4: return criterion_orl_end_to_end(orl_dir);
            default: return criterion_otcbvs_ingestion();
        }
    } catch (const Error& e) {
        return report(criterion, kFail, std::string("unexpected error: ") + e.what());
    } catch (const std::exception& e) {
        return report(criterion, kFail, std::string("unexpected error: ") + e.what());
    }
}
