#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lpface/bundle.hpp"
#include "lpface/dataset.hpp"

namespace lpface {

/// Evaluation results over a test set.
struct Metrics {
    double recognition_rate = 0.0;        ///< percent correctly identified
    double false_rejection_rate = 0.0;    ///< percent misclassified or scoring under threshold
    std::vector<std::vector<int>> confusion;  ///< [true][predicted] counts

    struct CurvePoint {
        int n_test = 0;
        double recognition_rate = 0.0;
        double false_rejection_rate = 0.0;
    };
    /// Rates over growing test-set prefixes (one point per prefix size).
    std::vector<CurvePoint> curve;

    int total() const;
};

/// Streaming metric computation; one add() per test sample, in order.
/// A sample counts as falsely rejected when it is misclassified or its
/// winning score falls below the threshold.
class MetricsAccumulator {
public:
    MetricsAccumulator(int num_classes, double threshold);

    void add(int true_label, int predicted, double top_score);
    Metrics finish() const;

private:
    double threshold_;
    int total_ = 0;
    int correct_ = 0;
    int rejected_ = 0;
    std::vector<std::vector<int>> confusion_;
    std::vector<Metrics::CurvePoint> curve_;
};

/// Full training stage: optionally log-polar transform every image,
/// build the eigenspace from the training vectors (at most feature_width
/// components), project, and train the classifier on the projections.
/// Projections are zero-padded up to feature_width when the eigenspace
/// is narrower, so the network input width stays fixed.
ModelBundle train_pipeline(const Dataset& train, PipelineMode mode,
                           const LogPolarConfig& lp_cfg, const Hyperparams& hp,
                           int feature_width = 40, int hidden1 = 40, int hidden2 = 25);

/// Image -> padded feature vector, applying exactly the transform the
/// bundle was trained with. Throws InvalidInput when the image geometry
/// does not match the bundle.
FeatureVector extract_features(const ModelBundle& bundle, const GrayImage& img);

/// Classifies every test sample and accumulates metrics. threshold feeds
/// the false-rejection rule (winning score below it = rejection).
Metrics evaluate(const ModelBundle& bundle, const Dataset& test, double threshold = 0.0);

/// One hidden-layer-1 size tried under a fixed epoch budget.
struct SweepTrace {
    int hidden1 = 0;
    std::vector<double> error_trace;
    bool failed = false;
    std::string message;
};

/// Trains one network per hidden-layer-1 size with a shared seed and
/// epoch budget over the same projected features; individual failures are
/// recorded without aborting the sweep.
std::vector<SweepTrace> sweep_hidden1(const Dataset& train, PipelineMode mode,
                                      const LogPolarConfig& lp_cfg, Hyperparams hp,
                                      const std::vector<int>& sizes, int epoch_budget,
                                      int feature_width = 40, int hidden2 = 25);

/// Published reference results used for side-by-side reporting in the
/// evaluation summary (rates in percent).
struct ReferenceResults {
    double recognition_rate = 0.0;
    double error_rate = 0.0;
};

/// ORL references: 89.5% / error 10.5% for the visual route, 97.5% /
/// error 2.5% for the log-polar route.
ReferenceResults orl_reference(PipelineMode mode);

/// OTCBVS references: 87.84% visual, 96.36% log-polar. Documented
/// comparison points only; that dataset is access-restricted.
ReferenceResults otcbvs_reference(PipelineMode mode);

/// n_test,recognition_rate,false_rejection_rate rows, one per prefix.
void write_curve_csv(const Metrics& metrics, const std::string& path);

/// metric,measured,reference rows; the reference column is left blank
/// when no reference is given.
void write_summary_csv(const Metrics& metrics, const std::optional<ReferenceResults>& reference,
                       const std::string& path);

/// hidden1,epoch,total_error rows for every trace in the sweep.
void write_sweep_csv(const std::vector<SweepTrace>& traces, const std::string& path);

/// Settings read from a run configuration file: flat "key = value" lines
/// under [logpolar], [mlp] and [split] sections; '#' starts a comment.
struct RunConfig {
    LogPolarConfig logpolar;
    Hyperparams mlp;
    SplitSpec split;
};

RunConfig load_run_config(const std::string& path);

}  // namespace lpface
