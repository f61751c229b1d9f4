#include "lpface/pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include "lpface/errors.hpp"
#include "lpface/logpolar.hpp"

namespace lpface {
namespace {

/// Applies the configured spatial transform and flattens column-major.
ImageVector transform_image(const GrayImage& img, PipelineMode mode,
                            const LogPolarConfig& cfg) {
    if (mode == PipelineMode::log_polar) {
        return to_vector(log_polar_transform(img, cfg));
    }
    return to_vector(img);
}

/// Zero-pads a projection up to the fixed network input width.
std::vector<double> pad_features(FeatureVector f, int width) {
    if (static_cast<int>(f.size()) > width) {
        throw InvalidInput("projection is wider than the network input (" +
                           std::to_string(f.size()) + " > " + std::to_string(width) + ")");
    }
    f.resize(static_cast<std::size_t>(width), 0.0);
    return f;
}

struct Prepared {
    int width = 0;
    int height = 0;
    Eigenspace space;
    std::vector<double> feature_scale;
    Batch batch;
};

/// Divisor that maps the training projections into [-1, 1], the tanh
/// network's useful input range (raw projections reach magnitudes of
/// thousands on 8-bit images, which would pin every first-layer unit).
/// One shared divisor — the training-wide maximum magnitude — changes only
/// the units, keeping the components' relative amplitudes (the eigenvalue
/// structure) intact.
std::vector<double> fit_feature_scale(const Batch& batch, int width) {
    double top = 0.0;
    for (const TrainingExample& ex : batch) {
        for (double v : ex.input) {
            top = std::max(top, std::abs(v));
        }
    }
    if (top <= 0.0) {
        top = 1.0;
    }
    return std::vector<double>(static_cast<std::size_t>(width), top);
}

void apply_feature_scale(std::vector<double>& features, const std::vector<double>& scale) {
    for (std::size_t i = 0; i < features.size(); ++i) {
        features[i] /= scale[i];
    }
}

/// Start every output bias at the class prior, atanh(mean target). With K
/// classes the +/-1 one-hot coding makes each output unit's targets
/// (K-1):1 negative; from a zero bias the very first summed-batch update
/// would then be about -eta * P * (K-2)/K — trivially saturating for a
/// 40-class, 200-pattern batch — after which momentum drives the unit so
/// deep into tanh's tail that every gradient underflows. Starting at the
/// prior makes the initial bias gradient vanish instead. Balanced targets
/// (mean 0) leave the bias at zero, so small tasks are unaffected.
void calibrate_output_bias(Network& net, const Batch& batch) {
    if (net.layers.empty() || batch.empty()) {
        return;
    }
    std::vector<double>& bias = net.layers.back().bias;
    for (std::size_t i = 0; i < bias.size(); ++i) {
        double mean = 0.0;
        for (const TrainingExample& ex : batch) {
            mean += ex.target[i];
        }
        mean /= static_cast<double>(batch.size());
        mean = std::clamp(mean, -0.999999, 0.999999);
        bias[i] = std::atanh(mean);
    }
}

/// Shared front half of training: transform every image, build the
/// eigenspace, and emit the projected + padded training batch.
Prepared prepare_features(const Dataset& train_set, PipelineMode mode,
                          const LogPolarConfig& lp_cfg, int feature_width) {
    if (train_set.samples.empty()) {
        throw InvalidInput("training set is empty");
    }
    if (train_set.num_classes < 1) {
        throw InvalidInput("training set declares no classes");
    }
    if (feature_width < 1) {
        throw InvalidInput("feature width must be positive");
    }

    Prepared prep;
    prep.width = train_set.samples.front().image.width;
    prep.height = train_set.samples.front().image.height;

    std::vector<ImageVector> vectors;
    vectors.reserve(train_set.samples.size());
    for (const Sample& s : train_set.samples) {
        if (s.image.width != prep.width || s.image.height != prep.height) {
            throw InvalidInput("training images disagree on geometry: expected " +
                               std::to_string(prep.width) + "x" + std::to_string(prep.height) +
                               ", got " + std::to_string(s.image.width) + "x" +
                               std::to_string(s.image.height));
        }
        if (s.subject < 0 || s.subject >= train_set.num_classes) {
            throw InvalidInput("training label " + std::to_string(s.subject) +
                               " outside [0, " + std::to_string(train_set.num_classes) + ")");
        }
        vectors.push_back(transform_image(s.image, mode, lp_cfg));
    }

    const ImageVector mean = mean_image(vectors);
    const Matrix data = center(vectors, mean);
    prep.space = build_eigenspace(data, mean, feature_width);

    prep.batch.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        prep.batch.push_back({pad_features(project(prep.space, vectors[i]), feature_width),
                              encode_target(train_set.samples[i].subject,
                                            train_set.num_classes)});
    }
    prep.feature_scale = fit_feature_scale(prep.batch, feature_width);
    for (TrainingExample& ex : prep.batch) {
        apply_feature_scale(ex.input, prep.feature_scale);
    }
    return prep;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw PersistenceError("cannot open " + path + " for writing");
    }
    return out;
}

void finish_csv(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) {
        throw PersistenceError("failed while writing " + path);
    }
}

}  // namespace

int Metrics::total() const {
    int t = 0;
    for (const auto& row : confusion) {
        for (int v : row) {
            t += v;
        }
    }
    return t;
}

MetricsAccumulator::MetricsAccumulator(int num_classes, double threshold)
    : threshold_(threshold),
      confusion_(static_cast<std::size_t>(num_classes < 0 ? 0 : num_classes),
                 std::vector<int>(static_cast<std::size_t>(num_classes < 0 ? 0 : num_classes), 0)) {
    if (num_classes < 1) {
        throw InvalidInput("metrics need at least one class");
    }
}

void MetricsAccumulator::add(int true_label, int predicted, double top_score) {
    const int n = static_cast<int>(confusion_.size());
    if (true_label < 0 || true_label >= n || predicted < 0 || predicted >= n) {
        throw InvalidInput("label outside [0, " + std::to_string(n) +
                           ") in metrics accumulation");
    }
    ++total_;
    confusion_[static_cast<std::size_t>(true_label)][static_cast<std::size_t>(predicted)] += 1;
    const bool correct = predicted == true_label;
    if (correct) {
        ++correct_;
    }
    if (!correct || top_score < threshold_) {
        ++rejected_;
    }
    curve_.push_back({total_, 100.0 * correct_ / total_, 100.0 * rejected_ / total_});
}

Metrics MetricsAccumulator::finish() const {
    Metrics m;
    m.confusion = confusion_;
    m.curve = curve_;
    if (total_ > 0) {
        m.recognition_rate = 100.0 * correct_ / total_;
        m.false_rejection_rate = 100.0 * rejected_ / total_;
    }
    return m;
}

ModelBundle train_pipeline(const Dataset& train_set, PipelineMode mode,
                           const LogPolarConfig& lp_cfg, const Hyperparams& hp,
                           int feature_width, int hidden1, int hidden2) {
    if (hidden1 < 1 || hidden2 < 1) {
        throw InvalidInput("hidden layer sizes must be positive");
    }
    hp.validate();

    Prepared prep = prepare_features(train_set, mode, lp_cfg, feature_width);

    ModelBundle bundle;
    bundle.mode = mode;
    bundle.logpolar = lp_cfg;
    bundle.input_width = prep.width;
    bundle.input_height = prep.height;
    bundle.feature_width = feature_width;
    bundle.num_classes = train_set.num_classes;
    bundle.eigenspace = std::move(prep.space);
    bundle.feature_scale = prep.feature_scale;
    bundle.network = init_network({feature_width, hidden1, hidden2, train_set.num_classes},
                                  hp.seed);
    calibrate_output_bias(bundle.network, prep.batch);
    bundle.hyperparams = hp;

    const TrainResult result = train(bundle.network, prep.batch, hp);
    bundle.info.seed = hp.seed;
    bundle.info.epochs_run = result.epochs_run;
    bundle.info.final_error = result.final_error;
    bundle.info.stop_reason = to_string(result.stop);
    bundle.info.feature_padding = bundle.eigenspace.components() < feature_width;
    return bundle;
}

FeatureVector extract_features(const ModelBundle& bundle, const GrayImage& img) {
    if (img.width != bundle.input_width || img.height != bundle.input_height) {
        throw InvalidInput("image geometry " + std::to_string(img.width) + "x" +
                           std::to_string(img.height) + " does not match the bundle's " +
                           std::to_string(bundle.input_width) + "x" +
                           std::to_string(bundle.input_height));
    }
    const ImageVector vec = transform_image(img, bundle.mode, bundle.logpolar);
    if (static_cast<int>(vec.size()) != bundle.eigenspace.dim()) {
        throw InvalidInput("transformed image width " + std::to_string(vec.size()) +
                           " does not match the eigenspace dimension " +
                           std::to_string(bundle.eigenspace.dim()));
    }
    std::vector<double> features =
        pad_features(project(bundle.eigenspace, vec), bundle.feature_width);
    if (!bundle.feature_scale.empty()) {
        if (bundle.feature_scale.size() != features.size()) {
            throw InvalidInput("bundle feature_scale length " +
                               std::to_string(bundle.feature_scale.size()) +
                               " does not match the feature width " +
                               std::to_string(features.size()));
        }
        apply_feature_scale(features, bundle.feature_scale);
    }
    return features;
}

Metrics evaluate(const ModelBundle& bundle, const Dataset& test, double threshold) {
    if (test.samples.empty()) {
        throw InvalidInput("test set is empty");
    }
    MetricsAccumulator acc(bundle.num_classes, threshold);
    for (const Sample& s : test.samples) {
        if (s.subject < 0 || s.subject >= bundle.num_classes) {
            throw InvalidInput("test label " + std::to_string(s.subject) +
                               " outside the bundle's " + std::to_string(bundle.num_classes) +
                               " classes");
        }
        const FeatureVector features = extract_features(bundle, s.image);
        const Classification c = classify(bundle.network, features);
        acc.add(s.subject, c.label, c.scores[static_cast<std::size_t>(c.label)]);
    }
    return acc.finish();
}

std::vector<SweepTrace> sweep_hidden1(const Dataset& train_set, PipelineMode mode,
                                      const LogPolarConfig& lp_cfg, Hyperparams hp,
                                      const std::vector<int>& sizes, int epoch_budget,
                                      int feature_width, int hidden2) {
    if (sizes.empty()) {
        throw InvalidInput("sweep needs at least one hidden-layer size");
    }
    if (epoch_budget < 1) {
        throw InvalidInput("sweep epoch budget must be positive");
    }
    if (hidden2 < 1) {
        throw InvalidInput("hidden layer sizes must be positive");
    }
    hp.max_epochs = epoch_budget;
    hp.validate();

    const Prepared prep = prepare_features(train_set, mode, lp_cfg, feature_width);

    std::vector<SweepTrace> traces;
    traces.reserve(sizes.size());
    for (int h1 : sizes) {
        SweepTrace trace;
        trace.hidden1 = h1;
        try {
            if (h1 < 1) {
                throw InvalidInput("hidden layer size must be positive");
            }
            Network net = init_network(
                {feature_width, h1, hidden2, train_set.num_classes}, hp.seed);
            calibrate_output_bias(net, prep.batch);
            TrainResult result = train(net, prep.batch, hp);
            trace.error_trace = std::move(result.error_trace);
        } catch (const Error& e) {
            trace.failed = true;
            trace.message = e.what();
        }
        traces.push_back(std::move(trace));
    }
    return traces;
}

ReferenceResults orl_reference(PipelineMode mode) {
    if (mode == PipelineMode::log_polar) {
        return {97.5, 2.5};
    }
    return {89.5, 10.5};
}

ReferenceResults otcbvs_reference(PipelineMode mode) {
    if (mode == PipelineMode::log_polar) {
        return {96.36, 100.0 - 96.36};
    }
    return {87.84, 100.0 - 87.84};
}

void write_curve_csv(const Metrics& metrics, const std::string& path) {
    std::ofstream out = open_csv(path);
    out << "n_test,recognition_rate,false_rejection_rate\n";
    char line[96];
    for (const Metrics::CurvePoint& p : metrics.curve) {
        std::snprintf(line, sizeof line, "%d,%.4f,%.4f\n", p.n_test, p.recognition_rate,
                      p.false_rejection_rate);
        out << line;
    }
    finish_csv(out, path);
}

void write_summary_csv(const Metrics& metrics, const std::optional<ReferenceResults>& reference,
                       const std::string& path) {
    std::ofstream out = open_csv(path);
    out << "metric,measured,reference\n";
    char line[128];
    const auto row = [&](const char* name, double measured, std::optional<double> ref) {
        if (ref) {
            std::snprintf(line, sizeof line, "%s,%.4f,%.4f\n", name, measured, *ref);
        } else {
            std::snprintf(line, sizeof line, "%s,%.4f,\n", name, measured);
        }
        out << line;
    };
    row("recognition_rate_percent", metrics.recognition_rate,
        reference ? std::optional<double>(reference->recognition_rate) : std::nullopt);
    row("error_rate_percent", 100.0 - metrics.recognition_rate,
        reference ? std::optional<double>(reference->error_rate) : std::nullopt);
    row("false_rejection_rate_percent", metrics.false_rejection_rate, std::nullopt);
    finish_csv(out, path);
}

void write_sweep_csv(const std::vector<SweepTrace>& traces, const std::string& path) {
    std::ofstream out = open_csv(path);
    out << "hidden1,epoch,total_error\n";
    char line[96];
    for (const SweepTrace& t : traces) {
        for (std::size_t e = 0; e < t.error_trace.size(); ++e) {
            std::snprintf(line, sizeof line, "%d,%d,%.8g\n", t.hidden1,
                          static_cast<int>(e) + 1, t.error_trace[e]);
            out << line;
        }
    }
    finish_csv(out, path);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string config_at(const std::string& path, int lineno) {
    return path + ":" + std::to_string(lineno) + ": ";
}

double config_double(const std::string& value, const std::string& where) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || errno == ERANGE || !std::isfinite(x)) {
        throw InvalidInput(where + "expected a finite number, got '" + value + "'");
    }
    return x;
}

long long config_int(const std::string& value, const std::string& where) {
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size() || errno == ERANGE) {
        throw InvalidInput(where + "expected an integer, got '" + value + "'");
    }
    return x;
}

long long config_int_range(const std::string& value, const std::string& where, long long lo,
                           long long hi) {
    const long long x = config_int(value, where);
    if (x < lo || x > hi) {
        throw InvalidInput(where + "value " + value + " outside [" + std::to_string(lo) +
                           ", " + std::to_string(hi) + "]");
    }
    return x;
}

void apply_config_entry(RunConfig& cfg, const std::string& section, const std::string& key,
                        const std::string& value, const std::string& where) {
    if (section == "logpolar") {
        if (key == "base") {
            cfg.logpolar.base = static_cast<int>(config_int_range(value, where, 2, 1024));
        } else if (key == "r_min") {
            cfg.logpolar.r_min = config_double(value, where);
        } else if (key == "fill") {
            cfg.logpolar.fill =
                static_cast<std::uint8_t>(config_int_range(value, where, 0, 255));
        } else {
            throw InvalidInput(where + "unknown key '" + key + "' in [logpolar]");
        }
        return;
    }
    if (section == "mlp") {
        if (key == "learning_rate") {
            cfg.mlp.learning_rate = config_double(value, where);
        } else if (key == "momentum") {
            cfg.mlp.momentum = config_double(value, where);
        } else if (key == "rate_increment") {
            cfg.mlp.rate_increment = config_double(value, where);
        } else if (key == "rate_decay") {
            cfg.mlp.rate_decay = config_double(value, where);
        } else if (key == "smoothing") {
            cfg.mlp.smoothing = config_double(value, where);
        } else if (key == "max_epochs") {
            cfg.mlp.max_epochs = static_cast<int>(config_int_range(value, where, 1, 100000000));
        } else if (key == "gradient_goal") {
            cfg.mlp.gradient_goal = config_double(value, where);
        } else if (key == "error_goal") {
            cfg.mlp.error_goal = config_double(value, where);
        } else if (key == "seed") {
            cfg.mlp.seed =
                static_cast<std::uint32_t>(config_int_range(value, where, 0, 4294967295LL));
        } else {
            throw InvalidInput(where + "unknown key '" + key + "' in [mlp]");
        }
        return;
    }
    if (section == "split") {
        if (key == "per_class_train") {
            cfg.split.per_class_train =
                static_cast<int>(config_int_range(value, where, 1, 1000000));
        } else if (key == "seed") {
            cfg.split.seed =
                static_cast<std::uint32_t>(config_int_range(value, where, 0, 4294967295LL));
        } else if (key == "mode") {
            if (value == "first_k") {
                cfg.split.mode = SplitSpec::Mode::first_k;
            } else if (value == "seeded_random") {
                cfg.split.mode = SplitSpec::Mode::seeded_random;
            } else {
                throw InvalidInput(where +
                                   "split mode must be first_k or seeded_random, got '" +
                                   value + "'");
            }
        } else {
            throw InvalidInput(where + "unknown key '" + key + "' in [split]");
        }
        return;
    }
    throw InvalidInput(where + "key '" + key + "' appears outside any section");
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open config file " + path);
    }
    RunConfig cfg;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const std::string where = config_at(path, lineno);
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw InvalidInput(where + "unterminated section header '" + t + "'");
            }
            section = trim(t.substr(1, t.size() - 2));
            if (section != "logpolar" && section != "mlp" && section != "split") {
                throw InvalidInput(where + "unknown section [" + section + "]");
            }
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput(where + "expected 'key = value', got '" + t + "'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw InvalidInput(where + "expected 'key = value', got '" + t + "'");
        }
        apply_config_entry(cfg, section, key, value, where);
    }
    cfg.mlp.validate();
    return cfg;
}

}  // namespace lpface
