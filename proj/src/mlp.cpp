#include "lpface/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lpface/errors.hpp"

namespace lpface {

namespace {

Layer zero_like(const Layer& layer, double value = 0.0) {
    Layer out;
    out.weights = Matrix(layer.weights.rows(), layer.weights.cols(), value);
    out.bias.assign(layer.bias.size(), value);
    return out;
}

void check_input_size(const Network& net, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != net.input_size()) {
        throw InvalidInput("input length " + std::to_string(x.size()) +
                           " does not match network input size " +
                           std::to_string(net.input_size()));
    }
}

bool all_finite(const Gradients& grads) {
    for (const auto& layer : grads) {
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            if (!std::isfinite(layer.weights.data()[i])) return false;
        }
        for (double b : layer.bias) {
            if (!std::isfinite(b)) return false;
        }
    }
    return true;
}

/// Shared forward+backward pass; batch_error / backward / train all go
/// through here so the accumulation order is identical everywhere.
struct BatchEvaluation {
    double error = 0.0;
    Gradients grads;
};

BatchEvaluation evaluate_batch(const Network& net, const Batch& batch, bool want_grads) {
    if (batch.empty()) {
        throw InvalidInput("empty training batch");
    }
    BatchEvaluation out;
    if (want_grads) {
        out.grads.reserve(net.layers.size());
        for (const auto& layer : net.layers) out.grads.push_back(zero_like(layer));
    }

    const int n_layers = static_cast<int>(net.layers.size());
    for (const auto& example : batch) {
        check_input_size(net, example.input);
        if (static_cast<int>(example.target.size()) != net.output_size()) {
            throw InvalidInput("target length does not match network output size");
        }

        const auto activations = forward_trace(net, example.input);
        const auto& output = activations.back();

        for (std::size_t i = 0; i < output.size(); ++i) {
            const double diff = example.target[i] - output[i];
            out.error += 0.5 * diff * diff;
        }
        if (!want_grads) continue;

        // delta at the output: (y - d) * (1 - y^2), then chain backwards.
        std::vector<double> delta(output.size());
        for (std::size_t i = 0; i < output.size(); ++i) {
            delta[i] = (output[i] - example.target[i]) * (1.0 - output[i] * output[i]);
        }
        for (int l = n_layers - 1; l >= 0; --l) {
            const auto& prev = activations[static_cast<std::size_t>(l)];
            auto& grad = out.grads[static_cast<std::size_t>(l)];
            const Matrix& w = net.layers[static_cast<std::size_t>(l)].weights;

            for (int i = 0; i < w.rows(); ++i) {
                const double di = delta[static_cast<std::size_t>(i)];
                grad.bias[static_cast<std::size_t>(i)] += di;
                for (int j = 0; j < w.cols(); ++j) {
                    grad.weights(i, j) += di * prev[static_cast<std::size_t>(j)];
                }
            }
            if (l == 0) break;

            std::vector<double> next(prev.size());
            for (int j = 0; j < w.cols(); ++j) {
                double acc = 0.0;
                for (int i = 0; i < w.rows(); ++i) {
                    acc += w(i, j) * delta[static_cast<std::size_t>(i)];
                }
                const double a = prev[static_cast<std::size_t>(j)];
                next[static_cast<std::size_t>(j)] = acc * (1.0 - a * a);
            }
            delta = std::move(next);
        }
    }
    return out;
}

/// Delta-bar-delta update of a single parameter. The rate adapts on the
/// sign of lambda_bar(t-1) * lambda(t) before lambda_bar is refreshed.
inline void update_parameter(double& w, double grad, double& rate, double& smoothed,
                             double& prev_update, const Hyperparams& hp) {
    const double agreement = smoothed * grad;
    if (agreement > 0.0) {
        rate += hp.rate_increment;
    } else if (agreement < 0.0) {
        rate -= hp.rate_decay * rate;
    }
    smoothed = (1.0 - hp.smoothing) * grad + hp.smoothing * smoothed;
    const double dw = -rate * grad + hp.momentum * prev_update;
    w += dw;
    prev_update = dw;
}

}  // namespace

void Hyperparams::validate() const {
    if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be positive");
    if (momentum < 0.0 || momentum > 1.0) throw InvalidInput("momentum must lie in [0, 1]");
    if (rate_increment < 0.0) throw InvalidInput("rate_increment must be non-negative");
    if (rate_decay < 0.0 || rate_decay >= 1.0) throw InvalidInput("rate_decay must lie in [0, 1)");
    if (smoothing < 0.0 || smoothing > 1.0) throw InvalidInput("smoothing must lie in [0, 1]");
    if (max_epochs < 1) throw InvalidInput("max_epochs must be at least 1");
}

std::vector<double> encode_target(int label, int n_classes) {
    if (label < 0 || label >= n_classes) {
        throw InvalidInput("label " + std::to_string(label) + " outside [0, " +
                           std::to_string(n_classes) + ")");
    }
    std::vector<double> target(static_cast<std::size_t>(n_classes), -1.0);
    target[static_cast<std::size_t>(label)] = 1.0;
    return target;
}

TrainState TrainState::for_network(const Network& net, double initial_rate) {
    TrainState state;
    for (const auto& layer : net.layers) {
        state.learning_rates.push_back(zero_like(layer, initial_rate));
        state.smoothed_gradients.push_back(zero_like(layer));
        state.previous_updates.push_back(zero_like(layer));
    }
    return state;
}

Network init_network(const std::vector<int>& layer_sizes, std::uint32_t seed) {
    if (layer_sizes.size() < 2) {
        throw InvalidInput("a network needs at least input and output layers");
    }
    for (int size : layer_sizes) {
        if (size < 1) throw InvalidInput("layer widths must be at least 1");
    }

    std::mt19937 rng(seed);
    // Raw engine output mapped to [0, 1) by hand; std::uniform_real_distribution
    // is not bit-reproducible across standard libraries.
    auto unit = [&rng]() { return static_cast<double>(rng()) * 0x1p-32; };

    Network net;
    net.layer_sizes = layer_sizes;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Layer layer;
        layer.weights = Matrix(fan_out, fan_in);
        layer.bias.assign(static_cast<std::size_t>(fan_out), 0.0);
        for (int i = 0; i < fan_out; ++i) {
            for (int j = 0; j < fan_in; ++j) {
                layer.weights(i, j) = (2.0 * unit() - 1.0) * bound;
            }
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

std::vector<std::vector<double>> forward_trace(const Network& net, const std::vector<double>& x) {
    check_input_size(net, x);
    std::vector<std::vector<double>> activations;
    activations.reserve(net.layers.size() + 1);
    activations.push_back(x);
    for (const auto& layer : net.layers) {
        const auto& prev = activations.back();
        std::vector<double> next(layer.bias.size());
        for (int i = 0; i < layer.weights.rows(); ++i) {
            double z = layer.bias[static_cast<std::size_t>(i)];
            for (int j = 0; j < layer.weights.cols(); ++j) {
                z += layer.weights(i, j) * prev[static_cast<std::size_t>(j)];
            }
            next[static_cast<std::size_t>(i)] = std::tanh(z);
        }
        activations.push_back(std::move(next));
    }
    return activations;
}

std::vector<double> forward(const Network& net, const std::vector<double>& x) {
    return forward_trace(net, x).back();
}

double batch_error(const Network& net, const Batch& batch) {
    return evaluate_batch(net, batch, /*want_grads=*/false).error;
}

Gradients backward(const Network& net, const Batch& batch) {
    return evaluate_batch(net, batch, /*want_grads=*/true).grads;
}

double gradient_norm(const Gradients& grads) {
    double acc = 0.0;
    for (const auto& layer : grads) {
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            acc += layer.weights.data()[i] * layer.weights.data()[i];
        }
        for (double b : layer.bias) acc += b * b;
    }
    return std::sqrt(acc);
}

void update_weights(Network& net, const Gradients& grads, TrainState& state,
                    const Hyperparams& hp) {
    if (grads.size() != net.layers.size()) {
        throw InvalidInput("gradient shape does not match the network");
    }
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Layer& layer = net.layers[l];
        const Layer& grad = grads[l];
        Layer& rates = state.learning_rates[l];
        Layer& smoothed = state.smoothed_gradients[l];
        Layer& prev = state.previous_updates[l];
        if (grad.weights.rows() != layer.weights.rows() ||
            grad.weights.cols() != layer.weights.cols() ||
            grad.bias.size() != layer.bias.size()) {
            throw InvalidInput("gradient shape does not match the network");
        }

        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            update_parameter(layer.weights.data()[i], grad.weights.data()[i],
                             rates.weights.data()[i], smoothed.weights.data()[i],
                             prev.weights.data()[i], hp);
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            update_parameter(layer.bias[i], grad.bias[i], rates.bias[i], smoothed.bias[i],
                             prev.bias[i], hp);
        }
    }
}

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::error_goal: return "error_goal";
        case StopReason::gradient_goal: return "gradient_goal";
        case StopReason::epoch_cap: return "epoch_cap";
    }
    return "unknown";
}

TrainResult train(Network& net, const Batch& batch, const Hyperparams& hp) {
    hp.validate();
    if (batch.empty()) {
        throw InvalidInput("empty training set");
    }

    TrainState state = TrainState::for_network(net, hp.learning_rate);
    TrainResult result;
    result.error_trace.reserve(static_cast<std::size_t>(std::min(hp.max_epochs, 1 << 20)));

    for (int epoch = 1; epoch <= hp.max_epochs; ++epoch) {
        BatchEvaluation eval = evaluate_batch(net, batch, /*want_grads=*/true);
        if (!std::isfinite(eval.error) || !all_finite(eval.grads)) {
            throw TrainingDiverged("training diverged (non-finite error or gradient) at epoch " +
                                       std::to_string(epoch),
                                   epoch);
        }
        result.error_trace.push_back(eval.error);
        result.epochs_run = epoch;

        if (eval.error <= hp.error_goal) {
            result.stop = StopReason::error_goal;
            break;
        }
        if (gradient_norm(eval.grads) <= hp.gradient_goal) {
            result.stop = StopReason::gradient_goal;
            break;
        }
        update_weights(net, eval.grads, state, hp);
    }
    result.final_error = result.error_trace.back();
    return result;
}

Classification classify(const Network& net, const std::vector<double>& x) {
    Classification out;
    out.scores = forward(net, x);
    out.label = 0;
    for (std::size_t i = 1; i < out.scores.size(); ++i) {
        if (out.scores[i] > out.scores[static_cast<std::size_t>(out.label)]) {
            out.label = static_cast<int>(i);
        }
    }
    return out;
}

}  // namespace lpface
