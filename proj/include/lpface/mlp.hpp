#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpface/matrix.hpp"

namespace lpface {

/// One fully connected layer: weights is (outputs x inputs), bias matches
/// the output width. Also reused as the shape-congruent container for
/// gradients and per-parameter trainer state.
struct Layer {
    Matrix weights;
    std::vector<double> bias;
};

/// Feed-forward network with tanh activation on every layer, so outputs
/// live in (-1, 1). layer_sizes runs [n_in, hidden..., n_out].
struct Network {
    std::vector<int> layer_sizes;
    std::vector<Layer> layers;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
};

/// Training knobs. The per-parameter learning rates start at
/// learning_rate and adapt each epoch: +rate_increment while the current
/// gradient agrees in sign with its smoothed history, -rate_decay
/// (multiplicative) when they disagree.
struct Hyperparams {
    double learning_rate = 0.02;     ///< initial per-parameter rate
    double momentum = 0.9;           ///< fraction of the previous update carried over
    double rate_increment = 0.001;   ///< additive rate increase on sign agreement
    double rate_decay = 0.5;         ///< multiplicative rate decrease on disagreement
    double smoothing = 0.7;          ///< weight of history in the smoothed gradient
    int max_epochs = 70000;
    double gradient_goal = 1e-6;     ///< stop when the gradient L2 norm drops here
    double error_goal = 0.0;         ///< stop when total error E drops here
    std::uint32_t seed = 0;

    void validate() const;
};

/// One training pattern: input feature vector plus the +/-1 one-hot target.
struct TrainingExample {
    std::vector<double> input;
    std::vector<double> target;
};
using Batch = std::vector<TrainingExample>;

/// +1 at position label, -1 elsewhere (tanh output range).
std::vector<double> encode_target(int label, int n_classes);

/// Gradients of the batch error, shape-congruent to Network::layers.
using Gradients = std::vector<Layer>;

/// Per-parameter trainer state: adaptive learning rates, smoothed
/// gradients, and previous updates, each mirroring the network's shapes.
struct TrainState {
    std::vector<Layer> learning_rates;
    std::vector<Layer> smoothed_gradients;
    std::vector<Layer> previous_updates;

    static TrainState for_network(const Network& net, double initial_rate);
};

/// Weights drawn uniformly from [-1/sqrt(fan_in), +1/sqrt(fan_in)] by a
/// seeded generator (bit-reproducible across platforms); biases start at
/// zero.
Network init_network(const std::vector<int>& layer_sizes, std::uint32_t seed);

/// All layer activations in order: [input, hidden..., output].
std::vector<std::vector<double>> forward_trace(const Network& net, const std::vector<double>& x);

/// Output layer only.
std::vector<double> forward(const Network& net, const std::vector<double>& x);

/// Total squared error E = sum_k 1/2 sum_i (d_i - y_i)^2 over the batch.
double batch_error(const Network& net, const Batch& batch);

/// Analytic dE/dw for every weight and bias, summed over the batch in
/// pattern order (fixed order keeps training bit-deterministic).
Gradients backward(const Network& net, const Batch& batch);

/// L2 norm over every gradient entry, layer by layer.
double gradient_norm(const Gradients& grads);

/// One delta-bar-delta step. Per parameter, in order: adapt the learning
/// rate from the sign of (smoothed previous gradient x current gradient),
/// refresh the smoothed gradient, then apply the momentum update
/// dw = -eta * grad + momentum * dw_prev.
void update_weights(Network& net, const Gradients& grads, TrainState& state,
                    const Hyperparams& hp);

enum class StopReason { error_goal, gradient_goal, epoch_cap };

const char* to_string(StopReason reason);

struct TrainResult {
    std::vector<double> error_trace;  ///< E measured at the start of each epoch
    int epochs_run = 0;               ///< number of full passes evaluated
    StopReason stop = StopReason::epoch_cap;
    double final_error = 0.0;         ///< last entry of error_trace
};

/// Full-batch training loop: evaluate E and the summed gradient, stop if
/// E <= error_goal or ||grad|| <= gradient_goal, otherwise update weights
/// once per epoch, up to max_epochs. Throws TrainingDiverged (with the
/// epoch) if E or any gradient goes non-finite. Deterministic given the
/// network, batch and hyperparameters.
TrainResult train(Network& net, const Batch& batch, const Hyperparams& hp);

struct Classification {
    int label = 0;
    std::vector<double> scores;
};

/// Argmax over the network outputs; ties break to the lowest index.
Classification classify(const Network& net, const std::vector<double>& x);

}  // namespace lpface
