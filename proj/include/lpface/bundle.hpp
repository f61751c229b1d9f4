#pragma once

#include <cstdint>
#include <string>

#include "lpface/eigenspace.hpp"
#include "lpface/logpolar.hpp"
#include "lpface/mlp.hpp"

namespace lpface {

enum class PipelineMode { visual, log_polar };

const char* to_string(PipelineMode mode);
PipelineMode pipeline_mode_from_string(const std::string& name);

/// How a trained bundle came to be; carried for reproducibility.
struct TrainingInfo {
    std::uint32_t seed = 0;
    int epochs_run = 0;
    double final_error = 0.0;
    std::string stop_reason;
    /// True when the eigenspace held fewer positive eigenvalues than the
    /// feature width and projections are zero-padded up to it.
    bool feature_padding = false;
};

/// Everything needed to classify new images: the transform configuration,
/// the eigenspace, and the trained network, plus the geometry they expect.
struct ModelBundle {
    static constexpr int format_version = 1;

    PipelineMode mode = PipelineMode::log_polar;
    LogPolarConfig logpolar;
    int input_width = 0;    ///< raw image geometry the bundle accepts
    int input_height = 0;
    int feature_width = 0;  ///< network input size (projections padded to this)
    int num_classes = 0;
    Eigenspace eigenspace;
    /// Per-component divisors that bring every training projection into
    /// [-1, 1] (the network's useful input range); length feature_width.
    /// Applied identically at train and inference time.
    std::vector<double> feature_scale;
    Network network;
    Hyperparams hyperparams;
    TrainingInfo info;
};

/// Writes a versioned container: a text manifest (geometry, configuration,
/// training metadata) followed by the model's double arrays as raw
/// little-endian IEEE-754 and a whole-file checksum. The round trip
/// load_bundle(save_bundle(b)) is bit-exact.
void save_bundle(const ModelBundle& bundle, const std::string& path);

/// Throws PersistenceError on version mismatch, checksum failure, or a
/// malformed/truncated container.
ModelBundle load_bundle(const std::string& path);

/// FNV-1a 64 checksum as appended to the container; exposed so external
/// tooling (and tests) can validate or re-sign edited bundles.
std::uint64_t bundle_checksum(const std::uint8_t* data, std::size_t size);

}  // namespace lpface
