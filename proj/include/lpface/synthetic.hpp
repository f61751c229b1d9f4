#pragma once

#include <cstdint>
#include <string>

#include "lpface/dataset.hpp"
#include "lpface/image.hpp"

namespace lpface {

/// Pose and appearance jitter applied to one rendered face.
struct FaceVariation {
    double rotation_deg = 0.0;
    double scale = 1.0;
    double shift_x = 0.0;
    double shift_y = 0.0;
    double brightness = 0.0;
    double expression = 0.0;   ///< [-1, 1], moves mouth and eyebrows
    std::uint32_t noise_seed = 0;
};

/// Renders a face-like grayscale image (dark background, elliptical head,
/// eyes/brows/nose/mouth) whose geometry is drawn deterministically from
/// subject_seed. Distinct seeds give distinct identities; the variation
/// warps the same identity. Used for self-test fixtures and for
/// dataset-free experiments.
GrayImage render_face(std::uint32_t subject_seed, const FaceVariation& variation,
                      int width = kOrlWidth, int height = kOrlHeight);

/// Neutral pose, no jitter.
GrayImage synthetic_face(std::uint32_t subject_seed, int width = kOrlWidth,
                         int height = kOrlHeight);

struct SyntheticDatasetConfig {
    int subjects = 10;
    int per_subject = 10;
    int width = kOrlWidth;
    int height = kOrlHeight;
    double max_rotation_deg = 20.0;
    double max_scale_delta = 0.12;
    double max_shift = 2.0;
    double max_brightness = 8.0;
    std::uint32_t seed = 1;
};

/// A labeled dataset of rendered faces with per-image pose jitter,
/// ordered by (subject, image index). Deterministic given the config.
Dataset synthetic_dataset(const SyntheticDatasetConfig& cfg);

/// Writes the dataset as an ORL-layout tree: dir/s<k>/<j>.pgm with k and
/// j starting at 1.
void write_orl_tree(const Dataset& ds, const std::string& dir);

/// Writes the dataset as a generic tree: dir/subject_<k>/img_<j>.pgm.
void write_generic_tree(const Dataset& ds, const std::string& dir);

}  // namespace lpface
