#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpface/image.hpp"

namespace lpface {

struct Sample {
    int subject = 0;  ///< class index in [0, num_classes)
    GrayImage image;
};

struct Dataset {
    std::vector<Sample> samples;
    int num_classes = 0;
};

/// Loads an ORL-layout tree: subdirectories s1..sK, each holding
/// 1.pgm..n.pgm of exactly 92x112 pixels. Subject s<i> becomes class
/// i - 1; samples are ordered by (subject, image number). Any missing
/// directory or image, or a wrong-sized image, raises IngestionError
/// naming the offending path.
Dataset load_orl(const std::string& dir);

inline constexpr int kOrlWidth = 92;
inline constexpr int kOrlHeight = 112;

/// Loads a generic tree: one subdirectory per subject (any names, ordered
/// lexicographically), each with at least two .pgm files. Images are
/// resized (nearest neighbor) to target_width x target_height so every
/// sample shares one geometry.
Dataset load_generic(const std::string& dir, int target_width = kOrlWidth,
                     int target_height = kOrlHeight);

struct SplitSpec {
    enum class Mode { first_k, seeded_random };

    int per_class_train = 5;
    std::uint32_t seed = 0;
    Mode mode = Mode::first_k;
};

struct SplitResult {
    Dataset train;
    Dataset test;
};

/// Deterministic per-class split: exactly per_class_train samples of each
/// class go to train, the rest to test. first_k takes samples in dataset
/// order; seeded_random permutes each class with a seeded generator
/// first. Throws InvalidSplit when any class is too small.
SplitResult split(const Dataset& ds, const SplitSpec& spec);

}  // namespace lpface
