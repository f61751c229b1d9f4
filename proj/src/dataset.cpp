#include "lpface/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>

#include "lpface/errors.hpp"

namespace fs = std::filesystem;

namespace lpface {

namespace {

GrayImage load_image_checked(const fs::path& path, int want_w, int want_h) {
    GrayImage img;
    try {
        img = read_pgm_file(path.string());
    } catch (const DecodeError& e) {
        throw IngestionError(e.what());
    }
    if (want_w > 0 && (img.width != want_w || img.height != want_h)) {
        throw IngestionError(path.string() + ": expected " + std::to_string(want_w) + "x" +
                             std::to_string(want_h) + ", got " + std::to_string(img.width) +
                             "x" + std::to_string(img.height));
    }
    return img;
}

}  // namespace

Dataset load_orl(const std::string& dir) {
    const fs::path root(dir);
    if (!fs::is_directory(root)) {
        throw IngestionError(dir + ": not a directory");
    }

    // Count s<k> subject directories, then demand they run s1..sK.
    int subject_count = 0;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() > 1 && name[0] == 's' &&
            std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(c); })) {
            ++subject_count;
        }
    }
    if (subject_count < 2) {
        throw IngestionError(dir + ": expected at least two s<k> subject directories");
    }

    Dataset ds;
    ds.num_classes = subject_count;
    for (int subject = 1; subject <= subject_count; ++subject) {
        const fs::path subject_dir = root / ("s" + std::to_string(subject));
        if (!fs::is_directory(subject_dir)) {
            throw IngestionError(subject_dir.string() + ": missing subject directory");
        }
        int image_count = 0;
        for (const auto& entry : fs::directory_iterator(subject_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".pgm") ++image_count;
        }
        if (image_count < 2) {
            throw IngestionError(subject_dir.string() + ": a subject needs at least two images");
        }
        for (int number = 1; number <= image_count; ++number) {
            const fs::path img_path = subject_dir / (std::to_string(number) + ".pgm");
            if (!fs::is_regular_file(img_path)) {
                throw IngestionError(img_path.string() + ": missing image");
            }
            ds.samples.push_back(
                Sample{subject - 1, load_image_checked(img_path, kOrlWidth, kOrlHeight)});
        }
    }
    return ds;
}

Dataset load_generic(const std::string& dir, int target_width, int target_height) {
    const fs::path root(dir);
    if (!fs::is_directory(root)) {
        throw IngestionError(dir + ": not a directory");
    }
    if (target_width < 4 || target_height < 4) {
        throw InvalidInput("generic loader target size must be at least 4x4");
    }

    std::vector<fs::path> subject_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) subject_dirs.push_back(entry.path());
    }
    std::sort(subject_dirs.begin(), subject_dirs.end());
    if (subject_dirs.size() < 2) {
        throw IngestionError(dir + ": expected at least two subject directories");
    }

    Dataset ds;
    ds.num_classes = static_cast<int>(subject_dirs.size());
    for (std::size_t subject = 0; subject < subject_dirs.size(); ++subject) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(subject_dirs[subject])) {
            if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.size() < 2) {
            throw IngestionError(subject_dirs[subject].string() +
                                 ": a subject needs at least two .pgm images");
        }
        for (const auto& file : files) {
            GrayImage img = load_image_checked(file, 0, 0);
            if (img.width != target_width || img.height != target_height) {
                img = resize_nearest(img, target_width, target_height);
            }
            ds.samples.push_back(Sample{static_cast<int>(subject), std::move(img)});
        }
    }
    return ds;
}

SplitResult split(const Dataset& ds, const SplitSpec& spec) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        by_class[ds.samples[i].subject].push_back(i);
    }
    if (by_class.empty()) {
        throw InvalidSplit("cannot split an empty dataset");
    }
    for (const auto& [subject, indices] : by_class) {
        if (spec.per_class_train < 1 ||
            spec.per_class_train >= static_cast<int>(indices.size())) {
            throw InvalidSplit("per_class_train = " + std::to_string(spec.per_class_train) +
                               " infeasible for class " + std::to_string(subject) + " with " +
                               std::to_string(indices.size()) + " samples");
        }
    }

    SplitResult out;
    out.train.num_classes = ds.num_classes;
    out.test.num_classes = ds.num_classes;
    for (auto& [subject, indices] : by_class) {
        if (spec.mode == SplitSpec::Mode::seeded_random) {
            // Hand-rolled Fisher-Yates: std::shuffle is not reproducible
            // across standard libraries.
            std::mt19937 rng(spec.seed + static_cast<std::uint32_t>(subject) * 0x9e3779b9u);
            for (std::size_t i = indices.size() - 1; i > 0; --i) {
                const std::size_t j = rng() % (i + 1);
                std::swap(indices[i], indices[j]);
            }
        }
        for (std::size_t k = 0; k < indices.size(); ++k) {
            auto& target = (k < static_cast<std::size_t>(spec.per_class_train)) ? out.train : out.test;
            target.samples.push_back(ds.samples[indices[k]]);
        }
    }
    return out;
}

}  // namespace lpface
