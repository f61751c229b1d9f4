#include "lpface/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "lpface/errors.hpp"

namespace fs = std::filesystem;

namespace lpface {

namespace {

/// Per-identity geometry, drawn once from the subject seed.
struct FaceGeometry {
    double head_a, head_b;       // head ellipse semi-axes
    double skin;                 // base skin intensity
    double eye_dx, eye_y;        // eye offsets from face center
    double eye_a, eye_b;         // eye ellipse semi-axes
    double brow_drop;            // eyebrow distance above the eyes
    double brow_h;               // eyebrow half-height
    double nose_len, nose_w;
    double mouth_y, mouth_w, mouth_h;
    double hair_line;            // fraction of head height covered by hair
    double hair_tone;
    double cheek_dx;             // darkened cheek accents
};

FaceGeometry subject_geometry(std::uint32_t subject_seed) {
    std::mt19937 rng(subject_seed * 2654435761u + 12345u);
    auto unit = [&rng]() { return static_cast<double>(rng()) * 0x1p-32; };
    auto range = [&](double lo, double hi) { return lo + (hi - lo) * unit(); };

    FaceGeometry g;
    g.head_a = range(24.0, 31.0);
    g.head_b = range(35.0, 42.0);
    g.skin = range(135.0, 185.0);
    g.eye_dx = range(8.5, 13.5);
    g.eye_y = range(-13.0, -6.0);
    g.eye_a = range(2.8, 4.6);
    g.eye_b = range(1.6, 2.6);
    g.brow_drop = range(4.5, 7.5);
    g.brow_h = range(0.8, 1.8);
    g.nose_len = range(6.0, 11.0);
    g.nose_w = range(1.2, 2.4);
    g.mouth_y = range(14.0, 20.0);
    g.mouth_w = range(5.5, 10.0);
    g.mouth_h = range(1.4, 2.4);
    g.hair_line = range(0.35, 0.60);
    g.hair_tone = range(25.0, 70.0);
    g.cheek_dx = range(12.0, 18.0);
    return g;
}

/// Soft coverage for a signed distance-like field: 1 well inside,
/// 0 well outside, ~1.5 px feather.
double soft(double inside_distance) {
    const double t = std::clamp(inside_distance / 1.5 + 0.5, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

/// Distance-to-boundary proxy for an axis-aligned ellipse, in pixels.
double ellipse_inside(double x, double y, double cx, double cy, double a, double b) {
    const double dx = (x - cx) / a;
    const double dy = (y - cy) / b;
    const double rho = std::sqrt(dx * dx + dy * dy);
    return (1.0 - rho) * std::min(a, b);
}

double blend(double base, double color, double alpha) {
    return base + (color - base) * alpha;
}

}  // namespace

GrayImage render_face(std::uint32_t subject_seed, const FaceVariation& var, int width,
                      int height) {
    if (width < 16 || height < 16) {
        throw InvalidInput("synthetic faces need at least 16x16 pixels");
    }
    const FaceGeometry g = subject_geometry(subject_seed);

    // Scale the canonical 92x112 geometry to the requested canvas.
    const double unit_scale = std::min(width / 92.0, height / 112.0);

    const double rad = var.rotation_deg * std::numbers::pi / 180.0;
    const double cr = std::cos(rad);
    const double sr = std::sin(rad);
    const double cx = width / 2.0;
    const double cy = height / 2.0 + 2.0 * unit_scale;

    std::mt19937 noise(var.noise_seed * 0x9e3779b9u + subject_seed);
    auto noise_unit = [&noise]() { return static_cast<double>(noise()) * 0x1p-32; };

    GrayImage img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            // Map the pixel into face-local coordinates: undo shift,
            // scale, and rotation.
            const double px = (x - cx - var.shift_x) / (var.scale * unit_scale);
            const double py = (y - cy - var.shift_y) / (var.scale * unit_scale);
            const double fu = cr * px + sr * py;
            const double fv = -sr * px + cr * py;

            double value = 12.0 + 6.0 * (static_cast<double>(y) / height);

            const double head = ellipse_inside(fu, fv, 0.0, 0.0, g.head_a, g.head_b);
            if (head > -3.0) {
                // Skin with gentle radial shading.
                const double rho2 = (fu / g.head_a) * (fu / g.head_a) +
                                    (fv / g.head_b) * (fv / g.head_b);
                double face_value = g.skin * (1.0 - 0.22 * rho2);

                const double hair_edge = -fv - g.head_b * g.hair_line;
                face_value = blend(face_value, g.hair_tone, soft(hair_edge));

                for (int side = -1; side <= 1; side += 2) {
                    const double ex = side * g.eye_dx;
                    face_value = blend(face_value, 28.0,
                                       soft(ellipse_inside(fu, fv, ex, g.eye_y, g.eye_a, g.eye_b)));
                    const double brow_y = g.eye_y - g.brow_drop - 1.5 * var.expression;
                    const double brow = std::min(g.eye_a + 1.5 - std::abs(fu - ex),
                                                 g.brow_h - std::abs(fv - brow_y));
                    face_value = blend(face_value, 55.0, soft(brow));
                    // Slightly shaded cheeks give the interior structure.
                    face_value = blend(face_value, g.skin * 0.82,
                                       0.5 * soft(ellipse_inside(fu, fv, side * g.cheek_dx, 8.0,
                                                                 5.0, 6.5)));
                }

                const double nose = std::min(g.nose_w - std::abs(fu),
                                             std::min(fv + 2.0, g.nose_len - fv));
                face_value = blend(face_value, g.skin - 40.0, 0.8 * soft(nose));

                const double mouth_h = g.mouth_h + 0.8 * var.expression;
                face_value = blend(face_value, 58.0,
                                   soft(ellipse_inside(fu, fv, 0.0, g.mouth_y, g.mouth_w,
                                                       std::max(0.6, mouth_h))));

                value = blend(value, face_value, soft(head));
            }

            value += var.brightness + 3.0 * (noise_unit() - 0.5);
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp(value, 0.0, 255.0));
        }
    }
    return img;
}

GrayImage synthetic_face(std::uint32_t subject_seed, int width, int height) {
    return render_face(subject_seed, FaceVariation{}, width, height);
}

Dataset synthetic_dataset(const SyntheticDatasetConfig& cfg) {
    if (cfg.subjects < 1 || cfg.per_subject < 1) {
        throw InvalidInput("synthetic dataset needs at least one subject and one image");
    }
    std::mt19937 rng(cfg.seed);
    auto unit = [&rng]() { return static_cast<double>(rng()) * 0x1p-32; };
    auto centered = [&](double half_range) { return (2.0 * unit() - 1.0) * half_range; };

    Dataset ds;
    ds.num_classes = cfg.subjects;
    for (int subject = 0; subject < cfg.subjects; ++subject) {
        const std::uint32_t subject_seed = cfg.seed * 1000003u + static_cast<std::uint32_t>(subject);
        for (int k = 0; k < cfg.per_subject; ++k) {
            FaceVariation var;
            if (k > 0) {  // first image per subject stays neutral
                var.rotation_deg = centered(cfg.max_rotation_deg);
                var.scale = 1.0 + centered(cfg.max_scale_delta);
                var.shift_x = centered(cfg.max_shift);
                var.shift_y = centered(cfg.max_shift);
                var.brightness = centered(cfg.max_brightness);
                var.expression = centered(1.0);
            }
            var.noise_seed = static_cast<std::uint32_t>(subject * 131 + k + 1);
            ds.samples.push_back(
                Sample{subject, render_face(subject_seed, var, cfg.width, cfg.height)});
        }
    }
    return ds;
}

void write_orl_tree(const Dataset& ds, const std::string& dir) {
    std::vector<int> counters(static_cast<std::size_t>(ds.num_classes), 0);
    for (const auto& sample : ds.samples) {
        const fs::path subject_dir = fs::path(dir) / ("s" + std::to_string(sample.subject + 1));
        fs::create_directories(subject_dir);
        const int number = ++counters[static_cast<std::size_t>(sample.subject)];
        write_pgm_file(sample.image, (subject_dir / (std::to_string(number) + ".pgm")).string());
    }
}

void write_generic_tree(const Dataset& ds, const std::string& dir) {
    std::vector<int> counters(static_cast<std::size_t>(ds.num_classes), 0);
    for (const auto& sample : ds.samples) {
        char subject_name[32];
        std::snprintf(subject_name, sizeof subject_name, "subject_%03d", sample.subject);
        const fs::path subject_dir = fs::path(dir) / subject_name;
        fs::create_directories(subject_dir);
        char file_name[32];
        std::snprintf(file_name, sizeof file_name, "img_%03d.pgm",
                      ++counters[static_cast<std::size_t>(sample.subject)]);
        write_pgm_file(sample.image, (subject_dir / file_name).string());
    }
}

}  // namespace lpface
