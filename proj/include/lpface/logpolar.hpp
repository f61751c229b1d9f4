#pragma once

#include <cstdint>

#include "lpface/image.hpp"

namespace lpface {

/// Parameters of the log-polar mapping.
struct LogPolarConfig {
    /// Sizing base Z: output side length is Z^q with q = ceil(log_Z R).
    int base = 2;
    /// Inner radius cutoff in pixels. The log map diverges at r = 0, so
    /// radii in [r_min, R] are remapped affinely onto [0, 1].
    double r_min = 1.0;
    /// Intensity for output cells whose source sample would fall outside
    /// the frame (cannot happen with the inscribed-disk radius, kept as a
    /// guard).
    std::uint8_t fill = 0;
};

/// Disk about the image center within which pixels are resampled.
struct ReferenceCircle {
    int center_x = 0;  ///< floor(width / 2)
    int center_y = 0;  ///< floor(height / 2)
    double radius = 0.0;
};

struct PolarCoord {
    double r = 0.0;
    double theta_deg = 0.0;  ///< [0, 360)
};

/// Largest inscribed disk about the center (floor(W/2), floor(H/2)):
/// radius = min distance from the center to any image border, so every
/// sample taken inside it is in bounds. Throws DegenerateInput when the
/// radius comes out below 2 pixels.
ReferenceCircle reference_circle(const GrayImage& img);

/// (x, y) relative to the circle center -> (r, theta). theta is the
/// four-quadrant arctangent of (y - cy) / (x - cx) wrapped to [0, 360);
/// the center itself maps to (0, 0).
PolarCoord cartesian_to_polar(double x, double y, const ReferenceCircle& c);

/// Normalized log radius: ln(r / r_min) / ln(R / r_min), a strictly
/// increasing map of [r_min, R] onto [0, 1]. Throws InvalidInput when r
/// lies outside [r_min, R].
double log_radial(double r, double radius, double r_min);

/// Output side length Z^q with q = ceil(log_Z radius), computed in exact
/// integer arithmetic.
int log_polar_output_size(double radius, int base);

/// Full log-polar resampling. Output is S x S (S from
/// log_polar_output_size); rows index the normalized log radius (row 0 at
/// r_min, row S-1 at R) and columns index the angle (column j at
/// 360*j/S degrees). Each output cell is filled by inverse mapping: its
/// (r, theta) is converted back to Cartesian and the nearest input pixel
/// is taken. Rotation of the input therefore becomes a circular column
/// shift, and uniform scaling leaves the output (of the rescaled image)
/// unchanged up to resampling noise.
GrayImage log_polar_transform(const GrayImage& img, const LogPolarConfig& cfg = {});

}  // namespace lpface
