#include "lpface/logpolar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lpface {

ReferenceCircle reference_circle(const GrayImage& img) {
    const int cx = img.width / 2;
    const int cy = img.height / 2;
    const int radius = std::min({cx, cy, img.width - 1 - cx, img.height - 1 - cy});
    if (radius < 2) {
        throw DegenerateInput("image too small for log-polar transform: inscribed radius " +
                              std::to_string(radius) + " < 2 (" + std::to_string(img.width) +
                              "x" + std::to_string(img.height) + ")");
    }
    return ReferenceCircle{cx, cy, static_cast<double>(radius)};
}

PolarCoord cartesian_to_polar(double x, double y, const ReferenceCircle& c) {
    const double dx = x - c.center_x;
    const double dy = y - c.center_y;
    const double r = std::hypot(dx, dy);
    if (r == 0.0) {
        return PolarCoord{0.0, 0.0};
    }
    double theta = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
    if (theta < 0.0) theta += 360.0;
    if (theta >= 360.0) theta -= 360.0;
    return PolarCoord{r, theta};
}

double log_radial(double r, double radius, double r_min) {
    if (!(r_min > 0.0) || !(r_min < radius)) {
        throw InvalidInput("log_radial requires 0 < r_min < R");
    }
    if (r < r_min || r > radius) {
        throw InvalidInput("log_radial: r = " + std::to_string(r) + " outside [" +
                           std::to_string(r_min) + ", " + std::to_string(radius) + "]");
    }
    return std::log(r / r_min) / std::log(radius / r_min);
}

int log_polar_output_size(double radius, int base) {
    if (base < 2) {
        throw InvalidInput("log-polar sizing base must be >= 2");
    }
    if (!(radius > 1.0)) {
        throw DegenerateInput("log-polar sizing needs a radius above 1 pixel");
    }
    // Smallest q >= 1 with base^q >= radius, i.e. ceil(log_base radius),
    // found by integer doubling to dodge floating-point log edge cases.
    long long size = base;
    while (static_cast<double>(size) < radius) {
        size *= base;
        if (size > 1'000'000) {
            throw InvalidInput("log-polar output size overflow");
        }
    }
    return static_cast<int>(size);
}

GrayImage log_polar_transform(const GrayImage& img, const LogPolarConfig& cfg) {
    const ReferenceCircle circle = reference_circle(img);
    if (!(cfg.r_min > 0.0) || !(cfg.r_min < circle.radius)) {
        throw InvalidInput("log-polar r_min must satisfy 0 < r_min < R (r_min = " +
                           std::to_string(cfg.r_min) + ", R = " +
                           std::to_string(circle.radius) + ")");
    }
    const int size = log_polar_output_size(circle.radius, cfg.base);

    const double log_span = std::log(circle.radius / cfg.r_min);
    GrayImage out(size, size);
    for (int row = 0; row < size; ++row) {
        // Row 0 samples at r_min, row S-1 at R, geometric in between.
        const double p = static_cast<double>(row) / (size - 1);
        const double r = cfg.r_min * std::exp(p * log_span);
        for (int col = 0; col < size; ++col) {
            const double theta = 2.0 * std::numbers::pi * col / size;
            const long x = std::lround(circle.center_x + r * std::cos(theta));
            const long y = std::lround(circle.center_y + r * std::sin(theta));
            out.at(col, row) = img.in_bounds(static_cast<int>(x), static_cast<int>(y))
                                   ? img.at(static_cast<int>(x), static_cast<int>(y))
                                   : cfg.fill;
        }
    }
    return out;
}

}  // namespace lpface
