#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lpface/errors.hpp"

namespace lpface {

/// 8-bit grayscale raster, row-major. Coordinates are (x, y) with
/// x in [0, width) along the first image dimension and y in [0, height)
/// along the second, so pixel (x, y) lives at pixels[y * width + x].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0);

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(x)];
    }
    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(x)];
    }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }

    bool operator==(const GrayImage& other) const = default;
};

/// Image flattened to real values for the linear algebra stages.
using ImageVector = std::vector<double>;

/// Parses a PGM stream, binary (P5) or ASCII (P2), maxval <= 255.
/// Header comments (# ... end of line) are tolerated. Malformed input
/// raises DecodeError naming the offending byte offset.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

/// Serializes as binary PGM (P5). decode_pgm(encode_pgm(img)) == img.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

GrayImage read_pgm_file(const std::string& path);
void write_pgm_file(const GrayImage& img, const std::string& path);

/// Nearest-neighbor resample: output pixel (i, j) copies input pixel
/// (floor(i*W/out_w), floor(j*H/out_h)).
GrayImage resize_nearest(const GrayImage& img, int out_w, int out_h);

/// Rotates about the image center (floor(W/2), floor(H/2)) with
/// nearest-neighbor sampling; samples falling outside the frame become 0.
GrayImage rotate_nearest(const GrayImage& img, double degrees);

/// Circularly shifts columns: output(x, y) = input((x - shift) mod W, y).
GrayImage circular_shift_columns(const GrayImage& img, int shift);

/// Flattens column-by-column: all y of x = 0, then x = 1, and so on.
/// Intensities are promoted to double here; downstream math is all doubles.
ImageVector to_vector(const GrayImage& img);

/// Inverse of to_vector given the original dimensions. Values are rounded
/// and clamped back to [0, 255].
GrayImage from_vector(const ImageVector& values, int width, int height);

}  // namespace lpface
