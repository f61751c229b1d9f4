#include "lpface/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace lpface {

namespace {

std::string at_offset(std::size_t offset) {
    return " (byte offset " + std::to_string(offset) + ")";
}

/// Cursor over a PGM byte stream; knows how to skip whitespace and
/// '#' comments between header tokens.
struct PgmCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    bool eof() const { return pos >= bytes.size(); }
    std::uint8_t peek() const { return bytes[pos]; }

    void skip_header_space() {
        while (!eof()) {
            const std::uint8_t c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else if (std::isspace(c)) {
                ++pos;
            } else {
                break;
            }
        }
    }

    long next_int(const char* what) {
        skip_header_space();
        if (eof()) {
            throw DecodeError(std::string("PGM header ends before ") + what + at_offset(pos));
        }
        if (!std::isdigit(peek())) {
            throw DecodeError(std::string("expected digit for ") + what + at_offset(pos));
        }
        long value = 0;
        while (!eof() && std::isdigit(peek())) {
            value = value * 10 + (peek() - '0');
            if (value > 1'000'000'000L) {
                throw DecodeError(std::string("absurd value for ") + what + at_offset(pos));
            }
            ++pos;
        }
        return value;
    }
};

}  // namespace

GrayImage::GrayImage(int w, int h, std::uint8_t fill)
    : width(w), height(h),
      pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w < 1 || h < 1) {
        throw InvalidInput("image dimensions must be at least 1x1");
    }
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
    PgmCursor cur{bytes};
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
        throw DecodeError("not a PGM stream: missing P5/P2 magic" + at_offset(0));
    }
    const bool binary = bytes[1] == '5';
    cur.pos = 2;

    const long width = cur.next_int("width");
    const long height = cur.next_int("height");
    const long maxval = cur.next_int("maxval");
    if (width < 1 || height < 1) {
        throw DecodeError("PGM dimensions must be positive" + at_offset(cur.pos));
    }
    if (maxval < 1 || maxval > 255) {
        throw DecodeError("unsupported PGM maxval " + std::to_string(maxval) +
                          " (must be 1..255)" + at_offset(cur.pos));
    }

    GrayImage img(static_cast<int>(width), static_cast<int>(height));
    const std::size_t count = img.pixels.size();

    if (binary) {
        // Exactly one whitespace byte separates the header from the payload.
        if (cur.eof() || !std::isspace(cur.peek())) {
            throw DecodeError("missing separator before P5 payload" + at_offset(cur.pos));
        }
        ++cur.pos;
        if (bytes.size() - cur.pos < count) {
            throw DecodeError("truncated P5 payload: need " + std::to_string(count) +
                              " bytes, have " + std::to_string(bytes.size() - cur.pos) +
                              at_offset(cur.pos));
        }
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint8_t v = bytes[cur.pos + i];
            if (v > maxval) {
                throw DecodeError("P5 sample exceeds maxval" + at_offset(cur.pos + i));
            }
            img.pixels[i] = v;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            cur.skip_header_space();
            if (cur.eof()) {
                throw DecodeError("truncated P2 payload: got " + std::to_string(i) + " of " +
                                  std::to_string(count) + " samples" + at_offset(cur.pos));
            }
            const long v = cur.next_int("sample");
            if (v > maxval) {
                throw DecodeError("P2 sample exceeds maxval" + at_offset(cur.pos));
            }
            img.pixels[i] = static_cast<std::uint8_t>(v);
        }
    }
    return img;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    char header[64];
    const int n = std::snprintf(header, sizeof header, "P5\n%d %d\n255\n", img.width, img.height);
    std::vector<std::uint8_t> out(header, header + n);
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

GrayImage read_pgm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DecodeError("cannot open " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return decode_pgm(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(path + ": " + e.what());
    }
}

void write_pgm_file(const GrayImage& img, const std::string& path) {
    const auto bytes = encode_pgm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw PersistenceError("cannot open " + path + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw PersistenceError("short write to " + path);
    }
}

GrayImage resize_nearest(const GrayImage& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) {
        throw InvalidInput("resize target must be at least 1x1");
    }
    GrayImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const int sy = static_cast<int>(static_cast<std::int64_t>(y) * img.height / out_h);
        for (int x = 0; x < out_w; ++x) {
            const int sx = static_cast<int>(static_cast<std::int64_t>(x) * img.width / out_w);
            out.at(x, y) = img.at(sx, sy);
        }
    }
    return out;
}

GrayImage rotate_nearest(const GrayImage& img, double degrees) {
    const double rad = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const int cx = img.width / 2;
    const int cy = img.height / 2;

    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const double dy = y - cy;
        for (int x = 0; x < img.width; ++x) {
            const double dx = x - cx;
            // Inverse mapping: sample where this pixel came from.
            const long sx = std::lround(cx + c * dx + s * dy);
            const long sy = std::lround(cy - s * dx + c * dy);
            out.at(x, y) = img.in_bounds(static_cast<int>(sx), static_cast<int>(sy))
                               ? img.at(static_cast<int>(sx), static_cast<int>(sy))
                               : 0;
        }
    }
    return out;
}

GrayImage circular_shift_columns(const GrayImage& img, int shift) {
    GrayImage out(img.width, img.height);
    const int w = img.width;
    const int offset = ((-shift) % w + w) % w;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < w; ++x) {
            out.at(x, y) = img.at((x + offset) % w, y);
        }
    }
    return out;
}

ImageVector to_vector(const GrayImage& img) {
    ImageVector out;
    out.reserve(img.pixels.size());
    for (int x = 0; x < img.width; ++x) {
        for (int y = 0; y < img.height; ++y) {
            out.push_back(static_cast<double>(img.at(x, y)));
        }
    }
    return out;
}

GrayImage from_vector(const ImageVector& values, int width, int height) {
    if (values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw InvalidInput("vector length does not match the requested dimensions");
    }
    GrayImage img(width, height);
    std::size_t i = 0;
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) {
            const double v = std::round(values[i++]);
            img.at(x, y) = static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
        }
    }
    return img;
}

}  // namespace lpface
