#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "modesynth/errors.hpp"
#include "modesynth/matrix.hpp"

namespace modesynth {

/// Normalized grayscale image, pixels row-major in [0, 1].
struct ImageGray {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;

    static ImageGray create(std::size_t width, std::size_t height, std::vector<double> pixels) {
        if (pixels.size() != width * height)
            throw ShapeMismatch("ImageGray: pixel count != width*height");
        for (double p : pixels)
            if (!(p >= 0.0 && p <= 1.0)) throw OutOfRange("ImageGray: pixel outside [0, 1]");
        ImageGray img;
        img.width = width;
        img.height = height;
        img.pixels = std::move(pixels);
        return img;
    }

    double pixel(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
    double& pixel(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
    bool empty() const { return pixels.empty(); }
};

/// A labeled glyph.
struct DialectSample {
    std::string label;
    ImageGray image;
    std::string source_id;
};

enum class ImageFormat { pgm_ascii, pgm_binary, csv };
enum class Polarity { dark_on_light, light_on_dark };

inline Matrix image_to_matrix(const ImageGray& img) {
    Matrix m(img.height, img.width);
    m.values() = img.pixels;
    return m;
}

inline ImageGray matrix_to_image(const Matrix& m) {
    return ImageGray::create(m.cols(), m.rows(), m.values());
}

namespace detail {

/// Next whitespace-delimited token, skipping '#' comment lines.
inline bool next_pnm_token(std::istream& in, std::string& token) {
    token.clear();
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {}
            continue;
        }
        if (std::isspace(ch)) {
            if (!token.empty()) return true;
            continue;
        }
        token.push_back(static_cast<char>(ch));
    }
    return !token.empty();
}

inline long parse_pnm_int(std::istream& in, const char* what) {
    std::string token;
    if (!next_pnm_token(in, token)) throw ParseError(std::string("pgm: missing ") + what);
    try {
        std::size_t used = 0;
        const long value = std::stol(token, &used);
        if (used != token.size()) throw ParseError(std::string("pgm: bad ") + what);
        return value;
    } catch (const std::exception&) {
        throw ParseError(std::string("pgm: bad ") + what + " '" + token + "'");
    }
}

}  // namespace detail

/// Read a grayscale image. PGM accepts maxval 1..255 (one byte per sample for
/// P5); CSV is comma-separated rows of decimals, no header.
inline ImageGray load_image(const std::filesystem::path& path, ImageFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_image: cannot open " + path.string());

    if (format == ImageFormat::csv) {
        std::vector<double> pixels;
        std::size_t width = 0, height = 0;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() && in.peek() == EOF) break;
            std::stringstream row(line);
            std::string cell;
            std::size_t row_width = 0;
            while (std::getline(row, cell, ',')) {
                try {
                    std::size_t used = 0;
                    const double v = std::stod(cell, &used);
                    pixels.push_back(v);
                } catch (const std::exception&) {
                    throw ParseError("csv: bad cell '" + cell + "'");
                }
                ++row_width;
            }
            if (row_width == 0) throw ParseError("csv: empty row");
            if (width == 0) width = row_width;
            if (row_width != width) throw ParseError("csv: ragged rows");
            ++height;
        }
        if (height == 0) throw ParseError("csv: empty file");
        return ImageGray::create(width, height, std::move(pixels));
    }

    std::string magic;
    if (!detail::next_pnm_token(in, magic)) throw ParseError("pgm: missing magic");
    const char* expected = format == ImageFormat::pgm_ascii ? "P2" : "P5";
    if (magic != expected)
        throw ParseError("pgm: expected " + std::string(expected) + ", found " + magic);

    const long width = detail::parse_pnm_int(in, "width");
    const long height = detail::parse_pnm_int(in, "height");
    const long maxval = detail::parse_pnm_int(in, "maxval");
    if (width < 1 || height < 1) throw ParseError("pgm: non-positive dimensions");
    if (maxval < 1) throw ParseError("pgm: non-positive maxval");
    if (maxval > 255) throw UnsupportedFormat("pgm: maxval > 255 not supported");

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<double> pixels(count);
    if (format == ImageFormat::pgm_ascii) {
        for (std::size_t i = 0; i < count; ++i) {
            const long v = detail::parse_pnm_int(in, "sample");
            if (v < 0 || v > maxval) throw ParseError("pgm: sample out of range");
            pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
        }
    } else {
        // Exactly one whitespace byte separates the header from the payload.
        for (std::size_t i = 0; i < count; ++i) {
            const int v = in.get();
            if (v == EOF) throw ParseError("pgm: truncated payload");
            if (v > maxval) throw ParseError("pgm: sample out of range");
            pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
        }
    }
    return ImageGray::create(static_cast<std::size_t>(width), static_cast<std::size_t>(height),
                             std::move(pixels));
}

/// Write an image. PGM uses maxval 255 with half-up rounding; CSV prints full
/// 17-significant-digit decimals and round-trips bit-exactly.
inline void save_image(const ImageGray& img, const std::filesystem::path& path,
                       ImageFormat format) {
    if (img.empty()) throw EmptyInput("save_image: empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_image: cannot write " + path.string());

    if (format == ImageFormat::csv) {
        char buf[64];
        for (std::size_t r = 0; r < img.height; ++r) {
            for (std::size_t c = 0; c < img.width; ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", img.pixel(r, c));
                out << (c ? "," : "") << buf;
            }
            out << "\n";
        }
    } else {
        auto quantized = [&](std::size_t r, std::size_t c) {
            return static_cast<int>(std::floor(img.pixel(r, c) * 255.0 + 0.5));
        };
        if (format == ImageFormat::pgm_ascii) {
            out << "P2\n" << img.width << " " << img.height << "\n255\n";
            for (std::size_t r = 0; r < img.height; ++r) {
                for (std::size_t c = 0; c < img.width; ++c)
                    out << quantized(r, c) << (c + 1 < img.width ? ' ' : '\n');
            }
        } else {
            out << "P5\n" << img.width << " " << img.height << "\n255\n";
            for (std::size_t r = 0; r < img.height; ++r)
                for (std::size_t c = 0; c < img.width; ++c)
                    out.put(static_cast<char>(quantized(r, c)));
        }
    }
    if (!out) throw IoError("save_image: write failed for " + path.string());
}

/// Save/load an arbitrary real matrix as CSV (same format as image CSV but
/// without the [0,1] pixel constraint). Round-trips bit-exactly.
inline void save_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
    if (m.empty()) throw EmptyInput("save_matrix_csv: empty matrix");
    std::ofstream out(path);
    if (!out) throw IoError("save_matrix_csv: cannot write " + path.string());
    char buf[64];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("save_matrix_csv: write failed for " + path.string());
}

inline Matrix load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_matrix_csv: cannot open " + path.string());
    std::vector<double> values;
    std::size_t cols = 0, rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() && in.peek() == EOF) break;
        std::stringstream row(line);
        std::string cell;
        std::size_t row_width = 0;
        while (std::getline(row, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError("csv: bad cell '" + cell + "'");
            }
            ++row_width;
        }
        if (cols == 0) cols = row_width;
        if (row_width != cols) throw ParseError("csv: ragged rows");
        ++rows;
    }
    if (rows == 0) throw ParseError("csv: empty file");
    return Matrix::from_values(rows, cols, std::move(values));
}

/// Min-max rescale onto [0, 1]; a constant image maps to all zeros.
inline ImageGray normalize_minmax(const ImageGray& img) {
    if (img.empty()) throw EmptyInput("normalize_minmax: empty image");
    const auto [lo_it, hi_it] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    const double lo = *lo_it, hi = *hi_it;
    ImageGray out = img;
    if (hi == lo) {
        std::fill(out.pixels.begin(), out.pixels.end(), 0.0);
        return out;
    }
    for (double& p : out.pixels) p = (p - lo) / (hi - lo);
    return out;
}

/// Crop to the tight bounding box of foreground pixels. dark_on_light counts
/// pixels strictly below the threshold as foreground; light_on_dark strictly
/// above.
inline ImageGray roi_extract(const ImageGray& img, double foreground_threshold,
                             Polarity polarity) {
    if (img.empty()) throw EmptyInput("roi_extract: empty image");
    if (!(foreground_threshold > 0.0 && foreground_threshold < 1.0))
        throw InvalidRange("roi_extract: threshold must be in (0, 1)");

    auto is_foreground = [&](double p) {
        return polarity == Polarity::dark_on_light ? p < foreground_threshold
                                                   : p > foreground_threshold;
    };

    std::size_t rmin = img.height, rmax = 0, cmin = img.width, cmax = 0;
    bool found = false;
    for (std::size_t r = 0; r < img.height; ++r)
        for (std::size_t c = 0; c < img.width; ++c)
            if (is_foreground(img.pixel(r, c))) {
                found = true;
                rmin = std::min(rmin, r);
                rmax = std::max(rmax, r);
                cmin = std::min(cmin, c);
                cmax = std::max(cmax, c);
            }
    if (!found) throw NoForeground("roi_extract: no foreground pixel");

    const std::size_t height = rmax - rmin + 1;
    const std::size_t width = cmax - cmin + 1;
    std::vector<double> pixels(height * width);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c)
            pixels[r * width + c] = img.pixel(rmin + r, cmin + c);
    return ImageGray::create(width, height, std::move(pixels));
}

/// Horizontal concatenation in the given order. Shorter images are padded to
/// the tallest height with background 1.0, split evenly top/bottom with the
/// extra row at the bottom.
inline ImageGray concat_sequence(const std::vector<DialectSample>& samples) {
    if (samples.size() < 2)
        throw InsufficientSamples("concat_sequence: need at least 2 samples");
    std::size_t height = 0, width = 0;
    for (const auto& s : samples) {
        if (s.image.empty()) throw EmptyInput("concat_sequence: empty sample image");
        height = std::max(height, s.image.height);
        width += s.image.width;
    }

    ImageGray out;
    out.width = width;
    out.height = height;
    out.pixels.assign(width * height, 1.0);

    std::size_t col_offset = 0;
    for (const auto& s : samples) {
        const std::size_t pad_top = (height - s.image.height) / 2;
        for (std::size_t r = 0; r < s.image.height; ++r)
            for (std::size_t c = 0; c < s.image.width; ++c)
                out.pixel(pad_top + r, col_offset + c) = s.image.pixel(r, c);
        col_offset += s.image.width;
    }
    return out;
}

}  // namespace modesynth
