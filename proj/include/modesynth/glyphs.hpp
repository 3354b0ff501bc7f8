#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "modesynth/errors.hpp"
#include "modesynth/image.hpp"
#include "modesynth/rng.hpp"

namespace modesynth {

struct StrokeRange {
    int min_strokes = 3;
    int max_strokes = 6;
};

namespace detail {

/// 1-pixel Bresenham line, painting intensity 0 (ink).
inline void rasterize_stroke(ImageGray& img, long r0, long c0, long r1, long c1) {
    const long dr = std::labs(r1 - r0), dc = std::labs(c1 - c0);
    const long sr = r0 < r1 ? 1 : -1, sc = c0 < c1 ? 1 : -1;
    long err = dc - dr;
    for (;;) {
        img.pixel(static_cast<std::size_t>(r0), static_cast<std::size_t>(c0)) = 0.0;
        if (r0 == r1 && c0 == c1) break;
        const long e2 = 2 * err;
        if (e2 > -dr) {
            err -= dr;
            c0 += sc;
        }
        if (e2 < dc) {
            err += dc;
            r0 += sr;
        }
    }
}

}  // namespace detail

/// Synthetic dark-on-light glyphs: side x side images of straight strokes
/// with random endpoints, deterministic per seed. The stand-in corpus for
/// desk-scale experiments.
inline std::vector<DialectSample> synth_glyphs(std::uint64_t seed, std::size_t count,
                                               std::size_t side, StrokeRange strokes = {}) {
    if (side < 8) throw InvalidRange("synth_glyphs: side must be >= 8");
    if (count < 1) throw InvalidRange("synth_glyphs: count must be >= 1");
    if (strokes.min_strokes < 1 || strokes.min_strokes > strokes.max_strokes)
        throw InvalidRange("synth_glyphs: bad stroke range");

    std::vector<DialectSample> out;
    out.reserve(count);
    for (std::size_t g = 0; g < count; ++g) {
        RngStream rng(seed, g);
        ImageGray img;
        img.width = side;
        img.height = side;
        img.pixels.assign(side * side, 1.0);

        const auto n_strokes = draw_uniform_int(rng, strokes.min_strokes, strokes.max_strokes);
        for (std::int64_t s = 0; s < n_strokes; ++s) {
            const long r0 = static_cast<long>(draw_index(rng, static_cast<std::int64_t>(side)));
            const long c0 = static_cast<long>(draw_index(rng, static_cast<std::int64_t>(side)));
            const long r1 = static_cast<long>(draw_index(rng, static_cast<std::int64_t>(side)));
            const long c1 = static_cast<long>(draw_index(rng, static_cast<std::int64_t>(side)));
            detail::rasterize_stroke(img, r0, c0, r1, c1);
        }

        DialectSample sample;
        sample.label = "synth-" + std::to_string(g);
        sample.source_id = "synth";
        sample.image = std::move(img);
        out.push_back(std::move(sample));
    }
    return out;
}

}  // namespace modesynth
