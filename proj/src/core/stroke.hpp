#pragma once

#include <cstddef>
#include <vector>

#include "core/image.hpp"

namespace ap {

inline constexpr double kPi = 3.14159265358979323846;

/// Folds an angle into [0, pi); a stroke looks the same after a half turn.
double normalize_rotation(double radians) noexcept;

/// One oriented, soft-edged rectangular brush mark.
///
/// Center is normalized per axis (cx by width, cy by height). `len` and `thick`
/// are fractions of the canvas diagonal so the footprint stays a true rectangle
/// on non-square canvases.
struct Stroke {
    double cx = 0.5;
    double cy = 0.5;
    double len = 0.1;
    double thick = 0.05;
    double rotation = 0.0;
    Rgb color{};
    double opacity = 1.0;
    std::size_t index = 0;

    bool operator==(const Stroke&) const = default;
};

/// Throws validation-error naming the offending field.
void validate_stroke(const Stroke& stroke);

struct StrokeList {
    std::vector<Stroke> strokes;
    int canvas_width = 0;
    int canvas_height = 0;
    Rgb background = kWhite;

    std::size_t size() const noexcept { return strokes.size(); }
    bool operator==(const StrokeList&) const = default;
};

/// Checks canvas size, every stroke, and that `strokes[i].index == i`.
void validate_stroke_list(const StrokeList& list);

/// Inclusive-exclusive pixel rectangle.
struct PixelBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
    long long area() const noexcept { return empty() ? 0 : static_cast<long long>(x1 - x0) * (y1 - y0); }
};

/// Stroke geometry resolved against a canvas size.
class Footprint {
public:
    Footprint(const Stroke& stroke, int canvas_width, int canvas_height) noexcept;

    /// Shape coverage in [0,1] at the center of pixel (x, y), before opacity.
    double coverage(int x, int y) const noexcept;
    /// Pixels that can receive nonzero coverage, clipped to the canvas.
    const PixelBox& bounds() const noexcept { return box_; }

    /// Fraction of the half thickness occupied by the soft edge.
    static constexpr double kFalloffFraction = 0.15;

private:
    double cx_;
    double cy_;
    double cos_;
    double sin_;
    double half_len_;
    double half_thick_;
    double band_;
    PixelBox box_;
};

/// Composite of one canvas scalar under coverage `alpha`; clamps to [0,1].
inline float blend(float under, float over, float alpha) noexcept {
    const float v = under * (1.f - alpha) + over * alpha;
    return v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
}

/// Alpha-over composite of `stroke` on an RGB canvas, in place.
void composite_stroke_inplace(RasterImage& canvas, const Stroke& stroke);

RasterImage composite_stroke(const RasterImage& canvas, const Stroke& stroke);

}  // namespace ap
