#include "core/stroke.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"

namespace ap {

double normalize_rotation(double radians) noexcept {
    if (!std::isfinite(radians)) return 0.0;
    double r = std::fmod(radians, kPi);
    if (r < 0.0) r += kPi;
    if (r >= kPi) r = 0.0;
    return r;
}

namespace {

void check_unit(double v, const char* field, const std::string& where) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::Validation, where + ": field '" + field + "' outside [0,1]");
}

}  // namespace

void validate_stroke(const Stroke& s) {
    const std::string where = "stroke " + std::to_string(s.index);
    check_unit(s.cx, "cx", where);
    check_unit(s.cy, "cy", where);
    if (!(s.len > 0.0 && s.len <= 1.0)) fail(ErrorCode::Validation, where + ": field 'len' outside (0,1]");
    if (!(s.thick > 0.0 && s.thick <= s.len)) {
        fail(ErrorCode::Validation, where + ": field 'thick' must satisfy 0 < thick <= len");
    }
    if (!(s.rotation >= 0.0 && s.rotation < kPi)) fail(ErrorCode::Validation, where + ": field 'rot' outside [0,pi)");
    check_unit(s.color.r, "color", where);
    check_unit(s.color.g, "color", where);
    check_unit(s.color.b, "color", where);
    check_unit(s.opacity, "opacity", where);
}

void validate_stroke_list(const StrokeList& list) {
    if (list.canvas_width < 1 || list.canvas_height < 1) fail(ErrorCode::Validation, "canvas dimensions must be >= 1");
    for (std::size_t i = 0; i < list.strokes.size(); ++i) {
        validate_stroke(list.strokes[i]);
        if (list.strokes[i].index != i) {
            fail(ErrorCode::Validation, "stroke " + std::to_string(list.strokes[i].index) +
                                            ": indices must be unique and contiguous from 0 (expected " +
                                            std::to_string(i) + ")");
        }
    }
}

Footprint::Footprint(const Stroke& stroke, int canvas_width, int canvas_height) noexcept {
    const double diag = std::hypot(static_cast<double>(canvas_width), static_cast<double>(canvas_height));
    cx_ = stroke.cx * canvas_width;
    cy_ = stroke.cy * canvas_height;
    cos_ = std::cos(stroke.rotation);
    sin_ = std::sin(stroke.rotation);
    half_len_ = 0.5 * stroke.len * diag;
    half_thick_ = 0.5 * stroke.thick * diag;
    band_ = kFalloffFraction * half_thick_;

    const double ex = std::abs(half_len_ * cos_) + std::abs(half_thick_ * sin_);
    const double ey = std::abs(half_len_ * sin_) + std::abs(half_thick_ * cos_);
    // Pixel centers sit at +0.5; include every pixel whose center may be inside.
    box_.x0 = std::clamp(static_cast<int>(std::floor(cx_ - ex - 0.5)), 0, canvas_width);
    box_.y0 = std::clamp(static_cast<int>(std::floor(cy_ - ey - 0.5)), 0, canvas_height);
    box_.x1 = std::clamp(static_cast<int>(std::ceil(cx_ + ex + 0.5)), 0, canvas_width);
    box_.y1 = std::clamp(static_cast<int>(std::ceil(cy_ + ey + 0.5)), 0, canvas_height);
}

double Footprint::coverage(int x, int y) const noexcept {
    const double dx = x + 0.5 - cx_;
    const double dy = y + 0.5 - cy_;
    const double u = dx * cos_ + dy * sin_;
    const double v = -dx * sin_ + dy * cos_;
    const double edge = std::min(half_len_ - std::abs(u), half_thick_ - std::abs(v));
    if (edge <= 0.0) return 0.0;
    if (edge >= band_) return 1.0;
    return 0.5 - 0.5 * std::cos(kPi * edge / band_);
}

void composite_stroke_inplace(RasterImage& canvas, const Stroke& stroke) {
    require(canvas.channels() == 3, "composite_stroke: canvas must have 3 channels");
    if (stroke.opacity <= 0.0) return;
    const Footprint fp(stroke, canvas.width(), canvas.height());
    const PixelBox& box = fp.bounds();
    const float color[3] = {stroke.color.r, stroke.color.g, stroke.color.b};
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            const double cov = fp.coverage(x, y);
            if (cov <= 0.0) continue;
            const float alpha = static_cast<float>(stroke.opacity * cov);
            float* px = &canvas.at(x, y, 0);
            for (int c = 0; c < 3; ++c) px[c] = blend(px[c], color[c], alpha);
        }
    }
}

RasterImage composite_stroke(const RasterImage& canvas, const Stroke& stroke) {
    RasterImage out = canvas;
    composite_stroke_inplace(out, stroke);
    return out;
}

}  // namespace ap
