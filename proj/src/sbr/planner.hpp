#pragma once

#include <cstdint>
#include <vector>

#include "core/image.hpp"
#include "core/stroke.hpp"

namespace ap::sbr {

struct PlannerConfig {
    int levels = 4;
    /// One budget per level (a single entry is broadcast to every level). Zero disables a level.
    std::vector<int> strokes_per_level{32, 64, 128, 256};
    int candidates_per_cell = 8;
    std::uint64_t seed = 0;
    double min_improvement = 1e-7;
    Rgb background = kWhite;
    /// Worker threads for candidate scoring; results do not depend on it.
    unsigned jobs = 1;

    void validate() const;
    int budget(int level) const;
};

/// Scale of level `level` as a fraction of the canvas diagonal (halves per level).
double level_scale(int level) noexcept;

/// Aspect ratios (thick / len) a candidate may take.
inline constexpr double kCandidateAspects[] = {1.0, 0.6, 0.35};
inline constexpr int kRotationSteps = 8;

struct PlanResult {
    StrokeList strokes;
    double initial_mse = 0.0;
    /// Canvas-level mse after each accepted stroke, in paint order.
    std::vector<double> mse_trace;
};

PlanResult plan_strokes_traced(const RasterImage& target, const PlannerConfig& config);
StrokeList plan_strokes(const RasterImage& target, const PlannerConfig& config);

/// Sequential composite of every stroke, in index order, over the background.
RasterImage render(const StrokeList& strokes);

/// Mean target color over the pixels the stroke touches; false if it touches none.
bool footprint_mean_color(const RasterImage& target, const Stroke& stroke, Rgb& out);

/// Change in canvas-level mse if `stroke` were composited, evaluated over the
/// stroke's bounding box only. Negative means improvement.
double mse_delta(const RasterImage& canvas, const RasterImage& target, const Stroke& stroke);

}  // namespace ap::sbr
