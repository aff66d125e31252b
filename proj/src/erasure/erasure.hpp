#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "core/keyframes.hpp"
#include "core/stroke.hpp"

namespace ap::erasure {

/// Default erase steps and emitted frame count for a process video.
inline constexpr int kDefaultSteps = 10;
inline constexpr int kDefaultFrames = 12;

/// Neighbour radius as a fraction of canvas width, and the rotation window.
inline constexpr double kRadiusFraction = 0.1;
inline constexpr double kAngleWindow = kPi / 4.0;

/// Circular difference of two rotations on [0, pi).
double angle_difference(double a, double b) noexcept;

/// Per stroke: number of other strokes whose center lies within 0.1*W pixels
/// and whose rotation differs by less than pi/4. Self is not counted.
std::vector<std::size_t> density_scores(const StrokeList& strokes);

/// Stroke indices, densest first; ties go to the later-painted stroke.
std::vector<std::size_t> erase_order(const StrokeList& strokes, const std::vector<std::size_t>& scores);

struct EraseSchedule {
    /// counts[j] strokes remain after erase step j; counts[0] = n, counts[steps] = 0.
    std::vector<std::size_t> frame_stroke_counts;
    std::vector<std::size_t> erase_order;
    int steps = 0;

    /// Strokes still on the canvas at erase step j, ascending index.
    std::vector<std::size_t> strokes_at(std::size_t j) const;
};

/// Each step erases ceil(n/T) more strokes, clamped so the last frame is blank.
EraseSchedule make_schedule(const StrokeList& strokes, const std::vector<std::size_t>& order, int steps);

/// Frames in paint order: index 0 is the blank canvas, the last is the full render.
KeyframeSequence render_keyframes(const StrokeList& strokes, const EraseSchedule& schedule);

/// Picks `count` frames at round(j*(N-1)/(count-1)).
std::vector<std::size_t> progressive_indices(std::size_t frames, std::size_t count);
KeyframeSequence sample_progressive(const KeyframeSequence& frames, std::size_t count);

/// schedule/v1 document.
std::string schedule_to_json(const EraseSchedule& schedule);
EraseSchedule schedule_from_json(const std::string& text, const std::string& source = "<memory>");

}  // namespace ap::erasure
