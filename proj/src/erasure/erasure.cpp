#include "erasure/erasure.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "core/error.hpp"

namespace ap::erasure {

double angle_difference(double a, double b) noexcept {
    const double d = std::abs(normalize_rotation(a) - normalize_rotation(b));
    return std::min(d, kPi - d);
}

std::vector<std::size_t> density_scores(const StrokeList& strokes) {
    require(!strokes.strokes.empty(), "density_scores: empty stroke list");
    require(strokes.canvas_width >= 1 && strokes.canvas_height >= 1, "density_scores: canvas size unknown");
    const std::size_t n = strokes.size();
    const double radius = kRadiusFraction * strokes.canvas_width;
    const double radius2 = radius * radius;

    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = strokes.strokes[i].cx * strokes.canvas_width;
        ys[i] = strokes.strokes[i].cy * strokes.canvas_height;
    }
    // Symmetric relation: visit each pair once.
    std::vector<std::size_t> scores(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            const double dx = xs[i] - xs[k];
            const double dy = ys[i] - ys[k];
            if (dx * dx + dy * dy >= radius2) continue;
            if (angle_difference(strokes.strokes[i].rotation, strokes.strokes[k].rotation) >= kAngleWindow) continue;
            ++scores[i];
            ++scores[k];
        }
    }
    return scores;
}

std::vector<std::size_t> erase_order(const StrokeList& strokes, const std::vector<std::size_t>& scores) {
    require(scores.size() == strokes.size(), "erase_order: score vector length does not match stroke count");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a > b;
    });
    return order;
}

std::vector<std::size_t> EraseSchedule::strokes_at(std::size_t j) const {
    require(j < frame_stroke_counts.size(), "schedule: frame index out of range");
    const std::size_t n = erase_order.size();
    const std::size_t erased = n - frame_stroke_counts[j];
    std::vector<std::size_t> kept(erase_order.begin() + static_cast<std::ptrdiff_t>(erased), erase_order.end());
    std::sort(kept.begin(), kept.end());
    return kept;
}

namespace {

void check_permutation(const std::vector<std::size_t>& order, std::size_t n) {
    require(order.size() == n, "schedule: erase order length does not match stroke count");
    std::vector<bool> seen(n, false);
    for (std::size_t i : order) {
        require(i < n && !seen[i], "schedule: erase order is not a permutation");
        seen[i] = true;
    }
}

}  // namespace

EraseSchedule make_schedule(const StrokeList& strokes, const std::vector<std::size_t>& order, int steps) {
    require(steps >= 1, "make_schedule: steps must be >= 1");
    const std::size_t n = strokes.size();
    check_permutation(order, n);
    const std::size_t t = static_cast<std::size_t>(steps);
    const std::size_t per_step = (n + t - 1) / t;

    EraseSchedule schedule;
    schedule.steps = steps;
    schedule.erase_order = order;
    schedule.frame_stroke_counts.reserve(t + 1);
    for (std::size_t j = 0; j <= t; ++j) {
        const std::size_t erased = j * per_step;
        schedule.frame_stroke_counts.push_back(erased >= n ? 0 : n - erased);
    }
    return schedule;
}

KeyframeSequence render_keyframes(const StrokeList& strokes, const EraseSchedule& schedule) {
    check_permutation(schedule.erase_order, strokes.size());
    require(schedule.frame_stroke_counts.size() == static_cast<std::size_t>(schedule.steps) + 1,
            "render_keyframes: schedule has wrong number of counts");
    KeyframeSequence seq;
    const std::size_t frames = schedule.frame_stroke_counts.size();
    seq.frames.reserve(frames);
    seq.stroke_sets.reserve(frames);
    // Emit in paint order: erase step `frames-1` (blank) first.
    for (std::size_t p = 0; p < frames; ++p) {
        const std::size_t j = frames - 1 - p;
        std::vector<std::size_t> kept = schedule.strokes_at(j);
        RasterImage canvas = blank_canvas(strokes.canvas_width, strokes.canvas_height, strokes.background);
        for (std::size_t i : kept) composite_stroke_inplace(canvas, strokes.strokes[i]);
        seq.frames.push_back(std::move(canvas));
        seq.stroke_sets.push_back(std::move(kept));
    }
    return seq;
}

std::vector<std::size_t> progressive_indices(std::size_t frames, std::size_t count) {
    require(frames >= 2, "sample_progressive: need at least 2 frames");
    require(count >= 2, "sample_progressive: count must be >= 2");
    require(count <= frames, "sample_progressive: cannot sample more frames than available");
    std::vector<std::size_t> idx(count);
    const std::size_t span = frames - 1;
    const std::size_t den = count - 1;
    // round-half-up of j*span/den in integer arithmetic
    for (std::size_t j = 0; j < count; ++j) idx[j] = (2 * j * span + den) / (2 * den);
    return idx;
}

KeyframeSequence sample_progressive(const KeyframeSequence& frames, std::size_t count) {
    const std::vector<std::size_t> idx = progressive_indices(frames.size(), count);
    KeyframeSequence out;
    for (std::size_t i : idx) {
        out.frames.push_back(frames.frames[i]);
        if (!frames.stroke_sets.empty()) out.stroke_sets.push_back(frames.stroke_sets[i]);
    }
    return out;
}

std::string schedule_to_json(const EraseSchedule& schedule) {
    const nlohmann::json doc = {{"schema", "schedule/v1"},
                                {"steps", schedule.steps},
                                {"erase_order", schedule.erase_order},
                                {"counts", schedule.frame_stroke_counts}};
    return doc.dump(2) + "\n";
}

EraseSchedule schedule_from_json(const std::string& text, const std::string& source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::Parse, source + ": " + e.what());
    }
    try {
        if (doc.at("schema").get<std::string>() != "schedule/v1") fail(ErrorCode::Validation, source + ": bad schema tag");
        EraseSchedule s;
        s.steps = doc.at("steps").get<int>();
        s.erase_order = doc.at("erase_order").get<std::vector<std::size_t>>();
        s.frame_stroke_counts = doc.at("counts").get<std::vector<std::size_t>>();
        if (s.steps < 1 || s.frame_stroke_counts.size() != static_cast<std::size_t>(s.steps) + 1) {
            fail(ErrorCode::Validation, source + ": counts must have steps+1 entries");
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Validation, source + ": " + e.what());
    }
}

}  // namespace ap::erasure
