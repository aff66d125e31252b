#include "sbr/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace ap::sbr {

void PlannerConfig::validate() const {
    require(levels >= 1, "planner: levels must be >= 1");
    require(strokes_per_level.size() == 1 || strokes_per_level.size() == static_cast<std::size_t>(levels),
            "planner: strokes_per_level must have 1 or `levels` entries");
    for (int b : strokes_per_level) require(b >= 0, "planner: stroke budgets must be >= 0");
    require(candidates_per_cell >= 1, "planner: candidates_per_cell must be >= 1");
    require(min_improvement > 0.0, "planner: min_improvement must be > 0");
}

int PlannerConfig::budget(int level) const {
    return strokes_per_level.size() == 1 ? strokes_per_level.front() : strokes_per_level[static_cast<std::size_t>(level)];
}

double level_scale(int level) noexcept { return std::ldexp(1.0, -level); }

RasterImage render(const StrokeList& strokes) {
    RasterImage canvas = blank_canvas(strokes.canvas_width, strokes.canvas_height, strokes.background);
    for (const Stroke& s : strokes.strokes) composite_stroke_inplace(canvas, s);
    return canvas;
}

bool footprint_mean_color(const RasterImage& target, const Stroke& stroke, Rgb& out) {
    const Footprint fp(stroke, target.width(), target.height());
    const PixelBox& box = fp.bounds();
    double sum[3] = {0.0, 0.0, 0.0};
    long long count = 0;
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            if (fp.coverage(x, y) <= 0.0) continue;
            for (int c = 0; c < 3; ++c) sum[c] += target.at(x, y, c);
            ++count;
        }
    }
    if (count == 0) return false;
    out = Rgb{static_cast<float>(sum[0] / count), static_cast<float>(sum[1] / count), static_cast<float>(sum[2] / count)};
    return true;
}

namespace {

double delta_sse(const RasterImage& canvas, const RasterImage& target, const Stroke& stroke) {
    const Footprint fp(stroke, canvas.width(), canvas.height());
    const PixelBox& box = fp.bounds();
    const float color[3] = {stroke.color.r, stroke.color.g, stroke.color.b};
    double delta = 0.0;
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            const double cov = fp.coverage(x, y);
            if (cov <= 0.0) continue;
            const float alpha = static_cast<float>(stroke.opacity * cov);
            for (int c = 0; c < 3; ++c) {
                const float before = canvas.at(x, y, c);
                const float after = blend(before, color[c], alpha);
                const double t = target.at(x, y, c);
                const double d0 = before - t;
                const double d1 = after - t;
                delta += d1 * d1 - d0 * d0;
            }
        }
    }
    return delta;
}

struct Cell {
    double x0, y0, size;
};

struct Candidate {
    Stroke stroke;
    bool valid = false;
};

std::vector<Cell> make_grid(int width, int height, double cell_px) {
    const int nx = std::max(1, static_cast<int>(std::ceil(width / cell_px)));
    const int ny = std::max(1, static_cast<int>(std::ceil(height / cell_px)));
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(nx) * ny);
    for (int gy = 0; gy < ny; ++gy) {
        for (int gx = 0; gx < nx; ++gx) cells.push_back({gx * cell_px, gy * cell_px, cell_px});
    }
    return cells;
}

Stroke sample_candidate(Rng& rng, const Cell& cell, double scale, int width, int height) {
    Stroke s;
    const double px = std::min(cell.x0 + rng.uniform() * cell.size, static_cast<double>(width));
    const double py = std::min(cell.y0 + rng.uniform() * cell.size, static_cast<double>(height));
    s.cx = px / width;
    s.cy = py / height;
    s.len = std::min(1.0, scale * rng.uniform(0.75, 1.0));
    const std::size_t aspects = std::size(kCandidateAspects);
    s.thick = s.len * kCandidateAspects[rng.below(aspects)];
    s.rotation = static_cast<double>(rng.below(kRotationSteps)) * kPi / kRotationSteps;
    s.opacity = 1.0;
    return s;
}

}  // namespace

double mse_delta(const RasterImage& canvas, const RasterImage& target, const Stroke& stroke) {
    require(canvas.same_shape(target) && canvas.channels() == 3, "mse_delta: canvas/target shape mismatch");
    return delta_sse(canvas, target, stroke) / static_cast<double>(canvas.data().size());
}

PlanResult plan_strokes_traced(const RasterImage& target, const PlannerConfig& config) {
    config.validate();
    require(target.channels() == 3, "plan_strokes: target must be RGB");
    require(std::min(target.width(), target.height()) >= 16,
            "plan_strokes: image too small (" + std::to_string(target.width()) + "x" +
                std::to_string(target.height()) + ", minimum dimension is 16)");

    const int width = target.width();
    const int height = target.height();
    const double diag = std::hypot(static_cast<double>(width), static_cast<double>(height));
    const double scalars = static_cast<double>(target.data().size());

    PlanResult result;
    result.strokes.canvas_width = width;
    result.strokes.canvas_height = height;
    result.strokes.background = config.background;

    RasterImage canvas = blank_canvas(width, height, config.background);
    double sse = mse(canvas, target) * scalars;
    result.initial_mse = sse / scalars;

    Rng rng(config.seed);
    const int k = config.candidates_per_cell;

    for (int level = 0; level < config.levels; ++level) {
        const int budget = config.budget(level);
        if (budget == 0) continue;
        const double scale = level_scale(level);
        const std::vector<Cell> cells = make_grid(width, height, 0.5 * scale * diag);
        const int max_passes =
            std::max(4, 2 * static_cast<int>((budget + cells.size() - 1) / cells.size()));

        int accepted = 0;
        for (int pass = 0; pass < max_passes && accepted < budget; ++pass) {
            std::vector<std::size_t> order(cells.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

            // Candidates are drawn sequentially so the stream is independent of `jobs`.
            std::vector<Candidate> pool(order.size() * static_cast<std::size_t>(k));
            for (std::size_t slot = 0; slot < order.size(); ++slot) {
                for (int c = 0; c < k; ++c) {
                    pool[slot * k + c].stroke = sample_candidate(rng, cells[order[slot]], scale, width, height);
                }
            }

            std::vector<std::ptrdiff_t> best(order.size(), -1);
            parallel_for(order.size(), config.jobs, [&](std::size_t slot) {
                double best_delta = 0.0;
                for (int c = 0; c < k; ++c) {
                    Candidate& cand = pool[slot * k + c];
                    cand.valid = footprint_mean_color(target, cand.stroke, cand.stroke.color);
                    if (!cand.valid) continue;
                    const double d = delta_sse(canvas, target, cand.stroke);
                    if (d < best_delta) {
                        best_delta = d;
                        best[slot] = c;
                    }
                }
            });

            const int before = accepted;
            for (std::size_t slot = 0; slot < order.size() && accepted < budget; ++slot) {
                if (best[slot] < 0) continue;
                Stroke stroke = pool[slot * k + static_cast<std::size_t>(best[slot])].stroke;
                const double d = delta_sse(canvas, target, stroke);
                if (-d / scalars < config.min_improvement) continue;
                stroke.index = result.strokes.strokes.size();
                composite_stroke_inplace(canvas, stroke);
                sse += d;
                result.strokes.strokes.push_back(stroke);
                result.mse_trace.push_back(sse / scalars);
                ++accepted;
            }
            if (accepted == before) break;
        }
    }
    return result;
}

StrokeList plan_strokes(const RasterImage& target, const PlannerConfig& config) {
    return plan_strokes_traced(target, config).strokes;
}

}  // namespace ap::sbr
