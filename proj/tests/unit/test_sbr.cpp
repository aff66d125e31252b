#include <doctest.h>

#include <cmath>

#include "core/error.hpp"
#include "sbr/planner.hpp"
#include "sbr/stroke_json.hpp"
#include "support/scenes.hpp"

using namespace ap;
using namespace ap::sbr;

namespace {

RasterImage two_tone(int size) {
    RasterImage img(size, size, 3);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const bool left = x < size * 3 / 8;
            img.at(x, y, 0) = left ? 0.1f : 0.9f;
            img.at(x, y, 1) = left ? 0.2f : 0.6f;
            img.at(x, y, 2) = left ? 0.8f : 0.1f;
        }
    return img;
}

PlannerConfig small_config(std::uint64_t seed) {
    PlannerConfig c;
    c.levels = 3;
    c.strokes_per_level = {50};
    c.seed = seed;
    return c;
}

// Best whole-image mse drop achievable by one level-0 stroke whose center lies on
// an 8x8 lattice, over every rotation, the three aspects and three lengths.
double exhaustive_first_stroke(const RasterImage& target, const Rgb& bg) {
    const RasterImage blank = blank_canvas(target.width(), target.height(), bg);
    const double base = mse(blank, target);
    double best = 0.0;
    for (int gy = 0; gy < 8; ++gy)
        for (int gx = 0; gx < 8; ++gx)
            for (int r = 0; r < kRotationSteps; ++r)
                for (double aspect : kCandidateAspects)
                    for (double len : {0.75, 0.875, 1.0}) {
                        Stroke s;
                        s.cx = (gx + 0.5) / 8;
                        s.cy = (gy + 0.5) / 8;
                        s.len = len * level_scale(0);
                        s.thick = s.len * aspect;
                        s.rotation = r * kPi / kRotationSteps;
                        if (!footprint_mean_color(target, s, s.color)) continue;
                        best = std::max(best, base - mse(composite_stroke(blank, s), target));
                    }
    return best;
}

}  // namespace

TEST_CASE("strokes/v1 export and import round-trip bit-exactly") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const auto list = testing::random_strokes(seed * 3, 64, 48, seed);
        const auto back = strokes_from_json(strokes_to_json(list));
        CHECK(back == list);
        CHECK(strokes_to_json(back) == strokes_to_json(list));
    }
}

TEST_CASE("import normalizes rotation modulo pi") {
    const std::string doc = R"({"schema":"strokes/v1","canvas":{"w":10,"h":10,"bg":[1,1,1]},
      "strokes":[{"cx":0.5,"cy":0.5,"len":0.2,"thick":0.1,"rot":4.71238898038469,"color":[0,0,0],"opacity":1,"index":0}]})";
    const auto list = strokes_from_json(doc);
    CHECK(list.strokes[0].rotation == doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("import diagnostics name the line, field or stroke") {
    auto code_of = [](const std::string& text) {
        try {
            strokes_from_json(text, "s.json");
        } catch (const Error& e) {
            return std::make_pair(e.code(), std::string(e.what()));
        }
        return std::make_pair(ErrorCode::InvalidArgument, std::string("accepted"));
    };
    auto [c1, m1] = code_of("{\n\"schema\": \"strokes/v1\",\n  oops\n}");
    CHECK(c1 == ErrorCode::Parse);
    CHECK(m1.find("s.json:3") != std::string::npos);

    auto [c2, m2] = code_of(R"({"schema":"strokes/v1","canvas":{"w":10,"h":10,"bg":[1,1,1]},
      "strokes":[{"cx":0.5,"cy":0.5,"len":0.2,"thick":0.1,"rot":0,"color":[0,0,0],"opacity":1}]})");
    CHECK(c2 == ErrorCode::Validation);
    CHECK(m2.find("index") != std::string::npos);

    auto [c3, m3] = code_of(R"({"schema":"strokes/v1","canvas":{"w":10,"h":10,"bg":[1,1,1]},
      "strokes":[{"cx":0.5,"cy":0.5,"len":0.2,"thick":0.1,"rot":0,"color":[0,0,0],"opacity":1,"index":0},
                 {"cx":1.5,"cy":0.5,"len":0.2,"thick":0.1,"rot":0,"color":[0,0,0],"opacity":1,"index":1}]})");
    CHECK(c3 == ErrorCode::Validation);
    CHECK(m3.find("stroke 1") != std::string::npos);
    CHECK(m3.find("cx") != std::string::npos);

    auto [c4, m4] = code_of(R"({"schema":"strokes/v2","canvas":{"w":10,"h":10,"bg":[1,1,1]},"strokes":[]})");
    CHECK(c4 == ErrorCode::Validation);

    auto [c5, m5] = code_of(R"({"schema":"strokes/v1","canvas":{"w":10,"h":10,"bg":[1,1,1]},
      "strokes":[{"cx":0.5,"cy":0.5,"len":0.2,"thick":0.1,"rot":0,"color":[0,0,0],"opacity":1,"index":3}]})");
    CHECK(c5 == ErrorCode::Validation);
}

TEST_CASE("render of an empty list is the background; a covering stroke paints everything") {
    StrokeList list;
    list.canvas_width = 20;
    list.canvas_height = 10;
    list.background = Rgb{0.1f, 0.2f, 0.3f};
    CHECK(render(list) == blank_canvas(20, 10, list.background));
    Stroke s;
    s.len = 1.0;
    s.thick = 1.0;
    s.color = Rgb{0.5f, 0.25f, 0.75f};
    list.strokes.push_back(s);
    CHECK(render(list) == blank_canvas(20, 10, s.color));
    const StrokeList copy = list;
    CHECK(render(copy) == render(list));
}

TEST_CASE("bounding-box mse delta equals the whole-image difference") {
    Rng rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        const auto canvas = testing::random_image(32, 24, 3, trial);
        const auto target = testing::random_image(32, 24, 3, trial + 1000);
        const Stroke s = testing::random_stroke(rng, 0);
        const double whole = mse(composite_stroke(canvas, s), target) - mse(canvas, target);
        CHECK(mse_delta(canvas, target, s) == doctest::Approx(whole).epsilon(1e-9).scale(1e-12));
    }
}

TEST_CASE("footprint mean color matches a per-pixel average") {
    const auto target = testing::random_image(30, 30, 3, 4);
    Stroke s;
    s.cx = 0.4;
    s.cy = 0.6;
    s.len = 0.3;
    s.thick = 0.1;
    s.rotation = 0.7;
    Rgb got;
    REQUIRE(footprint_mean_color(target, s, got));
    const Footprint fp(s, 30, 30);
    double sum = 0;
    int n = 0;
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 30; ++x)
            if (fp.coverage(x, y) > 0) {
                sum += target.at(x, y, 1);
                ++n;
            }
    CHECK(got.g == doctest::Approx(sum / n).epsilon(1e-6));
}

TEST_CASE("constant target is painted almost exactly") {
    const auto target = blank_canvas(32, 32, Rgb{0.3f, 0.6f, 0.2f});
    const auto list = plan_strokes(target, small_config(1));
    CHECK(list.size() >= 1);
    CHECK(mse(render(list), target) < 1e-4);
}

TEST_CASE("zero budgets give an empty plan") {
    PlannerConfig c;
    c.strokes_per_level = {0};
    const auto target = testing::synthetic_scene(32, 32, 3);
    const auto list = plan_strokes(target, c);
    CHECK(list.size() == 0);
    CHECK(render(list) == blank_canvas(32, 32, c.background));
}

TEST_CASE("planner argument checks") {
    CHECK_THROWS_AS(plan_strokes(testing::synthetic_scene(15, 40, 1), PlannerConfig{}), Error);
    CHECK_THROWS_AS(plan_strokes(RasterImage(32, 32, 1), PlannerConfig{}), Error);
    PlannerConfig bad;
    bad.levels = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = PlannerConfig{};
    bad.min_improvement = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = PlannerConfig{};
    bad.strokes_per_level = {1, 2};
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("two-tone target: coverage, monotone objective and first-stroke oracle") {
    const auto target = two_tone(64);
    const auto cfg = small_config(7);
    const auto result = plan_strokes_traced(target, cfg);
    const double blank = mse(blank_canvas(64, 64, cfg.background), target);
    REQUIRE(!result.mse_trace.empty());
    CHECK(result.initial_mse == doctest::Approx(blank));
    CHECK(mse(render(result.strokes), target) < 0.5 * blank);
    CHECK(result.strokes.size() <= 150u);

    RasterImage canvas = blank_canvas(64, 64, cfg.background);
    double prev = blank;
    for (std::size_t i = 0; i < result.strokes.size(); ++i) {
        composite_stroke_inplace(canvas, result.strokes.strokes[i]);
        const double now = mse(canvas, target);
        CHECK(now < prev);
        CHECK(prev - now >= cfg.min_improvement * 0.999);
        CHECK(now == doctest::Approx(result.mse_trace[i]).epsilon(1e-9));
        prev = now;
    }
    const double first_gain = blank - result.mse_trace.front();
    CHECK(first_gain >= 0.5 * exhaustive_first_stroke(target, cfg.background));
}

TEST_CASE("planner output depends on the seed but not on the worker count") {
    const auto target = testing::synthetic_scene(48, 40, 9);
    auto cfg = small_config(3);
    const auto a = strokes_to_json(plan_strokes(target, cfg));
    CHECK(a == strokes_to_json(plan_strokes(target, cfg)));
    cfg.jobs = 3;
    CHECK(a == strokes_to_json(plan_strokes(target, cfg)));
    cfg.seed = 4;
    CHECK(a != strokes_to_json(plan_strokes(target, cfg)));
}

TEST_CASE("stroke sizes shrink per level") {
    const auto target = testing::synthetic_scene(64, 64, 5);
    PlannerConfig cfg;
    cfg.levels = 3;
    cfg.strokes_per_level = {10, 20, 40};
    const auto list = plan_strokes(target, cfg);
    for (const auto& s : list.strokes) {
        CHECK(s.len <= 1.0);
        CHECK(s.len >= 0.75 * level_scale(2) - 1e-12);
    }
    CHECK(list.strokes.front().len > level_scale(1));
    CHECK(list.strokes.back().len <= level_scale(2) + 1e-12);
}
