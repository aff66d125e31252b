#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "core/error.hpp"
#include "erasure/erasure.hpp"
#include "sbr/planner.hpp"
#include "support/scenes.hpp"

using namespace ap;
using namespace ap::erasure;

namespace {

std::vector<std::size_t> density_oracle(const StrokeList& list) {
    std::vector<std::size_t> out(list.size(), 0);
    const double W = list.canvas_width, H = list.canvas_height;
    for (std::size_t i = 0; i < list.size(); ++i)
        for (std::size_t k = 0; k < list.size(); ++k) {
            if (i == k) continue;
            const auto& a = list.strokes[i];
            const auto& b = list.strokes[k];
            const double dist = std::hypot(a.cx * W - b.cx * W, a.cy * H - b.cy * H);
            const double raw = std::fmod(std::abs(a.rotation - b.rotation), kPi);
            const double ang = std::min(raw, kPi - raw);
            if (dist < 0.1 * W && ang < kPi / 4) ++out[i];
        }
    return out;
}

std::vector<std::size_t> counts_oracle(std::size_t n, std::size_t T) {
    std::vector<std::size_t> c;
    for (std::size_t j = 0; j <= T; ++j) {
        const long long left = static_cast<long long>(n) - static_cast<long long>(j * ((n + T - 1) / T));
        c.push_back(left < 0 ? 0 : static_cast<std::size_t>(left));
    }
    return c;
}

StrokeList at(std::initializer_list<std::array<double, 3>> pts, int W = 100) {
    StrokeList list;
    list.canvas_width = W;
    list.canvas_height = W;
    std::size_t i = 0;
    for (const auto& p : pts) {
        Stroke s;
        s.cx = p[0] / W;
        s.cy = p[1] / W;
        s.rotation = p[2];
        s.index = i++;
        list.strokes.push_back(s);
    }
    return list;
}

std::vector<std::size_t> identity(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

}  // namespace

TEST_CASE("density: trivial cases") {
    CHECK(density_scores(at({{50, 50, 0}})) == std::vector<std::size_t>{0});
    CHECK(density_scores(at({{50, 50, 1}, {50, 50, 1}})) == std::vector<std::size_t>{1, 1});
    CHECK_THROWS_AS(density_scores(at({})), Error);
}

TEST_CASE("density: hand-picked strokes on W=100 match the double-loop oracle") {
    const auto list = at({{10, 10, 0.0},
                          {15, 12, 0.5},
                          {12, 18, 3.0},      // wraps around pi: close to 0
                          {19.99, 10, 0.78},  // inside radius, angle just under pi/4
                          {20, 10, 0.0},      // exactly 10 px from the first: not a neighbour
                          {80, 80, 0.0}});
    const auto got = density_scores(list);
    CHECK(got == density_oracle(list));
    CHECK(got[5] == 0);
}

TEST_CASE("density: random sets match the oracle") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const auto list = testing::random_strokes(1 + rng.below(50), 40 + int(rng.below(200)), 40 + int(rng.below(200)), seed);
        CHECK(density_scores(list) == density_oracle(list));
    }
}

TEST_CASE("density: far strokes, translation and half-turn invariance") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto list = testing::random_strokes(20, 200, 200, seed);
        for (auto& s : list.strokes) {
            s.cx = 0.1 + 0.4 * s.cx;
            s.cy = 0.1 + 0.4 * s.cy;
        }
        const auto base = density_scores(list);

        auto moved = list;
        for (auto& s : moved.strokes) {
            s.cx += 0.3;
            s.cy += 0.25;
        }
        CHECK(density_scores(moved) == base);

        auto turned = list;
        for (auto& s : turned.strokes) s.rotation = normalize_rotation(s.rotation + kPi);
        CHECK(density_scores(turned) == base);

        auto extra = list;
        Stroke far;
        far.cx = 0.95;
        far.cy = 0.95;
        far.index = extra.size();
        extra.strokes.push_back(far);
        auto scores = density_scores(extra);
        scores.pop_back();
        CHECK(scores == base);
    }
}

TEST_CASE("angle difference is circular") {
    CHECK(angle_difference(0.1, kPi - 0.1) == doctest::Approx(0.2));
    CHECK(angle_difference(0.0, kPi / 2) == doctest::Approx(kPi / 2));
    CHECK(angle_difference(1.0, 1.0) == 0.0);
}

TEST_CASE("erase order: direct sort, ties and reference oracle") {
    const auto three = testing::random_strokes(3, 10, 10, 1);
    CHECK(erase_order(three, {0, 5, 2}) == std::vector<std::size_t>{1, 2, 0});
    CHECK(erase_order(three, {4, 4, 4}) == std::vector<std::size_t>{2, 1, 0});
    CHECK_THROWS_AS(erase_order(three, {1, 2}), Error);

    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(60);
        const auto list = testing::random_strokes(n, 10, 10, trial);
        std::vector<std::size_t> scores(n);
        for (auto& s : scores) s = rng.below(5);
        // Reversing the paint order then stable-sorting by score gives the tie rule.
        std::vector<std::size_t> want = identity(n);
        std::reverse(want.begin(), want.end());
        std::stable_sort(want.begin(), want.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
        CHECK(erase_order(list, scores) == want);
    }
}

TEST_CASE("schedule counts follow the ceil-division rule") {
    CHECK(make_schedule(testing::random_strokes(20, 10, 10, 1), identity(20), 10).frame_stroke_counts ==
          std::vector<std::size_t>{20, 18, 16, 14, 12, 10, 8, 6, 4, 2, 0});
    CHECK(make_schedule(testing::random_strokes(23, 10, 10, 1), identity(23), 10).frame_stroke_counts ==
          std::vector<std::size_t>{23, 20, 17, 14, 11, 8, 5, 2, 0, 0, 0});
    CHECK(make_schedule(StrokeList{{}, 10, 10, kWhite}, {}, 10).frame_stroke_counts == std::vector<std::size_t>(11, 0));
    CHECK_THROWS_AS(make_schedule(testing::random_strokes(3, 10, 10, 1), identity(3), 0), Error);
    CHECK_THROWS_AS(make_schedule(testing::random_strokes(3, 10, 10, 1), {0, 0, 1}, 2), Error);

    for (std::size_t n : {0u, 1u, 2u, 7u, 9u, 10u, 11u, 20u, 23u, 99u, 1000u})
        for (int T : {1, 2, 3, 10, 11}) {
            const auto list = testing::random_strokes(n, 10, 10, n + T);
            const auto sch = make_schedule(list, identity(n), T);
            CHECK(sch.frame_stroke_counts == counts_oracle(n, std::size_t(T)));
        }
}

TEST_CASE("keyframes: nested stroke sets, paint order and endpoint frames") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const auto list = testing::random_strokes(5 + seed * 3, 24, 20, seed);
        const auto order = erase_order(list, density_scores(list));
        const auto sch = make_schedule(list, order, 10);
        const auto seq = render_keyframes(list, sch);
        REQUIRE(seq.size() == 11);
        CHECK(seq.frames.front() == blank_canvas(24, 20, list.background));
        CHECK(seq.frames.back() == sbr::render(list));
        for (std::size_t p = 0; p + 1 < seq.size(); ++p) {
            const auto& a = seq.stroke_sets[p];
            const auto& b = seq.stroke_sets[p + 1];
            CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
        }
        // Each frame's strokes are those not among the first (n - count) erased.
        for (std::size_t j = 0; j < sch.frame_stroke_counts.size(); ++j) {
            std::set<std::size_t> want(order.begin() + long(list.size() - sch.frame_stroke_counts[j]), order.end());
            const auto got = sch.strokes_at(j);
            CHECK(std::vector<std::size_t>(want.begin(), want.end()) == got);
        }
    }
}

TEST_CASE("keyframes: two-frame schedule is blank then full") {
    const auto list = testing::random_strokes(6, 16, 16, 3);
    const auto seq = render_keyframes(list, make_schedule(list, identity(6), 1));
    REQUIRE(seq.size() == 2);
    CHECK(seq.frames[0] == blank_canvas(16, 16, list.background));
    CHECK(seq.frames[1] == sbr::render(list));
}

TEST_CASE("paint order adds strokes of non-decreasing mean density") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto list = testing::random_strokes(40 + seed, 64, 64, seed);
        const auto scores = density_scores(list);
        const auto sch = make_schedule(list, erase_order(list, scores), 10);
        double prev = -1;
        for (std::size_t j = sch.frame_stroke_counts.size() - 1; j > 0; --j) {
            const std::size_t from = list.size() - sch.frame_stroke_counts[j - 1];
            const std::size_t to = list.size() - sch.frame_stroke_counts[j];
            if (from == to) continue;
            double sum = 0;
            for (std::size_t k = from; k < to; ++k) sum += double(scores[sch.erase_order[k]]);
            const double mean = sum / double(to - from);
            CHECK(mean >= prev);
            prev = mean;
        }
    }
}

TEST_CASE("progressive sampling indices") {
    CHECK(progressive_indices(12, 12) == identity(12));
    CHECK(progressive_indices(100, 2) == std::vector<std::size_t>{0, 99});
    const auto idx = progressive_indices(101, 12);
    for (std::size_t j = 0; j < 12; ++j) CHECK(idx[j] == std::size_t(std::floor(j * 100.0 / 11.0 + 0.5)));
    CHECK_THROWS_AS(progressive_indices(5, 6), Error);
    CHECK_THROWS_AS(progressive_indices(1, 1), Error);
}

TEST_CASE("schedule/v1 round trip") {
    const auto list = testing::random_strokes(17, 30, 30, 2);
    const auto sch = make_schedule(list, erase_order(list, density_scores(list)), 10);
    const auto back = schedule_from_json(schedule_to_json(sch));
    CHECK(back.frame_stroke_counts == sch.frame_stroke_counts);
    CHECK(back.erase_order == sch.erase_order);
    CHECK(back.steps == 10);
    CHECK_THROWS_AS(schedule_from_json("{"), Error);
    CHECK_THROWS_AS(schedule_from_json(R"({"schema":"other"})"), Error);
}
