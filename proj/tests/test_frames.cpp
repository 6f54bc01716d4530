#include <map>

#include <doctest.h>

#include "evtach/errors.hpp"
#include "evtach/frames.hpp"
#include "evtach/synth.hpp"
#include "helpers.hpp"

using namespace evtach;
using testutil::ev;

namespace {

// Scalar replay oracle: apply events one by one in timestamp order onto a
// sparse map, using the same interval and cell arithmetic spelled out
// independently of build_frames.
std::map<std::pair<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>>, int>
replay(const EventStream& s, const RegionOfInterest& roi, std::uint64_t d, AggMode mode,
       std::uint64_t& n_frames_out) {
    std::map<std::pair<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>>, int> cells;
    n_frames_out = 0;
    if (s.events.empty()) {
        return cells;
    }
    const std::uint64_t t0 = s.events.front().t;
    n_frames_out = (s.events.back().t - t0) / d;
    for (const Event& e : s.events) {
        if (e.x < roi.x0 || e.x >= roi.x1 || e.y < roi.y0 || e.y >= roi.y1) {
            continue;
        }
        const std::uint64_t k = (e.t - t0) / d;
        if (k >= n_frames_out) {
            continue;
        }
        auto& cell = cells[{k, {e.y - roi.y0, e.x - roi.x0}}];
        cell = mode == AggMode::overwrite ? e.p : cell + e.p;
    }
    return cells;
}

} // namespace

TEST_CASE("empty stream aggregates to an empty sequence") {
    EventStream s;
    s.geometry = {32, 32};
    const FrameSequence seq = build_frames(s, {0, 0, 8, 8}, 1000);
    CHECK(seq.empty());
}

TEST_CASE("a lone event leaves only a dropped partial frame") {
    EventStream s;
    s.geometry = {32, 32};
    s.events = {ev(400, 2, 3, 1)};
    CHECK(build_frames(s, {0, 0, 8, 8}, 1000).empty());

    // once the stream spans a full interval the event lands in frame 0
    s.events.push_back(ev(1400, 31, 31, 1)); // outside the RoI, just extends the span
    const FrameSequence seq = build_frames(s, {2, 3, 10, 11}, 1000);
    REQUIRE(seq.size() == 1);
    CHECK(seq.frames[0].t_start == 400);
    CHECK(seq.frames[0].t_end == 1400);
    CHECK(seq.frames[0].at(0, 0) == 1);
    CHECK(seq.frames[0].nonzero_count() == 1);
}

TEST_CASE("the last event in an interval wins the cell") {
    EventStream s;
    s.geometry = {16, 16};
    s.events = {ev(0, 1, 1, 1), ev(500, 1, 1, -1), ev(2000, 0, 0, 1)};
    const FrameSequence seq = build_frames(s, {0, 0, 4, 4}, 1000);
    REQUIRE(seq.size() == 2);
    CHECK(seq.frames[0].at(1, 1) == -1);

    const FrameSequence additive = build_frames(s, {0, 0, 4, 4}, 1000, AggMode::additive);
    CHECK(additive.frames[0].at(1, 1) == 0); // +1 then -1 sums to zero
}

TEST_CASE("build_frames matches the scalar replay oracle on random streams") {
    testutil::Rng rng(77);
    for (int iter = 0; iter < 60; ++iter) {
        const EventStream s = testutil::random_stream(rng, 300, 48);
        RegionOfInterest roi;
        roi.x0 = static_cast<std::uint32_t>(rng.below(8));
        roi.y0 = static_cast<std::uint32_t>(rng.below(8));
        const std::uint32_t side = static_cast<std::uint32_t>(rng.range(1, 16));
        roi.x1 = roi.x0 + side;
        roi.y1 = roi.y0 + side;
        if (!roi.inside(s.geometry)) {
            continue;
        }
        const std::uint64_t d = static_cast<std::uint64_t>(rng.range(1, 40));
        const AggMode mode = (rng.next() & 1) ? AggMode::overwrite : AggMode::additive;

        std::uint64_t expected_frames = 0;
        const auto expected = replay(s, roi, d, mode, expected_frames);
        const FrameSequence seq = build_frames(s, roi, d, mode);
        REQUIRE(seq.size() == expected_frames);
        std::size_t mismatches = 0;
        for (const AggregationFrame& f : seq.frames) {
            CHECK(f.t_end - f.t_start == d);
            for (std::uint32_t r = 0; r < f.side; ++r) {
                for (std::uint32_t c = 0; c < f.side; ++c) {
                    const auto it = expected.find({f.index, {r, c}});
                    const int want = it == expected.end() ? 0 : it->second;
                    mismatches += f.at(r, c) != want;
                }
            }
        }
        REQUIRE(mismatches == 0);
    }
}

TEST_CASE("frames are invariant under joint translation of events and RoI") {
    testutil::Rng rng(123);
    for (int iter = 0; iter < 20; ++iter) {
        EventStream s = testutil::random_stream(rng, 200, 40);
        const std::uint32_t dx = static_cast<std::uint32_t>(rng.below(10));
        const std::uint32_t dy = static_cast<std::uint32_t>(rng.below(10));
        EventStream shifted = s;
        shifted.geometry.width += dx;
        shifted.geometry.height += dy;
        for (Event& e : shifted.events) {
            e.x += dx;
            e.y += dy;
        }
        const RegionOfInterest roi{0, 0, 12, 12};
        const RegionOfInterest roi_shifted{dx, dy, 12 + dx, 12 + dy};
        if (!roi.inside(s.geometry)) {
            continue;
        }
        const FrameSequence a = build_frames(s, roi, 25);
        const FrameSequence b = build_frames(shifted, roi_shifted, 25);
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(a.frames[k].cells == b.frames[k].cells);
        }
    }
}

TEST_CASE("event conservation for single-event-per-cell streams") {
    // one event per pixel, one interval apart, all inside the RoI
    EventStream s;
    s.geometry = {8, 8};
    std::uint64_t t = 0;
    for (std::uint32_t y = 0; y < 4; ++y) {
        for (std::uint32_t x = 0; x < 4; ++x) {
            s.events.push_back(ev(t, x, y, (x + y) % 2 ? 1 : -1));
            t += 10;
        }
    }
    const FrameSequence seq = build_frames(s, {0, 0, 4, 4}, 10);
    std::size_t nonzero = 0;
    for (const AggregationFrame& f : seq.frames) {
        nonzero += f.nonzero_count();
    }
    // events in covered intervals: the last event sits in the dropped partial
    std::size_t covered = 0;
    for (const Event& e : s.events) {
        if ((e.t - s.events.front().t) / 10 < seq.size()) {
            ++covered;
        }
    }
    CHECK(nonzero == covered);
    CHECK(covered == s.events.size() - 1);
}

TEST_CASE("aggregation rejects bad configuration") {
    EventStream s;
    s.geometry = {16, 16};
    s.events = {ev(0, 0, 0, 1)};
    CHECK_THROWS_AS((void)build_frames(s, {0, 0, 4, 4}, 0), ConfigError);
    CHECK_THROWS_AS((void)build_frames(s, {0, 0, 20, 20}, 10), ConfigError);
    CHECK_THROWS_AS((void)build_frames(s, {4, 0, 0, 4}, 10), ConfigError);
}

TEST_CASE("template selection: explicit index and max-event-count tie break") {
    EventStream s;
    s.geometry = {8, 8};
    // frame 0: 3 cells, frame 1: 9 cells, frame 2: 9 cells (counts 3, 9, 9)
    std::uint64_t t = 0;
    auto burst = [&](int cells) {
        for (int i = 0; i < cells; ++i) {
            s.events.push_back(ev(t, static_cast<std::uint32_t>(i % 4),
                                  static_cast<std::uint32_t>(i / 4), 1));
        }
        t += 100;
    };
    burst(3);
    burst(9);
    burst(9);
    s.events.push_back(ev(t, 7, 7, 1)); // close the third interval
    const FrameSequence seq = build_frames(s, {0, 0, 4, 4}, 100);
    REQUIRE(seq.size() == 3);

    CHECK(select_template(seq, 0).source_index == 0);
    CHECK(select_template(seq, std::nullopt).source_index == 1); // tie -> lowest
    CHECK_THROWS_AS((void)select_template(seq, 3), ConfigError);
    CHECK_THROWS_AS((void)select_template(FrameSequence{}, std::nullopt), ConfigError);
}

TEST_CASE("auto template on a flash scene lands on an edge transition") {
    SceneSpec spec;
    spec.kind = SceneKind::flash;
    spec.frequency_hz = 1000;
    spec.duration_s = 0.01;
    spec.geometry = {32, 32};
    spec.center_x = 16;
    spec.center_y = 16;
    spec.radius = 6;
    const EventStream stream = generate(spec);
    const FrameSequence seq = build_frames(stream, {8, 8, 24, 24}, 200);
    const Template tpl = select_template(seq, std::nullopt);
    // the generator puts edges at multiples of 500 us; the chosen frame's
    // interval must contain one
    const std::uint64_t a = tpl.frame.t_start;
    const std::uint64_t b = tpl.frame.t_end;
    bool contains_edge = false;
    for (std::uint64_t edge = 0; edge < 10000; edge += 500) {
        contains_edge = contains_edge || (edge >= a && edge < b);
    }
    CHECK(contains_edge);
    CHECK(tpl.frame.nonzero_count() > 0);
}

TEST_CASE("pgm rendering maps polarities to gray levels") {
    AggregationFrame f;
    f.side = 2;
    f.cells = {0, 1, -1, 2};
    const std::string pgm = frame_to_pgm(f);
    REQUIRE(pgm.size() == std::string("P5\n2 2\n255\n").size() + 4);
    CHECK(pgm.substr(0, 9) == "P5\n2 2\n25");
    const auto* px = reinterpret_cast<const unsigned char*>(pgm.data() + pgm.size() - 4);
    CHECK(px[0] == 128);
    CHECK(px[1] == 255);
    CHECK(px[2] == 0);
    CHECK(px[3] == 255);
}
