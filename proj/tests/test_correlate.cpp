#include <cmath>

#include <doctest.h>

#include "evtach/correlate.hpp"
#include "evtach/errors.hpp"
#include "evtach/synth.hpp"
#include "helpers.hpp"

using namespace evtach;

namespace {

AggregationFrame make_frame(std::uint32_t side, std::vector<std::int16_t> cells,
                            std::size_t index = 0) {
    AggregationFrame f;
    f.side = side;
    f.index = index;
    f.t_start = index * 100;
    f.t_end = f.t_start + 100;
    f.cells = std::move(cells);
    return f;
}

FrameSequence make_seq(std::uint32_t side, std::vector<std::vector<std::int16_t>> frames) {
    FrameSequence seq;
    seq.roi = {0, 0, side, side};
    seq.duration_us = 100;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        seq.frames.push_back(make_frame(side, std::move(frames[i]), i));
    }
    return seq;
}

AggregationFrame random_frame(testutil::Rng& rng, std::uint32_t side) {
    std::vector<std::int16_t> cells(static_cast<std::size_t>(side) * side);
    for (auto& c : cells) {
        c = static_cast<std::int16_t>(rng.range(-1, 1));
    }
    return make_frame(side, std::move(cells));
}

double rel_diff(double a, double b) {
    const double denom = std::max({std::fabs(a), std::fabs(b), 1.0});
    return std::fabs(a - b) / denom;
}

} // namespace

TEST_CASE("a template correlates with itself at 1 and its negation at -1") {
    testutil::Rng rng(11);
    const AggregationFrame f = random_frame(rng, 9);
    std::vector<std::int16_t> negated = f.cells;
    for (auto& c : negated) {
        c = static_cast<std::int16_t>(-c);
    }
    FrameSequence seq = make_seq(9, {});
    seq.frames = {f, make_frame(9, negated, 1),
                  make_frame(9, std::vector<std::int16_t>(81, 0), 2)};

    const Template tpl{f, 0};
    const auto resp =
        correlate(tpl, seq, CorrMode::zero_shift, CorrNorm::normalized, CorrBackend::direct);
    REQUIRE(resp.scores.size() == 3);
    CHECK(resp.scores[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(resp.scores[1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(resp.scores[2] == 0.0); // all-zero frame scores 0 by convention
}

TEST_CASE("an all-zero template scores 0 against everything when normalized") {
    testutil::Rng rng(12);
    FrameSequence seq = make_seq(5, {});
    seq.frames = {random_frame(rng, 5)};
    const Template tpl{make_frame(5, std::vector<std::int16_t>(25, 0)), 0};
    for (const CorrBackend backend : {CorrBackend::direct, CorrBackend::transform}) {
        const auto resp =
            correlate(tpl, seq, CorrMode::zero_shift, CorrNorm::normalized, backend);
        CHECK(resp.scores[0] == 0.0);
    }
}

TEST_CASE("an impulse template sifts out the frame value at its cell") {
    std::vector<std::int16_t> impulse(16, 0);
    impulse[6] = 1; // row 1, col 2
    FrameSequence seq = make_seq(4, {{1, -1, 0, 1, 0, 0, -1, 1, 1, 1, 0, 0, 0, -1, 1, 0}});
    const Template tpl{make_frame(4, impulse), 0};
    const auto resp = correlate(tpl, seq, CorrMode::zero_shift, CorrNorm::raw, CorrBackend::direct);
    CHECK(resp.scores[0] == -1.0);
}

TEST_CASE("1x1 frames reduce both backends to exact scalar products") {
    FrameSequence seq = make_seq(1, {{1}, {-1}, {0}});
    const Template tpl{make_frame(1, {-1}), 0};
    const auto direct =
        correlate(tpl, seq, CorrMode::zero_shift, CorrNorm::raw, CorrBackend::direct);
    const auto transform =
        correlate(tpl, seq, CorrMode::zero_shift, CorrNorm::raw, CorrBackend::transform);
    CHECK(direct.scores == std::vector<double>{-1.0, 1.0, 0.0});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(transform.scores[i] == doctest::Approx(direct.scores[i]).epsilon(1e-12));
    }
}

TEST_CASE("direct and transform backends agree on random input") {
    testutil::Rng rng(2024);
    for (const std::uint32_t side : {2u, 3u, 8u, 17u, 32u}) {
        for (int iter = 0; iter < 12; ++iter) {
            const Template tpl{random_frame(rng, side), 0};
            FrameSequence seq = make_seq(side, {});
            for (std::size_t i = 0; i < 4; ++i) {
                seq.frames.push_back(random_frame(rng, side));
                seq.frames.back().index = i;
            }
            for (const CorrMode mode : {CorrMode::zero_shift, CorrMode::max_over_shifts}) {
                for (const CorrNorm norm : {CorrNorm::raw, CorrNorm::normalized}) {
                    const auto a = correlate(tpl, seq, mode, norm, CorrBackend::direct);
                    const auto b = correlate(tpl, seq, mode, norm, CorrBackend::transform);
                    for (std::size_t i = 0; i < a.scores.size(); ++i) {
                        CHECK(rel_diff(a.scores[i], b.scores[i]) < 1e-9);
                        if (norm == CorrNorm::normalized) {
                            CHECK(std::fabs(a.scores[i]) <= 1.0 + 1e-12); // cosine bound
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("raw zero-shift correlation is symmetric") {
    testutil::Rng rng(31);
    const AggregationFrame a = random_frame(rng, 7);
    const AggregationFrame b = random_frame(rng, 7);
    FrameSequence seq_b = make_seq(7, {});
    seq_b.frames = {b};
    FrameSequence seq_a = make_seq(7, {});
    seq_a.frames = {a};
    const auto ab =
        correlate(Template{a, 0}, seq_b, CorrMode::zero_shift, CorrNorm::raw, CorrBackend::direct);
    const auto ba =
        correlate(Template{b, 0}, seq_a, CorrMode::zero_shift, CorrNorm::raw, CorrBackend::direct);
    CHECK(ab.scores[0] == ba.scores[0]);
}

TEST_CASE("max over shifts finds a displaced copy") {
    // template: single block; frame: the same block shifted cyclically
    std::vector<std::int16_t> t_cells(64, 0), f_cells(64, 0);
    t_cells[0] = 1;
    t_cells[1] = 1;
    t_cells[8] = -1;
    f_cells[27] = 1; // (3,3): shifted by (3,3)
    f_cells[28] = 1;
    f_cells[35] = -1;
    FrameSequence seq = make_seq(8, {});
    seq.frames = {make_frame(8, f_cells)};
    const Template tpl{make_frame(8, t_cells), 0};

    const auto zero =
        correlate(tpl, seq, CorrMode::zero_shift, CorrNorm::normalized, CorrBackend::direct);
    const auto shifted =
        correlate(tpl, seq, CorrMode::max_over_shifts, CorrNorm::normalized, CorrBackend::direct);
    CHECK(zero.scores[0] == 0.0);
    CHECK(shifted.scores[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scaling additive cells scales raw scores and fixes normalized ones") {
    testutil::Rng rng(55);
    const std::uint32_t side = 6;
    Template tpl{random_frame(rng, side), 0};
    FrameSequence seq = make_seq(side, {});
    FrameSequence scaled = make_seq(side, {});
    for (std::size_t i = 0; i < 5; ++i) {
        AggregationFrame f = random_frame(rng, side);
        f.index = i;
        AggregationFrame g = f;
        for (auto& c : g.cells) {
            c = static_cast<std::int16_t>(c * 3);
        }
        seq.frames.push_back(std::move(f));
        scaled.frames.push_back(std::move(g));
    }
    const auto raw =
        correlate(tpl, seq, CorrMode::zero_shift, CorrNorm::raw, CorrBackend::direct);
    const auto raw3 =
        correlate(tpl, scaled, CorrMode::zero_shift, CorrNorm::raw, CorrBackend::direct);
    const auto norm =
        correlate(tpl, seq, CorrMode::zero_shift, CorrNorm::normalized, CorrBackend::direct);
    const auto norm3 =
        correlate(tpl, scaled, CorrMode::zero_shift, CorrNorm::normalized, CorrBackend::direct);
    std::size_t argmax_raw = 0, argmax_raw3 = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(raw3.scores[i] == doctest::Approx(3.0 * raw.scores[i]).epsilon(1e-12));
        CHECK(norm3.scores[i] == doctest::Approx(norm.scores[i]).epsilon(1e-12));
        if (raw.scores[i] > raw.scores[argmax_raw]) {
            argmax_raw = i;
        }
        if (raw3.scores[i] > raw3.scores[argmax_raw3]) {
            argmax_raw3 = i;
        }
    }
    CHECK(argmax_raw == argmax_raw3);
}

TEST_CASE("periodic flash input gives an exactly periodic response") {
    SceneSpec spec;
    spec.kind = SceneKind::flash;
    spec.frequency_hz = 2000;
    spec.duration_s = 0.02;
    spec.geometry = {48, 48};
    spec.center_x = 24;
    spec.center_y = 24;
    spec.radius = 8;
    const EventStream stream = generate(spec);
    const FrameSequence seq = build_frames(stream, {12, 12, 36, 36}, 100);
    const Template tpl = select_template(seq, std::nullopt);
    const auto resp =
        correlate(tpl, seq, CorrMode::zero_shift, CorrNorm::normalized, CorrBackend::direct);
    // period = 500 us = 5 frames; noise-free scores repeat exactly
    REQUIRE(resp.scores.size() >= 10);
    for (std::size_t k = 0; k + 5 < resp.scores.size(); ++k) {
        CHECK(resp.scores[k] == resp.scores[k + 5]);
    }
}

TEST_CASE("dimension mismatch is a config error") {
    FrameSequence seq = make_seq(4, {{std::vector<std::int16_t>(16, 0)}});
    const Template tpl{make_frame(5, std::vector<std::int16_t>(25, 0)), 0};
    CHECK_THROWS_AS(
        (void)correlate(tpl, seq, CorrMode::zero_shift, CorrNorm::raw, CorrBackend::direct),
        ConfigError);
}
