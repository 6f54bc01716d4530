#include "evtach/frames.hpp"

#include <algorithm>
#include <string>

#include "evtach/errors.hpp"

namespace evtach {

std::size_t AggregationFrame::nonzero_count() const {
    return cells.size() - static_cast<std::size_t>(std::count(cells.begin(), cells.end(), 0));
}

FrameSequence build_frames(const EventStream& stream, const RegionOfInterest& roi,
                           std::uint64_t duration_us, AggMode mode) {
    if (duration_us == 0) {
        throw ConfigError("duration_us: must be at least 1");
    }
    if (!roi.valid()) {
        throw ConfigError("roi: corners must describe a non-empty square");
    }
    if (!roi.inside(stream.geometry)) {
        throw ConfigError("roi: outside the sensor geometry");
    }

    FrameSequence seq;
    seq.roi = roi;
    seq.duration_us = duration_us;
    if (stream.events.empty()) {
        return seq;
    }

    seq.t0 = stream.events.front().t;
    const std::uint64_t span = stream.events.back().t - seq.t0;
    const std::uint64_t n_frames = span / duration_us; // trailing partial dropped
    if (n_frames == 0) {
        return seq;
    }

    const std::uint32_t side = roi.side();
    seq.frames.resize(static_cast<std::size_t>(n_frames));
    for (std::size_t k = 0; k < seq.frames.size(); ++k) {
        AggregationFrame& f = seq.frames[k];
        f.side = side;
        f.index = k;
        f.t_start = seq.t0 + k * duration_us;
        f.t_end = f.t_start + duration_us;
        f.cells.assign(static_cast<std::size_t>(side) * side, 0);
    }

    for (const Event& e : stream.events) {
        const std::uint64_t k = (e.t - seq.t0) / duration_us;
        if (k >= n_frames) {
            break; // timestamps are sorted; the rest is the dropped partial
        }
        if (!roi_contains(roi, e)) {
            continue;
        }
        const std::size_t cell =
            static_cast<std::size_t>(e.y - roi.y0) * side + (e.x - roi.x0);
        std::int16_t& c = seq.frames[static_cast<std::size_t>(k)].cells[cell];
        c = mode == AggMode::overwrite ? e.p : static_cast<std::int16_t>(c + e.p);
    }
    return seq;
}

Template select_template(const FrameSequence& seq, std::optional<std::size_t> explicit_index) {
    if (seq.empty()) {
        throw ConfigError("template: frame sequence is empty");
    }
    if (explicit_index) {
        if (*explicit_index >= seq.size()) {
            throw ConfigError("template: index " + std::to_string(*explicit_index) +
                              " out of range, have " + std::to_string(seq.size()) + " frames");
        }
        return {seq.frames[*explicit_index], *explicit_index};
    }
    std::size_t best = 0;
    std::size_t best_count = seq.frames[0].nonzero_count();
    for (std::size_t k = 1; k < seq.size(); ++k) {
        const std::size_t count = seq.frames[k].nonzero_count();
        if (count > best_count) {
            best = k;
            best_count = count;
        }
    }
    return {seq.frames[best], best};
}

std::string frame_to_pgm(const AggregationFrame& frame) {
    std::string out = "P5\n" + std::to_string(frame.side) + " " + std::to_string(frame.side) +
                      "\n255\n";
    out.reserve(out.size() + frame.cells.size());
    for (const std::int16_t c : frame.cells) {
        out.push_back(static_cast<char>(c == 0 ? 128 : (c > 0 ? 255 : 0)));
    }
    return out;
}

} // namespace evtach
