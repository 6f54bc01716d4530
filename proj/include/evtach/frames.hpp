#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evtach/event.hpp"

namespace evtach {

/// How events landing in the same cell of the same interval combine.
/// `overwrite` keeps the polarity of the last event (cells stay in
/// {-1, 0, +1}); `additive` sums polarities and is experimental only.
enum class AggMode { overwrite, additive };

/// Signed 2D array of aggregated polarities for one time interval of the
/// RoI. Cells are row-major, side*side, cell (row, col) = event at
/// (y - roi.y0, x - roi.x0).
struct AggregationFrame {
    std::uint32_t side = 0;
    std::size_t index = 0;
    std::uint64_t t_start = 0;
    std::uint64_t t_end = 0;
    std::vector<std::int16_t> cells;

    std::int16_t at(std::uint32_t row, std::uint32_t col) const {
        return cells[static_cast<std::size_t>(row) * side + col];
    }

    std::size_t nonzero_count() const;

    friend bool operator==(const AggregationFrame&, const AggregationFrame&) = default;
};

/// Contiguous, non-overlapping frames of equal duration starting at the
/// stream's first timestamp. The trailing partial interval is dropped.
struct FrameSequence {
    RegionOfInterest roi;
    std::uint64_t duration_us = 0;
    std::uint64_t t0 = 0;
    std::vector<AggregationFrame> frames;

    std::size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }
};

FrameSequence build_frames(const EventStream& stream, const RegionOfInterest& roi,
                           std::uint64_t duration_us, AggMode mode = AggMode::overwrite);

struct Template {
    AggregationFrame frame;
    std::size_t source_index = 0;
};

/// Picks the template frame. With an explicit index that frame is returned;
/// otherwise the frame with the most nonzero cells wins, ties broken by the
/// lowest index.
Template select_template(const FrameSequence& seq, std::optional<std::size_t> explicit_index);

/// P5 portable graymap rendering of a frame: 0 -> 128, positive -> 255,
/// negative -> 0.
std::string frame_to_pgm(const AggregationFrame& frame);

} // namespace evtach
