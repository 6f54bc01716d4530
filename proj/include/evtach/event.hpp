#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace evtach {

/// One brightness-change report from the sensor. Polarity is +1 for a
/// brightness increase and -1 for a decrease; a pixel that saw no change
/// simply emits nothing, so 0 never appears in a stream.
struct Event {
    std::uint64_t t = 0; // microseconds
    std::uint32_t x = 0; // pixel column
    std::uint32_t y = 0; // pixel row
    std::int8_t p = 0;   // polarity, -1 or +1

    friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
    std::uint32_t width = 0;
    std::uint32_t height = 0;

    bool valid() const { return width > 0 && height > 0; }

    friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

/// Axis-aligned square window on the sensor plane. Bounds are half-open on
/// both axes: a pixel (x, y) is inside iff x0 <= x < x1 and y0 <= y < y1,
/// so the side length is exactly x1 - x0.
struct RegionOfInterest {
    std::uint32_t x0 = 0;
    std::uint32_t y0 = 0;
    std::uint32_t x1 = 0;
    std::uint32_t y1 = 0;

    std::uint32_t side() const { return x1 - x0; }

    bool valid() const { return x1 > x0 && y1 > y0 && (x1 - x0) == (y1 - y0); }

    bool inside(const SensorGeometry& g) const {
        return valid() && x1 <= g.width && y1 <= g.height;
    }

    friend bool operator==(const RegionOfInterest&, const RegionOfInterest&) = default;
};

inline bool roi_contains(const RegionOfInterest& roi, const Event& e) {
    return e.x >= roi.x0 && e.x < roi.x1 && e.y >= roi.y0 && e.y < roi.y1;
}

/// Events ordered by non-decreasing timestamp, together with the geometry
/// of the sensor that produced them.
struct EventStream {
    SensorGeometry geometry;
    std::vector<Event> events;

    friend bool operator==(const EventStream&, const EventStream&) = default;
};

/// Outcome of validate_stream. Violations are reported, not thrown: an
/// invalid stream is a data property, not a program failure.
struct StreamValidation {
    bool ok = true;
    std::size_t violation_index = 0; // index of the first offending event
    std::string reason;

    explicit operator bool() const { return ok; }
};

/// Checks stream invariants: positive geometry, coordinates inside the
/// sensor, polarity in {-1, +1}, non-decreasing timestamps. Returns the
/// first violation found, scanning in order.
StreamValidation validate_stream(const EventStream& stream);

} // namespace evtach
