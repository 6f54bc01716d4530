#include "evtach/event.hpp"

namespace evtach {

StreamValidation validate_stream(const EventStream& stream) {
    if (!stream.geometry.valid()) {
        return {false, 0, "sensor geometry must have positive width and height"};
    }
    std::uint64_t prev_t = 0;
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
        const Event& e = stream.events[i];
        if (e.p != -1 && e.p != 1) {
            return {false, i, "polarity outside {-1, +1}"};
        }
        if (e.x >= stream.geometry.width) {
            return {false, i, "x coordinate outside sensor width"};
        }
        if (e.y >= stream.geometry.height) {
            return {false, i, "y coordinate outside sensor height"};
        }
        if (i > 0 && e.t < prev_t) {
            return {false, i, "timestamp decreased"};
        }
        prev_t = e.t;
    }
    return {};
}

} // namespace evtach
