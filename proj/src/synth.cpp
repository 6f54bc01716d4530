#include "evtach/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <vector>

#include "evtach/errors.hpp"

namespace evtach {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Deterministic, platform-independent PRNG (splitmix64). std:: distributions
// are not specified bit-for-bit across standard libraries, so goldens use this.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }
};

// One per-pixel brightness transition within a single period, at a phase
// measured in (real-valued) microseconds from the period start.
struct Toggle {
    double phase_us;
    std::uint32_t x;
    std::uint32_t y;
    std::int8_t p;
};

[[noreturn]] void spec_error(const std::string& field, const std::string& what) {
    throw ConfigError("scene spec field '" + field + "': " + what);
}

void require_feature_inside(const SceneSpec& s, double reach) {
    if (s.center_x - reach < 0.0 || s.center_y - reach < 0.0 ||
        s.center_x + reach > s.geometry.width - 1.0 ||
        s.center_y + reach > s.geometry.height - 1.0) {
        spec_error("center/radius", "feature extends outside the sensor");
    }
}

struct PixelBox {
    std::uint32_t x_lo, x_hi, y_lo, y_hi; // inclusive
};

PixelBox feature_box(const SceneSpec& s, double reach) {
    PixelBox b;
    b.x_lo = static_cast<std::uint32_t>(std::max(0.0, std::floor(s.center_x - reach)));
    b.y_lo = static_cast<std::uint32_t>(std::max(0.0, std::floor(s.center_y - reach)));
    b.x_hi = static_cast<std::uint32_t>(
        std::min<double>(s.geometry.width - 1, std::ceil(s.center_x + reach)));
    b.y_hi = static_cast<std::uint32_t>(
        std::min<double>(s.geometry.height - 1, std::ceil(s.center_y + reach)));
    return b;
}

std::vector<Toggle> flash_toggles(const SceneSpec& s, double period_us) {
    std::vector<Toggle> toggles;
    const double r2 = s.radius * s.radius;
    const PixelBox box = feature_box(s, s.radius);
    for (std::uint32_t y = box.y_lo; y <= box.y_hi; ++y) {
        for (std::uint32_t x = box.x_lo; x <= box.x_hi; ++x) {
            const double dx = x - s.center_x;
            const double dy = y - s.center_y;
            if (dx * dx + dy * dy > r2) {
                continue;
            }
            toggles.push_back({0.0, x, y, +1});
            toggles.push_back({s.duty * period_us, x, y, -1});
        }
    }
    return toggles;
}

std::vector<Toggle> vibration_toggles(const SceneSpec& s, double period_us) {
    std::vector<Toggle> toggles;
    const PixelBox box = feature_box(s, s.radius + s.amplitude_px);
    for (std::uint32_t y = box.y_lo; y <= box.y_hi; ++y) {
        for (std::uint32_t x = box.x_lo; x <= box.x_hi; ++x) {
            const double dx = x - s.center_x;
            const double dy = y - s.center_y;
            const double rho = std::hypot(dx, dy);
            const double q = (rho - s.radius) / s.amplitude_px;
            if (q <= -1.0 || q >= 1.0) {
                continue; // always covered / never reached
            }
            // r(t) = R + A*sin(2*pi*t/T) crosses rho twice per period: once
            // rising (pixel becomes covered) and once falling.
            const double a = std::asin(q) / kTwoPi; // in [-1/4, 1/4] periods
            double up = a * period_us;
            if (up < 0.0) {
                up += period_us;
            }
            const double down = (0.5 - a) * period_us;
            toggles.push_back({up, x, y, +1});
            toggles.push_back({down, x, y, -1});
        }
    }
    return toggles;
}

std::vector<Toggle> rotation_toggles(const SceneSpec& s, double period_us) {
    std::vector<Toggle> toggles;
    const double squash = std::cos(s.tilt_deg * std::numbers::pi / 180.0);
    const double r_outer = s.radius;
    const double r_inner = s.radius - s.mark_extent_px;
    const PixelBox box = feature_box(s, s.radius);
    for (std::uint32_t y = box.y_lo; y <= box.y_hi; ++y) {
        for (std::uint32_t x = box.x_lo; x <= box.x_hi; ++x) {
            // Undo the tilt squash: pixel (x, y) images disc-plane point
            // (dx, dy / cos(tilt)) relative to the center.
            const double dx = x - s.center_x;
            const double dy = (y - s.center_y) / squash;
            const double rho = std::hypot(dx, dy);
            if (rho < r_inner || rho > r_outer || rho == 0.0) {
                continue;
            }
            // The mark occupies angles [angle(t), angle(t) + w] with
            // angle(t) = -2*pi*t/T, so a pixel at polar angle phi is entered
            // when (phi + 2*pi*t/T) mod 2*pi wraps to w and exited at 0.
            double psi = std::fmod(std::atan2(dy, dx), kTwoPi);
            if (psi < 0.0) {
                psi += kTwoPi;
            }
            const double exit_phase = psi / kTwoPi * period_us;
            double enter = psi - s.mark_width_rad;
            if (enter < 0.0) {
                enter += kTwoPi;
            }
            const double enter_phase = enter / kTwoPi * period_us;
            toggles.push_back({enter_phase, x, y, +1});
            toggles.push_back({exit_phase, x, y, -1});
        }
    }
    return toggles;
}

} // namespace

const char* to_string(SceneKind kind) {
    switch (kind) {
    case SceneKind::flash: return "flash";
    case SceneKind::vibration: return "vibration";
    case SceneKind::rotation: return "rotation";
    }
    return "unknown";
}

void validate_spec(const SceneSpec& s) {
    if (!(s.frequency_hz > 0.0)) {
        spec_error("frequency_hz", "must be positive");
    }
    if (!(s.duration_s > 0.0)) {
        spec_error("duration_s", "must be positive");
    }
    if (s.frequency_hz * s.duration_s < 2.0) {
        spec_error("duration_s", "must cover at least two periods");
    }
    if (!s.geometry.valid()) {
        spec_error("width/height", "sensor geometry must be positive");
    }
    if (s.noise_rate < 0.0) {
        spec_error("noise_rate", "must be non-negative");
    }
    if (!(s.contrast_threshold > 0.0) || s.contrast_threshold > 1.0) {
        spec_error("contrast_threshold", "must be in (0, 1]");
    }
    if (!(s.radius > 0.0)) {
        spec_error("radius", "must be positive");
    }
    switch (s.kind) {
    case SceneKind::flash:
        if (!(s.duty > 0.0) || !(s.duty < 1.0)) {
            spec_error("duty", "must be in (0, 1)");
        }
        require_feature_inside(s, s.radius);
        break;
    case SceneKind::vibration:
        if (!(s.amplitude_px > 0.0)) {
            spec_error("amplitude_px", "must be positive");
        }
        if (s.amplitude_px >= s.radius) {
            spec_error("amplitude_px", "must be smaller than the radius");
        }
        require_feature_inside(s, s.radius + s.amplitude_px);
        break;
    case SceneKind::rotation:
        if (!(s.mark_width_rad > 0.0) || s.mark_width_rad >= kTwoPi) {
            spec_error("mark_width_rad", "must be in (0, 2*pi)");
        }
        if (!(s.mark_extent_px > 0.0) || s.mark_extent_px > s.radius) {
            spec_error("mark_extent_px", "must be in (0, radius]");
        }
        if (s.tilt_deg < 0.0 || s.tilt_deg > 60.0) {
            spec_error("tilt_deg", "must be in [0, 60]");
        }
        require_feature_inside(s, s.radius);
        break;
    }
}

double ground_truth_period_us(const SceneSpec& spec) {
    validate_spec(spec);
    return 1e6 / spec.frequency_hz;
}

EventStream generate(const SceneSpec& spec) {
    validate_spec(spec);

    const double period_us = 1e6 / spec.frequency_hz;
    const std::uint64_t duration_us =
        static_cast<std::uint64_t>(std::llround(spec.duration_s * 1e6));

    std::vector<Toggle> toggles;
    switch (spec.kind) {
    case SceneKind::flash: toggles = flash_toggles(spec, period_us); break;
    case SceneKind::vibration: toggles = vibration_toggles(spec, period_us); break;
    case SceneKind::rotation: toggles = rotation_toggles(spec, period_us); break;
    }
    std::stable_sort(toggles.begin(), toggles.end(),
                     [](const Toggle& a, const Toggle& b) { return a.phase_us < b.phase_us; });

    std::vector<Event> feature;
    if (!toggles.empty()) {
        const double periods = spec.duration_s * spec.frequency_hz;
        feature.reserve(toggles.size() * static_cast<std::size_t>(periods + 2.0));
        for (std::uint64_t k = 0;; ++k) {
            const double base = static_cast<double>(k) * period_us;
            // Once the earliest toggle of the period lands past the end,
            // every later one does too.
            if (std::llround(toggles.front().phase_us + base) >=
                static_cast<long long>(duration_us)) {
                break;
            }
            for (const Toggle& tg : toggles) {
                const long long t = std::llround(tg.phase_us + base);
                if (t < 0 || static_cast<std::uint64_t>(t) >= duration_us) {
                    continue;
                }
                feature.push_back({static_cast<std::uint64_t>(t), tg.x, tg.y, tg.p});
            }
        }
    }

    std::vector<Event> noise;
    if (spec.noise_rate > 0.0) {
        const double px = static_cast<double>(spec.geometry.width) * spec.geometry.height;
        const auto n =
            static_cast<std::uint64_t>(std::llround(spec.noise_rate * px * spec.duration_s));
        noise.reserve(n);
        SplitMix64 rng(spec.seed);
        for (std::uint64_t i = 0; i < n; ++i) {
            Event e;
            e.t = rng.below(duration_us);
            e.x = static_cast<std::uint32_t>(rng.below(spec.geometry.width));
            e.y = static_cast<std::uint32_t>(rng.below(spec.geometry.height));
            e.p = (rng.next() & 1) ? 1 : -1;
            noise.push_back(e);
        }
        std::stable_sort(noise.begin(), noise.end(),
                         [](const Event& a, const Event& b) { return a.t < b.t; });
    }

    EventStream stream;
    stream.geometry = spec.geometry;
    if (noise.empty()) {
        stream.events = std::move(feature);
    } else {
        stream.events.resize(feature.size() + noise.size());
        std::merge(feature.begin(), feature.end(), noise.begin(), noise.end(),
                   stream.events.begin(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
    }
    return stream;
}

namespace {

std::string_view trim(std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t' || v.front() == '\r')) {
        v.remove_prefix(1);
    }
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) {
        v.remove_suffix(1);
    }
    return v;
}

double parse_double_field(const std::string& key, std::string_view value) {
    try {
        std::size_t used = 0;
        const std::string str(value);
        const double d = std::stod(str, &used);
        if (used != str.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return d;
    } catch (const std::exception&) {
        spec_error(key, "not a number: \"" + std::string(value) + "\"");
    }
}

std::uint64_t parse_uint_field(const std::string& key, std::string_view value) {
    const double d = parse_double_field(key, value);
    if (d < 0.0 || d != std::floor(d)) {
        spec_error(key, "must be a non-negative integer");
    }
    return static_cast<std::uint64_t>(d);
}

} // namespace

SceneSpec parse_scene_spec(std::string_view text) {
    SceneSpec spec;
    bool have_kind = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        std::string_view line = trim(text.substr(pos, eol - pos));
        pos = eol + 1;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("scene spec: expected key=value, got \"" + std::string(line) + "\"");
        }
        const std::string key{trim(line.substr(0, eq))};
        const std::string_view value = trim(line.substr(eq + 1));

        if (key == "kind") {
            if (value == "flash") {
                spec.kind = SceneKind::flash;
            } else if (value == "vibration") {
                spec.kind = SceneKind::vibration;
            } else if (value == "rotation") {
                spec.kind = SceneKind::rotation;
            } else {
                spec_error(key, "must be flash, vibration or rotation");
            }
            have_kind = true;
        } else if (key == "frequency_hz") {
            spec.frequency_hz = parse_double_field(key, value);
        } else if (key == "duration_s") {
            spec.duration_s = parse_double_field(key, value);
        } else if (key == "width") {
            spec.geometry.width = static_cast<std::uint32_t>(parse_uint_field(key, value));
        } else if (key == "height") {
            spec.geometry.height = static_cast<std::uint32_t>(parse_uint_field(key, value));
        } else if (key == "seed") {
            spec.seed = parse_uint_field(key, value);
        } else if (key == "noise_rate") {
            spec.noise_rate = parse_double_field(key, value);
        } else if (key == "contrast_threshold") {
            spec.contrast_threshold = parse_double_field(key, value);
        } else if (key == "center_x") {
            spec.center_x = parse_double_field(key, value);
        } else if (key == "center_y") {
            spec.center_y = parse_double_field(key, value);
        } else if (key == "radius") {
            spec.radius = parse_double_field(key, value);
        } else if (key == "duty") {
            spec.duty = parse_double_field(key, value);
        } else if (key == "amplitude_px") {
            spec.amplitude_px = parse_double_field(key, value);
        } else if (key == "mark_width_rad") {
            spec.mark_width_rad = parse_double_field(key, value);
        } else if (key == "mark_extent_px") {
            spec.mark_extent_px = parse_double_field(key, value);
        } else if (key == "tilt_deg") {
            spec.tilt_deg = parse_double_field(key, value);
        } else {
            throw ConfigError("scene spec: unknown key \"" + key + "\"");
        }
    }
    if (!have_kind) {
        throw ConfigError("scene spec field 'kind': missing");
    }
    validate_spec(spec);
    return spec;
}

SceneSpec load_scene_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scene_spec(text);
}

} // namespace evtach
