#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "evtach/event.hpp"

namespace evtach {

enum class SceneKind { flash, vibration, rotation };

const char* to_string(SceneKind kind);

/// Description of a synthetic periodic scene with exactly known frequency.
///
/// The scene is a binary brightness field sampled at pixel centers: a pixel
/// fires +1 the instant the feature starts covering it and -1 the instant it
/// stops. Feature toggle times are computed analytically per pixel, so the
/// field is exactly periodic in continuous time; timestamps are the toggle
/// times rounded to the nearest microsecond.
///
///  - flash: a disc that switches on at each period start and off after
///    `duty` of the period has elapsed. Every disc pixel toggles twice per
///    period, all at the same instants.
///  - vibration: a disc whose radius breathes as R + A*sin(2*pi*f*t); only
///    pixels in the annulus [R-A, R+A] ever toggle.
///  - rotation: a bright mark (angular sector of `mark_width_rad`, radial
///    span [radius - mark_extent_px, radius]) sweeping at f revolutions per
///    second. A nonzero `tilt_deg` squashes the disc into the ellipse an
///    off-axis camera would see (y compressed by cos(tilt)).
///
/// Background noise events are uniform in space and time with polarity
/// +-1 equiprobable, `noise_rate` events per pixel per second. Generation
/// is a pure function of the spec: identical spec and seed give a
/// bit-identical stream.
struct SceneSpec {
    SceneKind kind = SceneKind::flash;
    double frequency_hz = 0.0;
    double duration_s = 0.0;
    SensorGeometry geometry{1280, 720};
    std::uint64_t seed = 0;
    double noise_rate = 0.0;         // background events per pixel per second
    double contrast_threshold = 0.2; // intensity-change fraction needed to fire

    double center_x = 0.0;
    double center_y = 0.0;
    double radius = 0.0;

    double duty = 0.5;           // flash: fraction of the period spent on
    double amplitude_px = 0.0;   // vibration: radial displacement amplitude
    double mark_width_rad = 0.0; // rotation
    double mark_extent_px = 0.0; // rotation: radial extent inward from the rim
    double tilt_deg = 0.0;       // rotation: camera tilt, 0..60 degrees
};

/// Throws ConfigError naming the offending field.
void validate_spec(const SceneSpec& spec);

/// Generates the event stream for a scene. The result is sorted and passes
/// validate_stream.
EventStream generate(const SceneSpec& spec);

/// The exact period of the scene in microseconds: 1e6 / frequency_hz.
double ground_truth_period_us(const SceneSpec& spec);

/// Parses the flat key=value scene description ('#' starts a comment).
/// Keys: kind, frequency_hz, duration_s, width, height, seed, noise_rate,
/// contrast_threshold, center_x, center_y, radius, duty, amplitude_px,
/// mark_width_rad, mark_extent_px, tilt_deg.
SceneSpec parse_scene_spec(std::string_view text);

SceneSpec load_scene_spec(const std::string& path);

} // namespace evtach
