#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evtach/correlate.hpp"

namespace evtach {

enum class Unit { hz, rpm };

const char* to_string(Unit unit);
Unit parse_unit(const std::string& name);

/// Peak picking: local maxima whose height above the series minimum is at
/// least `min_prominence` of the full score range, thinned greedily left to
/// right so that consecutive kept peaks are at least `min_separation_us`
/// apart (first one wins on conflict). A run of equal scores strictly above
/// its flanks counts as one maximum, at the run's first frame.
struct PeakConfig {
    double min_prominence = 0.3;         // fraction of (max - min), in (0, 1]
    std::uint64_t min_separation_us = 0; // 0 = use the frame duration
    bool parabolic_refine = false;       // sub-frame vertex interpolation, experimental
};

struct PeakSeries {
    std::uint64_t t0 = 0;           // stream origin, anchors per-second buckets
    std::vector<double> peak_times; // microseconds; frame t_start unless refined
    std::vector<double> deltas;     // microseconds between successive peaks
};

/// Finds the periodic peaks of a correlation response. Throws
/// InsufficientPeaksError when fewer than two peaks survive, which signals
/// an aggregation duration too long for the phenomenon or an unsuitable RoI.
PeakSeries detect_peaks(const CorrelationResponse& resp, const FrameSequence& seq,
                        const PeakConfig& cfg);

/// Frequency of one cycle: 1e6 / delta_us.
double hz_from_delta(double delta_us);

/// Rotational speed of one revolution: 60 times hz_from_delta, exactly.
double rpm_from_delta(double delta_us);

/// Statistics over the deltas of one interval. `sigma` is the standard
/// error of the mean (sqrt of unbiased sample variance over m); it is
/// absent when only one delta fell into the interval.
struct IntervalStats {
    std::int64_t second = 0; // data second [second, second+1), -1 for overall
    double mean = 0.0;       // in the report's unit
    double mean_hz = 0.0;
    double mean_rpm = 0.0;
    std::optional<double> sigma;
    std::size_t m = 0;

    std::optional<double> two_sigma() const {
        return sigma ? std::optional<double>(2.0 * *sigma) : std::nullopt;
    }
};

struct EstimateReport {
    Unit unit = Unit::hz;
    std::size_t n_peaks = 0;
    std::vector<double> deltas_us;
    IntervalStats overall;
    std::vector<IntervalStats> seconds; // ascending, only seconds with m >= 1
};

/// Per-second and overall mean/sigma statistics of the delta series.
/// A delta belongs to the second containing its left peak.
EstimateReport summarize(const PeakSeries& peaks, Unit unit);

/// Deterministic serializations: identical reports give identical bytes.
std::string report_to_json(const EstimateReport& report);
std::string report_to_csv(const EstimateReport& report);

} // namespace evtach
