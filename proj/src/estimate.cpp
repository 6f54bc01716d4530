#include "evtach/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "evtach/errors.hpp"

namespace evtach {

const char* to_string(Unit unit) {
    return unit == Unit::hz ? "hz" : "rpm";
}

Unit parse_unit(const std::string& name) {
    if (name == "hz") return Unit::hz;
    if (name == "rpm") return Unit::rpm;
    throw ConfigError("unit: expected hz or rpm, got \"" + name + "\"");
}

PeakSeries detect_peaks(const CorrelationResponse& resp, const FrameSequence& seq,
                        const PeakConfig& cfg) {
    if (resp.scores.size() != seq.size()) {
        throw ConfigError("detect_peaks: response length does not match frame count");
    }
    if (!(cfg.min_prominence > 0.0) || cfg.min_prominence > 1.0) {
        throw ConfigError("min_prominence: must be in (0, 1]");
    }
    const std::uint64_t min_sep =
        cfg.min_separation_us == 0 ? seq.duration_us : cfg.min_separation_us;
    if (min_sep < seq.duration_us) {
        throw ConfigError("min_separation_us: must be at least the aggregation duration");
    }
    if (seq.size() < 3) {
        throw InsufficientPeaksError("fewer than 3 frames; aggregation duration too long "
                                     "for the recording");
    }

    const auto& s = resp.scores;
    const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    const double threshold = lo + cfg.min_prominence * range;

    PeakSeries peaks;
    peaks.t0 = seq.t0;
    double last_kept = 0.0;
    // Local maxima with plateau handling: a maximal run of equal scores
    // counts as one peak, at its first index, when both flanking values are
    // strictly lower. Exactly tied neighbors are common in quantized
    // noise-free data, where a sparse pattern straddles a frame boundary.
    std::size_t i = 1;
    while (i + 1 < s.size()) {
        std::size_t j = i;
        while (j + 1 < s.size() && s[j + 1] == s[i]) {
            ++j;
        }
        const std::size_t next = j + 1;
        if (next >= s.size() || !(s[i - 1] < s[i]) || !(s[next] < s[i]) || range == 0.0 ||
            s[i] < threshold) {
            i = next;
            continue;
        }
        double t = static_cast<double>(seq.frames[i].t_start);
        if (cfg.parabolic_refine && j == i) {
            // Vertex of the parabola through the three samples; the strict
            // maximum guarantees a negative curvature denominator.
            const double denom = s[i - 1] - 2.0 * s[i] + s[i + 1];
            t += 0.5 * (s[i - 1] - s[i + 1]) / denom * static_cast<double>(seq.duration_us);
        }
        i = next;
        if (!peaks.peak_times.empty() && t - last_kept < static_cast<double>(min_sep)) {
            continue;
        }
        peaks.peak_times.push_back(t);
        last_kept = t;
    }

    if (peaks.peak_times.size() < 2) {
        throw InsufficientPeaksError(
            "found " + std::to_string(peaks.peak_times.size()) +
            " correlation peak(s); need at least 2. The aggregation duration may be too "
            "long or the RoI may not see the phenomenon");
    }
    peaks.deltas.reserve(peaks.peak_times.size() - 1);
    for (std::size_t i = 0; i + 1 < peaks.peak_times.size(); ++i) {
        peaks.deltas.push_back(peaks.peak_times[i + 1] - peaks.peak_times[i]);
    }
    return peaks;
}

double hz_from_delta(double delta_us) {
    if (!(delta_us > 0.0)) {
        throw ConfigError("delta_us: must be positive");
    }
    return 1e6 / delta_us;
}

double rpm_from_delta(double delta_us) {
    return hz_from_delta(delta_us) * 60.0;
}

namespace {

IntervalStats stats_for(std::int64_t second, const std::vector<double>& values, Unit unit) {
    IntervalStats st;
    st.second = second;
    st.m = values.size();
    double sum = 0.0;
    for (const double v : values) {
        sum += v;
    }
    st.mean = sum / static_cast<double>(st.m);
    if (unit == Unit::hz) {
        st.mean_hz = st.mean;
        st.mean_rpm = st.mean * 60.0;
    } else {
        st.mean_rpm = st.mean;
        st.mean_hz = st.mean / 60.0;
    }
    if (st.m >= 2) {
        double ss = 0.0;
        for (const double v : values) {
            const double d = v - st.mean;
            ss += d * d;
        }
        const double variance = ss / static_cast<double>(st.m - 1);
        st.sigma = std::sqrt(variance / static_cast<double>(st.m));
    }
    return st;
}

} // namespace

EstimateReport summarize(const PeakSeries& peaks, Unit unit) {
    if (peaks.peak_times.size() < 2 || peaks.deltas.empty()) {
        throw InsufficientPeaksError("summarize: need at least two peaks");
    }

    EstimateReport report;
    report.unit = unit;
    report.n_peaks = peaks.peak_times.size();
    report.deltas_us = peaks.deltas;

    std::vector<double> all_values;
    all_values.reserve(peaks.deltas.size());
    std::map<std::int64_t, std::vector<double>> buckets;
    for (std::size_t i = 0; i < peaks.deltas.size(); ++i) {
        const double v =
            unit == Unit::hz ? hz_from_delta(peaks.deltas[i]) : rpm_from_delta(peaks.deltas[i]);
        all_values.push_back(v);
        const double rel = peaks.peak_times[i] - static_cast<double>(peaks.t0);
        buckets[static_cast<std::int64_t>(std::floor(rel / 1e6))].push_back(v);
    }

    report.overall = stats_for(-1, all_values, unit);
    report.seconds.reserve(buckets.size());
    for (const auto& [second, values] : buckets) {
        report.seconds.push_back(stats_for(second, values, unit));
    }
    return report;
}

namespace {

nlohmann::ordered_json stats_to_json(const IntervalStats& st, bool with_second) {
    nlohmann::ordered_json j;
    if (with_second) {
        j["second"] = st.second;
    }
    j["mean"] = st.mean;
    j["mean_hz"] = st.mean_hz;
    j["mean_rpm"] = st.mean_rpm;
    if (st.sigma) {
        j["sigma"] = *st.sigma;
        j["two_sigma"] = *st.two_sigma();
    } else {
        j["sigma"] = nullptr;
        j["two_sigma"] = nullptr;
    }
    j["m"] = st.m;
    return j;
}

void append_number(std::string& out, double v) {
    char buf[48];
    const int len = std::snprintf(buf, sizeof buf, "%.10g", v);
    out.append(buf, static_cast<std::size_t>(len));
}

void append_csv_row(std::string& out, const std::string& label, const IntervalStats& st) {
    out += label;
    out += ',';
    append_number(out, st.mean);
    out += ',';
    if (st.sigma) {
        append_number(out, *st.sigma);
        out += ',';
        append_number(out, *st.two_sigma());
    } else {
        out += ',';
    }
    out += ',';
    out += std::to_string(st.m);
    out += '\n';
}

} // namespace

std::string report_to_json(const EstimateReport& report) {
    nlohmann::ordered_json j;
    j["unit"] = to_string(report.unit);
    j["n_peaks"] = report.n_peaks;
    j["n_deltas"] = report.deltas_us.size();
    j["overall"] = stats_to_json(report.overall, false);
    nlohmann::ordered_json seconds = nlohmann::ordered_json::array();
    for (const IntervalStats& st : report.seconds) {
        seconds.push_back(stats_to_json(st, true));
    }
    j["seconds"] = std::move(seconds);
    j["deltas_us"] = report.deltas_us;
    return j.dump(2) + "\n";
}

std::string report_to_csv(const EstimateReport& report) {
    std::string out = "second,mean_";
    out += to_string(report.unit);
    out += ",sigma,two_sigma,m\n";
    for (const IntervalStats& st : report.seconds) {
        append_csv_row(out, std::to_string(st.second), st);
    }
    append_csv_row(out, "overall", report.overall);
    return out;
}

} // namespace evtach
