#include "evtach/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "evtach/errors.hpp"

namespace evtach {

void validate_config(const RunConfig& cfg, const SensorGeometry& geometry) {
    if (cfg.duration_us == 0) {
        throw ConfigError("duration_us: must be at least 1");
    }
    if (!cfg.roi.valid()) {
        throw ConfigError("roi: corners must describe a non-empty square "
                          "(x1 > x0, y1 > y0, equal sides)");
    }
    if (!cfg.roi.inside(geometry)) {
        throw ConfigError("roi: outside the sensor geometry " + std::to_string(geometry.width) +
                          "x" + std::to_string(geometry.height));
    }
    if (!(cfg.peaks.min_prominence > 0.0) || cfg.peaks.min_prominence > 1.0) {
        throw ConfigError("min_prominence: must be in (0, 1]");
    }
    if (cfg.peaks.min_separation_us != 0 && cfg.peaks.min_separation_us < cfg.duration_us) {
        throw ConfigError("min_separation_us: must be at least duration_us");
    }
}

PipelineResult run_estimate(const EventStream& stream, const RunConfig& cfg) {
    validate_config(cfg, stream.geometry);

    PipelineResult result;
    result.frames = build_frames(stream, cfg.roi, cfg.duration_us, cfg.agg_mode);
    Template tpl = select_template(result.frames, cfg.template_index);
    result.template_index = tpl.source_index;
    result.response = correlate(tpl, result.frames, cfg.corr_mode, cfg.corr_norm, cfg.backend);
    result.peaks = detect_peaks(result.response, result.frames, cfg.peaks);
    result.report = summarize(result.peaks, cfg.unit);
    return result;
}

PipelineResult run_estimate_file(const RunConfig& cfg) {
    const EventStream stream = read_stream(cfg.input_path, cfg.format);
    return run_estimate(stream, cfg);
}

namespace {

SweepRow run_row(const EventStream& stream, const RunConfig& cfg, std::string axis_value) {
    SweepRow row;
    row.axis_value = std::move(axis_value);
    try {
        row.report = run_estimate(stream, cfg).report;
        row.ok = true;
    } catch (const Error& e) {
        row.error_category = to_string(e.category());
        row.error_message = e.what();
    }
    return row;
}

} // namespace

std::vector<SweepRow> sweep_durations(const EventStream& stream, const RunConfig& base,
                                      const std::vector<std::uint64_t>& durations_us) {
    if (durations_us.empty()) {
        throw ConfigError("durations: sweep list is empty");
    }
    std::vector<SweepRow> rows;
    rows.reserve(durations_us.size());
    for (const std::uint64_t d : durations_us) {
        RunConfig cfg = base;
        cfg.duration_us = d;
        rows.push_back(run_row(stream, cfg, std::to_string(d)));
    }
    return rows;
}

std::vector<SweepRow> sweep_roi_sizes(const EventStream& stream, const RunConfig& base,
                                      const std::vector<std::uint32_t>& sizes_px) {
    if (sizes_px.empty()) {
        throw ConfigError("roi-sizes: sweep list is empty");
    }
    const std::int64_t cx = (std::int64_t(base.roi.x0) + base.roi.x1) / 2;
    const std::int64_t cy = (std::int64_t(base.roi.y0) + base.roi.y1) / 2;
    std::vector<SweepRow> rows;
    rows.reserve(sizes_px.size());
    for (const std::uint32_t size : sizes_px) {
        RunConfig cfg = base;
        const std::int64_t x0 = cx - size / 2;
        const std::int64_t y0 = cy - size / 2;
        SweepRow row;
        if (size == 0 || x0 < 0 || y0 < 0) {
            row.axis_value = std::to_string(size);
            row.error_category = to_string(ErrorCategory::config);
            row.error_message = "roi: size does not fit around the base center";
            rows.push_back(std::move(row));
            continue;
        }
        cfg.roi = {static_cast<std::uint32_t>(x0), static_cast<std::uint32_t>(y0),
                   static_cast<std::uint32_t>(x0 + size), static_cast<std::uint32_t>(y0 + size)};
        rows.push_back(run_row(stream, cfg, std::to_string(size)));
    }
    return rows;
}

std::string sweep_table(const std::vector<SweepRow>& rows, const std::string& axis_name,
                        Unit unit) {
    std::set<std::int64_t> seconds;
    for (const SweepRow& row : rows) {
        if (row.ok) {
            for (const IntervalStats& st : row.report.seconds) {
                seconds.insert(st.second);
            }
        }
    }

    std::string out = "# unit: ";
    out += to_string(unit);
    out += ", cell: mean +- 2*sigma\n";
    out += axis_name;
    for (const std::int64_t s : seconds) {
        out += "\t[" + std::to_string(s) + "," + std::to_string(s + 1) + ")";
    }
    out += "\toverall\n";

    char buf[96];
    const auto cell = [&](const IntervalStats& st) {
        int len;
        if (st.sigma) {
            len = std::snprintf(buf, sizeof buf, "%.2f +- %.2f", st.mean, 2.0 * *st.sigma);
        } else {
            len = std::snprintf(buf, sizeof buf, "%.2f", st.mean);
        }
        out.append(buf, static_cast<std::size_t>(len));
    };

    for (const SweepRow& row : rows) {
        out += row.axis_value;
        if (!row.ok) {
            out += "\terror:" + row.error_category + "\n";
            continue;
        }
        std::map<std::int64_t, const IntervalStats*> by_second;
        for (const IntervalStats& st : row.report.seconds) {
            by_second[st.second] = &st;
        }
        for (const std::int64_t s : seconds) {
            out += '\t';
            const auto it = by_second.find(s);
            if (it == by_second.end()) {
                out += '-';
            } else {
                cell(*it->second);
            }
        }
        out += '\t';
        cell(row.report.overall);
        out += '\n';
    }
    return out;
}

} // namespace evtach
