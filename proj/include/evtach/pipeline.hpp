#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evtach/estimate.hpp"
#include "evtach/io.hpp"
#include "evtach/synth.hpp"

namespace evtach {

/// Everything one estimation run needs. Preconditions of all stages are
/// checked up front so a bad configuration fails before any work starts.
struct RunConfig {
    std::string input_path;
    Format format = Format::auto_detect;
    RegionOfInterest roi;
    std::uint64_t duration_us = 0;
    std::optional<std::size_t> template_index; // nullopt = auto (max event count)
    AggMode agg_mode = AggMode::overwrite;
    CorrMode corr_mode = CorrMode::zero_shift;
    CorrNorm corr_norm = CorrNorm::normalized;
    CorrBackend backend = CorrBackend::direct;
    PeakConfig peaks;
    Unit unit = Unit::hz;
};

struct PipelineResult {
    FrameSequence frames;
    std::size_t template_index = 0;
    CorrelationResponse response;
    PeakSeries peaks;
    EstimateReport report;
};

void validate_config(const RunConfig& cfg, const SensorGeometry& geometry);

/// ingest -> frames -> template -> correlate -> peaks -> summarize.
PipelineResult run_estimate(const EventStream& stream, const RunConfig& cfg);

/// Reads cfg.input_path first, then runs the pipeline.
PipelineResult run_estimate_file(const RunConfig& cfg);

/// One row of a parameter sweep. Rows that fail carry the error category
/// instead of a value; the sweep itself always completes.
struct SweepRow {
    std::string axis_value;
    bool ok = false;
    std::string error_category;
    std::string error_message;
    EstimateReport report; // valid iff ok
};

std::vector<SweepRow> sweep_durations(const EventStream& stream, const RunConfig& base,
                                      const std::vector<std::uint64_t>& durations_us);

/// Sweeps square RoI sizes centered on the base RoI's center.
std::vector<SweepRow> sweep_roi_sizes(const EventStream& stream, const RunConfig& base,
                                      const std::vector<std::uint32_t>& sizes_px);

/// Renders sweep rows as a tab-separated table, one row per axis value and
/// one column per data second, cells as "mean +- two_sigma".
std::string sweep_table(const std::vector<SweepRow>& rows, const std::string& axis_name,
                        Unit unit);

} // namespace evtach
