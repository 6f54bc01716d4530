#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evtach/errors.hpp"
#include "evtach/pipeline.hpp"

namespace {

using namespace evtach;

int exit_code_for(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::io: return 3;
    case ErrorCategory::format: return 4;
    case ErrorCategory::insufficient_peaks: return 5;
    }
    return 1;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string::npos ? pos : pos - start));
        if (pos == std::string::npos) {
            break;
        }
        start = pos + 1;
    }
    return parts;
}

template <typename Int>
Int parse_number(const std::string& field, const std::string& text) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size() || v < 0) {
            throw std::invalid_argument("bad");
        }
        return static_cast<Int>(v);
    } catch (const std::exception&) {
        throw ConfigError(field + ": expected a non-negative integer, got \"" + text + "\"");
    }
}

RegionOfInterest parse_roi(const std::string& text) {
    const auto parts = split(text, ',');
    if (parts.size() != 4) {
        throw ConfigError("roi: expected x0,y0,x1,y1");
    }
    RegionOfInterest roi;
    roi.x0 = parse_number<std::uint32_t>("roi", parts[0]);
    roi.y0 = parse_number<std::uint32_t>("roi", parts[1]);
    roi.x1 = parse_number<std::uint32_t>("roi", parts[2]);
    roi.y1 = parse_number<std::uint32_t>("roi", parts[3]);
    return roi;
}

template <typename Int>
std::vector<Int> parse_number_list(const std::string& field, const std::string& text) {
    std::vector<Int> values;
    if (text.empty()) {
        return values;
    }
    for (const std::string& part : split(text, ',')) {
        values.push_back(parse_number<Int>(field, part));
    }
    return values;
}

// Flag bundle shared by estimate/sweep/frames.
struct CommonFlags {
    std::string input;
    std::string format = "auto";
    std::string roi;
    std::uint64_t duration_us = 0;
    std::string template_choice = "auto";
    std::string corr_mode = "zero";
    std::string corr_norm = "norm";
    std::string backend = "direct";
    std::string agg_mode = "overwrite";
    double min_prominence = 0.3;
    std::uint64_t min_separation_us = 0;
    bool refine_peaks = false;
    std::string unit = "hz";
    std::string config_path;
};

void add_input_flags(CLI::App& cmd, CommonFlags& flags) {
    cmd.add_option("--input", flags.input, "event stream file")->required();
    cmd.add_option("--format", flags.format, "auto|text|binary (default auto)");
    cmd.add_option("--config", flags.config_path,
                   "key=value config file (keys are long flag names); explicit flags win");
}

// Expands --config FILE into long flags, skipping any flag already given on
// the command line. Keys map 1:1 to long option names without the "--".
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
    }
    if (path.empty()) {
        return args;
    }
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file " + path);
    }
    const auto has_flag = [&args](const std::string& flag) {
        for (const std::string& a : args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) {
                return true;
            }
        }
        return false;
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config file line " + std::to_string(line_no) +
                              ": expected key=value");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "config") {
            continue;
        }
        const std::string flag = "--" + key;
        if (has_flag(flag)) {
            continue; // explicit flags win
        }
        if (value == "true") {
            args.push_back(flag);
        } else if (value != "false") {
            args.push_back(flag);
            args.push_back(value);
        }
    }
    return args;
}

void add_framing_flags(CLI::App& cmd, CommonFlags& flags) {
    cmd.add_option("--roi", flags.roi, "region of interest as x0,y0,x1,y1 (square, half-open)")
        ->required();
    cmd.add_option("--duration-us", flags.duration_us, "aggregation interval in microseconds")
        ->required();
    cmd.add_option("--agg-mode", flags.agg_mode,
                   "overwrite|additive cell update rule (default overwrite)");
}

void add_estimation_flags(CLI::App& cmd, CommonFlags& flags) {
    cmd.add_option("--template", flags.template_choice,
                   "template frame: auto (most events) or an index");
    cmd.add_option("--corr-mode", flags.corr_mode, "zero|shift (default zero)");
    cmd.add_option("--corr-norm", flags.corr_norm, "raw|norm (default norm)");
    cmd.add_option("--backend", flags.backend, "direct|transform (default direct)");
    cmd.add_option("--min-prominence", flags.min_prominence,
                   "peak height as a fraction of the score range, (0,1]");
    cmd.add_option("--min-separation-us", flags.min_separation_us,
                   "minimum peak spacing; 0 means the aggregation duration");
    cmd.add_flag("--refine-peaks", flags.refine_peaks,
                 "parabolic sub-frame peak interpolation (experimental)");
    cmd.add_option("--unit", flags.unit, "hz|rpm (default hz)");
}

RunConfig make_config(const CommonFlags& flags) {
    RunConfig cfg;
    cfg.input_path = flags.input;
    cfg.format = parse_format(flags.format);
    cfg.roi = parse_roi(flags.roi);
    cfg.duration_us = flags.duration_us;
    if (flags.template_choice != "auto") {
        cfg.template_index = parse_number<std::size_t>("template", flags.template_choice);
    }

    if (flags.corr_mode == "zero") {
        cfg.corr_mode = CorrMode::zero_shift;
    } else if (flags.corr_mode == "shift") {
        cfg.corr_mode = CorrMode::max_over_shifts;
    } else {
        throw ConfigError("corr-mode: expected zero or shift");
    }

    if (flags.corr_norm == "raw") {
        cfg.corr_norm = CorrNorm::raw;
    } else if (flags.corr_norm == "norm") {
        cfg.corr_norm = CorrNorm::normalized;
    } else {
        throw ConfigError("corr-norm: expected raw or norm");
    }

    if (flags.backend == "direct") {
        cfg.backend = CorrBackend::direct;
    } else if (flags.backend == "transform") {
        cfg.backend = CorrBackend::transform;
    } else {
        throw ConfigError("backend: expected direct or transform");
    }

    if (flags.agg_mode == "overwrite") {
        cfg.agg_mode = AggMode::overwrite;
    } else if (flags.agg_mode == "additive") {
        cfg.agg_mode = AggMode::additive;
    } else {
        throw ConfigError("agg-mode: expected overwrite or additive");
    }

    cfg.peaks.min_prominence = flags.min_prominence;
    cfg.peaks.min_separation_us = flags.min_separation_us;
    cfg.peaks.parabolic_refine = flags.refine_peaks;
    cfg.unit = parse_unit(flags.unit);
    return cfg;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failure on " + path);
    }
}

void dump_frames_dir(const FrameSequence& seq, const std::string& dir,
                     const std::vector<std::size_t>& indices) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir);
    }
    char name[48];
    for (const std::size_t k : indices) {
        if (k >= seq.size()) {
            throw ConfigError("indices: frame " + std::to_string(k) + " out of range, have " +
                              std::to_string(seq.size()));
        }
        std::snprintf(name, sizeof name, "frame_%06zu.pgm", k);
        write_file((std::filesystem::path(dir) / name).string(), frame_to_pgm(seq.frames[k]));
    }
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = i;
    }
    return v;
}

std::string scores_csv(const PipelineResult& result) {
    std::string out = "index,t_start_us,score\n";
    char buf[96];
    for (std::size_t k = 0; k < result.response.scores.size(); ++k) {
        const int len = std::snprintf(buf, sizeof buf, "%zu,%" PRIu64 ",%.17g\n", k,
                                      result.frames.frames[k].t_start, result.response.scores[k]);
        out.append(buf, static_cast<std::size_t>(len));
    }
    return out;
}

void print_report(const EstimateReport& report) {
    const char* unit = to_string(report.unit);
    for (const IntervalStats& st : report.seconds) {
        if (st.sigma) {
            std::printf("[%" PRId64 ",%" PRId64 ") s: %.4f %s +- %.4f (2 sigma, M=%zu)\n",
                        st.second, st.second + 1, st.mean, unit, 2.0 * *st.sigma, st.m);
        } else {
            std::printf("[%" PRId64 ",%" PRId64 ") s: %.4f %s (M=1, sigma undefined)\n",
                        st.second, st.second + 1, st.mean, unit);
        }
    }
    const IntervalStats& all = report.overall;
    if (all.sigma) {
        std::printf("overall: %.4f %s +- %.4f (2 sigma, M=%zu, %zu peaks)\n", all.mean, unit,
                    2.0 * *all.sigma, all.m, report.n_peaks);
    } else {
        std::printf("overall: %.4f %s (M=%zu, %zu peaks)\n", all.mean, unit, all.m,
                    report.n_peaks);
    }
}

int cmd_synth(const std::string& spec_path, const std::string& out_path,
              const std::string& format_name, std::optional<std::uint64_t> seed) {
    SceneSpec spec = load_scene_spec(spec_path);
    if (seed) {
        spec.seed = *seed;
    }
    Format format = parse_format(format_name);
    if (format == Format::auto_detect) {
        format = Format::binary;
    }
    const EventStream stream = generate(spec);
    write_stream_file(stream, out_path, format);
    std::printf("wrote %zu events to %s (%s, %s)\n", stream.events.size(), out_path.c_str(),
                to_string(spec.kind), format == Format::binary ? "binary" : "text");
    std::printf("ground-truth period: %.6f us (%.6f Hz, %.4f RPM)\n",
                ground_truth_period_us(spec), spec.frequency_hz, spec.frequency_hz * 60.0);
    return 0;
}

int cmd_estimate(const CommonFlags& flags, const std::string& report_path,
                 const std::string& csv_path, const std::string& dump_dir,
                 const std::string& scores_path) {
    const RunConfig cfg = make_config(flags);
    const EventStream stream = read_stream(cfg.input_path, cfg.format);
    validate_config(cfg, stream.geometry);
    const PipelineResult result = run_estimate(stream, cfg);

    if (!report_path.empty()) {
        write_file(report_path, report_to_json(result.report));
    }
    if (!csv_path.empty()) {
        write_file(csv_path, report_to_csv(result.report));
    }
    if (!scores_path.empty()) {
        write_file(scores_path, scores_csv(result));
    }
    if (!dump_dir.empty()) {
        dump_frames_dir(result.frames, dump_dir, all_indices(result.frames.size()));
    }

    std::printf("frames: %zu, template: %zu\n", result.frames.size(), result.template_index);
    print_report(result.report);
    return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& durations_text,
              const std::string& roi_sizes_text, const std::string& table_path) {
    const auto durations = parse_number_list<std::uint64_t>("durations", durations_text);
    const auto sizes = parse_number_list<std::uint32_t>("roi-sizes", roi_sizes_text);
    if (durations.empty() == sizes.empty()) {
        throw ConfigError("sweep: give exactly one of --durations or --roi-sizes");
    }

    const RunConfig base = make_config(flags);
    const EventStream stream = read_stream(base.input_path, base.format);

    std::vector<SweepRow> rows;
    std::string axis;
    if (!durations.empty()) {
        axis = "duration_us";
        rows = sweep_durations(stream, base, durations);
    } else {
        axis = "roi_size_px";
        rows = sweep_roi_sizes(stream, base, sizes);
    }

    const std::string table = sweep_table(rows, axis, base.unit);
    if (table_path.empty()) {
        std::fputs(table.c_str(), stdout);
    } else {
        write_file(table_path, table);
        std::printf("wrote sweep table to %s\n", table_path.c_str());
    }
    return 0;
}

int cmd_frames(const CommonFlags& flags, const std::string& dump_dir,
               const std::string& indices_text) {
    const RunConfig cfg = make_config(flags);
    const EventStream stream = read_stream(cfg.input_path, cfg.format);
    const FrameSequence seq = build_frames(stream, cfg.roi, cfg.duration_us, cfg.agg_mode);
    const auto indices = indices_text.empty()
                             ? all_indices(seq.size())
                             : parse_number_list<std::size_t>("indices", indices_text);
    dump_frames_dir(seq, dump_dir, indices);
    std::printf("wrote %zu frame(s) of %zu to %s\n", indices.size(), seq.size(),
                dump_dir.c_str());
    return 0;
}

int cmd_validate(const std::string& input, const std::string& format_name) {
    const EventStream stream = read_stream(input, parse_format(format_name));
    const StreamValidation v = validate_stream(stream);
    if (!v.ok) {
        // read_stream enforces the invariants, so this is unreachable for
        // files it accepted; kept for streams from other sources.
        std::printf("violation at index %zu: %s\n", v.violation_index, v.reason.c_str());
        return exit_code_for(ErrorCategory::format);
    }
    std::uint64_t t_first = stream.events.empty() ? 0 : stream.events.front().t;
    std::uint64_t t_last = stream.events.empty() ? 0 : stream.events.back().t;
    std::printf("ok: %zu events, %ux%u sensor, t in [%" PRIu64 ", %" PRIu64 "] us\n",
                stream.events.size(), stream.geometry.width, stream.geometry.height, t_first,
                t_last);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"frequency and rotational-speed estimation from event-camera streams"};
    app.require_subcommand(1);

    CommonFlags flags;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic periodic scene");
    std::string spec_path, out_path, synth_format = "binary";
    std::optional<std::uint64_t> seed_override;
    synth->add_option("--spec", spec_path, "scene description file (key=value)")->required();
    synth->add_option("--output,-o", out_path, "output event stream file")->required();
    synth->add_option("--format", synth_format, "text|binary (default binary)");
    synth->add_option("--seed", seed_override, "override the spec's seed");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "estimate frequency / rotational speed");
    std::string report_path, csv_path, dump_dir, scores_path;
    add_input_flags(*estimate, flags);
    add_framing_flags(*estimate, flags);
    add_estimation_flags(*estimate, flags);
    estimate->add_option("--report", report_path, "write the JSON report here");
    estimate->add_option("--csv", csv_path, "write the per-second CSV here");
    estimate->add_option("--dump-frames", dump_dir, "write every frame as a PGM into DIR");
    estimate->add_option("--scores", scores_path, "write the correlation scores CSV here");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "estimate across RoI sizes or durations");
    std::string durations_text, roi_sizes_text, table_path;
    add_input_flags(*sweep, flags);
    add_framing_flags(*sweep, flags);
    add_estimation_flags(*sweep, flags);
    sweep->add_option("--durations", durations_text, "comma-separated durations in us");
    sweep->add_option("--roi-sizes", roi_sizes_text,
                      "comma-separated square sizes in px, centered on --roi's center");
    sweep->add_option("--table", table_path, "write the table here (default stdout)");

    // frames
    auto* frames = app.add_subcommand("frames", "dump aggregation frames as PGM images");
    std::string frame_indices;
    add_input_flags(*frames, flags);
    add_framing_flags(*frames, flags);
    frames->add_option("--dump-frames", dump_dir, "output directory")->required();
    frames->add_option("--indices", frame_indices, "comma-separated frame indices (default all)");

    // validate
    auto* validate = app.add_subcommand("validate", "check a stream file's invariants");
    std::string validate_input, validate_format = "auto";
    validate->add_option("--input", validate_input, "event stream file")->required();
    validate->add_option("--format", validate_format, "auto|text|binary (default auto)");

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config_file(std::move(args));
        std::reverse(args.begin(), args.end()); // CLI11 consumes from the back
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help
        }
        std::cerr << "error: config: " << e.what() << "\n";
        return exit_code_for(ErrorCategory::config);
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.category()) << ": " << e.what() << "\n";
        return exit_code_for(e.category());
    }

    try {
        if (synth->parsed()) {
            return cmd_synth(spec_path, out_path, synth_format, seed_override);
        }
        if (estimate->parsed()) {
            return cmd_estimate(flags, report_path, csv_path, dump_dir, scores_path);
        }
        if (sweep->parsed()) {
            return cmd_sweep(flags, durations_text, roi_sizes_text, table_path);
        }
        if (frames->parsed()) {
            return cmd_frames(flags, dump_dir, frame_indices);
        }
        if (validate->parsed()) {
            return cmd_validate(validate_input, validate_format);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.category()) << ": " << e.what() << "\n";
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
