#ifndef SATPROBE_CLI_HPP
#define SATPROBE_CLI_HPP

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "satprobe/actlog.hpp"
#include "satprobe/aggregate.hpp"
#include "satprobe/analyzer.hpp"
#include "satprobe/error.hpp"
#include "satprobe/report.hpp"
#include "satprobe/toynet.hpp"

namespace satprobe::cli {

// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kAnalysisError = 3,
    kConfigError = 4,
};

struct AnalyzeConfig {
    std::filesystem::path log;
    AnalysisOptions options;
    std::optional<std::filesystem::path> csv;   // default: <log>.csv
    std::optional<std::filesystem::path> json;  // default: <log>.json
};

struct WatchConfig {
    AnalyzeConfig analyze;
    std::chrono::milliseconds interval{500};
    // Stop after the file has not grown for this long; zero waits forever.
    std::chrono::milliseconds max_idle{0};
};

struct DemoConfig {
    toynet::TrainConfig train;
    std::vector<std::size_t> hidden{32};
    std::filesystem::path out = "satprobe-demo";
    AnalysisOptions options{kDefaultThreshold, true, 0, kDefaultTailRatio};
};

namespace detail {

inline std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

inline std::string bar(double s, int width = 30) {
    const int filled = static_cast<int>(s * width + 0.5);
    return std::string(static_cast<std::size_t>(filled), '#') + std::string(static_cast<std::size_t>(width - filled), ' ');
}

inline std::filesystem::path with_suffix(const std::filesystem::path& p, const char* suffix) {
    std::filesystem::path out = p;
    out += suffix;
    return out;
}

inline void check_options(const AnalysisOptions& o) {
    if (!(o.threshold > 0.0 && o.threshold <= 1.0)) {
        throw InvalidArgument("--threshold must lie in (0, 1]");
    }
    if (!(o.tail_ratio >= 0.0 && o.tail_ratio <= 1.0)) {
        throw InvalidArgument("--tail-ratio must lie in [0, 1]");
    }
}

} // namespace detail

/// Per-layer table for one checkpoint.
inline void print_checkpoint(std::ostream& out, const SaturationHistory& history, const Checkpoint& cp) {
    out << detail::fmt("step %llu", static_cast<unsigned long long>(cp.step));
    if (cp.model_average) {
        out << detail::fmt("  model average saturation %.4f", *cp.model_average);
    }
    out << '\n' << detail::fmt("  %-20s %-7s %7s %9s %8s %10s\n", "layer", "kind", "width", "samples", "dim", "saturation");
    for (const auto& [id, r] : cp.layers) {
        const auto& l = history.layers().at(id);
        out << detail::fmt("  %-20s %-7s %7zu %9llu %8zu %10.4f%s\n", l.name.c_str(), actlog::to_string(l.kind),
                           r.layer_width, static_cast<unsigned long long>(r.samples), r.intrinsic_dim, r.saturation,
                           l.is_output ? "  (output)" : "");
    }
}

/// ASCII bar chart of the final checkpoint plus the long-tail summary.
inline void print_profile(std::ostream& out, const SaturationHistory& history, double tail_ratio) {
    if (history.empty()) {
        out << "no checkpoints\n";
        return;
    }
    const Checkpoint& cp = history.checkpoints().back();
    out << "saturation profile at step " << cp.step << '\n';
    for (const auto& [id, r] : cp.layers) {
        const auto& l = history.layers().at(id);
        out << detail::fmt("  %-20s |%s| %.4f%s\n", l.name.c_str(), detail::bar(r.saturation).c_str(), r.saturation,
                           l.is_output ? " (output)" : "");
    }
    if (auto p = final_profile(history, tail_ratio)) {
        out << detail::fmt("  peak %.4f at non-output layer %zu, tail %zu of %zu layers (fraction %.2f)\n",
                           p->peak_saturation, p->peak_index, p->tail_length, p->saturations.size(), p->tail_fraction);
    }
}

inline void write_reports(const AnalyzeConfig& cfg, const SaturationHistory& history) {
    write_file_atomic(cfg.csv.value_or(detail::with_suffix(cfg.log, ".csv")), csv_string(history));
    write_file_atomic(cfg.json.value_or(detail::with_suffix(cfg.log, ".json")), json_string(history, cfg.options));
}

/// Runs `body` and maps library exceptions onto exit codes.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const FormatError& e) {
        err << "error: invalid log: " << e.what() << '\n';
        return kInputError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const toynet::DivergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kAnalysisError;
    } catch (const AnalysisError& e) {
        err << "error: analysis failed: " << e.what() << '\n';
        return kAnalysisError;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kAnalysisError;
    }
}

/// One pass over a complete log; writes CSV and JSON reports and prints the
/// final table and profile. Nothing is written unless the analysis succeeds.
inline int cmd_analyze(const AnalyzeConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        detail::check_options(cfg.options);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return guarded(err, [&] {
        const SaturationHistory history = analyze_log(cfg.log, cfg.options);
        write_reports(cfg, history);
        if (!history.empty()) {
            print_checkpoint(out, history, history.checkpoints().back());
        }
        print_profile(out, history, cfg.options.tail_ratio);
        return static_cast<int>(kOk);
    });
}

/// Tails a growing log, printing a table whenever a checkpoint completes.
/// Returns when `stop` becomes true or the file stays idle for max_idle; the
/// pending window is then closed and the reports are written.
inline int cmd_watch(const WatchConfig& cfg, const std::atomic<bool>& stop, std::ostream& out, std::ostream& err) {
    try {
        detail::check_options(cfg.analyze.options);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return guarded(err, [&] {
        if (!std::filesystem::is_regular_file(cfg.analyze.log)) {
            throw IoError("no such log file: " + cfg.analyze.log.string());
        }
        actlog::LogReader reader(cfg.analyze.log);
        std::optional<StreamingAnalyzer> analyzer;
        auto last_growth = std::chrono::steady_clock::now();
        std::uint64_t last_offset = 0;
        actlog::BatchRecord record;
        for (;;) {
            auto status = reader.next(record);
            if (!analyzer && reader.header()) {
                analyzer.emplace(*reader.header(), cfg.analyze.options);
            }
            for (; status == actlog::LogReader::Status::record; status = reader.next(record)) {
                if (const Checkpoint* cp = analyzer->ingest(record)) {
                    print_checkpoint(out, analyzer->history(), *cp);
                    out.flush();
                }
            }
            const auto now = std::chrono::steady_clock::now();
            if (reader.offset() != last_offset) {
                last_offset = reader.offset();
                last_growth = now;
            }
            const bool idle = cfg.max_idle.count() > 0 && now - last_growth >= cfg.max_idle;
            if (stop.load() || idle) {
                break;
            }
            std::this_thread::sleep_for(cfg.interval);
        }
        SaturationHistory history;
        if (analyzer) {
            if (const Checkpoint* cp = analyzer->finish()) {
                print_checkpoint(out, analyzer->history(), *cp);
            }
            history = analyzer->history();
        }
        write_reports(cfg.analyze, history);
        print_profile(out, history, cfg.analyze.options.tail_ratio);
        return static_cast<int>(kOk);
    });
}

inline int cmd_validate(const std::filesystem::path& log, std::ostream& out, std::ostream& err) {
    const auto rep = actlog::validate_log(log);
    if (rep.header) {
        out << "format SATL v" << rep.header->format_version << ", precision " << actlog::to_string(rep.header->precision)
            << ", " << rep.header->layers.size() << " layer(s), " << rep.bytes_scanned << " bytes\n";
        for (const auto& l : rep.header->layers) {
            const auto& c = rep.per_layer[l.layer_id];
            out << detail::fmt("  %-20s %-7s width %-6u records %-8llu samples %llu%s\n", l.name.c_str(),
                               actlog::to_string(l.kind), l.width, static_cast<unsigned long long>(c.records),
                               static_cast<unsigned long long>(c.samples), l.is_output ? "  (output)" : "");
        }
    }
    if (!rep.ok()) {
        err << "invalid: " << rep.error->message << '\n';
        return kInputError;
    }
    out << "ok\n";
    return kOk;
}

struct DemoRun {
    std::size_t hidden = 0;
    toynet::TrainMetrics metrics;
    SaturationHistory history;
};

/// Trains, logs and analyzes one network per hidden width.
inline std::vector<DemoRun> run_demo(const DemoConfig& cfg) {
    std::filesystem::create_directories(cfg.out);
    std::vector<DemoRun> runs;
    for (std::size_t h : cfg.hidden) {
        toynet::TrainConfig tc = cfg.train;
        tc.hidden = h;
        const std::string stem = "hidden" + std::to_string(h);
        const auto log_path = cfg.out / (stem + ".satl");
        DemoRun run;
        run.hidden = h;
        {
            std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
            if (!log) {
                throw IoError("cannot create " + log_path.string());
            }
            run.metrics = toynet::train_and_log(tc, log);
        }
        write_file_atomic(cfg.out / (stem + ".metrics.json"), toynet::metrics_json(run.metrics).dump(2) + "\n");
        run.history = analyze_log(log_path, cfg.options);
        write_reports({log_path, cfg.options, cfg.out / (stem + ".csv"), cfg.out / (stem + ".json")}, run.history);
        runs.push_back(std::move(run));
    }
    return runs;
}

/// Final saturation of the layer named "hidden", if it was analyzed.
inline const SpectrumResult* hidden_result(const SaturationHistory& history) {
    if (history.empty()) {
        return nullptr;
    }
    for (const auto& l : history.layers()) {
        if (l.name == "hidden") {
            const auto& layers = history.checkpoints().back().layers;
            auto it = layers.find(l.layer_id);
            return it == layers.end() ? nullptr : &it->second;
        }
    }
    return nullptr;
}

inline int cmd_demo(const DemoConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        detail::check_options(cfg.options);
        if (cfg.hidden.empty()) {
            throw InvalidArgument("--hidden needs at least one width");
        }
        for (std::size_t h : cfg.hidden) {
            toynet::TrainConfig tc = cfg.train;
            tc.hidden = h;
            tc.validate();
        }
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return guarded(err, [&] {
        const auto runs = run_demo(cfg);
        out << detail::fmt("%8s %12s %14s %10s %10s\n", "width", "saturation", "intrinsic_dim", "train_acc", "test_acc");
        for (const auto& r : runs) {
            const SpectrumResult* s = hidden_result(r.history);
            out << detail::fmt("%8zu %12.4f %14zu %10.4f %10.4f\n", r.hidden, s ? s->saturation : 0.0,
                               s ? s->intrinsic_dim : std::size_t{0}, r.metrics.final_train_acc,
                               r.metrics.final_test_acc);
        }
        if (runs.size() == 1) {
            print_profile(out, runs.front().history, cfg.options.tail_ratio);
        }
        out << "outputs in " << cfg.out.string() << '\n';
        return static_cast<int>(kOk);
    });
}

} // namespace satprobe::cli

#endif
