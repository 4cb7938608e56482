#ifndef SATPROBE_ANALYZER_HPP
#define SATPROBE_ANALYZER_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "satprobe/actlog.hpp"
#include "satprobe/aggregate.hpp"
#include "satprobe/covariance.hpp"
#include "satprobe/error.hpp"
#include "satprobe/pooling.hpp"
#include "satprobe/spectral.hpp"

namespace satprobe {

struct AnalysisOptions {
    double threshold = kDefaultThreshold;
    // Reset every estimator after each checkpoint instead of accumulating over
    // the whole log.
    bool reset_per_window = false;
    // Minimum samples a window must hold (in its busiest layer) before a step
    // boundary closes it. 0 closes a window at every step boundary.
    std::uint64_t checkpoint_every = 0;
    double tail_ratio = kDefaultTailRatio;
};

/*
 Consumes batch records in file order and turns them into a SaturationHistory.

 Records are grouped into windows of consecutive records. A window closes
 when a record carrying a different step arrives (subject to
 checkpoint_every) or when finish() is called; closing it analyzes every
 layer whose estimator holds at least two samples and records a checkpoint
 at the step of the window's last record.
*/
class StreamingAnalyzer {
public:
    StreamingAnalyzer(actlog::LogHeader header, AnalysisOptions options)
        : header_(std::move(header)), options_(options), history_(header_.layers) {
        check_threshold(options_.threshold);
        estimators_.reserve(header_.layers.size());
        for (const auto& l : header_.layers) {
            estimators_.emplace_back(l.width);
        }
        window_samples_.assign(header_.layers.size(), 0);
    }

    const actlog::LogHeader& header() const noexcept { return header_; }
    const AnalysisOptions& options() const noexcept { return options_; }
    const SaturationHistory& history() const noexcept { return history_; }
    const CovarianceEstimator& estimator(std::uint16_t layer_id) const { return estimators_.at(layer_id); }
    bool window_open() const noexcept { return window_open_; }

    /// Feeds one record. Returns the checkpoint closed by its arrival, if any.
    const Checkpoint* ingest(const actlog::BatchRecord& record) {
        const actlog::LayerDescriptor* layer = header_.find(record.layer_id);
        if (layer == nullptr) {
            throw InvalidArgument("record for undeclared layer id " + std::to_string(record.layer_id));
        }
        const Checkpoint* closed = nullptr;
        if (window_open_ && record.step != window_step_ && window_full()) {
            closed = close_window();
        }
        estimators_[record.layer_id].update_batch(pool_record(record, *layer));
        window_samples_[record.layer_id] += record.samples();
        window_step_ = record.step;
        window_open_ = true;
        return closed;
    }

    /// Closes the pending window, if there is one.
    const Checkpoint* finish() { return window_open_ ? close_window() : nullptr; }

private:
    bool window_full() const {
        if (options_.checkpoint_every == 0) {
            return true;
        }
        return *std::max_element(window_samples_.begin(), window_samples_.end()) >= options_.checkpoint_every;
    }

    const Checkpoint* close_window() {
        window_open_ = false;
        std::fill(window_samples_.begin(), window_samples_.end(), 0);
        LayerResults results;
        for (std::size_t id = 0; id < estimators_.size(); ++id) {
            if (estimators_[id].count() >= 2) {
                results.emplace(static_cast<std::uint16_t>(id),
                                analyze_layer(estimators_[id], header_.layers[id], options_.threshold));
            }
        }
        if (options_.reset_per_window) {
            for (auto& e : estimators_) {
                e.reset();
            }
        }
        if (results.empty()) {
            return nullptr;
        }
        if (!history_.empty() && window_step_ <= history_.checkpoints().back().step) {
            throw AnalysisError("checkpoint at step " + std::to_string(window_step_) +
                                " is not after the previous checkpoint at step " +
                                std::to_string(history_.checkpoints().back().step));
        }
        return &history_.record_checkpoint(window_step_, std::move(results));
    }

    actlog::LogHeader header_;
    AnalysisOptions options_;
    SaturationHistory history_;
    std::vector<CovarianceEstimator> estimators_;
    std::vector<std::uint64_t> window_samples_;
    bool window_open_ = false;
    std::uint64_t window_step_ = 0;
};

/// One pass over a complete log file. Throws FormatError for malformed or
/// truncated logs and IoError when the file cannot be read.
inline SaturationHistory analyze_log(const std::filesystem::path& path, const AnalysisOptions& options) {
    if (!std::filesystem::is_regular_file(path)) {
        throw IoError("no such log file: " + path.string());
    }
    actlog::LogReader reader(path);
    actlog::BatchRecord record;
    auto status = reader.next(record);
    const auto& header = reader.header();
    if (!header) {
        throw FormatError("bad magic", 0);
    }
    StreamingAnalyzer analyzer(*header, options);
    for (; status == actlog::LogReader::Status::record; status = reader.next(record)) {
        analyzer.ingest(record);
    }
    if (status == actlog::LogReader::Status::incomplete_tail) {
        throw FormatError("truncated frame", reader.offset());
    }
    analyzer.finish();
    return analyzer.history();
}

/// Same as analyze_log for an in-memory log.
inline SaturationHistory analyze_bytes(std::span<const std::uint8_t> bytes, const AnalysisOptions& options) {
    auto contents = actlog::read_bytes(bytes);
    if (!contents.header) {
        throw FormatError("bad magic", 0);
    }
    if (contents.incomplete_tail) {
        throw FormatError("truncated frame", contents.end_offset);
    }
    StreamingAnalyzer analyzer(*contents.header, options);
    for (const auto& r : contents.records) {
        analyzer.ingest(r);
    }
    analyzer.finish();
    return analyzer.history();
}

} // namespace satprobe

#endif
