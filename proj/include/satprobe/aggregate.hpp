#ifndef SATPROBE_AGGREGATE_HPP
#define SATPROBE_AGGREGATE_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satprobe/actlog.hpp"
#include "satprobe/error.hpp"
#include "satprobe/spectral.hpp"

namespace satprobe {

/// Spectra of the layers analyzed at one checkpoint, keyed by layer id.
using LayerResults = std::map<std::uint16_t, SpectrumResult>;

inline constexpr double kDefaultTailRatio = 0.5;

/// Model average saturation: mean saturation over the non-output layers that
/// have a result. Throws InvalidArgument if there is no such layer.
inline double average_saturation(const LayerResults& results, std::span<const actlog::LayerDescriptor> layers) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [id, r] : results) {
        if (id >= layers.size()) {
            throw InvalidArgument("result for unknown layer id " + std::to_string(id));
        }
        if (!layers[id].is_output) {
            sum += r.saturation;
            ++count;
        }
    }
    if (count == 0) {
        throw InvalidArgument("model average saturation needs at least one non-output layer");
    }
    return sum / static_cast<double>(count);
}

struct Checkpoint {
    std::uint64_t step = 0;
    LayerResults layers;
    std::optional<double> model_average;  // empty when only output layers were analyzed

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Time-indexed per-layer spectra plus the model-average series.
class SaturationHistory {
public:
    SaturationHistory() = default;
    explicit SaturationHistory(std::vector<actlog::LayerDescriptor> layers) : layers_(std::move(layers)) {}

    const std::vector<actlog::LayerDescriptor>& layers() const noexcept { return layers_; }
    const std::vector<Checkpoint>& checkpoints() const noexcept { return checkpoints_; }
    bool empty() const noexcept { return checkpoints_.empty(); }
    std::size_t size() const noexcept { return checkpoints_.size(); }

    const Checkpoint& record_checkpoint(std::uint64_t step, LayerResults results) {
        if (!checkpoints_.empty() && step <= checkpoints_.back().step) {
            throw InvalidArgument("checkpoint step " + std::to_string(step) + " does not follow step " +
                                  std::to_string(checkpoints_.back().step));
        }
        Checkpoint cp{step, std::move(results), std::nullopt};
        const bool has_hidden = std::any_of(cp.layers.begin(), cp.layers.end(), [&](const auto& kv) {
            return kv.first < layers_.size() && !layers_[kv.first].is_output;
        });
        if (has_hidden) {
            cp.model_average = average_saturation(cp.layers, layers_);
        }
        checkpoints_.push_back(std::move(cp));
        return checkpoints_.back();
    }

    /// Saturation of one layer across checkpoints where it was analyzed.
    std::vector<double> saturation_series(std::uint16_t layer_id) const {
        std::vector<double> out;
        for (const auto& cp : checkpoints_) {
            if (auto it = cp.layers.find(layer_id); it != cp.layers.end()) {
                out.push_back(it->second.saturation);
            }
        }
        return out;
    }

    friend bool operator==(const SaturationHistory&, const SaturationHistory&) = default;

private:
    std::vector<actlog::LayerDescriptor> layers_;
    std::vector<Checkpoint> checkpoints_;
};

/// Shape of the layer-by-layer saturation profile. The tail is the longest
/// trailing run of layers whose saturation is below tail_ratio * peak.
struct ProfileSummary {
    std::vector<double> saturations;
    double peak_saturation = 0.0;
    std::size_t peak_index = 0;
    std::size_t tail_length = 0;
    double tail_fraction = 0.0;
};

inline ProfileSummary profile_summary(std::span<const double> saturations, double tail_ratio = kDefaultTailRatio) {
    if (saturations.empty()) {
        throw InvalidArgument("profile summary needs at least one layer");
    }
    ProfileSummary s;
    s.saturations.assign(saturations.begin(), saturations.end());
    auto peak = std::max_element(saturations.begin(), saturations.end());
    s.peak_saturation = *peak;
    s.peak_index = static_cast<std::size_t>(peak - saturations.begin());
    const double cut = tail_ratio * s.peak_saturation;
    for (auto it = saturations.rbegin(); it != saturations.rend() && *it < cut; ++it) {
        ++s.tail_length;
    }
    s.tail_fraction = static_cast<double>(s.tail_length) / static_cast<double>(saturations.size());
    return s;
}

/// Profile over the non-output layers analyzed at a checkpoint, in layer order.
inline std::optional<ProfileSummary> profile_summary(const Checkpoint& cp,
                                                     std::span<const actlog::LayerDescriptor> layers,
                                                     double tail_ratio = kDefaultTailRatio) {
    std::vector<double> sats;
    for (const auto& [id, r] : cp.layers) {
        if (id < layers.size() && !layers[id].is_output) {
            sats.push_back(r.saturation);
        }
    }
    if (sats.empty()) {
        return std::nullopt;
    }
    return profile_summary(sats, tail_ratio);
}

} // namespace satprobe

#endif
