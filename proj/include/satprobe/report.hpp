#ifndef SATPROBE_REPORT_HPP
#define SATPROBE_REPORT_HPP

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "satprobe/aggregate.hpp"
#include "satprobe/analyzer.hpp"
#include "satprobe/error.hpp"

namespace satprobe {

/*
 CSV time series. Layer rows first, then a blank line and the model-average
 section:

   step,layer_name,saturation,intrinsic_dim,layer_width
   ...
   <blank>
   step,model_average
   ...

 Doubles are written in shortest round-trip form.
*/

struct LayerRow {
    std::uint64_t step = 0;
    std::string layer_name;
    double saturation = 0.0;
    std::size_t intrinsic_dim = 0;
    std::size_t layer_width = 0;

    friend bool operator==(const LayerRow&, const LayerRow&) = default;
};

struct AverageRow {
    std::uint64_t step = 0;
    double model_average = 0.0;

    friend bool operator==(const AverageRow&, const AverageRow&) = default;
};

struct SaturationSeries {
    std::vector<LayerRow> layers;
    std::vector<AverageRow> averages;

    friend bool operator==(const SaturationSeries&, const SaturationSeries&) = default;
};

inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

inline SaturationSeries to_series(const SaturationHistory& history) {
    SaturationSeries s;
    for (const auto& cp : history.checkpoints()) {
        for (const auto& [id, r] : cp.layers) {
            s.layers.push_back({cp.step, history.layers().at(id).name, r.saturation, r.intrinsic_dim, r.layer_width});
        }
        if (cp.model_average) {
            s.averages.push_back({cp.step, *cp.model_average});
        }
    }
    return s;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

// Splits one CSV record; handles quoted fields that may contain newlines.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (!any) {
        return false;
    }
    fields.push_back(std::move(field));
    return true;
}

template <typename T>
T parse_number(const std::string& s) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InvalidArgument("bad number in CSV: '" + s + "'");
    }
    return v;
}

} // namespace detail

inline void write_csv(std::ostream& out, const SaturationHistory& history) {
    const auto series = to_series(history);
    out << "step,layer_name,saturation,intrinsic_dim,layer_width\n";
    for (const auto& r : series.layers) {
        out << r.step << ',' << detail::csv_field(r.layer_name) << ',' << format_double(r.saturation) << ','
            << r.intrinsic_dim << ',' << r.layer_width << '\n';
    }
    out << "\nstep,model_average\n";
    for (const auto& a : series.averages) {
        out << a.step << ',' << format_double(a.model_average) << '\n';
    }
}

inline SaturationSeries read_csv(std::istream& in) {
    SaturationSeries s;
    std::vector<std::string> f;
    enum { none, layers, averages } section = none;
    while (detail::read_csv_record(in, f)) {
        if (f.size() == 1 && f[0].empty()) {
            continue;
        }
        if (f.size() == 5 && f[0] == "step" && f[1] == "layer_name") {
            section = layers;
            continue;
        }
        if (f.size() == 2 && f[0] == "step" && f[1] == "model_average") {
            section = averages;
            continue;
        }
        if (section == layers && f.size() == 5) {
            s.layers.push_back({detail::parse_number<std::uint64_t>(f[0]), f[1], detail::parse_number<double>(f[2]),
                                detail::parse_number<std::size_t>(f[3]), detail::parse_number<std::size_t>(f[4])});
        } else if (section == averages && f.size() == 2) {
            s.averages.push_back({detail::parse_number<std::uint64_t>(f[0]), detail::parse_number<double>(f[1])});
        } else {
            throw InvalidArgument("unexpected CSV row with " + std::to_string(f.size()) + " fields");
        }
    }
    return s;
}

inline nlohmann::ordered_json profile_json(const std::optional<ProfileSummary>& p) {
    if (!p) {
        return nullptr;
    }
    return {{"saturations", p->saturations},
            {"peak_saturation", p->peak_saturation},
            {"peak_index", p->peak_index},
            {"tail_length", p->tail_length},
            {"tail_fraction", p->tail_fraction}};
}

/// Final-checkpoint profile over non-output layers, if there is one.
inline std::optional<ProfileSummary> final_profile(const SaturationHistory& history, double tail_ratio) {
    if (history.empty()) {
        return std::nullopt;
    }
    return profile_summary(history.checkpoints().back(), history.layers(), tail_ratio);
}

/// JSON report mirroring the history, plus the options used and the
/// final-checkpoint profile.
inline nlohmann::ordered_json report_json(const SaturationHistory& history, const AnalysisOptions& options) {
    using nlohmann::ordered_json;
    ordered_json layers = ordered_json::array();
    for (const auto& l : history.layers()) {
        layers.push_back({{"layer_id", l.layer_id},
                          {"name", l.name},
                          {"kind", actlog::to_string(l.kind)},
                          {"width", l.width},
                          {"is_output", l.is_output}});
    }
    ordered_json checkpoints = ordered_json::array();
    for (const auto& cp : history.checkpoints()) {
        ordered_json per_layer = ordered_json::array();
        for (const auto& [id, r] : cp.layers) {
            per_layer.push_back({{"layer_id", id},
                                 {"name", history.layers().at(id).name},
                                 {"saturation", r.saturation},
                                 {"intrinsic_dim", r.intrinsic_dim},
                                 {"layer_width", r.layer_width},
                                 {"samples", r.samples},
                                 {"eigenvalues", r.eigenvalues}});
        }
        checkpoints.push_back({{"step", cp.step},
                               {"model_average", cp.model_average ? ordered_json(*cp.model_average) : ordered_json()},
                               {"layers", std::move(per_layer)}});
    }
    return {{"threshold", options.threshold},
            {"tail_ratio", options.tail_ratio},
            {"reset_per_window", options.reset_per_window},
            {"checkpoint_every", options.checkpoint_every},
            {"layers", std::move(layers)},
            {"checkpoints", std::move(checkpoints)},
            {"profile", profile_json(final_profile(history, options.tail_ratio))}};
}

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written report.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot move report into place at " + path.string() + ": " + ec.message());
    }
}

inline std::string csv_string(const SaturationHistory& history) {
    std::ostringstream out;
    write_csv(out, history);
    return out.str();
}

inline std::string json_string(const SaturationHistory& history, const AnalysisOptions& options) {
    return report_json(history, options).dump(2) + "\n";
}

} // namespace satprobe

#endif
