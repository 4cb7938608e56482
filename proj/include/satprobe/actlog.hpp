#ifndef SATPROBE_ACTLOG_HPP
#define SATPROBE_ACTLOG_HPP

/*
 SATL v1 activation log.

 A log is one header followed by any number of batch frames. Everything is
 little-endian; payloads are raw IEEE-754 values.

   header : "SATL" | version u16 | precision u8 | layer_count u16 | layer*
   layer  : layer_id u16 | name_len u8 | name bytes | kind u8 | width u32 | is_output u8
   frame  : layer_id u16 | step u64 | rank u8 | dim u64 * rank | payload

 precision: 0 = f32, 1 = f64.  kind: 0 = dense (rank 2, N x C),
 1 = conv2d (rank 4, N x C x H x W, channel-first). Payload is row-major,
 sample-major, product(dims) values.

 A reader that runs out of bytes in the middle of a frame reports an
 incomplete tail rather than an error, so a file that is still being written
 can be tailed.
*/

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "satprobe/error.hpp"

namespace satprobe::actlog {

inline constexpr std::array<std::uint8_t, 4> kMagic{'S', 'A', 'T', 'L'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kMaxNameBytes = 255;
// Frames claiming more values than this are treated as corruption.
inline constexpr std::uint64_t kMaxFrameValues = std::uint64_t{1} << 36;

enum class Precision : std::uint8_t { f32 = 0, f64 = 1 };
enum class LayerKind : std::uint8_t { dense = 0, conv2d = 1 };

inline std::size_t value_size(Precision p) { return p == Precision::f32 ? 4 : 8; }
inline std::size_t expected_rank(LayerKind k) { return k == LayerKind::dense ? 2 : 4; }

inline const char* to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }
inline const char* to_string(LayerKind k) { return k == LayerKind::dense ? "dense" : "conv2d"; }

struct LayerDescriptor {
    std::uint16_t layer_id = 0;
    std::string name;
    LayerKind kind = LayerKind::dense;
    std::uint32_t width = 1;  // units for dense, filter count for conv2d
    bool is_output = false;

    friend bool operator==(const LayerDescriptor&, const LayerDescriptor&) = default;
};

struct LogHeader {
    std::uint16_t format_version = kFormatVersion;
    Precision precision = Precision::f64;
    std::vector<LayerDescriptor> layers;

    const LayerDescriptor* find(std::uint16_t id) const {
        return id < layers.size() ? &layers[id] : nullptr;
    }

    friend bool operator==(const LogHeader&, const LogHeader&) = default;
};

/// One layer's pre-activations for one minibatch. Values are held as doubles
/// in memory whatever the log precision; f32 values survive the widening
/// exactly, so a read-then-write cycle is bit-preserving.
struct BatchRecord {
    std::uint16_t layer_id = 0;
    std::uint64_t step = 0;
    std::vector<std::uint64_t> shape;  // (N, C) or (N, C, H, W)
    std::vector<double> data;

    std::uint64_t samples() const { return shape.empty() ? 0 : shape[0]; }

    friend bool operator==(const BatchRecord&, const BatchRecord&) = default;
};

inline std::size_t frame_size(std::size_t rank, std::uint64_t values, Precision p) {
    return 2 + 8 + 1 + 8 * rank + static_cast<std::size_t>(values) * value_size(p);
}

namespace detail {

class ByteSink {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v) { put_le(v, 2); }
    void u32(std::uint32_t v) { put_le(v, 4); }
    void u64(std::uint64_t v) { put_le(v, 8); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }

    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    void put_le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) {
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    std::vector<std::uint8_t> bytes_;
};

inline std::uint64_t get_le(const std::uint8_t* p, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
        v |= std::uint64_t{p[i]} << (8 * i);
    }
    return v;
}

// Bounds-checked cursor over a byte span. `need` returns false when the span
// is exhausted; parsers turn that into an incomplete-tail result.
class Cursor {
public:
    Cursor(std::span<const std::uint8_t> bytes, std::uint64_t base) : bytes_(bytes), base_(base) {}

    bool need(std::size_t n) const { return bytes_.size() - pos_ >= n; }
    std::uint64_t offset() const { return base_ + pos_; }
    std::size_t pos() const { return pos_; }

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(take(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
    std::uint64_t u64() { return take(8); }
    const std::uint8_t* ptr() const { return bytes_.data() + pos_; }
    void skip(std::size_t n) { pos_ += n; }

private:
    std::uint64_t take(int n) {
        std::uint64_t v = get_le(bytes_.data() + pos_, n);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::span<const std::uint8_t> bytes_;
    std::uint64_t base_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Throws InvalidArgument when the header cannot be written as a valid log.
inline void check_header(const LogHeader& h) {
    if (h.format_version != kFormatVersion) {
        throw InvalidArgument("unsupported format version " + std::to_string(h.format_version));
    }
    if (h.precision != Precision::f32 && h.precision != Precision::f64) {
        throw InvalidArgument("unknown precision");
    }
    if (h.layers.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw InvalidArgument("too many layers");
    }
    for (std::size_t i = 0; i < h.layers.size(); ++i) {
        const auto& l = h.layers[i];
        if (l.layer_id != i) {
            throw InvalidArgument("layer ids must be 0..layer_count-1 in order; found id " +
                                  std::to_string(l.layer_id) + " at position " + std::to_string(i));
        }
        if (l.name.size() > kMaxNameBytes) {
            throw InvalidArgument("layer name longer than 255 bytes: " + l.name.substr(0, 32) + "...");
        }
        if (l.kind != LayerKind::dense && l.kind != LayerKind::conv2d) {
            throw InvalidArgument("unknown layer kind");
        }
        if (l.width < 1) {
            throw InvalidArgument("layer '" + l.name + "' has zero width");
        }
    }
}

inline void check_record(const BatchRecord& r, const LogHeader& h) {
    const LayerDescriptor* layer = h.find(r.layer_id);
    if (layer == nullptr) {
        throw InvalidArgument("record for undeclared layer id " + std::to_string(r.layer_id));
    }
    if (r.shape.size() != expected_rank(layer->kind)) {
        throw InvalidArgument("record shape rank " + std::to_string(r.shape.size()) +
                              " does not match " + to_string(layer->kind) + " layer '" + layer->name + "'");
    }
    std::uint64_t values = 1;
    for (std::uint64_t d : r.shape) {
        if (d == 0) {
            throw InvalidArgument("record has a zero-sized dimension");
        }
        if (values > kMaxFrameValues / d) {
            throw InvalidArgument("record is too large");
        }
        values *= d;
    }
    if (r.shape[1] != layer->width) {
        throw InvalidArgument("record channel count " + std::to_string(r.shape[1]) +
                              " differs from declared width " + std::to_string(layer->width) +
                              " of layer '" + layer->name + "'");
    }
    if (r.data.size() != values) {
        throw InvalidArgument("record payload length does not equal the product of its shape");
    }
    for (double v : r.data) {
        const bool finite = h.precision == Precision::f32 ? std::isfinite(static_cast<float>(v)) : std::isfinite(v);
        if (!finite) {
            throw InvalidArgument("record contains a non-finite value");
        }
    }
}

inline std::vector<std::uint8_t> encode_header(const LogHeader& h) {
    check_header(h);
    detail::ByteSink out;
    out.raw(kMagic);
    out.u16(h.format_version);
    out.u8(static_cast<std::uint8_t>(h.precision));
    out.u16(static_cast<std::uint16_t>(h.layers.size()));
    for (const auto& l : h.layers) {
        out.u16(l.layer_id);
        out.u8(static_cast<std::uint8_t>(l.name.size()));
        out.raw({reinterpret_cast<const std::uint8_t*>(l.name.data()), l.name.size()});
        out.u8(static_cast<std::uint8_t>(l.kind));
        out.u32(l.width);
        out.u8(l.is_output ? 1 : 0);
    }
    return std::move(out.bytes());
}

inline std::vector<std::uint8_t> encode_record(const BatchRecord& r, const LogHeader& h) {
    check_record(r, h);
    detail::ByteSink out;
    out.u16(r.layer_id);
    out.u64(r.step);
    out.u8(static_cast<std::uint8_t>(r.shape.size()));
    for (std::uint64_t d : r.shape) {
        out.u64(d);
    }
    out.bytes().reserve(frame_size(r.shape.size(), r.data.size(), h.precision));
    if (h.precision == Precision::f32) {
        for (double v : r.data) {
            out.f32(static_cast<float>(v));
        }
    } else {
        for (double v : r.data) {
            out.f64(v);
        }
    }
    return std::move(out.bytes());
}

namespace detail {
inline std::size_t write_bytes(std::ostream& sink, const std::vector<std::uint8_t>& bytes) {
    sink.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!sink) {
        throw IoError("failed to write activation log");
    }
    return bytes.size();
}
} // namespace detail

/// Serializes the header; returns the number of bytes written.
inline std::size_t write_header(std::ostream& sink, const LogHeader& h) {
    return detail::write_bytes(sink, encode_header(h));
}

/// Appends one frame; returns the number of bytes written.
inline std::size_t append_batch(std::ostream& sink, const BatchRecord& r, const LogHeader& h) {
    return detail::write_bytes(sink, encode_record(r, h));
}

// ---------------------------------------------------------------------------
// Parsing

enum class ParseStatus { complete, incomplete };

struct HeaderParse {
    ParseStatus status = ParseStatus::incomplete;
    LogHeader header;
    std::size_t consumed = 0;
};

/// Parses a header from the start of `bytes`. Returns `incomplete` when more
/// bytes are needed; throws FormatError on bad magic, version or layer table.
inline HeaderParse parse_header(std::span<const std::uint8_t> bytes) {
    HeaderParse result;
    for (std::size_t i = 0; i < kMagic.size(); ++i) {
        if (i >= bytes.size()) {
            return result;
        }
        if (bytes[i] != kMagic[i]) {
            throw FormatError("bad magic", 0);
        }
    }
    detail::Cursor cur(bytes, 0);
    cur.skip(kMagic.size());
    if (!cur.need(2 + 1 + 2)) {
        return result;
    }
    const std::uint64_t version_offset = cur.offset();
    result.header.format_version = cur.u16();
    if (result.header.format_version != kFormatVersion) {
        throw FormatError("unsupported format version " + std::to_string(result.header.format_version),
                          version_offset);
    }
    const std::uint64_t precision_offset = cur.offset();
    const std::uint8_t precision = cur.u8();
    if (precision > 1) {
        throw FormatError("unknown precision code " + std::to_string(precision), precision_offset);
    }
    result.header.precision = static_cast<Precision>(precision);
    const std::uint16_t count = cur.u16();
    result.header.layers.reserve(count);
    for (std::uint16_t i = 0; i < count; ++i) {
        const std::uint64_t layer_offset = cur.offset();
        if (!cur.need(2 + 1)) {
            return result;
        }
        LayerDescriptor l;
        l.layer_id = cur.u16();
        if (l.layer_id != i) {
            throw FormatError("layer id " + std::to_string(l.layer_id) + " out of sequence", layer_offset);
        }
        const std::size_t name_len = cur.u8();
        if (!cur.need(name_len + 1 + 4 + 1)) {
            return result;
        }
        l.name.assign(reinterpret_cast<const char*>(cur.ptr()), name_len);
        cur.skip(name_len);
        const std::uint8_t kind = cur.u8();
        if (kind > 1) {
            throw FormatError("unknown layer kind " + std::to_string(kind), layer_offset);
        }
        l.kind = static_cast<LayerKind>(kind);
        l.width = cur.u32();
        if (l.width == 0) {
            throw FormatError("layer '" + l.name + "' has zero width", layer_offset);
        }
        const std::uint8_t out = cur.u8();
        if (out > 1) {
            throw FormatError("invalid is_output flag", layer_offset);
        }
        l.is_output = out == 1;
        result.header.layers.push_back(std::move(l));
    }
    result.status = ParseStatus::complete;
    result.consumed = cur.pos();
    return result;
}

struct RecordParse {
    ParseStatus status = ParseStatus::incomplete;
    BatchRecord record;
    std::size_t consumed = 0;
};

/// Parses one frame at the start of `bytes`. `base_offset` is the absolute
/// file offset of bytes[0], used only for error reporting. Structural errors
/// are reported as soon as the offending field is readable, even if the rest
/// of the frame has not arrived yet.
inline RecordParse parse_record(std::span<const std::uint8_t> bytes, const LogHeader& h,
                                std::uint64_t base_offset) {
    RecordParse result;
    detail::Cursor cur(bytes, base_offset);
    if (!cur.need(2)) {
        return result;
    }
    const std::uint64_t frame_offset = cur.offset();
    BatchRecord& r = result.record;
    r.layer_id = cur.u16();
    const LayerDescriptor* layer = h.find(r.layer_id);
    if (layer == nullptr) {
        throw FormatError("frame for undeclared layer id " + std::to_string(r.layer_id), frame_offset);
    }
    if (!cur.need(8 + 1)) {
        return result;
    }
    r.step = cur.u64();
    const std::uint64_t rank_offset = cur.offset();
    const std::size_t rank = cur.u8();
    if (rank != expected_rank(layer->kind)) {
        throw FormatError("frame rank " + std::to_string(rank) + " does not match " + to_string(layer->kind) +
                              " layer '" + layer->name + "'",
                          rank_offset);
    }
    if (!cur.need(8 * rank)) {
        return result;
    }
    r.shape.resize(rank);
    std::uint64_t values = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        const std::uint64_t dim_offset = cur.offset();
        r.shape[i] = cur.u64();
        if (r.shape[i] == 0) {
            throw FormatError("zero-sized dimension in frame", dim_offset);
        }
        if (values > kMaxFrameValues / r.shape[i]) {
            throw FormatError("frame shape is implausibly large", dim_offset);
        }
        values *= r.shape[i];
    }
    if (r.shape[1] != layer->width) {
        throw FormatError("frame channel count " + std::to_string(r.shape[1]) + " differs from width " +
                              std::to_string(layer->width) + " of layer '" + layer->name + "'",
                          frame_offset);
    }
    const std::size_t vsize = value_size(h.precision);
    if (!cur.need(static_cast<std::size_t>(values) * vsize)) {
        r.shape.clear();
        return result;
    }
    r.data.resize(static_cast<std::size_t>(values));
    const std::uint8_t* p = cur.ptr();
    for (std::size_t i = 0; i < r.data.size(); ++i, p += vsize) {
        double v;
        if (h.precision == Precision::f32) {
            v = std::bit_cast<float>(static_cast<std::uint32_t>(detail::get_le(p, 4)));
        } else {
            v = std::bit_cast<double>(detail::get_le(p, 8));
        }
        if (!std::isfinite(v)) {
            throw FormatError("non-finite value in layer '" + layer->name + "'", cur.offset() + i * vsize);
        }
        r.data[i] = v;
    }
    cur.skip(r.data.size() * vsize);
    result.status = ParseStatus::complete;
    result.consumed = cur.pos();
    return result;
}

// ---------------------------------------------------------------------------
// Whole-stream reading

struct LogContents {
    std::optional<LogHeader> header;  // empty if the header itself is truncated
    std::vector<BatchRecord> records;
    bool incomplete_tail = false;
    std::uint64_t end_offset = 0;  // offset just past the last complete frame
};

namespace detail {
inline std::vector<std::uint8_t> slurp(std::istream& source) {
    std::vector<std::uint8_t> bytes;
    char buf[1 << 16];
    while (source.read(buf, sizeof buf) || source.gcount() > 0) {
        bytes.insert(bytes.end(), buf, buf + source.gcount());
    }
    return bytes;
}
} // namespace detail

/// Parses an in-memory log. Parsing of frames starts at `resume_offset` when
/// it is non-zero (it must point at a frame boundary past the header).
inline LogContents read_bytes(std::span<const std::uint8_t> bytes, std::uint64_t resume_offset = 0) {
    LogContents out;
    HeaderParse hp = parse_header(bytes);
    if (hp.status == ParseStatus::incomplete) {
        out.incomplete_tail = true;
        return out;
    }
    out.header = std::move(hp.header);
    std::uint64_t pos = std::max<std::uint64_t>(hp.consumed, resume_offset);
    if (pos > bytes.size()) {
        throw InvalidArgument("resume offset lies beyond the end of the log");
    }
    while (pos < bytes.size()) {
        RecordParse rp = parse_record(bytes.subspan(static_cast<std::size_t>(pos)), *out.header, pos);
        if (rp.status == ParseStatus::incomplete) {
            out.incomplete_tail = true;
            break;
        }
        out.records.push_back(std::move(rp.record));
        pos += rp.consumed;
    }
    out.end_offset = pos;
    return out;
}

/// Reads a complete stream into memory. A truncated last frame is reported via
/// `incomplete_tail`; structural corruption throws FormatError.
inline LogContents read_stream(std::istream& source, std::uint64_t resume_offset = 0) {
    const auto bytes = detail::slurp(source);
    return read_bytes(bytes, resume_offset);
}

/// Incremental reader over a file that may still be growing. Each call to
/// next() yields the next complete frame, reading more of the file as needed.
/// When the file ends mid-frame the reader reports an incomplete tail and keeps
/// its position, so a later call picks up the rest once it has been written.
class LogReader {
public:
    enum class Status { record, end_of_data, incomplete_tail };

    explicit LogReader(std::filesystem::path path, std::uint64_t resume_offset = 0,
                       std::size_t chunk_bytes = std::size_t{1} << 22)
        : path_(std::move(path)), resume_offset_(resume_offset), chunk_bytes_(chunk_bytes) {}

    /// Header, once enough of the file has been read to parse it.
    const std::optional<LogHeader>& header() {
        ensure_header();
        return header_;
    }

    /// Absolute offset of the first byte not yet consumed as a complete frame.
    std::uint64_t offset() const { return file_pos_ - (buffer_.size() - buf_pos_); }

    Status next(BatchRecord& out) {
        if (!ensure_header()) {
            return buffer_.empty() ? Status::end_of_data : Status::incomplete_tail;
        }
        for (;;) {
            std::span<const std::uint8_t> avail(buffer_.data() + buf_pos_, buffer_.size() - buf_pos_);
            if (!avail.empty()) {
                RecordParse rp = parse_record(avail, *header_, offset());
                if (rp.status == ParseStatus::complete) {
                    buf_pos_ += rp.consumed;
                    out = std::move(rp.record);
                    return Status::record;
                }
            }
            if (fill() == 0) {
                return buf_pos_ == buffer_.size() ? Status::end_of_data : Status::incomplete_tail;
            }
        }
    }

private:
    bool ensure_header() {
        while (!header_) {
            HeaderParse hp = parse_header(std::span<const std::uint8_t>(buffer_).subspan(buf_pos_));
            if (hp.status == ParseStatus::complete) {
                header_ = std::move(hp.header);
                buf_pos_ += hp.consumed;
                if (resume_offset_ > offset()) {
                    buffer_.clear();
                    buf_pos_ = 0;
                    file_pos_ = resume_offset_;
                }
                return true;
            }
            if (fill() == 0) {
                return false;
            }
        }
        return true;
    }

    // Appends newly available file bytes to the buffer; returns how many.
    std::size_t fill() {
        if (buf_pos_ > 0) {
            buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(buf_pos_));
            buf_pos_ = 0;
        }
        if (!file_.is_open()) {
            file_.open(path_, std::ios::binary);
            if (!file_) {
                throw IoError("cannot open " + path_.string());
            }
        }
        file_.clear();
        file_.seekg(static_cast<std::streamoff>(file_pos_));
        const std::size_t old = buffer_.size();
        buffer_.resize(old + chunk_bytes_);
        file_.read(reinterpret_cast<char*>(buffer_.data() + old), static_cast<std::streamsize>(chunk_bytes_));
        const auto got = static_cast<std::size_t>(std::max<std::streamsize>(file_.gcount(), 0));
        buffer_.resize(old + got);
        file_pos_ += got;
        return got;
    }

    std::filesystem::path path_;
    std::uint64_t resume_offset_;
    std::size_t chunk_bytes_;
    std::ifstream file_;
    std::optional<LogHeader> header_;
    std::vector<std::uint8_t> buffer_;
    std::size_t buf_pos_ = 0;
    std::uint64_t file_pos_ = 0;
};

// ---------------------------------------------------------------------------
// Validation

struct LayerCounts {
    std::uint64_t records = 0;
    std::uint64_t samples = 0;
};

struct ValidationIssue {
    std::string message;
    std::uint64_t offset = 0;
};

struct ValidationReport {
    std::optional<LogHeader> header;
    std::vector<LayerCounts> per_layer;  // indexed by layer id
    std::uint64_t bytes_scanned = 0;
    std::optional<ValidationIssue> error;

    bool ok() const { return !error.has_value(); }
};

/// Full scan of a log. Never throws for malformed content; the first problem
/// found is returned in the report together with its byte offset.
inline ValidationReport validate_bytes(std::span<const std::uint8_t> bytes) {
    ValidationReport rep;
    rep.bytes_scanned = bytes.size();
    HeaderParse hp;
    try {
        hp = parse_header(bytes);
    } catch (const FormatError& e) {
        rep.error = ValidationIssue{e.what(), e.offset()};
        return rep;
    }
    if (hp.status == ParseStatus::incomplete) {
        rep.error = bytes.size() < kMagic.size() ? ValidationIssue{"bad magic at offset 0", 0}
                                                 : ValidationIssue{"truncated header", bytes.size()};
        return rep;
    }
    rep.header = hp.header;
    rep.per_layer.resize(hp.header.layers.size());
    std::uint64_t pos = hp.consumed;
    while (pos < bytes.size()) {
        RecordParse rp;
        try {
            rp = parse_record(bytes.subspan(static_cast<std::size_t>(pos)), hp.header, pos);
        } catch (const FormatError& e) {
            rep.error = ValidationIssue{e.what(), e.offset()};
            return rep;
        }
        if (rp.status == ParseStatus::incomplete) {
            rep.error = ValidationIssue{"truncated frame at offset " + std::to_string(pos), pos};
            return rep;
        }
        auto& c = rep.per_layer[rp.record.layer_id];
        ++c.records;
        c.samples += rp.record.samples();
        pos += rp.consumed;
    }
    return rep;
}

inline ValidationReport validate_log(std::istream& source) {
    const auto bytes = detail::slurp(source);
    return validate_bytes(bytes);
}

inline ValidationReport validate_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ValidationReport rep;
        rep.error = ValidationIssue{"cannot open " + path.string(), 0};
        return rep;
    }
    return validate_log(in);
}

/// Single-writer helper: writes the header on construction and frames on
/// append(). Call flush() at step boundaries so tailing readers see them.
class LogWriter {
public:
    LogWriter(std::ostream& sink, LogHeader header) : sink_(sink), header_(std::move(header)) {
        bytes_written_ += write_header(sink_, header_);
        sink_.flush();
    }

    std::size_t append(const BatchRecord& r) {
        const std::size_t n = append_batch(sink_, r, header_);
        bytes_written_ += n;
        return n;
    }

    void flush() { sink_.flush(); }

    const LogHeader& header() const { return header_; }
    std::uint64_t bytes_written() const { return bytes_written_; }

private:
    std::ostream& sink_;
    LogHeader header_;
    std::uint64_t bytes_written_ = 0;
};

} // namespace satprobe::actlog

#endif
