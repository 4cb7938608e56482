#ifndef SATPROBE_POOLING_HPP
#define SATPROBE_POOLING_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "satprobe/actlog.hpp"
#include "satprobe/error.hpp"
#include "satprobe/matrix.hpp"

namespace satprobe {

/// Channel-first tensor shape.
struct TensorShape {
    std::uint64_t n = 1;
    std::uint64_t c = 1;
    std::uint64_t h = 1;
    std::uint64_t w = 1;

    std::uint64_t elements() const { return n * c * h * w; }

    friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

struct PooledBatch {
    Matrix values;  // N x C
    TensorShape source_shape;
};

/// Global average pooling: reduces an N x C x H x W tensor to N x C by
/// averaging each filter over its H*W spatial positions.
inline PooledBatch gap(std::span<const double> tensor, const TensorShape& shape) {
    if (shape.n == 0 || shape.c == 0 || shape.h == 0 || shape.w == 0) {
        throw InvalidArgument("global average pooling needs non-zero dimensions");
    }
    if (tensor.size() != shape.elements()) {
        throw InvalidArgument("tensor has " + std::to_string(tensor.size()) + " values, shape implies " +
                              std::to_string(shape.elements()));
    }
    const std::size_t spatial = shape.h * shape.w;
    PooledBatch out{Matrix(shape.n, shape.c), shape};
    const double* p = tensor.data();
    for (std::size_t n = 0; n < shape.n; ++n) {
        for (std::size_t c = 0; c < shape.c; ++c) {
            double sum = 0.0;
            for (std::size_t k = 0; k < spatial; ++k) {
                if (!std::isfinite(p[k])) {
                    throw InvalidArgument("non-finite value in pooled tensor");
                }
                sum += p[k];
            }
            p += spatial;
            out.values(n, c) = sum / static_cast<double>(spatial);
        }
    }
    return out;
}

/// Turns a log record into the N x width sample matrix its layer's covariance
/// estimator consumes: conv2d records are pooled, dense records pass through.
inline Matrix pool_record(const actlog::BatchRecord& record, const actlog::LayerDescriptor& layer) {
    if (record.layer_id != layer.layer_id) {
        throw InvalidArgument("record belongs to layer " + std::to_string(record.layer_id) + ", not '" +
                              layer.name + "'");
    }
    if (record.shape.size() != actlog::expected_rank(layer.kind)) {
        throw InvalidArgument("record rank does not match " + std::string(actlog::to_string(layer.kind)) +
                              " layer '" + layer.name + "'");
    }
    if (record.shape[1] != layer.width) {
        throw InvalidArgument("record channel count does not match the width of layer '" + layer.name + "'");
    }
    if (layer.kind == actlog::LayerKind::dense) {
        return Matrix(record.shape[0], record.shape[1], record.data);
    }
    const TensorShape shape{record.shape[0], record.shape[1], record.shape[2], record.shape[3]};
    return gap(record.data, shape).values;
}

} // namespace satprobe

#endif
