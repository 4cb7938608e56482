#ifndef SATPROBE_TESTS_SUPPORT_HPP
#define SATPROBE_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "satprobe/satprobe.hpp"

namespace testsupport {

using satprobe::Matrix;

/// Fresh per-test scratch directory under the system temp dir.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("satprobe-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
    const std::string s = read_file(p);
    return {s.begin(), s.end()};
}

inline void write_bytes(const std::filesystem::path& p, std::span<const std::uint8_t> bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline Matrix gaussian_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale = 1.0,
                              double shift = 0.0) {
    std::normal_distribution<double> g(shift, scale);
    Matrix m(rows, cols);
    for (double& v : m.data()) {
        v = g(rng);
    }
    return m;
}

inline Matrix random_symmetric(std::mt19937_64& rng, std::size_t d) {
    Matrix a = gaussian_matrix(rng, d, d);
    Matrix s = a + a.transposed();
    s *= 0.5;
    return s;
}

/// A A^T + eps I, symmetric positive definite.
inline Matrix random_spd(std::mt19937_64& rng, std::size_t d, double eps = 0.1) {
    Matrix a = gaussian_matrix(rng, d, d);
    Matrix s = satprobe::matmul(a, a.transposed());
    for (std::size_t i = 0; i < d; ++i) {
        s(i, i) += eps;
    }
    return s;
}

/// Two-pass population covariance, accumulated in long double.
inline Matrix two_pass_covariance(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    std::vector<long double> mean(d, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            mean[j] += x(i, j);
        }
    }
    for (auto& m : mean) {
        m /= static_cast<long double>(n);
    }
    Matrix c(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            long double s = 0.0L;
            for (std::size_t i = 0; i < n; ++i) {
                s += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
            }
            c(a, b) = static_cast<double>(s / static_cast<long double>(n));
        }
    }
    return c;
}

/// Rows [begin, end) of x.
inline Matrix slice_rows(const Matrix& x, std::size_t begin, std::size_t end) {
    Matrix out(end - begin, x.cols());
    for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            out(i - begin, j) = x(i, j);
        }
    }
    return out;
}

/// Random orthogonal matrix by Gram-Schmidt on a Gaussian matrix.
inline Matrix random_orthogonal(std::mt19937_64& rng, std::size_t d) {
    Matrix q = gaussian_matrix(rng, d, d);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t p = 0; p < c; ++p) {
            double dot = 0.0;
            for (std::size_t r = 0; r < d; ++r) {
                dot += q(r, c) * q(r, p);
            }
            for (std::size_t r = 0; r < d; ++r) {
                q(r, c) -= dot * q(r, p);
            }
        }
        double norm = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            norm += q(r, c) * q(r, c);
        }
        norm = std::sqrt(norm);
        for (std::size_t r = 0; r < d; ++r) {
            q(r, c) /= norm;
        }
    }
    return q;
}

/// Smallest m with sum of the m largest values >= delta * total, by brute
/// force over prefix sums recomputed from scratch.
inline std::size_t brute_intrinsic_dim(std::vector<double> values, double delta) {
    std::sort(values.begin(), values.end(), std::greater<>());
    double total = 0.0;
    for (double v : values) {
        total += v;
    }
    if (total == 0.0) {
        return 0;
    }
    for (std::size_t m = 1; m <= values.size(); ++m) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            s += values[i];
        }
        if (s >= delta * total) {
            return m;
        }
    }
    return values.size();
}

/// Random header with 1..max_layers layers of mixed kinds.
inline satprobe::actlog::LogHeader random_header(std::mt19937_64& rng, std::size_t max_layers = 4) {
    using namespace satprobe::actlog;
    std::uniform_int_distribution<std::size_t> nl(1, max_layers);
    std::uniform_int_distribution<std::uint32_t> width(1, 6);
    std::uniform_int_distribution<int> coin(0, 1);
    LogHeader h;
    h.precision = coin(rng) ? Precision::f32 : Precision::f64;
    const std::size_t n = nl(rng);
    for (std::size_t i = 0; i < n; ++i) {
        LayerDescriptor l;
        l.layer_id = static_cast<std::uint16_t>(i);
        l.name = "layer_" + std::to_string(i) + (coin(rng) ? "" : "/sub");
        l.kind = coin(rng) ? LayerKind::conv2d : LayerKind::dense;
        l.width = width(rng);
        l.is_output = i + 1 == n;
        h.layers.push_back(l);
    }
    return h;
}

/// Random record for a layer. f32 logs get values representable in float so
/// that round trips are exact.
inline satprobe::actlog::BatchRecord random_record(std::mt19937_64& rng, const satprobe::actlog::LogHeader& h,
                                                   std::uint16_t layer_id, std::uint64_t step) {
    using namespace satprobe::actlog;
    const LayerDescriptor& l = h.layers.at(layer_id);
    std::uniform_int_distribution<std::uint64_t> dim(1, 4);
    std::normal_distribution<double> g(0.0, 3.0);
    BatchRecord r;
    r.layer_id = layer_id;
    r.step = step;
    r.shape = {dim(rng), l.width};
    if (l.kind == LayerKind::conv2d) {
        r.shape.push_back(dim(rng));
        r.shape.push_back(dim(rng));
    }
    std::uint64_t values = 1;
    for (auto s : r.shape) {
        values *= s;
    }
    r.data.resize(values);
    for (double& v : r.data) {
        v = g(rng);
        if (h.precision == Precision::f32) {
            v = static_cast<double>(static_cast<float>(v));
        }
    }
    return r;
}

/// Dense record whose rows are given explicitly.
inline satprobe::actlog::BatchRecord dense_record(std::uint16_t layer_id, std::uint64_t step, const Matrix& rows) {
    satprobe::actlog::BatchRecord r;
    r.layer_id = layer_id;
    r.step = step;
    r.shape = {rows.rows(), rows.cols()};
    r.data.assign(rows.data().begin(), rows.data().end());
    return r;
}

inline satprobe::actlog::LayerDescriptor dense_layer(std::uint16_t id, std::string name, std::uint32_t width,
                                                     bool is_output = false) {
    return {id, std::move(name), satprobe::actlog::LayerKind::dense, width, is_output};
}

inline std::vector<std::uint8_t> encode_log(const satprobe::actlog::LogHeader& h,
                                            const std::vector<satprobe::actlog::BatchRecord>& records) {
    auto bytes = satprobe::actlog::encode_header(h);
    for (const auto& r : records) {
        auto f = satprobe::actlog::encode_record(r, h);
        bytes.insert(bytes.end(), f.begin(), f.end());
    }
    return bytes;
}

/// Largest relative discrepancy between backprop gradients and central finite
/// differences of the loss, over every parameter. Relative error uses
/// max(|analytic|, |numeric|, floor) as denominator.
inline double gradient_check(const satprobe::toynet::DenseNet& net, const Matrix& x,
                             const std::vector<std::size_t>& y, double h = 1e-5, double floor = 1e-6) {
    using namespace satprobe::toynet;
    const auto [value, grads] = loss_and_gradients(net, x, y);
    (void)value;
    double worst = 0.0;
    DenseNet probe = net;
    auto check = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = loss(probe, x, y);
        param = saved - h;
        const double down = loss(probe, x, y);
        param = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
    };
    for (std::size_t l = 0; l < probe.depth(); ++l) {
        auto& layer = probe.layers()[l];
        for (std::size_t i = 0; i < layer.weight.size(); ++i) {
            check(layer.weight.data()[i], grads.layers[l].weight.data()[i]);
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            check(layer.bias[i], grads.layers[l].bias[i]);
        }
    }
    return worst;
}

} // namespace testsupport

#endif
