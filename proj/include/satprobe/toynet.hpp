#ifndef SATPROBE_TOYNET_HPP
#define SATPROBE_TOYNET_HPP

/*
 A small fully connected classifier trained with plain backpropagation on
 Gaussian-blob data. It exists to produce realistic activation logs without
 an external framework: at every checkpoint it runs a fixed probe set through
 the network and logs the pre-activations of every layer.

 Architecture: input_dim -> [input_units, ReLU] -> hidden, ReLU -> classes,
 softmax. The optional first layer mirrors a "128-unit input layer"; set
 input_units = 0 to drop it.
*/

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "satprobe/actlog.hpp"
#include "satprobe/error.hpp"
#include "satprobe/matrix.hpp"

namespace satprobe::toynet {

class DivergenceError : public Error {
public:
    using Error::Error;
};

struct DenseLayer {
    Matrix weight;  // out x in
    std::vector<double> bias;

    std::size_t fan_in() const { return weight.cols(); }
    std::size_t units() const { return weight.rows(); }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

class DenseNet {
public:
    DenseNet() = default;

    /// sizes = {input, layer_1, ..., classes}; all layers zero-initialized.
    explicit DenseNet(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
        if (sizes_.size() < 2) {
            throw InvalidArgument("a network needs an input size and at least one layer");
        }
        for (std::size_t s : sizes_) {
            if (s == 0) {
                throw InvalidArgument("layer sizes must be positive");
            }
        }
        for (std::size_t i = 1; i < sizes_.size(); ++i) {
            layers_.push_back({Matrix(sizes_[i], sizes_[i - 1]), std::vector<double>(sizes_[i], 0.0)});
        }
    }

    /// Weights uniform in +-1/sqrt(fan_in), biases zero.
    static DenseNet initialized(std::vector<std::size_t> sizes, std::uint64_t seed) {
        DenseNet net(std::move(sizes));
        std::seed_seq seq{seed, std::uint64_t{0x1417}};
        std::mt19937_64 rng(seq);
        for (auto& l : net.layers_) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(l.fan_in()));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (double& w : l.weight.data()) {
                w = dist(rng);
            }
        }
        return net;
    }

    const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
    std::size_t input_dim() const { return sizes_.front(); }
    std::size_t classes() const { return sizes_.back(); }
    std::size_t depth() const { return layers_.size(); }

    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

    friend bool operator==(const DenseNet&, const DenseNet&) = default;

private:
    std::vector<std::size_t> sizes_;
    std::vector<DenseLayer> layers_;
};

struct ForwardPass {
    std::vector<Matrix> inputs;          // input to each layer (post-activation of the previous one)
    std::vector<Matrix> preactivations;  // z_l for each layer, N x units
    Matrix probabilities;                // softmax of the last z
};

namespace detail {

inline void check_finite_params(const DenseNet& net) {
    for (const auto& l : net.layers()) {
        if (!all_finite(l.weight.data()) || !all_finite(l.bias)) {
            throw InvalidArgument("network parameters contain non-finite values");
        }
    }
}

inline Matrix affine(const Matrix& x, const DenseLayer& l) {
    Matrix z(x.rows(), l.units());
    for (std::size_t n = 0; n < x.rows(); ++n) {
        auto xr = x.row(n);
        auto zr = z.row(n);
        for (std::size_t o = 0; o < l.units(); ++o) {
            auto wr = l.weight.row(o);
            double s = l.bias[o];
            for (std::size_t i = 0; i < wr.size(); ++i) {
                s += wr[i] * xr[i];
            }
            zr[o] = s;
        }
    }
    return z;
}

inline Matrix relu(Matrix z) {
    for (double& v : z.data()) {
        v = std::max(v, 0.0);
    }
    return z;
}

} // namespace detail

/// Row-wise softmax, shifted by the row maximum for stability.
inline Matrix softmax(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (std::size_t n = 0; n < logits.rows(); ++n) {
        auto in = logits.row(n);
        auto out = p.row(n);
        const double mx = *std::max_element(in.begin(), in.end());
        double sum = 0.0;
        for (std::size_t k = 0; k < in.size(); ++k) {
            out[k] = std::exp(in[k] - mx);
            sum += out[k];
        }
        for (double& v : out) {
            v /= sum;
        }
    }
    return p;
}

inline ForwardPass forward(const DenseNet& net, const Matrix& x) {
    if (x.cols() != net.input_dim()) {
        throw InvalidArgument("input has " + std::to_string(x.cols()) + " features, network expects " +
                              std::to_string(net.input_dim()));
    }
    detail::check_finite_params(net);
    ForwardPass fp;
    Matrix a = x;
    for (std::size_t l = 0; l < net.depth(); ++l) {
        Matrix z = detail::affine(a, net.layers()[l]);
        fp.inputs.push_back(std::move(a));
        if (l + 1 < net.depth()) {
            a = detail::relu(z);
        }
        fp.preactivations.push_back(std::move(z));
    }
    fp.probabilities = softmax(fp.preactivations.back());
    return fp;
}

inline double cross_entropy(const Matrix& probabilities, std::span<const std::size_t> labels) {
    if (labels.size() != probabilities.rows() || labels.empty()) {
        throw InvalidArgument("label count does not match the batch");
    }
    double loss = 0.0;
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] >= probabilities.cols()) {
            throw InvalidArgument("label out of range");
        }
        loss -= std::log(std::max(probabilities(n, labels[n]), std::numeric_limits<double>::min()));
    }
    return loss / static_cast<double>(labels.size());
}

inline double loss(const DenseNet& net, const Matrix& x, std::span<const std::size_t> labels) {
    return cross_entropy(forward(net, x).probabilities, labels);
}

struct Gradients {
    std::vector<DenseLayer> layers;
};

/// Mean cross-entropy over the batch and its gradient w.r.t. every parameter.
inline std::pair<double, Gradients> loss_and_gradients(const DenseNet& net, const Matrix& x,
                                                        std::span<const std::size_t> labels) {
    ForwardPass fp = forward(net, x);
    const double value = cross_entropy(fp.probabilities, labels);
    const double inv_n = 1.0 / static_cast<double>(labels.size());
    Matrix dz = fp.probabilities;
    for (std::size_t n = 0; n < labels.size(); ++n) {
        dz(n, labels[n]) -= 1.0;
    }
    dz *= inv_n;

    Gradients g;
    g.layers.resize(net.depth());
    for (std::size_t l = net.depth(); l-- > 0;) {
        const DenseLayer& layer = net.layers()[l];
        const Matrix& a = fp.inputs[l];
        DenseLayer& gl = g.layers[l];
        gl.weight = Matrix(layer.units(), layer.fan_in());
        gl.bias.assign(layer.units(), 0.0);
        for (std::size_t n = 0; n < dz.rows(); ++n) {
            auto dzr = dz.row(n);
            auto ar = a.row(n);
            for (std::size_t o = 0; o < layer.units(); ++o) {
                const double d = dzr[o];
                if (d == 0.0) {
                    continue;
                }
                gl.bias[o] += d;
                auto gw = gl.weight.row(o);
                for (std::size_t i = 0; i < ar.size(); ++i) {
                    gw[i] += d * ar[i];
                }
            }
        }
        if (l == 0) {
            break;
        }
        Matrix prev(dz.rows(), layer.fan_in());
        const Matrix& zprev = fp.preactivations[l - 1];
        for (std::size_t n = 0; n < dz.rows(); ++n) {
            auto dzr = dz.row(n);
            auto pr = prev.row(n);
            for (std::size_t o = 0; o < layer.units(); ++o) {
                const double d = dzr[o];
                if (d == 0.0) {
                    continue;
                }
                auto wr = layer.weight.row(o);
                for (std::size_t i = 0; i < pr.size(); ++i) {
                    pr[i] += d * wr[i];
                }
            }
            auto zr = zprev.row(n);
            for (std::size_t i = 0; i < pr.size(); ++i) {
                if (zr[i] <= 0.0) {
                    pr[i] = 0.0;
                }
            }
        }
        dz = std::move(prev);
    }
    return {value, std::move(g)};
}

enum class OptimizerKind { sgd, adam };

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

/// Plain SGD or Adam (beta1 0.9, beta2 0.999, eps 1e-8).
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
            throw InvalidArgument("learning rate must be finite and non-negative");
        }
    }

    OptimizerKind kind() const noexcept { return kind_; }
    double learning_rate() const noexcept { return lr_; }

    void apply(DenseNet& net, const Gradients& g) {
        if (kind_ == OptimizerKind::sgd) {
            for (std::size_t l = 0; l < net.depth(); ++l) {
                sgd(net.layers()[l].weight.data(), g.layers[l].weight.data());
                sgd(net.layers()[l].bias, g.layers[l].bias);
            }
            return;
        }
        if (m_.empty()) {
            for (const auto& l : net.layers()) {
                m_.push_back({Matrix(l.units(), l.fan_in()), std::vector<double>(l.units(), 0.0)});
            }
            v_ = m_;
        }
        ++t_;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
        for (std::size_t l = 0; l < net.depth(); ++l) {
            adam(net.layers()[l].weight.data(), g.layers[l].weight.data(), m_[l].weight.data(), v_[l].weight.data(),
                 c1, c2);
            adam(net.layers()[l].bias, g.layers[l].bias, m_[l].bias, v_[l].bias, c1, c2);
        }
    }

    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;

private:
    void sgd(std::span<double> p, std::span<const double> g) const {
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] -= lr_ * g[i];
        }
    }

    void adam(std::span<double> p, std::span<const double> g, std::span<double> m, std::span<double> v, double c1,
              double c2) const {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + epsilon);
        }
    }

    OptimizerKind kind_;
    double lr_;
    std::uint64_t t_ = 0;
    std::vector<DenseLayer> m_;
    std::vector<DenseLayer> v_;
};

/// One gradient step on a minibatch. Returns the loss before the update.
inline double train_step(DenseNet& net, Optimizer& opt, const Matrix& x, std::span<const std::size_t> labels) {
    if (x.rows() == 0) {
        throw InvalidArgument("empty training batch");
    }
    auto [value, grads] = loss_and_gradients(net, x, labels);
    if (!std::isfinite(value)) {
        throw DivergenceError("training loss became non-finite");
    }
    opt.apply(net, grads);
    return value;
}

// ---------------------------------------------------------------------------
// Synthetic data

struct Dataset {
    Matrix x;
    std::vector<std::size_t> y;
};

struct SyntheticData {
    Dataset train;
    Dataset test;
    Matrix class_means;  // classes x dim
};

struct DatasetConfig {
    std::uint64_t seed = 7;
    std::size_t classes = 10;
    std::size_t points_per_class = 200;
    std::size_t test_points_per_class = 100;
    std::size_t dim = 64;
    double mean_scale = 1.0;  // std-dev of class-mean coordinates
    double noise = 1.0;       // isotropic within-class std-dev
};

/// Balanced Gaussian blobs. Class means are drawn first, in class order, so
/// the first k means are shared between generators that differ only in the
/// class count. Samples are interleaved by class.
inline SyntheticData make_blobs(const DatasetConfig& cfg) {
    if (cfg.classes < 2 || cfg.dim == 0 || cfg.points_per_class == 0) {
        throw InvalidArgument("dataset needs at least 2 classes, a positive dimension and points per class");
    }
    std::seed_seq mean_seq{cfg.seed, std::uint64_t{0xda7a}};
    std::mt19937_64 mean_rng(mean_seq);
    std::normal_distribution<double> unit(0.0, 1.0);
    SyntheticData d;
    d.class_means = Matrix(cfg.classes, cfg.dim);
    for (double& v : d.class_means.data()) {
        v = cfg.mean_scale * unit(mean_rng);
    }
    auto sample = [&](std::size_t per_class, std::uint64_t stream) {
        std::seed_seq seq{cfg.seed, stream};
        std::mt19937_64 rng(seq);
        Dataset out{Matrix(per_class * cfg.classes, cfg.dim), {}};
        out.y.reserve(out.x.rows());
        for (std::size_t i = 0; i < out.x.rows(); ++i) {
            const std::size_t c = i % cfg.classes;
            out.y.push_back(c);
            auto row = out.x.row(i);
            for (std::size_t j = 0; j < cfg.dim; ++j) {
                row[j] = d.class_means(c, j) + cfg.noise * unit(rng);
            }
        }
        return out;
    };
    d.train = sample(cfg.points_per_class, 0x7a1);
    d.test = sample(cfg.test_points_per_class, 0x7e5);
    return d;
}

inline double accuracy(const DenseNet& net, const Dataset& data) {
    if (data.y.empty()) {
        return 0.0;
    }
    const Matrix p = forward(net, data.x).probabilities;
    std::size_t hits = 0;
    for (std::size_t n = 0; n < data.y.size(); ++n) {
        auto row = p.row(n);
        const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        hits += best == data.y[n];
    }
    return static_cast<double>(hits) / static_cast<double>(data.y.size());
}

// ---------------------------------------------------------------------------
// Training with activation logging

struct TrainConfig {
    std::size_t input_dim = 64;
    std::size_t input_units = 128;  // optional first dense layer; 0 = none
    std::size_t hidden = 32;
    std::size_t classes = 10;
    std::size_t points_per_class = 200;
    std::size_t test_points_per_class = 100;
    double mean_scale = 1.0;
    double noise = 3.0;
    std::size_t epochs = 20;
    std::size_t batch_size = 128;
    double learning_rate = 1e-2;
    OptimizerKind optimizer = OptimizerKind::adam;
    std::uint64_t seed = 7;
    std::size_t probe_samples = 1024;  // samples forwarded and logged per checkpoint
    actlog::Precision precision = actlog::Precision::f64;

    std::vector<std::size_t> layer_sizes() const {
        std::vector<std::size_t> s{input_dim};
        if (input_units > 0) {
            s.push_back(input_units);
        }
        s.push_back(hidden);
        s.push_back(classes);
        return s;
    }

    DatasetConfig dataset() const {
        return {seed, classes, points_per_class, test_points_per_class, input_dim, mean_scale, noise};
    }

    void validate() const {
        if (input_dim == 0 || hidden == 0 || classes < 2 || batch_size == 0 || points_per_class == 0 ||
            probe_samples < 2) {
            throw InvalidArgument("invalid trainer configuration");
        }
        if (!(learning_rate >= 0.0) || !(noise >= 0.0) || !(mean_scale >= 0.0)) {
            throw InvalidArgument("learning rate, noise and mean scale must be non-negative");
        }
    }
};

struct TrainMetrics {
    double final_train_acc = 0.0;
    double final_test_acc = 0.0;
    std::vector<double> loss_curve;  // one entry per training step
    std::uint64_t steps = 0;
    std::size_t checkpoints = 0;
    TrainConfig config;
};

/// Header describing the layers a trainer with this config logs.
inline actlog::LogHeader log_header(const TrainConfig& cfg) {
    actlog::LogHeader h;
    h.precision = cfg.precision;
    std::uint16_t id = 0;
    if (cfg.input_units > 0) {
        h.layers.push_back({id++, "input", actlog::LayerKind::dense, static_cast<std::uint32_t>(cfg.input_units), false});
    }
    h.layers.push_back({id++, "hidden", actlog::LayerKind::dense, static_cast<std::uint32_t>(cfg.hidden), false});
    h.layers.push_back({id++, "output", actlog::LayerKind::dense, static_cast<std::uint32_t>(cfg.classes), true});
    return h;
}

/// Trains for cfg.epochs, logging the probe set's pre-activations for every
/// layer at step 0 and after every epoch. Deterministic given the config.
inline TrainMetrics train_and_log(const TrainConfig& cfg, std::ostream& log_sink) {
    cfg.validate();
    const SyntheticData data = make_blobs(cfg.dataset());
    DenseNet net = DenseNet::initialized(cfg.layer_sizes(), cfg.seed);
    Optimizer opt(cfg.optimizer, cfg.learning_rate);
    actlog::LogWriter writer(log_sink, log_header(cfg));

    const std::size_t n_train = data.train.x.rows();
    const std::size_t n_probe = std::min(cfg.probe_samples, n_train);
    TrainMetrics m;
    m.config = cfg;

    auto log_checkpoint = [&](std::uint64_t step) {
        for (std::size_t start = 0; start < n_probe; start += cfg.batch_size) {
            const std::size_t rows = std::min(cfg.batch_size, n_probe - start);
            Matrix x(rows, cfg.input_dim);
            std::copy_n(data.train.x.row(start).begin(), rows * cfg.input_dim, x.data().begin());
            const ForwardPass fp = forward(net, x);
            for (std::size_t l = 0; l < fp.preactivations.size(); ++l) {
                const Matrix& z = fp.preactivations[l];
                writer.append({static_cast<std::uint16_t>(l), step, {z.rows(), z.cols()},
                               std::vector<double>(z.data().begin(), z.data().end())});
            }
        }
        writer.flush();
        ++m.checkpoints;
    };

    std::seed_seq shuffle_seq{cfg.seed, std::uint64_t{0x5f1e}};
    std::mt19937_64 shuffle_rng(shuffle_seq);
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});

    log_checkpoint(0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t rows = std::min(cfg.batch_size, n_train - start);
            Matrix x(rows, cfg.input_dim);
            std::vector<std::size_t> y(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                const std::size_t src = order[start + r];
                std::copy_n(data.train.x.row(src).begin(), cfg.input_dim, x.row(r).begin());
                y[r] = data.train.y[src];
            }
            m.loss_curve.push_back(train_step(net, opt, x, y));
            ++m.steps;
        }
        log_checkpoint(m.steps);
    }
    m.final_train_acc = accuracy(net, data.train);
    m.final_test_acc = accuracy(net, data.test);
    return m;
}

inline nlohmann::ordered_json config_json(const TrainConfig& c) {
    return {{"input_dim", c.input_dim},
            {"input_units", c.input_units},
            {"hidden", c.hidden},
            {"classes", c.classes},
            {"points_per_class", c.points_per_class},
            {"test_points_per_class", c.test_points_per_class},
            {"mean_scale", c.mean_scale},
            {"noise", c.noise},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"optimizer", to_string(c.optimizer)},
            {"seed", c.seed},
            {"probe_samples", c.probe_samples},
            {"precision", actlog::to_string(c.precision)}};
}

inline nlohmann::ordered_json metrics_json(const TrainMetrics& m) {
    return {{"final_train_acc", m.final_train_acc},
            {"final_test_acc", m.final_test_acc},
            {"loss_curve", m.loss_curve},
            {"seed", m.config.seed},
            {"config", config_json(m.config)}};
}

// ---------------------------------------------------------------------------
// Key-value config files:  `key = value` per line, '#' starts a comment.

inline void set_config_value(TrainConfig& c, const std::string& key, const std::string& value) {
    auto as_size = [&] {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(value, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != value.size() || value.empty() || value[0] == '-') {
            throw InvalidArgument("config key '" + key + "' expects a non-negative integer, got '" + value + "'");
        }
        return static_cast<std::size_t>(v);
    };
    auto as_double = [&] {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(value, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != value.size() || value.empty()) {
            throw InvalidArgument("config key '" + key + "' expects a number, got '" + value + "'");
        }
        return v;
    };
    if (key == "input_dim") c.input_dim = as_size();
    else if (key == "input_units") c.input_units = as_size();
    else if (key == "hidden") c.hidden = as_size();
    else if (key == "classes") c.classes = as_size();
    else if (key == "points_per_class") c.points_per_class = as_size();
    else if (key == "test_points_per_class") c.test_points_per_class = as_size();
    else if (key == "mean_scale") c.mean_scale = as_double();
    else if (key == "noise") c.noise = as_double();
    else if (key == "epochs") c.epochs = as_size();
    else if (key == "batch_size") c.batch_size = as_size();
    else if (key == "learning_rate" || key == "lr") c.learning_rate = as_double();
    else if (key == "seed") c.seed = as_size();
    else if (key == "probe_samples") c.probe_samples = as_size();
    else if (key == "optimizer") {
        if (value == "adam") c.optimizer = OptimizerKind::adam;
        else if (value == "sgd") c.optimizer = OptimizerKind::sgd;
        else throw InvalidArgument("optimizer must be 'adam' or 'sgd'");
    } else if (key == "precision") {
        if (value == "f64") c.precision = actlog::Precision::f64;
        else if (value == "f32") c.precision = actlog::Precision::f32;
        else throw InvalidArgument("precision must be 'f32' or 'f64'");
    } else {
        throw InvalidArgument("unknown config key '" + key + "'");
    }
}

inline void apply_config(TrainConfig& c, std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument("config line " + std::to_string(lineno) + " is not 'key = value'");
        }
        set_config_value(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

} // namespace satprobe::toynet

#endif
