#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace satprobe;
using namespace satprobe::toynet;

namespace {

TrainConfig small_config() {
    TrainConfig c;
    c.input_dim = 8;
    c.input_units = 16;
    c.hidden = 6;
    c.classes = 3;
    c.points_per_class = 40;
    c.test_points_per_class = 20;
    c.epochs = 3;
    c.batch_size = 16;
    c.probe_samples = 64;
    return c;
}

} // namespace

TEST(Forward, ZeroWeightsGiveZeroLogitsAndUniformProbabilities) {
    DenseNet net({4, 5, 3});
    std::mt19937_64 rng(71);
    const auto fp = forward(net, testsupport::gaussian_matrix(rng, 7, 4));
    ASSERT_EQ(fp.preactivations.size(), 2u);
    for (const auto& z : fp.preactivations) {
        for (double v : z.data()) {
            EXPECT_EQ(v, 0.0);
        }
    }
    for (double p : fp.probabilities.data()) {
        EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);
    }
}

TEST(Forward, BasisInputSelectsWeightColumnPlusBias) {
    auto net = DenseNet::initialized({4, 3}, 5);
    net.layers()[0].bias = {0.5, -1.0, 2.0};
    for (std::size_t i = 0; i < 4; ++i) {
        Matrix x(1, 4);
        x(0, i) = 1.0;
        const auto fp = forward(net, x);
        for (std::size_t o = 0; o < 3; ++o) {
            EXPECT_EQ(fp.preactivations[0](0, o), net.layers()[0].weight(o, i) + net.layers()[0].bias[o]);
        }
    }
}

TEST(Forward, HiddenLayersAreRectified) {
    auto net = DenseNet::initialized({3, 6, 2}, 9);
    std::mt19937_64 rng(72);
    const auto fp = forward(net, testsupport::gaussian_matrix(rng, 10, 3));
    ASSERT_EQ(fp.inputs.size(), 2u);
    for (std::size_t i = 0; i < fp.inputs[1].size(); ++i) {
        EXPECT_EQ(fp.inputs[1].data()[i], std::max(fp.preactivations[0].data()[i], 0.0));
    }
}

TEST(Forward, RejectsWrongInputWidth) {
    DenseNet net({4, 3});
    EXPECT_THROW(forward(net, Matrix(2, 5)), InvalidArgument);
}

TEST(Softmax, RowsSumToOneAndShiftInvariant) {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix logits = testsupport::gaussian_matrix(rng, 4, 1 + rng() % 9, 20.0);
        const Matrix p = softmax(logits);
        Matrix shifted = logits;
        for (std::size_t r = 0; r < shifted.rows(); ++r) {
            for (double& v : shifted.row(r)) {
                v += 1000.0 * static_cast<double>(r + 1);
            }
        }
        const Matrix q = softmax(shifted);
        for (std::size_t r = 0; r < p.rows(); ++r) {
            double sum = 0.0;
            for (double v : p.row(r)) {
                EXPECT_GE(v, 0.0);
                sum += v;
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
        EXPECT_LE(max_abs_diff(p, q), 1e-9);
    }
}

TEST(Gradients, MatchFiniteDifferencesOnSmallNet) {
    const auto net = DenseNet::initialized({4, 2, 3}, 13);
    std::mt19937_64 rng(74);
    const Matrix x = testsupport::gaussian_matrix(rng, 5, 4);
    const std::vector<std::size_t> y{0, 1, 2, 1, 0};
    EXPECT_LE(testsupport::gradient_check(net, x, y), 1e-4);
}

TEST(Gradients, MatchFiniteDifferencesOnDeeperNet) {
    const auto net = DenseNet::initialized({6, 5, 4, 3}, 14);
    std::mt19937_64 rng(75);
    const Matrix x = testsupport::gaussian_matrix(rng, 8, 6);
    const std::vector<std::size_t> y{0, 1, 2, 1, 0, 2, 2, 1};
    EXPECT_LE(testsupport::gradient_check(net, x, y), 1e-4);
}

TEST(Loss, RejectsBadLabels) {
    DenseNet net({2, 3});
    EXPECT_THROW(loss(net, Matrix(2, 2), std::vector<std::size_t>{0, 3}), InvalidArgument);
    EXPECT_THROW(loss(net, Matrix(2, 2), std::vector<std::size_t>{0}), InvalidArgument);
}

TEST(Optimizer, ZeroLearningRateLeavesParametersUnchanged) {
    std::mt19937_64 rng(76);
    const Matrix x = testsupport::gaussian_matrix(rng, 6, 4);
    const std::vector<std::size_t> y{0, 1, 2, 0, 1, 2};
    for (auto kind : {OptimizerKind::sgd, OptimizerKind::adam}) {
        auto net = DenseNet::initialized({4, 5, 3}, 15);
        const DenseNet before = net;
        Optimizer opt(kind, 0.0);
        train_step(net, opt, x, y);
        EXPECT_EQ(net, before);
    }
    EXPECT_THROW(Optimizer(OptimizerKind::adam, -1.0), InvalidArgument);
}

TEST(Optimizer, SgdStepIsGradientTimesRate) {
    std::mt19937_64 rng(77);
    const Matrix x = testsupport::gaussian_matrix(rng, 6, 4);
    const std::vector<std::size_t> y{0, 1, 2, 0, 1, 2};
    auto net = DenseNet::initialized({4, 3}, 16);
    const DenseNet before = net;
    const auto [value, g] = loss_and_gradients(net, x, y);
    (void)value;
    Optimizer opt(OptimizerKind::sgd, 0.5);
    train_step(net, opt, x, y);
    for (std::size_t i = 0; i < net.layers()[0].weight.size(); ++i) {
        EXPECT_EQ(net.layers()[0].weight.data()[i],
                  before.layers()[0].weight.data()[i] - 0.5 * g.layers[0].weight.data()[i]);
    }
}

TEST(Training, LossDecreases) {
    std::ostringstream log;
    const auto m = train_and_log(small_config(), log);
    ASSERT_FALSE(m.loss_curve.empty());
    const std::size_t k = m.loss_curve.size() / 4;
    double first = 0.0;
    double last = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        first += m.loss_curve[i];
        last += m.loss_curve[m.loss_curve.size() - 1 - i];
    }
    EXPECT_LT(last, first);
    EXPECT_GT(m.final_train_acc, 1.0 / 3.0);
}

TEST(Training, SameSeedSameBytes) {
    std::ostringstream a;
    std::ostringstream b;
    const auto ma = train_and_log(small_config(), a);
    const auto mb = train_and_log(small_config(), b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(ma.loss_curve, mb.loss_curve);
    auto other = small_config();
    other.seed = 8;
    std::ostringstream c;
    train_and_log(other, c);
    EXPECT_NE(a.str(), c.str());
}

TEST(Training, LogIsValidAndHasOneCheckpointPerEpochPlusOne) {
    std::ostringstream log;
    const auto cfg = small_config();
    const auto m = train_and_log(cfg, log);
    EXPECT_EQ(m.checkpoints, cfg.epochs + 1);
    const std::string s = log.str();
    const auto rep = actlog::validate_bytes(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    ASSERT_TRUE(rep.ok()) << rep.error->message;
    ASSERT_EQ(rep.header->layers.size(), 3u);
    EXPECT_TRUE(rep.header->layers[2].is_output);
    for (const auto& c : rep.per_layer) {
        EXPECT_EQ(c.samples, cfg.probe_samples * (cfg.epochs + 1));
    }
}

TEST(Training, ZeroEpochsLogsOnlyTheInitialCheckpoint) {
    auto cfg = small_config();
    cfg.epochs = 0;
    std::ostringstream log;
    const auto m = train_and_log(cfg, log);
    EXPECT_EQ(m.checkpoints, 1u);
    EXPECT_TRUE(m.loss_curve.empty());
    const std::string s = log.str();
    const auto contents = actlog::read_bytes(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    for (const auto& r : contents.records) {
        EXPECT_EQ(r.step, 0u);
    }
}

TEST(Training, F32LogsAreValid) {
    auto cfg = small_config();
    cfg.precision = actlog::Precision::f32;
    std::ostringstream log;
    train_and_log(cfg, log);
    const std::string s = log.str();
    const auto rep = actlog::validate_bytes(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    ASSERT_TRUE(rep.ok());
    EXPECT_EQ(rep.header->precision, actlog::Precision::f32);
}

TEST(Training, NarrowHiddenLayerIsMoreSaturatedThanWideOne) {
    auto analyze = [](std::size_t hidden) {
        TrainConfig cfg;
        cfg.hidden = hidden;
        cfg.epochs = 3;
        std::ostringstream log;
        train_and_log(cfg, log);
        const std::string s = log.str();
        const auto h = analyze_bytes(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()),
                                     AnalysisOptions{kDefaultThreshold, true, 0, kDefaultTailRatio});
        return h.checkpoints().back().layers.at(1).saturation;
    };
    EXPECT_GT(analyze(8), analyze(128));
}

TEST(Data, BlobsAreBalancedAndDeterministic) {
    DatasetConfig c;
    c.classes = 4;
    c.points_per_class = 10;
    c.test_points_per_class = 5;
    c.dim = 3;
    const auto a = make_blobs(c);
    const auto b = make_blobs(c);
    EXPECT_EQ(a.train.x, b.train.x);
    EXPECT_EQ(a.train.y, b.train.y);
    ASSERT_EQ(a.train.x.rows(), 40u);
    ASSERT_EQ(a.test.x.rows(), 20u);
    std::vector<std::size_t> counts(4, 0);
    for (auto y : a.train.y) {
        ++counts[y];
    }
    EXPECT_EQ(counts, std::vector<std::size_t>(4, 10));
}

TEST(Config, ParsesKeyValueLines) {
    TrainConfig c;
    std::istringstream in("# comment\nhidden = 12\nlr=0.05\n\noptimizer = sgd  # trailing\nprecision=f32\n");
    apply_config(c, in);
    EXPECT_EQ(c.hidden, 12u);
    EXPECT_EQ(c.learning_rate, 0.05);
    EXPECT_EQ(c.optimizer, OptimizerKind::sgd);
    EXPECT_EQ(c.precision, actlog::Precision::f32);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    TrainConfig c;
    std::istringstream unknown("widht = 3\n");
    EXPECT_THROW(apply_config(c, unknown), InvalidArgument);
    std::istringstream bad("hidden = -3\n");
    EXPECT_THROW(apply_config(c, bad), InvalidArgument);
    std::istringstream noeq("hidden 3\n");
    EXPECT_THROW(apply_config(c, noeq), InvalidArgument);
    c.classes = 1;
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Metrics, JsonHasTheExpectedKeys) {
    std::ostringstream log;
    const auto m = train_and_log(small_config(), log);
    const auto j = metrics_json(m);
    for (const char* key : {"final_train_acc", "final_test_acc", "loss_curve", "seed", "config"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["loss_curve"].size(), m.loss_curve.size());
}
