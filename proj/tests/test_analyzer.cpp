#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace satprobe;
using testsupport::dense_layer;
using testsupport::dense_record;
using testsupport::gaussian_matrix;

namespace {

actlog::LogHeader two_layer_header() {
    actlog::LogHeader h;
    h.layers = {dense_layer(0, "hidden", 4), dense_layer(1, "out", 2, true)};
    return h;
}

// Data spanning exactly `rank` orthogonal, equally strong directions.
Matrix low_rank(std::mt19937_64& rng, std::size_t n, std::size_t width, std::size_t rank) {
    const Matrix coeff = gaussian_matrix(rng, n, rank);
    const Matrix q = testsupport::random_orthogonal(rng, width);
    Matrix basis(rank, width);
    for (std::size_t r = 0; r < rank; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            basis(r, c) = q(c, r);
        }
    }
    return matmul(coeff, basis);
}

} // namespace

TEST(Analyzer, OneCheckpointPerStep) {
    std::mt19937_64 rng(81);
    const auto h = two_layer_header();
    StreamingAnalyzer a(h, {});
    for (std::uint64_t step : {0u, 10u, 20u}) {
        a.ingest(dense_record(0, step, gaussian_matrix(rng, 8, 4)));
        a.ingest(dense_record(1, step, gaussian_matrix(rng, 8, 2)));
    }
    a.finish();
    ASSERT_EQ(a.history().size(), 3u);
    EXPECT_EQ(a.history().checkpoints()[0].step, 0u);
    EXPECT_EQ(a.history().checkpoints()[2].step, 20u);
    // Accumulating: the estimator saw every sample.
    EXPECT_EQ(a.estimator(0).count(), 24u);
    EXPECT_EQ(a.history().checkpoints()[2].layers.at(0).samples, 24u);
}

TEST(Analyzer, ResetPerWindowAnalyzesEachWindowAlone) {
    std::mt19937_64 rng(82);
    const auto h = two_layer_header();
    StreamingAnalyzer a(h, {kDefaultThreshold, true, 0, kDefaultTailRatio});
    a.ingest(dense_record(0, 1, low_rank(rng, 50, 4, 1)));
    a.ingest(dense_record(0, 2, low_rank(rng, 50, 4, 3)));
    a.finish();
    ASSERT_EQ(a.history().size(), 2u);
    EXPECT_EQ(a.history().checkpoints()[0].layers.at(0).intrinsic_dim, 1u);
    EXPECT_EQ(a.history().checkpoints()[1].layers.at(0).samples, 50u);
    EXPECT_EQ(a.history().checkpoints()[1].layers.at(0).intrinsic_dim, 3u);
    EXPECT_EQ(a.estimator(0).count(), 0u);
}

TEST(Analyzer, CheckpointEveryMergesSmallWindows) {
    std::mt19937_64 rng(83);
    const auto h = two_layer_header();
    AnalysisOptions opt;
    opt.checkpoint_every = 30;
    StreamingAnalyzer a(h, opt);
    for (std::uint64_t step = 0; step < 6; ++step) {
        a.ingest(dense_record(0, step, gaussian_matrix(rng, 10, 4)));
    }
    a.finish();
    // Windows close once they hold 30 samples: steps 0-2 and 3-5.
    ASSERT_EQ(a.history().size(), 2u);
    EXPECT_EQ(a.history().checkpoints()[0].step, 2u);
    EXPECT_EQ(a.history().checkpoints()[1].step, 5u);
}

TEST(Analyzer, SkipsLayersWithFewerThanTwoSamples) {
    std::mt19937_64 rng(84);
    const auto h = two_layer_header();
    StreamingAnalyzer a(h, {});
    a.ingest(dense_record(0, 0, gaussian_matrix(rng, 1, 4)));
    a.ingest(dense_record(1, 0, gaussian_matrix(rng, 5, 2)));
    a.finish();
    ASSERT_EQ(a.history().size(), 1u);
    EXPECT_EQ(a.history().checkpoints()[0].layers.count(0), 0u);
    EXPECT_FALSE(a.history().checkpoints()[0].model_average);
}

TEST(Analyzer, StepGoingBackwardsIsAnAnalysisError) {
    std::mt19937_64 rng(85);
    const auto h = two_layer_header();
    StreamingAnalyzer a(h, {});
    a.ingest(dense_record(0, 5, gaussian_matrix(rng, 4, 4)));
    a.ingest(dense_record(0, 3, gaussian_matrix(rng, 4, 4)));
    EXPECT_THROW(a.finish(), AnalysisError);
}

TEST(Analyzer, ConvLayersArePooledBeforeAnalysis) {
    actlog::LogHeader h;
    h.layers = {{0, "conv", actlog::LayerKind::conv2d, 3, false}};
    std::mt19937_64 rng(86);
    std::normal_distribution<double> g;
    actlog::BatchRecord r{0, 0, {40, 3, 2, 2}, std::vector<double>(40 * 3 * 4)};
    for (double& v : r.data) {
        v = g(rng);
    }
    const auto hist = analyze_bytes(testsupport::encode_log(h, {r}), {});
    ASSERT_EQ(hist.size(), 1u);
    CovarianceEstimator est(3);
    est.update_batch(gap(r.data, {40, 3, 2, 2}).values);
    EXPECT_EQ(hist.checkpoints()[0].layers.at(0), analyze_layer(est, h.layers[0]));
}

TEST(Analyzer, RankOneLayerReportsOneOverWidth) {
    std::mt19937_64 rng(87);
    actlog::LogHeader h;
    h.layers = {dense_layer(0, "l", 16), dense_layer(1, "o", 2, true)};
    const auto bytes = testsupport::encode_log(
        h, {dense_record(0, 0, low_rank(rng, 100, 16, 1)), dense_record(1, 0, gaussian_matrix(rng, 100, 2))});
    const auto hist = analyze_bytes(bytes, {});
    EXPECT_EQ(hist.checkpoints()[0].layers.at(0).saturation, 1.0 / 16.0);
}

TEST(Analyzer, TruncatedLogIsAFormatError) {
    std::mt19937_64 rng(88);
    const auto h = two_layer_header();
    auto bytes = testsupport::encode_log(h, {dense_record(0, 0, gaussian_matrix(rng, 3, 4))});
    bytes.pop_back();
    EXPECT_THROW(analyze_bytes(bytes, {}), FormatError);
    EXPECT_THROW(analyze_bytes({}, {}), FormatError);
}

TEST(Analyzer, FileAndMemoryAgree) {
    std::mt19937_64 rng(89);
    const auto h = two_layer_header();
    std::vector<actlog::BatchRecord> recs;
    for (std::uint64_t s = 0; s < 4; ++s) {
        recs.push_back(dense_record(0, s, gaussian_matrix(rng, 6, 4)));
        recs.push_back(dense_record(1, s, gaussian_matrix(rng, 6, 2)));
    }
    const auto bytes = testsupport::encode_log(h, recs);
    testsupport::TempDir dir("analyzer");
    testsupport::write_bytes(dir / "a.satl", bytes);
    EXPECT_EQ(analyze_log(dir / "a.satl", {}), analyze_bytes(bytes, {}));
    EXPECT_THROW(analyze_log(dir / "missing.satl", {}), IoError);
}
