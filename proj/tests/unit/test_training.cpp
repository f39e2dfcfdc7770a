#include <gtest/gtest.h>

#include <random>

#include "flowguard/adam.hpp"
#include "flowguard/errors.hpp"
#include "flowguard/training.hpp"

using namespace flowguard;

namespace {

// Two clusters separated along the first four features.
Dataset two_clusters(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> low(0.0, 0.3), high(0.7, 1.0), any(0.0, 1.0);
  Dataset ds;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool second = i % 2 == 1;
    FeatureVector fv;
    fv.flow_index = static_cast<std::int64_t>(i);
    for (std::size_t k = 0; k < kNumFeatures; ++k) fv.values[k] = k < 4 ? (second ? high(rng) : low(rng)) : any(rng);
    ds.push_back(fv, second ? ClassLabel::dos_attack : ClassLabel::normal_traffic);
  }
  return ds;
}

}  // namespace

TEST(Train, SeparableClustersReachFullAccuracy) {
  const auto ds = two_clusters(50, 1);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 16;
  auto [net, report] = train(Network::initialize(default_layer_sizes(), 0.01, 1), ds, cfg);
  ASSERT_EQ(report.epochs.size(), 200u);
  EXPECT_DOUBLE_EQ(evaluate(net, ds).accuracy, 1.0);
  EXPECT_DOUBLE_EQ(report.epochs.back().train_accuracy, 1.0);
  EXPECT_LT(report.epochs.back().train_loss, report.epochs.front().train_loss);
}

TEST(Train, ZeroEpochsReturnsInputUnchanged) {
  const auto ds = two_clusters(5, 2);
  const auto net = Network::initialize(default_layer_sizes(), 0.01, 2);
  TrainConfig cfg;
  cfg.epochs = 0;
  auto [out, report] = train(net, ds, cfg);
  EXPECT_EQ(out, net);
  EXPECT_TRUE(report.epochs.empty());
}

TEST(Train, SameSeedIsBitwiseReproducible) {
  const auto ds = two_clusters(20, 3);
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.validation_fraction = 0.25;
  const auto init = Network::initialize(default_layer_sizes(), 0.01, 3);
  auto a = train(init, ds, cfg);
  auto b = train(init, ds, cfg);
  EXPECT_EQ(a.second, b.second);
  EXPECT_EQ(a.first, b.first);
  cfg.seed = 43;
  auto c = train(init, ds, cfg);
  EXPECT_NE(c.first, a.first);
}

TEST(Train, FullBatchStepIsMeanOfWeightedSampleGradients) {
  auto ds = two_clusters(3, 4);
  ds.weights = {1.0, 2.0, 0.5, 5.0 / 3.0, 1.0, 1.0 / 3.0};
  const auto init = Network::initialize(default_layer_sizes(6, 5), 0.01, 4);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 100;  // clamped to the six samples
  auto [trained, report] = train(init, ds, cfg);
  EXPECT_EQ(report.optimizer_steps, 1u);

  Parameters mean = Parameters::zeros_like(init.params);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto [d, cache] = forward(init, ds.features[i]);
    mean.add(backward(init, cache, ds.labels[i], ds.weights[i]));
  }
  mean.scale(1.0 / 6.0);
  auto [expected, state] = adam_update(init, mean, AdamState::for_network(init, cfg.adam));
  const auto got = trained.params.flatten();
  const auto want = expected.params.flatten();
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-15);
}

TEST(Train, ValidationSplitSizesAndStats) {
  const auto ds = two_clusters(50, 5);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.validation_fraction = 0.2;
  auto [net, report] = train(Network::initialize(default_layer_sizes(), 0.01, 5), ds, cfg);
  EXPECT_EQ(report.train_samples, 80u);
  EXPECT_EQ(report.validation_samples, 20u);
  ASSERT_TRUE(report.epochs.back().validation_accuracy.has_value());
  EXPECT_EQ(report.optimizer_steps, 3u * 3u);  // ceil(80/32) per epoch
  EXPECT_FALSE(report.dataset_checksum.empty());
  EXPECT_EQ(net.dataset_checksum, report.dataset_checksum);
}

TEST(Train, RejectsBadInputs) {
  const auto net = Network::initialize(default_layer_sizes(), 0.01, 6);
  TrainConfig cfg;
  EXPECT_THROW(train(net, Dataset{}, cfg), EmptyDatasetError);
  cfg.batch_size = 0;
  EXPECT_THROW(train(net, two_clusters(2, 1), cfg), ValidationError);
  cfg = TrainConfig{};
  cfg.validation_fraction = 1.0;
  EXPECT_THROW(train(net, two_clusters(2, 1), cfg), ValidationError);
  auto bad = two_clusters(2, 1);
  bad.features[0].values[0] = std::numeric_limits<double>::quiet_NaN();
  cfg = TrainConfig{};
  cfg.epochs = 1;
  EXPECT_THROW(train(net, bad, cfg), TrainingError);
}

TEST(Evaluate, ReportsWeightedLossAndAccuracy) {
  const auto net = Network::zeros(default_layer_sizes());
  auto ds = two_clusters(2, 7);
  ds.weights = {1.0, 2.0, 1.0, 2.0};
  const auto e = evaluate(net, ds);
  EXPECT_NEAR(e.mean_loss, 1.5 * std::log(3.0), 1e-12);
  // a uniform distribution predicts the first class, which half the samples carry
  EXPECT_DOUBLE_EQ(e.accuracy, 0.5);
}
