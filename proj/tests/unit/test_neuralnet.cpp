#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "flowguard/errors.hpp"
#include "flowguard/neuralnet.hpp"
#include "support/oracles.hpp"

using namespace flowguard;

namespace {

std::vector<double> random_input(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), 1e-7});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST(LeakyRelu, Branches) {
  EXPECT_DOUBLE_EQ(leaky_relu(2.0, 0.01), 2.0);
  EXPECT_DOUBLE_EQ(leaky_relu(-1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(leaky_relu(-2.0, 0.01), -0.02);
  EXPECT_DOUBLE_EQ(leaky_relu(0.0, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(leaky_relu_derivative(0.0, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(leaky_relu_derivative(-1e-9, 0.3), 0.3);
  EXPECT_DOUBLE_EQ(leaky_relu_derivative(5.0, 0.3), 1.0);
}

TEST(Softmax, ZeroLogitsAreUniform) {
  const auto p = softmax(std::vector<double>{0, 0, 0});
  for (double v : p) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, MatchesHighPrecisionOracle) {
  const std::vector<double> z{1, 0, 0};
  const auto p = softmax(z);
  EXPECT_NEAR(p[0], 0.576117, 1e-6);
  EXPECT_NEAR(p[1], 0.211942, 1e-6);
  EXPECT_NEAR(p[2], 0.211942, 1e-6);
  const auto ref = oracle::softmax(z);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], double(ref[i]), 1e-15);
}

TEST(Softmax, LargeShiftsDoNotOverflow) {
  const auto base = softmax(std::vector<double>{1000, 0, 0});
  for (double c : {-5000.0, -1.0, 0.0, 3.5, 1e4}) {
    const auto p = softmax(std::vector<double>{c + 1000, c, c});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], base[i], 1e-12) << c;
  }
  EXPECT_NEAR(base[0], 1.0, 1e-15);
}

TEST(Softmax, ArgmaxMatchesLogitArgmax) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    Logits l{{d(rng), d(rng), d(rng)}};
    const auto dist = softmax(l);
    const auto zmax = std::max_element(l.z.begin(), l.z.end()) - l.z.begin();
    EXPECT_EQ(to_index(dist.predicted), zmax);
  }
}

TEST(Forward, ZeroNetworkIsUniform) {
  const auto net = Network::zeros(default_layer_sizes());
  std::mt19937_64 rng(1);
  const auto d = predict(net, random_input(rng, kNumFeatures));
  for (double v : d.p) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Forward, HandSetToyNetwork) {
  // 1-1-1-3: h1 = leaky(2x - 1), h2 = leaky(-3 h1 + 0.5), z = (h2, 0.2, -h2)
  auto net = Network::zeros({1, 1, 1, 3}, 0.01);
  net.params.weights[0](0, 0) = 2.0;
  net.params.biases[0][0] = -1.0;
  net.params.weights[1](0, 0) = -3.0;
  net.params.biases[1][0] = 0.5;
  net.params.weights[2](0, 0) = 1.0;
  net.params.weights[2](2, 0) = -1.0;
  net.params.biases[2][1] = 0.2;
  const auto [d, cache] = forward(net, std::vector<double>{0.25});
  // h1 = -0.5 -> -0.005, h2 = 0.515, logits (0.515, 0.2, -0.515)
  EXPECT_NEAR(cache.pre_activations[0][0], -0.5, 1e-15);
  EXPECT_NEAR(cache.pre_activations[1][0], 0.515, 1e-15);
  EXPECT_NEAR(d.p[0], 0.47920356333159597, 1e-14);
  EXPECT_NEAR(d.p[1], 0.34971742902948605, 1e-14);
  EXPECT_NEAR(d.p[2], 0.17107900763891798, 1e-14);
  EXPECT_EQ(d.predicted, ClassLabel::normal_traffic);
}

TEST(Forward, MatchesIndependentForwardPass) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto net = Network::initialize(default_layer_sizes(8, 8), 0.05, 100 + t);
    const auto x = random_input(rng, kNumFeatures);
    const auto d = predict(net, x);
    const auto ref = oracle::forward(net, x);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(d.p[k], double(ref[k]), 1e-14);
  }
}

TEST(Forward, WrongInputWidthIsShapeError) {
  const auto net = Network::zeros(default_layer_sizes());
  EXPECT_THROW(forward(net, std::vector<double>(21, 0.5)), ShapeError);
}

TEST(Forward, PredictEqualsForwardDistribution) {
  const auto net = Network::initialize(default_layer_sizes(), 0.01, 4);
  std::mt19937_64 rng(4);
  const auto x = random_input(rng, kNumFeatures);
  EXPECT_EQ(predict(net, x), forward(net, x).first);
}

TEST(Network, ShapeRules) {
  EXPECT_THROW(Network::zeros({22, 8, 3}), ShapeError);
  EXPECT_THROW(Network::zeros({22, 8, 8, 4}), ShapeError);
  EXPECT_THROW(Network::zeros({22, 0, 8, 3}), ShapeError);
  const auto net = Network::initialize({22, 8, 8, 3}, 0.01, 1);
  EXPECT_EQ(net.params.count(), 22u * 8 + 8 + 8 * 8 + 8 + 8 * 3 + 3);
  for (double b : net.params.biases[0]) EXPECT_EQ(b, 0.0);
  const double limit = std::sqrt(6.0 / 30.0);
  for (double w : net.params.weights[0].data) EXPECT_LE(std::abs(w), limit);
  EXPECT_EQ(Network::initialize({22, 8, 8, 3}, 0.01, 1), net);
  EXPECT_NE(Network::initialize({22, 8, 8, 3}, 0.01, 2), net);
}

TEST(Loss, Examples) {
  const auto certain = ClassDistribution::from_probabilities({0.0, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(loss(certain, ClassLabel::dos_attack, 1.0), 0.0);
  const auto uniform = ClassDistribution::from_probabilities({1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_NEAR(loss(uniform, ClassLabel::normal_traffic, 1.0), std::log(3.0), 1e-15);
  EXPECT_NEAR(loss(uniform, ClassLabel::normal_traffic, 1.0), 1.098612, 1e-6);
  EXPECT_NEAR(loss(uniform, ClassLabel::normal_traffic, 2.0), 2.0 * std::log(3.0), 1e-15);
  // probability floor keeps the loss finite
  EXPECT_NEAR(loss(certain, ClassLabel::normal_traffic, 1.0), -std::log(1e-12), 1e-9);
}

TEST(Backward, ZeroLogitOutputDelta) {
  const auto net = Network::zeros(default_layer_sizes());
  const auto [d, cache] = forward(net, std::vector<double>(kNumFeatures, 0.5));
  const auto g = backward(net, cache, ClassLabel::normal_traffic, 1.0);
  // output bias gradient equals the output delta p - onehot
  EXPECT_NEAR(g.biases[2][0], -2.0 / 3.0, 1e-15);
  EXPECT_NEAR(g.biases[2][1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(g.biases[2][2], 1.0 / 3.0, 1e-15);
}

TEST(Backward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 10; ++t) {
    const auto net = Network::initialize({22, 8, 8, 3}, 0.01, 500 + t);
    const auto x = random_input(rng, kNumFeatures);
    const auto target = label_from_index(t % 3).value();
    const double weight = 0.5 + t * 0.25;
    const auto [d, cache] = forward(net, x);
    const auto analytic = backward(net, cache, target, weight).flatten();
    const auto numeric = oracle::numeric_gradient(net, x, to_index(target), weight, 1e-5);
    EXPECT_LT(max_rel_error(analytic, numeric), 1e-4) << "trial " << t;
  }
}

TEST(Backward, LinearInSampleWeight) {
  const auto net = Network::initialize(default_layer_sizes(), 0.01, 6);
  std::mt19937_64 rng(6);
  const auto [d, cache] = forward(net, random_input(rng, kNumFeatures));
  const auto full = backward(net, cache, ClassLabel::dos_attack, 1.0).flatten();
  const auto half = backward(net, cache, ClassLabel::dos_attack, 0.5).flatten();
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_DOUBLE_EQ(half[i], 0.5 * full[i]);
}

TEST(Backward, MismatchedCacheIsShapeError) {
  const auto small = Network::initialize({22, 8, 8, 3}, 0.01, 1);
  const auto big = Network::initialize({22, 16, 16, 3}, 0.01, 1);
  const auto [d, cache] = forward(small, std::vector<double>(kNumFeatures, 0.1));
  EXPECT_THROW(backward(big, cache, ClassLabel::normal_traffic, 1.0), ShapeError);
}
