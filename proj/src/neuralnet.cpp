#include "flowguard/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "flowguard/errors.hpp"

namespace flowguard {

namespace {

constexpr std::size_t kLayerCount = 4;
constexpr double kMinProbability = 1e-12;

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// out = W * in + b
std::vector<double> affine(const Matrix& w, const std::vector<double>& b, std::span<const double> in) {
  std::vector<double> out(b);
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* row = &w.data[r * w.cols];
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * in[c];
    out[r] += acc;
  }
  return out;
}

}  // namespace

Parameters Parameters::zeros_like(const Parameters& other) {
  Parameters p;
  for (const auto& w : other.weights) p.weights.emplace_back(w.rows, w.cols, 0.0);
  for (const auto& b : other.biases) p.biases.emplace_back(b.size(), 0.0);
  return p;
}

bool Parameters::same_shape(const Parameters& other) const {
  if (weights.size() != other.weights.size() || biases.size() != other.biases.size()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows != other.weights[l].rows || weights[l].cols != other.weights[l].cols) {
      return false;
    }
    if (weights[l].data.size() != other.weights[l].data.size()) return false;
  }
  for (std::size_t l = 0; l < biases.size(); ++l) {
    if (biases[l].size() != other.biases[l].size()) return false;
  }
  return true;
}

std::size_t Parameters::count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.data.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

std::vector<double> Parameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(count());
  for_each_block([&](const std::string&, std::span<const double> block) {
    flat.insert(flat.end(), block.begin(), block.end());
  });
  return flat;
}

void Parameters::scale(double factor) {
  for_each_block([&](const std::string&, std::span<double> block) {
    for (double& v : block) v *= factor;
  });
}

void Parameters::add(const Parameters& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t i = 0; i < weights[l].data.size(); ++i) {
      weights[l].data[i] += other.weights[l].data[i];
    }
    for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += other.biases[l][i];
  }
}

Network Network::zeros(std::vector<std::size_t> layer_sizes, double alpha) {
  Network net;
  net.layer_sizes = std::move(layer_sizes);
  net.alpha = alpha;
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    net.params.weights.emplace_back(net.layer_sizes[l + 1], net.layer_sizes[l], 0.0);
    net.params.biases.emplace_back(net.layer_sizes[l + 1], 0.0);
  }
  net.check_shape();
  return net;
}

Network Network::initialize(std::vector<std::size_t> layer_sizes, double alpha, std::uint64_t seed) {
  Network net = zeros(std::move(layer_sizes), alpha);
  std::mt19937_64 rng(seed);
  for (auto& w : net.params.weights) {
    const double limit = std::sqrt(6.0 / double(w.rows + w.cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : w.data) v = dist(rng);
  }
  return net;
}

void Network::check_shape() const {
  if (layer_sizes.size() != kLayerCount) {
    throw ShapeError("network must have 4 layers (input, two hidden, output), got " +
                     std::to_string(layer_sizes.size()));
  }
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw ShapeError("layer sizes must be positive");
  }
  if (layer_sizes.back() != kNumClasses) {
    throw ShapeError("output layer has " + std::to_string(layer_sizes.back()) +
                     " neurons but the taxonomy has " + std::to_string(kNumClasses) + " classes");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ShapeError("alpha must be finite and >= 0");
  if (params.weights.size() != kLayerCount - 1 || params.biases.size() != kLayerCount - 1) {
    throw ShapeError("parameter block count does not match layer count");
  }
  for (std::size_t l = 0; l + 1 < kLayerCount; ++l) {
    const auto& w = params.weights[l];
    if (w.rows != layer_sizes[l + 1] || w.cols != layer_sizes[l] ||
        w.data.size() != w.rows * w.cols) {
      throw ShapeError("weights[" + std::to_string(l) + "] does not chain " +
                       std::to_string(layer_sizes[l]) + " -> " + std::to_string(layer_sizes[l + 1]));
    }
    if (params.biases[l].size() != layer_sizes[l + 1]) {
      throw ShapeError("biases[" + std::to_string(l) + "] has wrong length");
    }
  }
}

std::vector<std::size_t> default_layer_sizes(std::size_t hidden1, std::size_t hidden2) {
  return {kNumFeatures, hidden1, hidden2, kNumClasses};
}

double leaky_relu(double x, double alpha) { return x >= 0.0 ? x : alpha * x; }

double leaky_relu_derivative(double x, double alpha) { return x >= 0.0 ? 1.0 : alpha; }

ClassDistribution ClassDistribution::from_probabilities(const std::array<double, kNumClasses>& p) {
  ClassDistribution d;
  d.p = p;
  d.predicted = static_cast<ClassLabel>(argmax(p));
  return d;
}

std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> p(z.size());
  if (z.empty()) return p;
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    p[j] = std::exp(z[j] - zmax);
    sum += p[j];
  }
  for (double& v : p) v /= sum;
  return p;
}

ClassDistribution softmax(const Logits& logits) {
  auto p = softmax(std::span<const double>(logits.z));
  std::array<double, kNumClasses> arr{};
  std::copy(p.begin(), p.end(), arr.begin());
  return ClassDistribution::from_probabilities(arr);
}

std::pair<ClassDistribution, ForwardCache> forward(const Network& net, std::span<const double> input) {
  net.check_shape();
  if (input.size() != net.input_size()) {
    throw ShapeError("input has " + std::to_string(input.size()) + " features, network expects " +
                     std::to_string(net.input_size()));
  }
  ForwardCache cache;
  cache.layer_sizes = net.layer_sizes;
  std::vector<double> a(input.begin(), input.end());
  const std::size_t last = net.params.weights.size() - 1;
  for (std::size_t l = 0; l <= last; ++l) {
    auto z = affine(net.params.weights[l], net.params.biases[l], a);
    cache.inputs.push_back(std::move(a));
    if (l < last) {
      a.resize(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) a[i] = leaky_relu(z[i], net.alpha);
    }
    cache.pre_activations.push_back(std::move(z));
  }
  cache.probabilities = softmax(cache.pre_activations.back());
  std::array<double, kNumClasses> p{};
  std::copy(cache.probabilities.begin(), cache.probabilities.end(), p.begin());
  return {ClassDistribution::from_probabilities(p), std::move(cache)};
}

std::pair<ClassDistribution, ForwardCache> forward(const Network& net, const FeatureVector& features) {
  return forward(net, std::span<const double>(features.values));
}

ClassDistribution predict(const Network& net, std::span<const double> input) {
  return forward(net, input).first;
}

ClassDistribution predict(const Network& net, const FeatureVector& features) {
  return forward(net, features).first;
}

double loss(const ClassDistribution& dist, ClassLabel target, double weight) {
  return weight * -std::log(std::max(dist.probability(target), kMinProbability));
}

Parameters backward(const Network& net, const ForwardCache& cache, ClassLabel target, double weight) {
  net.check_shape();
  const std::size_t layers = net.params.weights.size();
  if (cache.layer_sizes != net.layer_sizes || cache.inputs.size() != layers ||
      cache.pre_activations.size() != layers || cache.probabilities.size() != net.output_size()) {
    throw ShapeError("forward cache does not match the network");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (cache.inputs[l].size() != net.layer_sizes[l] ||
        cache.pre_activations[l].size() != net.layer_sizes[l + 1]) {
      throw ShapeError("forward cache layer " + std::to_string(l) + " has wrong dimensions");
    }
  }

  Parameters grads = Parameters::zeros_like(net.params);

  // softmax + cross-entropy: dL/dz = (p - onehot) * weight
  std::vector<double> delta(cache.probabilities);
  delta[static_cast<std::size_t>(to_index(target))] -= 1.0;
  for (double& d : delta) d *= weight;

  for (std::size_t l = layers; l-- > 0;) {
    const auto& in = cache.inputs[l];
    auto& gw = grads.weights[l];
    for (std::size_t r = 0; r < gw.rows; ++r) {
      for (std::size_t c = 0; c < gw.cols; ++c) gw(r, c) = delta[r] * in[c];
      grads.biases[l][r] = delta[r];
    }
    if (l == 0) break;
    const auto& w = net.params.weights[l];
    const auto& z_prev = cache.pre_activations[l - 1];
    std::vector<double> next(w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      for (std::size_t c = 0; c < w.cols; ++c) next[c] += w(r, c) * delta[r];
    }
    for (std::size_t c = 0; c < next.size(); ++c) next[c] *= leaky_relu_derivative(z_prev[c], net.alpha);
    delta = std::move(next);
  }
  return grads;
}

}  // namespace flowguard
