#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flowguard/flow_model.hpp"

namespace flowguard {

inline constexpr double kDefaultAlpha = 0.01;
inline constexpr std::size_t kDefaultHidden = 16;

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Weights and biases of every affine layer. weights[l] maps layer l to l+1 and
/// has shape (layer_sizes[l+1], layer_sizes[l]). Gradients and ADAM moments
/// use the same container.
struct Parameters {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static Parameters zeros_like(const Parameters& other);
  bool same_shape(const Parameters& other) const;
  std::size_t count() const;
  /// Visits every parameter block as (name, span). Names look like "weights[1]".
  template <typename F>
  void for_each_block(F&& f);
  template <typename F>
  void for_each_block(F&& f) const;
  std::vector<double> flatten() const;
  void scale(double factor);
  void add(const Parameters& other);

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

/// Four-layer feed-forward classifier: input, two leaky-ReLU hidden layers,
/// softmax output over the incident taxonomy.
struct Network {
  std::vector<std::size_t> layer_sizes;
  Parameters params;
  double alpha = kDefaultAlpha;
  std::string dataset_checksum;  // training data the parameters came from; may be empty

  /// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
  static Network initialize(std::vector<std::size_t> layer_sizes, double alpha, std::uint64_t seed);
  static Network zeros(std::vector<std::size_t> layer_sizes, double alpha = kDefaultAlpha);

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  /// Throws ShapeError if the topology or parameter shapes are inconsistent.
  void check_shape() const;

  friend bool operator==(const Network&, const Network&) = default;
};

std::vector<std::size_t> default_layer_sizes(std::size_t hidden1 = kDefaultHidden,
                                             std::size_t hidden2 = kDefaultHidden);

/// x for x >= 0, alpha*x otherwise. alpha = 0 is the plain max(x, 0).
double leaky_relu(double x, double alpha);
/// 1 for x >= 0, alpha for x < 0.
double leaky_relu_derivative(double x, double alpha);

struct Logits {
  std::array<double, kNumClasses> z{};
};

struct ClassDistribution {
  std::array<double, kNumClasses> p{};
  ClassLabel predicted = ClassLabel::normal_traffic;

  double probability(ClassLabel label) const { return p[static_cast<std::size_t>(to_index(label))]; }
  static ClassDistribution from_probabilities(const std::array<double, kNumClasses>& p);

  friend bool operator==(const ClassDistribution&, const ClassDistribution&) = default;
};

/// Max-subtracted softmax over an arbitrary logit vector.
std::vector<double> softmax(std::span<const double> z);
ClassDistribution softmax(const Logits& logits);

/// Intermediate values retained by forward() for backward().
struct ForwardCache {
  std::vector<std::size_t> layer_sizes;
  std::vector<std::vector<double>> inputs;           // input to each affine layer
  std::vector<std::vector<double>> pre_activations;  // affine output of each layer
  std::vector<double> probabilities;
};

std::pair<ClassDistribution, ForwardCache> forward(const Network& net, std::span<const double> input);
std::pair<ClassDistribution, ForwardCache> forward(const Network& net, const FeatureVector& features);

ClassDistribution predict(const Network& net, std::span<const double> input);
ClassDistribution predict(const Network& net, const FeatureVector& features);

/// weight * -log(p_target), p clamped below at 1e-12.
double loss(const ClassDistribution& dist, ClassLabel target, double weight);

/// Exact gradients of loss() with respect to every weight and bias.
Parameters backward(const Network& net, const ForwardCache& cache, ClassLabel target, double weight);

// ---------------------------------------------------------------------------
// template definitions

template <typename F>
void Parameters::for_each_block(F&& f) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    f("weights[" + std::to_string(l) + "]", std::span<double>(weights[l].data));
    f("biases[" + std::to_string(l) + "]", std::span<double>(biases[l]));
  }
}

template <typename F>
void Parameters::for_each_block(F&& f) const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    f("weights[" + std::to_string(l) + "]", std::span<const double>(weights[l].data));
    f("biases[" + std::to_string(l) + "]", std::span<const double>(biases[l]));
  }
}

}  // namespace flowguard
