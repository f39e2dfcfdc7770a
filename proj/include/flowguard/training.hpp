#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flowguard/adam.hpp"
#include "flowguard/neuralnet.hpp"

namespace flowguard {

enum class LossKind { weighted_cross_entropy };

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 32;  // clamped to the training-split size
  std::uint64_t seed = 42;
  LossKind loss = LossKind::weighted_cross_entropy;
  double validation_fraction = 0.0;  // in [0, 1)
  AdamHyperparameters adam;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;      // mean weighted loss over the training split
  double train_accuracy = 0.0;  // unweighted argmax accuracy
  std::optional<double> validation_loss;
  std::optional<double> validation_accuracy;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t train_samples = 0;
  std::size_t validation_samples = 0;
  std::uint64_t optimizer_steps = 0;
  std::string dataset_checksum;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

struct Evaluation {
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const Network& net, const Dataset& data);

/// Mini-batch ADAM training. Shuffling and the validation split are driven by
/// config.seed only, so identical (net, data, config) give identical results.
std::pair<Network, TrainReport> train(Network net, const Dataset& data, const TrainConfig& config);

}  // namespace flowguard
