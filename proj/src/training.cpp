#include "flowguard/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "flowguard/dataset_io.hpp"
#include "flowguard/errors.hpp"

namespace flowguard {

namespace {

// Fisher-Yates with a plain modulo draw; independent of the standard
// library's distribution implementations.
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

Evaluation evaluate_subset(const Network& net, const Dataset& data,
                           const std::vector<std::size_t>& subset) {
  Evaluation e;
  if (subset.empty()) return e;
  std::size_t correct = 0;
  double total = 0.0;
  for (std::size_t i : subset) {
    const auto dist = predict(net, data.features[i]);
    total += loss(dist, data.labels[i], data.weights[i]);
    if (dist.predicted == data.labels[i]) ++correct;
  }
  e.mean_loss = total / double(subset.size());
  e.accuracy = double(correct) / double(subset.size());
  return e;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw ValidationError("batch_size", "batch_size must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ValidationError("validation_fraction", "validation_fraction must be within [0,1)");
  }
  if (!(adam.learning_rate > 0.0) || !(adam.beta1 > 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 > 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0)) {
    throw ValidationError("adam", "ADAM hyperparameters out of range");
  }
}

Evaluation evaluate(const Network& net, const Dataset& data) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  return evaluate_subset(net, data, all);
}

std::pair<Network, TrainReport> train(Network net, const Dataset& data, const TrainConfig& config) {
  config.validate();
  net.check_shape();
  if (data.empty()) throw EmptyDatasetError("cannot train on an empty dataset");
  if (!data.consistent()) throw ShapeError("dataset sequences are inconsistent");
  if (net.input_size() != kNumFeatures) {
    throw ShapeError("network input width " + std::to_string(net.input_size()) +
                     " does not match the feature width");
  }

  TrainReport report;
  if (config.epochs == 0) {
    report.train_samples = data.size();
    return {std::move(net), std::move(report)};
  }
  report.dataset_checksum = dataset_checksum(data);

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<std::size_t> validation;
  if (config.validation_fraction > 0.0) {
    shuffle_indices(order, rng);
    auto n_val = static_cast<std::size_t>(std::floor(config.validation_fraction * double(data.size())));
    n_val = std::min(n_val, data.size() - 1);
    validation.assign(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
    order.resize(order.size() - n_val);
  }
  std::vector<std::size_t> training = order;
  report.train_samples = training.size();
  report.validation_samples = validation.size();

  const std::size_t batch = std::min(config.batch_size, training.size());
  AdamState state = AdamState::for_network(net, config.adam);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_indices(training, rng);
    double epoch_loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < training.size(); start += batch) {
      const std::size_t end = std::min(start + batch, training.size());
      Parameters grads = Parameters::zeros_like(net.params);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = training[k];
        auto [dist, cache] = forward(net, data.features[i]);
        const double l = loss(dist, data.labels[i], data.weights[i]);
        if (!std::isfinite(l)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", sample " +
                              std::to_string(data.features[i].flow_index));
        }
        epoch_loss += l;
        if (dist.predicted == data.labels[i]) ++correct;
        grads.add(backward(net, cache, data.labels[i], data.weights[i]));
      }
      grads.scale(1.0 / double(end - start));
      std::tie(net, state) = adam_update(std::move(net), grads, std::move(state));
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / double(training.size());
    stats.train_accuracy = double(correct) / double(training.size());
    if (!std::isfinite(stats.train_loss)) {
      throw TrainingError("non-finite mean loss at epoch " + std::to_string(epoch));
    }
    if (!validation.empty()) {
      const auto v = evaluate_subset(net, data, validation);
      stats.validation_loss = v.mean_loss;
      stats.validation_accuracy = v.accuracy;
    }
    report.epochs.push_back(stats);
  }
  report.optimizer_steps = state.step_count;
  net.dataset_checksum = report.dataset_checksum;
  return {std::move(net), std::move(report)};
}

}  // namespace flowguard
