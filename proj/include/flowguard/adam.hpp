#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "flowguard/neuralnet.hpp"

namespace flowguard {

struct AdamHyperparameters {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamHyperparameters&, const AdamHyperparameters&) = default;
};

struct AdamState {
  Parameters first_moment;
  Parameters second_moment;
  std::uint64_t step_count = 0;
  AdamHyperparameters hyper;

  static AdamState for_network(const Network& net, AdamHyperparameters hyper = {});
};

/// One bias-corrected ADAM step over a flat parameter block. `step` is the
/// 1-based update count used for bias correction. Moments are updated in place.
void adam_step(const AdamHyperparameters& hyper, std::uint64_t step, std::span<double> params,
               std::span<const double> grads, std::span<double> first_moment,
               std::span<double> second_moment);

/// Applies one ADAM update to every parameter block of the network.
/// Throws TrainingError naming the block if any gradient is non-finite.
std::pair<Network, AdamState> adam_update(Network net, const Parameters& grads, AdamState state);

}  // namespace flowguard
