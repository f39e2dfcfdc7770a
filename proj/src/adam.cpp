#include "flowguard/adam.hpp"

#include <cmath>
#include <vector>

#include "flowguard/errors.hpp"

namespace flowguard {

AdamState AdamState::for_network(const Network& net, AdamHyperparameters hyper) {
  AdamState s;
  s.first_moment = Parameters::zeros_like(net.params);
  s.second_moment = Parameters::zeros_like(net.params);
  s.hyper = hyper;
  return s;
}

void adam_step(const AdamHyperparameters& hyper, std::uint64_t step, std::span<double> params,
               std::span<const double> grads, std::span<double> first_moment,
               std::span<double> second_moment) {
  if (grads.size() != params.size() || first_moment.size() != params.size() ||
      second_moment.size() != params.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment sizes differ");
  }
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    first_moment[i] = hyper.beta1 * first_moment[i] + (1.0 - hyper.beta1) * g;
    second_moment[i] = hyper.beta2 * second_moment[i] + (1.0 - hyper.beta2) * g * g;
    const double m_hat = first_moment[i] / correction1;
    const double v_hat = second_moment[i] / correction2;
    params[i] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
  }
}

std::pair<Network, AdamState> adam_update(Network net, const Parameters& grads, AdamState state) {
  if (!grads.same_shape(net.params) || !state.first_moment.same_shape(net.params) ||
      !state.second_moment.same_shape(net.params)) {
    throw ShapeError("adam_update: gradient or moment shapes do not match the network");
  }
  grads.for_each_block([](const std::string& name, std::span<const double> block) {
    for (double g : block) {
      if (!std::isfinite(g)) throw TrainingError("non-finite gradient in " + name);
    }
  });

  const std::uint64_t step = state.step_count + 1;
  const auto blocks = net.params.weights.size();
  for (std::size_t l = 0; l < blocks; ++l) {
    adam_step(state.hyper, step, net.params.weights[l].data, grads.weights[l].data,
              state.first_moment.weights[l].data, state.second_moment.weights[l].data);
    adam_step(state.hyper, step, net.params.biases[l], grads.biases[l],
              state.first_moment.biases[l], state.second_moment.biases[l]);
  }
  state.step_count = step;
  return {std::move(net), std::move(state)};
}

}  // namespace flowguard
