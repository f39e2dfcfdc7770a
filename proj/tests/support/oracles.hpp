#pragma once

// Reference computations written independently of the library code paths:
// long-double arithmetic, no max-subtraction, no shared helpers.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "flowguard/flow_model.hpp"
#include "flowguard/neuralnet.hpp"

namespace oracle {

inline std::vector<long double> softmax(const std::vector<double>& z) {
  long double sum = 0.0L;
  std::vector<long double> e(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(z[i]));
    sum += e[i];
  }
  for (auto& v : e) v /= sum;
  return e;
}

inline long double leaky(long double x, long double alpha) { return x >= 0 ? x : alpha * x; }

// Plain nested-loop forward pass returning class probabilities.
inline std::vector<long double> forward(const flowguard::Network& net, const std::vector<double>& input) {
  std::vector<long double> a(input.begin(), input.end());
  const std::size_t layers = net.params.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& w = net.params.weights[l];
    const auto& b = net.params.biases[l];
    std::vector<long double> z(w.rows, 0.0L);
    for (std::size_t r = 0; r < w.rows; ++r) {
      long double acc = b[r];
      for (std::size_t c = 0; c < w.cols; ++c) acc += static_cast<long double>(w.data[r * w.cols + c]) * a[c];
      z[r] = acc;
    }
    if (l + 1 < layers) {
      for (auto& v : z) v = leaky(v, net.alpha);
      a = std::move(z);
    } else {
      long double sum = 0.0L;
      for (auto& v : z) {
        v = std::exp(v);
        sum += v;
      }
      for (auto& v : z) v /= sum;
      return z;
    }
  }
  return a;
}

inline long double loss(const flowguard::Network& net, const std::vector<double>& input, int target,
                        long double weight) {
  const auto p = forward(net, input);
  return -weight * std::log(p[static_cast<std::size_t>(target)]);
}

// Central finite difference of the loss w.r.t. every parameter, in the order
// weights[0..], biases[0..] per layer (matching Parameters::flatten).
inline std::vector<double> numeric_gradient(flowguard::Network net, const std::vector<double>& input, int target,
                                            double weight, double step) {
  std::vector<double> out;
  auto probe = [&](double& slot) {
    const double saved = slot;
    slot = saved + step;
    const long double up = loss(net, input, target, weight);
    slot = saved - step;
    const long double down = loss(net, input, target, weight);
    slot = saved;
    out.push_back(static_cast<double>((up - down) / (2.0L * step)));
  };
  for (std::size_t l = 0; l < net.params.weights.size(); ++l) {
    for (auto& v : net.params.weights[l].data) probe(v);
    for (auto& v : net.params.biases[l]) probe(v);
  }
  return out;
}

// Random record inside every documented attribute range.
inline flowguard::FlowRecord random_valid_flow(std::mt19937_64& rng, std::int64_t index) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto bits = [&](int width) {
    return std::uniform_int_distribution<std::uint64_t>(0, (std::uint64_t{1} << width) - 1)(rng);
  };
  flowguard::FlowRecord r;
  r.flow_index = index;
  r.duration = unit(rng) < 0.1 ? 5000.0 * unit(rng) : 3600.0 * unit(rng);
  r.ip_destination = flowguard::Ipv4{static_cast<std::uint32_t>(rng())};
  r.src_port = integer(0, 65535);
  r.dst_port = integer(0, 65535);
  r.l4_protocol = integer(0, 255);
  r.dst_port_class = flowguard::port_class_for(r.dst_port);
  r.tcp_rate = unit(rng);
  r.tcp_ack_cnt_asym = sym(rng);
  r.pkt_asym = sym(rng);
  r.byt_asym = sym(rng);
  r.tcp_stat = bits(flowguard::kTcpStatBits);
  r.ip_min_ttl = integer(0, 255);
  r.ip_max_ttl = integer(r.ip_min_ttl, 255);
  r.per_ps = unit(rng) < 0.1 ? 2e6 * unit(rng) : 1e6 * unit(rng);
  r.tcp_seq_fcnt_rate = unit(rng);
  r.tcp_ack_fcnt_rate = unit(rng);
  r.est_bw_per_flow = unit(rng) < 0.1 ? 5e9 * unit(rng) : 1e9 * unit(rng);
  r.tcp_aggr_flags = bits(flowguard::kTcpAggrFlagsBits);
  r.tcp_aggr_anomaly = bits(flowguard::kTcpAggrAnomalyBits);
  r.tcp_aggr_options = bits(flowguard::kTcpAggrOptionsBits);
  r.tcp_states = bits(flowguard::kTcpStatesBits);
  return r;
}

// A plain HTTPS flow to an internal server.
inline flowguard::FlowRecord benign_flow(std::int64_t index = 1) {
  flowguard::FlowRecord r;
  r.flow_index = index;
  r.duration = 12.5;
  r.ip_destination = *flowguard::Ipv4::parse("192.168.1.5");
  r.src_port = 51000;
  r.dst_port = 443;
  r.l4_protocol = 6;
  r.dst_port_class = flowguard::PortClass::well_known;
  r.tcp_rate = 0.9;
  r.tcp_ack_cnt_asym = 0.05;
  r.pkt_asym = -0.1;
  r.byt_asym = -0.4;
  r.tcp_stat = 0x01;
  r.ip_min_ttl = 60;
  r.ip_max_ttl = 61;
  r.per_ps = 35.0;
  r.tcp_seq_fcnt_rate = 0.01;
  r.tcp_ack_fcnt_rate = 0.0;
  r.est_bw_per_flow = 150000.0;
  r.tcp_aggr_flags = 0x1b;
  r.tcp_aggr_anomaly = 0x0000;
  r.tcp_aggr_options = 0x001e;
  r.tcp_states = 0x01;
  return r;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("flowguard-test-" + name + "-" +
                                                       std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
