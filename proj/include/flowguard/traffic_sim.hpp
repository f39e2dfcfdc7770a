#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "flowguard/etl.hpp"
#include "flowguard/flow_model.hpp"

namespace flowguard {

/// Mean and spread of a normally distributed attribute; draws are clamped to
/// the attribute's valid range.
struct Spread {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Per-class generator parameters. Defaults model the lab scenarios: regular
/// web/curl/ping users, a failing web service, and a flooding DoS tool.
struct ScenarioParams {
  Spread duration;           // seconds
  Spread tcp_rate;
  Spread tcp_ack_cnt_asym;   // sign randomized when symmetric_asym is set
  Spread pkt_asym;
  Spread byt_asym;
  Spread per_ps;
  Spread tcp_seq_fcnt_rate;
  Spread tcp_ack_fcnt_rate;
  Spread est_bw_per_flow;    // bytes/second
  bool symmetric_asym = false;
  double ping_fraction = 0.0;    // share of ICMP echo flows
  double external_fraction = 0.0;  // share of public destination addresses
  int min_ttl_low = 56;   // ip_min_ttl drawn uniformly from [min_ttl_low, min_ttl_high]
  int min_ttl_high = 64;
  int ttl_spread_max = 1;  // ip_max_ttl - ip_min_ttl drawn uniformly from [0, ttl_spread_max]
  std::vector<std::uint64_t> tcp_stat_choices;
  std::vector<std::uint64_t> tcp_flag_choices;
  std::vector<std::uint64_t> tcp_anomaly_choices;
  std::vector<std::uint64_t> tcp_option_choices;
  std::vector<std::uint64_t> tcp_state_choices;

  static ScenarioParams defaults_for(ClassLabel kind);
};

struct ScenarioSpec {
  ClassLabel kind = ClassLabel::normal_traffic;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  ScenarioParams params = ScenarioParams::defaults_for(ClassLabel::normal_traffic);
  std::int64_t first_flow_index = 1;

  static ScenarioSpec with_defaults(ClassLabel kind, std::size_t count, std::uint64_t seed);
};

/// Deterministic per seed; every record passes validate_flow.
std::vector<LabeledFlow> generate_scenario(const ScenarioSpec& spec);

/// Balanced three-class corpus, run through build_dataset and shuffled by seed.
Dataset generate_corpus(std::size_t per_class_count, std::uint64_t seed,
                        const MetricsCollection& metrics = MetricsCollection::defaults(),
                        const EtlOptions& options = {});

/// The raw labeled flows generate_corpus is built from (unshuffled, class by class).
std::vector<LabeledFlow> generate_corpus_flows(std::size_t per_class_count, std::uint64_t seed);

}  // namespace flowguard
