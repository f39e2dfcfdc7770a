#include "flowguard/traffic_sim.hpp"

#include <algorithm>
#include <random>

#include "flowguard/errors.hpp"

namespace flowguard {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double normal(const Spread& s, double lo, double hi) {
    if (s.stddev <= 0.0) return std::clamp(s.mean, lo, hi);
    std::normal_distribution<double> d(s.mean, s.stddev);
    return std::clamp(d(rng_), lo, hi);
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  bool chance(double p) { return uniform() < p; }

  std::uint64_t pick(const std::vector<std::uint64_t>& choices) {
    if (choices.empty()) return 0;
    return choices[static_cast<std::size_t>(integer(0, static_cast<int>(choices.size()) - 1))];
  }

  double signed_asym(const Spread& s, bool symmetric) {
    const double magnitude = normal(s, -1.0, 1.0);
    return symmetric && chance(0.5) ? -magnitude : magnitude;
  }

 private:
  std::mt19937_64 rng_;
};

constexpr std::uint32_t kLabServer = (10u << 24) | 10u;  // 10.0.0.10

Ipv4 public_address(Sampler& s) {
  // 8.0.0.0/8 .. 99.0.0.0/8 contain no private ranges
  const auto a = static_cast<std::uint32_t>(s.integer(8, 99));
  const auto rest = static_cast<std::uint32_t>(s.integer(0, 0xFFFFFF));
  return Ipv4{(a << 24) | rest};
}

}  // namespace

ScenarioParams ScenarioParams::defaults_for(ClassLabel kind) {
  ScenarioParams p;
  switch (kind) {
    case ClassLabel::normal_traffic:
      p.duration = {20.0, 15.0};
      p.tcp_rate = {0.9, 0.05};
      p.tcp_ack_cnt_asym = {0.0, 0.1};
      p.pkt_asym = {0.0, 0.1};
      p.byt_asym = {-0.4, 0.2};
      p.per_ps = {40.0, 20.0};
      p.tcp_seq_fcnt_rate = {0.005, 0.005};
      p.tcp_ack_fcnt_rate = {0.005, 0.005};
      p.est_bw_per_flow = {2e5, 1e5};
      p.ping_fraction = 0.1;
      p.external_fraction = 0.3;
      p.min_ttl_low = 56;
      p.min_ttl_high = 64;
      p.ttl_spread_max = 1;
      p.tcp_stat_choices = {0x00, 0x01};
      p.tcp_flag_choices = {0x1b, 0x1a, 0x19};
      p.tcp_anomaly_choices = {0x0000, 0x0000, 0x0001};
      p.tcp_option_choices = {0x001e, 0x000e};
      p.tcp_state_choices = {0x01, 0x00};
      break;
    case ClassLabel::service_incident:
      p.duration = {30.0, 10.0};
      p.tcp_rate = {0.85, 0.08};
      p.tcp_ack_cnt_asym = {0.5, 0.2};
      p.pkt_asym = {0.6, 0.2};
      p.byt_asym = {0.7, 0.2};
      p.per_ps = {2.0, 1.0};
      p.tcp_seq_fcnt_rate = {0.35, 0.1};
      p.tcp_ack_fcnt_rate = {0.3, 0.1};
      p.est_bw_per_flow = {2e3, 1e3};
      p.external_fraction = 0.0;
      p.min_ttl_low = 56;
      p.min_ttl_high = 64;
      p.ttl_spread_max = 2;
      p.tcp_stat_choices = {0x03, 0x07};
      p.tcp_flag_choices = {0x16, 0x06, 0x14};
      p.tcp_anomaly_choices = {0x0100, 0x0300, 0x0140};
      p.tcp_option_choices = {0x001e, 0x000e};
      p.tcp_state_choices = {0x0b, 0x0f, 0x0d};
      break;
    case ClassLabel::dos_attack:
      p.duration = {0.2, 0.1};
      p.tcp_rate = {0.98, 0.02};
      p.tcp_ack_cnt_asym = {0.95, 0.04};
      p.pkt_asym = {0.95, 0.04};
      p.byt_asym = {0.9, 0.05};
      p.symmetric_asym = true;
      p.per_ps = {9e5, 1.5e5};
      p.tcp_seq_fcnt_rate = {0.05, 0.03};
      p.tcp_ack_fcnt_rate = {0.05, 0.03};
      p.est_bw_per_flow = {8e8, 1.5e8};
      p.external_fraction = 0.0;
      p.min_ttl_low = 30;
      p.min_ttl_high = 64;
      p.ttl_spread_max = 64;
      p.tcp_stat_choices = {0x0f, 0x1f};
      p.tcp_flag_choices = {0x02, 0x12};
      p.tcp_anomaly_choices = {0x0001, 0x0003, 0x0801};
      p.tcp_option_choices = {0x0000, 0x0002};
      p.tcp_state_choices = {0x02, 0x06};
      break;
  }
  return p;
}

ScenarioSpec ScenarioSpec::with_defaults(ClassLabel kind, std::size_t count, std::uint64_t seed) {
  ScenarioSpec s;
  s.kind = kind;
  s.count = count;
  s.seed = seed;
  s.params = ScenarioParams::defaults_for(kind);
  return s;
}

std::vector<LabeledFlow> generate_scenario(const ScenarioSpec& spec) {
  if (spec.count == 0) throw ValidationError("count", "scenario count must be at least 1");
  const auto& p = spec.params;
  Sampler s(spec.seed);
  std::vector<LabeledFlow> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    FlowRecord r;
    r.flow_index = spec.first_flow_index + static_cast<std::int64_t>(i);
    const bool ping = s.chance(p.ping_fraction);
    r.ip_destination = s.chance(p.external_fraction) ? public_address(s) : Ipv4{kLabServer};
    r.duration = s.normal(p.duration, 0.001, 3600.0);
    r.per_ps = s.normal(p.per_ps, 0.1, 1e6);
    r.est_bw_per_flow = s.normal(p.est_bw_per_flow, 10.0, 1e9);

    const int min_ttl = s.integer(p.min_ttl_low, p.min_ttl_high);
    r.ip_min_ttl = min_ttl;
    r.ip_max_ttl = std::min(255, min_ttl + s.integer(0, p.ttl_spread_max));

    if (ping) {
      r.l4_protocol = 1;
      r.src_port = 0;
      r.dst_port = 0;
      r.tcp_rate = 0.0;
      r.tcp_ack_cnt_asym = 0.0;
      r.pkt_asym = s.normal({0.0, 0.05}, -1.0, 1.0);
      r.byt_asym = r.pkt_asym;
    } else {
      r.l4_protocol = 6;
      r.src_port = spec.kind == ClassLabel::dos_attack ? s.integer(1024, 65535) : s.integer(49152, 65535);
      r.dst_port = s.chance(0.5) ? 80 : 443;
      if (spec.kind == ClassLabel::dos_attack) r.dst_port = 80;
      r.tcp_rate = s.normal(p.tcp_rate, 0.0, 1.0);
      r.tcp_ack_cnt_asym = s.signed_asym(p.tcp_ack_cnt_asym, p.symmetric_asym);
      r.pkt_asym = s.signed_asym(p.pkt_asym, p.symmetric_asym);
      r.byt_asym = s.signed_asym(p.byt_asym, p.symmetric_asym);
      r.tcp_seq_fcnt_rate = s.normal(p.tcp_seq_fcnt_rate, 0.0, 1.0);
      r.tcp_ack_fcnt_rate = s.normal(p.tcp_ack_fcnt_rate, 0.0, 1.0);
      r.tcp_stat = s.pick(p.tcp_stat_choices);
      r.tcp_aggr_flags = s.pick(p.tcp_flag_choices);
      r.tcp_aggr_anomaly = s.pick(p.tcp_anomaly_choices);
      r.tcp_aggr_options = s.pick(p.tcp_option_choices);
      r.tcp_states = s.pick(p.tcp_state_choices);
    }
    r.dst_port_class = port_class_for(r.dst_port);
    out.push_back({r, spec.kind, 1.0});
  }
  return out;
}

std::vector<LabeledFlow> generate_corpus_flows(std::size_t per_class_count, std::uint64_t seed) {
  if (per_class_count < 10) {
    throw ValidationError("per_class_count", "corpus needs at least 10 flows per class");
  }
  std::vector<LabeledFlow> flows;
  flows.reserve(per_class_count * kNumClasses);
  for (ClassLabel kind : kAllClasses) {
    const auto k = static_cast<std::uint64_t>(to_index(kind));
    auto spec = ScenarioSpec::with_defaults(kind, per_class_count, seed + 0x9E3779B97F4A7C15ull * (k + 1));
    spec.first_flow_index = static_cast<std::int64_t>(k * per_class_count + 1);
    auto part = generate_scenario(spec);
    flows.insert(flows.end(), part.begin(), part.end());
  }
  return flows;
}

Dataset generate_corpus(std::size_t per_class_count, std::uint64_t seed,
                        const MetricsCollection& metrics, const EtlOptions& options) {
  const auto flows = generate_corpus_flows(per_class_count, seed);
  Dataset built = build_dataset(flows, metrics, options);

  std::vector<std::size_t> order(built.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
  }
  Dataset ds;
  ds.provenance = Provenance::original;
  for (std::size_t i : order) ds.push_back(built.features[i], built.labels[i], built.weights[i]);
  return ds;
}

}  // namespace flowguard
