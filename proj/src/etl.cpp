#include "flowguard/etl.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "flowguard/errors.hpp"

namespace flowguard {

namespace {

using Extractor = std::function<double(const FlowRecord&, std::span<const Ipv4Prefix>)>;

const std::unordered_map<std::string_view, Extractor>& extractors() {
  static const std::unordered_map<std::string_view, Extractor> table = {
      {"duration", [](const FlowRecord& r, auto) { return r.duration; }},
      {"ip_dst_locality",
       [](const FlowRecord& r, std::span<const Ipv4Prefix> prefixes) {
         for (const auto& p : prefixes) {
           if (p.contains(r.ip_destination)) return 0.0;
         }
         return 1.0;
       }},
      {"src_port", [](const FlowRecord& r, auto) { return double(r.src_port); }},
      {"dst_port", [](const FlowRecord& r, auto) { return double(r.dst_port); }},
      {"l4_protocol", [](const FlowRecord& r, auto) { return double(r.l4_protocol); }},
      {"dst_port_class",
       [](const FlowRecord& r, auto) { return double(static_cast<int>(r.dst_port_class)); }},
      {"tcp_rate", [](const FlowRecord& r, auto) { return r.tcp_rate; }},
      {"tcp_ack_cnt_asym", [](const FlowRecord& r, auto) { return r.tcp_ack_cnt_asym; }},
      {"pkt_asym", [](const FlowRecord& r, auto) { return r.pkt_asym; }},
      {"byt_asym", [](const FlowRecord& r, auto) { return r.byt_asym; }},
      {"tcp_stat", [](const FlowRecord& r, auto) { return double(r.tcp_stat); }},
      {"ip_min_ttl", [](const FlowRecord& r, auto) { return double(r.ip_min_ttl); }},
      {"ip_max_ttl", [](const FlowRecord& r, auto) { return double(r.ip_max_ttl); }},
      {"per_ps", [](const FlowRecord& r, auto) { return r.per_ps; }},
      {"tcp_seq_fcnt_rate", [](const FlowRecord& r, auto) { return r.tcp_seq_fcnt_rate; }},
      {"tcp_ack_fcnt_rate", [](const FlowRecord& r, auto) { return r.tcp_ack_fcnt_rate; }},
      {"est_bw_per_flow", [](const FlowRecord& r, auto) { return r.est_bw_per_flow; }},
      {"tcp_aggr_flags", [](const FlowRecord& r, auto) { return double(r.tcp_aggr_flags); }},
      {"tcp_aggr_anomaly", [](const FlowRecord& r, auto) { return double(r.tcp_aggr_anomaly); }},
      {"tcp_aggr_options", [](const FlowRecord& r, auto) { return double(r.tcp_aggr_options); }},
      {"tcp_states", [](const FlowRecord& r, auto) { return double(r.tcp_states); }},
      // derived: TTL spread within the flow (varies under spoofed sources)
      {"ip_ttl_spread",
       [](const FlowRecord& r, auto) { return double(r.ip_max_ttl - r.ip_min_ttl); }},
  };
  return table;
}

}  // namespace

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::continuous:
      return "continuous";
    case AttributeKind::discrete_index:
      return "discrete_index";
    case AttributeKind::bitfield:
      return "bitfield";
    case AttributeKind::ratio:
      return "ratio";
    case AttributeKind::asymmetry:
      return "asymmetry";
  }
  return "ratio";
}

double normalize_attribute(const AttributeSpec& spec, double raw) {
  if (!std::isfinite(raw)) {
    throw DomainError(spec.name + ": raw value is not finite");
  }
  if (spec.kind != AttributeKind::asymmetry && raw < 0.0) {
    throw DomainError(spec.name + ": negative raw value " + std::to_string(raw));
  }
  double v = 0.0;
  switch (spec.kind) {
    case AttributeKind::discrete_index:
      v = raw / spec.max_index;
      break;
    case AttributeKind::ratio:
      v = raw;
      break;
    case AttributeKind::asymmetry:
      v = (raw + 1.0) / 2.0;
      break;
    case AttributeKind::bitfield: {
      if (raw != std::floor(raw) || raw >= 18446744073709551616.0) {
        throw DomainError(spec.name + ": bitfield value must be a non-negative integer");
      }
      const auto bits = static_cast<std::uint64_t>(raw);
      v = double(std::popcount(bits)) / double(spec.bit_width);
      break;
    }
    case AttributeKind::continuous:
      v = std::min(raw, spec.clamp_cap) / spec.clamp_cap;
      break;
  }
  return std::clamp(v, 0.0, 1.0);
}

MetricsCollection MetricsCollection::defaults() {
  using K = AttributeKind;
  MetricsCollection m;
  m.specs = {
      {2, "duration", K::continuous, 1.0, 3600.0, 0},
      {3, "ip_dst_locality", K::discrete_index, 1.0, 1.0, 0},
      {4, "src_port", K::discrete_index, 65535.0, 1.0, 0},
      {5, "dst_port", K::discrete_index, 65535.0, 1.0, 0},
      {6, "l4_protocol", K::discrete_index, 255.0, 1.0, 0},
      {7, "dst_port_class", K::discrete_index, 2.0, 1.0, 0},
      {8, "tcp_rate", K::ratio, 1.0, 1.0, 0},
      {9, "tcp_ack_cnt_asym", K::asymmetry, 1.0, 1.0, 0},
      {10, "pkt_asym", K::asymmetry, 1.0, 1.0, 0},
      {11, "byt_asym", K::asymmetry, 1.0, 1.0, 0},
      {12, "tcp_stat", K::bitfield, 1.0, 1.0, kTcpStatBits},
      {13, "ip_min_ttl", K::discrete_index, 255.0, 1.0, 0},
      {14, "ip_max_ttl", K::discrete_index, 255.0, 1.0, 0},
      {15, "per_ps", K::continuous, 1.0, 1e6, 0},
      {16, "tcp_seq_fcnt_rate", K::ratio, 1.0, 1.0, 0},
      {17, "tcp_ack_fcnt_rate", K::ratio, 1.0, 1.0, 0},
      {18, "est_bw_per_flow", K::continuous, 1.0, 1e9, 0},
      {19, "tcp_aggr_flags", K::bitfield, 1.0, 1.0, kTcpAggrFlagsBits},
      {20, "tcp_aggr_anomaly", K::bitfield, 1.0, 1.0, kTcpAggrAnomalyBits},
      {21, "tcp_aggr_options", K::bitfield, 1.0, 1.0, kTcpAggrOptionsBits},
      {22, "tcp_states", K::bitfield, 1.0, 1.0, kTcpStatesBits},
      {14, "ip_ttl_spread", K::discrete_index, 255.0, 1.0, 0},
  };
  return m;
}

void MetricsCollection::validate() const {
  if (specs.size() != kNumFeatures) {
    throw ValidationError("specs", "metrics collection must define exactly " +
                                       std::to_string(kNumFeatures) + " features, got " +
                                       std::to_string(specs.size()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& s : specs) {
    if (!seen.insert(s.name).second) {
      throw ValidationError(s.name, "duplicate feature name " + s.name);
    }
    if (!extractors().contains(s.name)) {
      throw ValidationError(s.name, "unknown feature name " + s.name);
    }
    if (s.attribute_id < 1 || s.attribute_id > 23) {
      throw ValidationError(s.name, "attribute_id out of 1..23");
    }
    if (!(s.max_index > 0.0) || !(s.clamp_cap > 0.0)) {
      throw ValidationError(s.name, "max_index and clamp_cap must be positive");
    }
    if (s.kind == AttributeKind::bitfield && (s.bit_width < 1 || s.bit_width > 64)) {
      throw ValidationError(s.name, "bit_width must be within 1..64");
    }
  }
}

std::vector<std::string> MetricsCollection::feature_names() const {
  std::vector<std::string> names;
  names.reserve(specs.size());
  for (const auto& s : specs) names.push_back(s.name);
  return names;
}

double raw_feature_value(const FlowRecord& record, std::string_view feature_name,
                         std::span<const Ipv4Prefix> private_prefixes) {
  auto it = extractors().find(feature_name);
  if (it == extractors().end()) {
    throw ValidationError(std::string(feature_name), "unknown feature name");
  }
  return it->second(record, private_prefixes);
}

bool is_relevant(const FlowRecord& record, const std::set<int>& allowed_protocols) {
  if (record.duration == 0.0 && record.per_ps == 0.0) return false;
  return allowed_protocols.contains(record.l4_protocol);
}

std::vector<FlowRecord> filter_relevant(std::span<const FlowRecord> records,
                                        const std::set<int>& allowed_protocols) {
  std::vector<FlowRecord> out;
  out.reserve(records.size());
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const FlowRecord& r) { return is_relevant(r, allowed_protocols); });
  return out;
}

FeatureVector to_feature_vector(const FlowRecord& record, const MetricsCollection& metrics,
                                std::span<const Ipv4Prefix> private_prefixes) {
  if (metrics.specs.size() != kNumFeatures) {
    throw ShapeError("metrics collection has " + std::to_string(metrics.specs.size()) +
                     " features, expected " + std::to_string(kNumFeatures));
  }
  FeatureVector fv;
  fv.flow_index = record.flow_index;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    const auto& spec = metrics.specs[i];
    fv.values[i] = normalize_attribute(spec, raw_feature_value(record, spec.name, private_prefixes));
  }
  return fv;
}

Dataset build_dataset(std::span<const LabeledFlow> flows, const MetricsCollection& metrics,
                      const EtlOptions& options) {
  if (flows.empty()) throw EmptyDatasetError("no labeled flows supplied");
  Dataset ds;
  ds.provenance = Provenance::original;
  for (const auto& lf : flows) {
    if (!is_relevant(lf.flow, options.allowed_protocols)) continue;
    auto check = validate_flow(lf.flow);
    if (!check.ok()) {
      const auto& v = check.violations.front();
      throw ValidationError(v.field, "flow " + std::to_string(lf.flow.flow_index) + ": " +
                                         v.field + " " + v.message);
    }
    if (!(lf.weight > 0.0)) {
      throw ValidationError("weight", "flow " + std::to_string(lf.flow.flow_index) +
                                          ": weight must be positive");
    }
    ds.push_back(to_feature_vector(lf.flow, metrics, options.private_prefixes), lf.label,
                 lf.weight);
  }
  if (ds.empty()) throw EmptyDatasetError("every flow was filtered out as non-relevant");
  return ds;
}

}  // namespace flowguard
