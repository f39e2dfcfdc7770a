#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowguard/flow_model.hpp"

namespace flowguard {

/// How a raw attribute is mapped onto [0,1].
///   discrete_index  raw / max_index
///   ratio           raw
///   asymmetry       (raw + 1) / 2
///   bitfield        popcount(raw) / bit_width
///   continuous      min(raw, clamp_cap) / clamp_cap
enum class AttributeKind { continuous, discrete_index, bitfield, ratio, asymmetry };

std::string_view to_string(AttributeKind kind);

struct AttributeSpec {
  int attribute_id = 0;  // key-attribute row the feature is derived from (1..23)
  std::string name;      // feature name; selects the raw extractor
  AttributeKind kind = AttributeKind::ratio;
  double max_index = 1.0;
  double clamp_cap = 1.0;
  int bit_width = 8;
};

double normalize_attribute(const AttributeSpec& spec, double raw);

/// Ordered feature template. Order defines the input-neuron layout.
struct MetricsCollection {
  std::vector<AttributeSpec> specs;

  static MetricsCollection defaults();
  /// Throws ValidationError unless there are exactly kNumFeatures specs with
  /// unique known names and sane denominators.
  void validate() const;
  std::vector<std::string> feature_names() const;
};

/// Raw (pre-normalization) value of a named feature. The locality feature is
/// 0 for destinations inside a private prefix and 1 otherwise.
double raw_feature_value(const FlowRecord& record, std::string_view feature_name,
                         std::span<const Ipv4Prefix> private_prefixes);

struct EtlOptions {
  std::vector<Ipv4Prefix> private_prefixes = default_private_prefixes();
  std::set<int> allowed_protocols = {1, 6, 17};
};

bool is_relevant(const FlowRecord& record, const std::set<int>& allowed_protocols);

std::vector<FlowRecord> filter_relevant(std::span<const FlowRecord> records,
                                        const std::set<int>& allowed_protocols = {1, 6, 17});

FeatureVector to_feature_vector(const FlowRecord& record, const MetricsCollection& metrics,
                                std::span<const Ipv4Prefix> private_prefixes);

/// Filter, validate and transform labeled flows into an original-provenance dataset.
Dataset build_dataset(std::span<const LabeledFlow> flows, const MetricsCollection& metrics,
                      const EtlOptions& options = {});

}  // namespace flowguard
