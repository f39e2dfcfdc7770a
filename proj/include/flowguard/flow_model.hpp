#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowguard {

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::size_t kNumFeatures = 22;

/// Incident taxonomy. The integer value is the output-neuron index.
enum class ClassLabel : int { normal_traffic = 0, service_incident = 1, dos_attack = 2 };

inline constexpr std::array<ClassLabel, kNumClasses> kAllClasses = {
    ClassLabel::normal_traffic, ClassLabel::service_incident, ClassLabel::dos_attack};

std::string_view to_string(ClassLabel label);
int to_index(ClassLabel label);
std::optional<ClassLabel> label_from_string(std::string_view name);
std::optional<ClassLabel> label_from_index(int index);
/// Accepts the canonical names plus the short forms "normal", "service", "dos".
std::optional<ClassLabel> label_from_alias(std::string_view name);
/// Human-readable name used in reports ("denial-of-service attack").
std::string_view display_name(ClassLabel label);

enum class PortClass : int { well_known = 0, registered = 1, dynamic = 2 };

std::string_view to_string(PortClass pc);
std::optional<PortClass> port_class_from_string(std::string_view name);
/// IANA ranges: 0-1023 well known, 1024-49151 registered, 49152-65535 dynamic.
PortClass port_class_for(int port);

struct Ipv4 {
  std::uint32_t value = 0;

  static std::optional<Ipv4> parse(std::string_view dotted);
  std::string str() const;
  friend bool operator==(const Ipv4&, const Ipv4&) = default;
};

struct Ipv4Prefix {
  Ipv4 network;
  int length = 32;

  static std::optional<Ipv4Prefix> parse(std::string_view cidr);
  bool contains(Ipv4 addr) const;
  friend bool operator==(const Ipv4Prefix&, const Ipv4Prefix&) = default;
};

/// RFC 1918 ranges plus loopback.
std::vector<Ipv4Prefix> default_private_prefixes();

// Bit widths used when validating and normalizing the bitfield attributes.
inline constexpr int kTcpStatBits = 8;
inline constexpr int kTcpAggrFlagsBits = 8;
inline constexpr int kTcpAggrAnomalyBits = 16;
inline constexpr int kTcpAggrOptionsBits = 16;
inline constexpr int kTcpStatesBits = 8;

/// One network flow with the raw key attributes. Flowindex and the raw
/// destination address are identity metadata and never reach the network.
struct FlowRecord {
  std::int64_t flow_index = 0;
  double duration = 0.0;
  Ipv4 ip_destination;
  int src_port = 0;
  int dst_port = 0;
  int l4_protocol = 0;
  PortClass dst_port_class = PortClass::well_known;
  double tcp_rate = 0.0;
  double tcp_ack_cnt_asym = 0.0;
  double pkt_asym = 0.0;
  double byt_asym = 0.0;
  std::uint64_t tcp_stat = 0;
  int ip_min_ttl = 0;
  int ip_max_ttl = 0;
  double per_ps = 0.0;
  double tcp_seq_fcnt_rate = 0.0;
  double tcp_ack_fcnt_rate = 0.0;
  double est_bw_per_flow = 0.0;
  std::uint64_t tcp_aggr_flags = 0;
  std::uint64_t tcp_aggr_anomaly = 0;
  std::uint64_t tcp_aggr_options = 0;
  std::uint64_t tcp_states = 0;

  friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

struct FieldViolation {
  std::string field;
  std::string message;
};

struct ValidationResult {
  std::vector<FieldViolation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view field) const;
};

ValidationResult validate_flow(const FlowRecord& record);

struct LabeledFlow {
  FlowRecord flow;
  ClassLabel label = ClassLabel::normal_traffic;
  double weight = 1.0;

  friend bool operator==(const LabeledFlow&, const LabeledFlow&) = default;
};

struct FeatureVector {
  std::array<double, kNumFeatures> values{};
  std::int64_t flow_index = 0;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class Provenance : int { original = 0, feedback_update = 1, merged = 2 };

std::string_view to_string(Provenance p);
std::optional<Provenance> provenance_from_string(std::string_view name);

struct Dataset {
  std::vector<FeatureVector> features;
  std::vector<ClassLabel> labels;
  std::vector<double> weights;
  Provenance provenance = Provenance::original;

  std::size_t size() const { return features.size(); }
  bool empty() const { return features.empty(); }
  /// Equal-length sequences and strictly positive weights.
  bool consistent() const;
  void push_back(const FeatureVector& fv, ClassLabel label, double weight = 1.0);

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Concatenates datasets in order; provenance becomes merged.
Dataset merge_datasets(const std::vector<const Dataset*>& parts);

}  // namespace flowguard
