#include "flowguard/flow_model.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace flowguard {

namespace {

constexpr std::array<std::string_view, kNumClasses> kLabelNames = {
    "normal_traffic", "service_incident", "dos_attack"};

constexpr std::array<std::string_view, kNumClasses> kDisplayNames = {
    "normal traffic", "service incident", "denial-of-service attack"};

constexpr std::array<std::string_view, 3> kPortClassNames = {"well_known", "registered",
                                                             "dynamic"};

bool fits_bits(std::uint64_t v, int bits) { return bits >= 64 || (v >> bits) == 0; }

void check_unit(ValidationResult& r, const char* field, double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    r.violations.push_back({field, "must be within [0,1]"});
  }
}

void check_asym(ValidationResult& r, const char* field, double v) {
  if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
    r.violations.push_back({field, "must be within [-1,1]"});
  }
}

void check_nonneg(ValidationResult& r, const char* field, double v) {
  if (!std::isfinite(v) || v < 0.0) {
    r.violations.push_back({field, "must be a finite non-negative number"});
  }
}

void check_range(ValidationResult& r, const char* field, int v, int lo, int hi) {
  if (v < lo || v > hi) {
    r.violations.push_back(
        {field, "must be within " + std::to_string(lo) + ".." + std::to_string(hi)});
  }
}

void check_bits(ValidationResult& r, const char* field, std::uint64_t v, int bits) {
  if (!fits_bits(v, bits)) {
    r.violations.push_back({field, "exceeds " + std::to_string(bits) + "-bit width"});
  }
}

}  // namespace

std::string_view to_string(ClassLabel label) { return kLabelNames.at(to_index(label)); }

int to_index(ClassLabel label) { return static_cast<int>(label); }

std::optional<ClassLabel> label_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == name) return static_cast<ClassLabel>(i);
  }
  return std::nullopt;
}

std::optional<ClassLabel> label_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNumClasses)) return std::nullopt;
  return static_cast<ClassLabel>(index);
}

std::optional<ClassLabel> label_from_alias(std::string_view name) {
  if (auto l = label_from_string(name)) return l;
  if (name == "normal") return ClassLabel::normal_traffic;
  if (name == "service" || name == "incident") return ClassLabel::service_incident;
  if (name == "dos") return ClassLabel::dos_attack;
  return std::nullopt;
}

std::string_view display_name(ClassLabel label) { return kDisplayNames.at(to_index(label)); }

std::string_view to_string(PortClass pc) { return kPortClassNames.at(static_cast<int>(pc)); }

std::optional<PortClass> port_class_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kPortClassNames.size(); ++i) {
    if (kPortClassNames[i] == name) return static_cast<PortClass>(i);
  }
  int idx = -1;
  auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), idx);
  if (ec == std::errc{} && ptr == name.data() + name.size() && idx >= 0 && idx <= 2) {
    return static_cast<PortClass>(idx);
  }
  return std::nullopt;
}

PortClass port_class_for(int port) {
  if (port <= 1023) return PortClass::well_known;
  if (port <= 49151) return PortClass::registered;
  return PortClass::dynamic;
}

std::optional<Ipv4> Ipv4::parse(std::string_view dotted) {
  std::uint32_t value = 0;
  const char* p = dotted.data();
  const char* end = dotted.data() + dotted.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc{} || next == p || part > 255 || next - p > 3) return std::nullopt;
    value = (value << 8) | part;
    p = next;
  }
  if (p != end) return std::nullopt;
  return Ipv4{value};
}

std::string Ipv4::str() const {
  return std::to_string((value >> 24) & 0xff) + "." + std::to_string((value >> 16) & 0xff) +
         "." + std::to_string((value >> 8) & 0xff) + "." + std::to_string(value & 0xff);
}

std::optional<Ipv4Prefix> Ipv4Prefix::parse(std::string_view cidr) {
  auto slash = cidr.find('/');
  auto addr = Ipv4::parse(cidr.substr(0, slash));
  if (!addr) return std::nullopt;
  int len = 32;
  if (slash != std::string_view::npos) {
    auto rest = cidr.substr(slash + 1);
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), len);
    if (ec != std::errc{} || ptr != rest.data() + rest.size() || len < 0 || len > 32) {
      return std::nullopt;
    }
  }
  return Ipv4Prefix{*addr, len};
}

bool Ipv4Prefix::contains(Ipv4 addr) const {
  if (length == 0) return true;
  const std::uint32_t mask = length >= 32 ? 0xffffffffu : ~((1u << (32 - length)) - 1u);
  return (addr.value & mask) == (network.value & mask);
}

std::vector<Ipv4Prefix> default_private_prefixes() {
  return {*Ipv4Prefix::parse("10.0.0.0/8"), *Ipv4Prefix::parse("172.16.0.0/12"),
          *Ipv4Prefix::parse("192.168.0.0/16"), *Ipv4Prefix::parse("127.0.0.0/8")};
}

bool ValidationResult::has(std::string_view field) const {
  for (const auto& v : violations) {
    if (v.field == field) return true;
  }
  return false;
}

ValidationResult validate_flow(const FlowRecord& r) {
  ValidationResult out;
  check_nonneg(out, "duration", r.duration);
  check_range(out, "src_port", r.src_port, 0, 65535);
  check_range(out, "dst_port", r.dst_port, 0, 65535);
  check_range(out, "l4_protocol", r.l4_protocol, 0, 255);
  check_unit(out, "tcp_rate", r.tcp_rate);
  check_asym(out, "tcp_ack_cnt_asym", r.tcp_ack_cnt_asym);
  check_asym(out, "pkt_asym", r.pkt_asym);
  check_asym(out, "byt_asym", r.byt_asym);
  check_bits(out, "tcp_stat", r.tcp_stat, kTcpStatBits);
  check_range(out, "ip_min_ttl", r.ip_min_ttl, 0, 255);
  check_range(out, "ip_max_ttl", r.ip_max_ttl, 0, 255);
  if (r.ip_min_ttl > r.ip_max_ttl) {
    out.violations.push_back({"ip_min_ttl", "ip_min_ttl must not exceed ip_max_ttl"});
  }
  check_nonneg(out, "per_ps", r.per_ps);
  check_unit(out, "tcp_seq_fcnt_rate", r.tcp_seq_fcnt_rate);
  check_unit(out, "tcp_ack_fcnt_rate", r.tcp_ack_fcnt_rate);
  check_nonneg(out, "est_bw_per_flow", r.est_bw_per_flow);
  check_bits(out, "tcp_aggr_flags", r.tcp_aggr_flags, kTcpAggrFlagsBits);
  check_bits(out, "tcp_aggr_anomaly", r.tcp_aggr_anomaly, kTcpAggrAnomalyBits);
  check_bits(out, "tcp_aggr_options", r.tcp_aggr_options, kTcpAggrOptionsBits);
  check_bits(out, "tcp_states", r.tcp_states, kTcpStatesBits);
  return out;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::original:
      return "original";
    case Provenance::feedback_update:
      return "feedback_update";
    case Provenance::merged:
      return "merged";
  }
  return "original";
}

std::optional<Provenance> provenance_from_string(std::string_view name) {
  if (name == "original") return Provenance::original;
  if (name == "feedback_update") return Provenance::feedback_update;
  if (name == "merged") return Provenance::merged;
  return std::nullopt;
}

bool Dataset::consistent() const {
  if (labels.size() != features.size() || weights.size() != features.size()) return false;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) return false;
  }
  return true;
}

void Dataset::push_back(const FeatureVector& fv, ClassLabel label, double weight) {
  features.push_back(fv);
  labels.push_back(label);
  weights.push_back(weight);
}

Dataset merge_datasets(const std::vector<const Dataset*>& parts) {
  Dataset out;
  out.provenance = Provenance::merged;
  for (const Dataset* part : parts) {
    out.features.insert(out.features.end(), part->features.begin(), part->features.end());
    out.labels.insert(out.labels.end(), part->labels.begin(), part->labels.end());
    out.weights.insert(out.weights.end(), part->weights.begin(), part->weights.end());
  }
  return out;
}

}  // namespace flowguard
