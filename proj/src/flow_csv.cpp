#include "flowguard/flow_csv.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>

#include "flowguard/errors.hpp"

namespace flowguard {

namespace {

enum class Col {
  flow_index,
  duration,
  ip_destination,
  src_port,
  dst_port,
  l4_protocol,
  dst_port_class,
  tcp_rate,
  tcp_ack_cnt_asym,
  pkt_asym,
  byt_asym,
  tcp_stat,
  ip_min_ttl,
  ip_max_ttl,
  per_ps,
  tcp_seq_fcnt_rate,
  tcp_ack_fcnt_rate,
  est_bw_per_flow,
  tcp_aggr_flags,
  tcp_aggr_anomaly,
  tcp_aggr_options,
  tcp_states,
  label,
  weight,
  count_
};

constexpr std::size_t kColCount = static_cast<std::size_t>(Col::count_);

constexpr std::array<std::string_view, kColCount> kHeaders = {
    "Flowindex",     "Duration",        "IP Destination",  "Source Port",  "Destination Port",
    "L4 Protocol",   "DstPortClass",    "TCP-Rate",        "TCPPAckCntAsm", "PktAsm",
    "BytAsm",        "TCPStat",         "IPMinTTL",        "IPMaxTTL",     "PerPS",
    "TCPSeqFCnt-Rate", "TCPAckFCnt-Rate", "EstBwPFlow",    "TCPAggrFlags", "TCPAggrAnomaly",
    "TCPAggrOptions", "TCPStates",      "Label",           "Weight"};

constexpr std::array<std::string_view, kColCount> kFields = {
    "flow_index",     "duration",        "ip_destination",  "src_port",       "dst_port",
    "l4_protocol",    "dst_port_class",  "tcp_rate",        "tcp_ack_cnt_asym", "pkt_asym",
    "byt_asym",       "tcp_stat",        "ip_min_ttl",      "ip_max_ttl",     "per_ps",
    "tcp_seq_fcnt_rate", "tcp_ack_fcnt_rate", "est_bw_per_flow", "tcp_aggr_flags",
    "tcp_aggr_anomaly", "tcp_aggr_options", "tcp_states",    "label",          "weight"};

bool optional_column(Col c) {
  return c == Col::flow_index || c == Col::dst_port_class || c == Col::label ||
         c == Col::weight;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<Col> column_for(std::string_view header) {
  if (header == "TCPAggrOptions*") return Col::tcp_aggr_options;
  for (std::size_t i = 0; i < kColCount; ++i) {
    if (kHeaders[i] == header) return static_cast<Col>(i);
  }
  return std::nullopt;
}

struct CellParser {
  std::size_t row;
  Col col;

  [[noreturn]] void fail(std::string_view cell, std::string_view expected) const {
    throw RowError(row, std::string(kFields[static_cast<std::size_t>(col)]),
                   "row " + std::to_string(row) + ", column " +
                       std::string(kFields[static_cast<std::size_t>(col)]) + " ('" +
                       std::string(kHeaders[static_cast<std::size_t>(col)]) + "'): expected " +
                       std::string(expected) + ", got '" + std::string(cell) + "'");
  }

  double real(std::string_view cell) const {
    double v = 0.0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc{} || p != cell.data() + cell.size()) fail(cell, "a number");
    return v;
  }

  std::int64_t integer(std::string_view cell) const {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc{} || p != cell.data() + cell.size()) {
      fail(cell, "an integer");
    }
    return v;
  }

  int small_int(std::string_view cell) const {
    auto v = integer(cell);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      fail(cell, "an integer in int range");
    }
    return static_cast<int>(v);
  }

  std::uint64_t bits(std::string_view cell) const {
    std::uint64_t v = 0;
    int base = 10;
    std::string_view digits = cell;
    if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
      digits.remove_prefix(2);
      base = 16;
    }
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
    if (digits.empty() || ec != std::errc{} || p != digits.data() + digits.size()) {
      fail(cell, "a bitfield (decimal or 0x hex)");
    }
    return v;
  }
};

std::string hex_bits(std::uint64_t v, int width_bits) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%0*llx", width_bits / 4, static_cast<unsigned long long>(v));
  return buf;
}

void write_header(std::ostream& out, bool labeled) {
  const std::size_t n = labeled ? kColCount : static_cast<std::size_t>(Col::label);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out << ',';
    out << kHeaders[i];
  }
  out << '\n';
}

void write_record(std::ostream& out, const FlowRecord& r) {
  out << r.flow_index << ',' << format_double(r.duration) << ',' << r.ip_destination.str() << ','
      << r.src_port << ',' << r.dst_port << ',' << r.l4_protocol << ','
      << to_string(r.dst_port_class) << ',' << format_double(r.tcp_rate) << ','
      << format_double(r.tcp_ack_cnt_asym) << ',' << format_double(r.pkt_asym) << ','
      << format_double(r.byt_asym) << ',' << hex_bits(r.tcp_stat, kTcpStatBits) << ','
      << r.ip_min_ttl << ',' << r.ip_max_ttl << ',' << format_double(r.per_ps) << ','
      << format_double(r.tcp_seq_fcnt_rate) << ',' << format_double(r.tcp_ack_fcnt_rate) << ','
      << format_double(r.est_bw_per_flow) << ',' << hex_bits(r.tcp_aggr_flags, kTcpAggrFlagsBits)
      << ',' << hex_bits(r.tcp_aggr_anomaly, kTcpAggrAnomalyBits) << ','
      << hex_bits(r.tcp_aggr_options, kTcpAggrOptionsBits) << ','
      << hex_bits(r.tcp_states, kTcpStatesBits);
}

}  // namespace

std::span<const std::string_view> flow_csv_columns() { return kHeaders; }

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

ParsedFlows parse_flow_csv(std::istream& in) {
  ParsedFlows out;
  std::string line;

  // header
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw EmptyInputError("flow file is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM

  std::array<std::optional<std::size_t>, kColCount> position{};
  const auto header = split(line);
  for (std::size_t i = 0; i < header.size(); ++i) {
    auto col = column_for(header[i]);
    if (!col) {
      out.warnings.push_back("ignoring unknown column '" + std::string(header[i]) + "'");
      continue;
    }
    auto& slot = position[static_cast<std::size_t>(*col)];
    if (slot) {
      throw FormatError(std::string(header[i]), "duplicate column '" + std::string(header[i]) + "'");
    }
    slot = i;
  }
  for (std::size_t c = 0; c < kColCount; ++c) {
    if (!position[c] && !optional_column(static_cast<Col>(c))) {
      throw FormatError(std::string(kHeaders[c]),
                        "missing required column '" + std::string(kHeaders[c]) + "'");
    }
  }
  out.labeled = position[static_cast<std::size_t>(Col::label)].has_value();

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split(line);
    auto cell = [&](Col c) -> std::optional<std::string_view> {
      const auto& pos = position[static_cast<std::size_t>(c)];
      if (!pos) return std::nullopt;
      if (*pos >= cells.size()) {
        throw RowError(row, std::string(kFields[static_cast<std::size_t>(c)]),
                       "row " + std::to_string(row) + " is missing column " +
                           std::string(kFields[static_cast<std::size_t>(c)]));
      }
      return cells[*pos];
    };
    auto real = [&](Col c) { return CellParser{row, c}.real(*cell(c)); };
    auto integer = [&](Col c) { return CellParser{row, c}.small_int(*cell(c)); };
    auto bits = [&](Col c) { return CellParser{row, c}.bits(*cell(c)); };

    FlowRecord r;
    if (auto v = cell(Col::flow_index)) {
      r.flow_index = CellParser{row, Col::flow_index}.integer(*v);
    } else {
      r.flow_index = static_cast<std::int64_t>(row);
    }
    r.duration = real(Col::duration);
    {
      auto v = *cell(Col::ip_destination);
      auto ip = Ipv4::parse(v);
      if (!ip) CellParser{row, Col::ip_destination}.fail(v, "a dotted IPv4 address");
      r.ip_destination = *ip;
    }
    r.src_port = integer(Col::src_port);
    r.dst_port = integer(Col::dst_port);
    r.l4_protocol = integer(Col::l4_protocol);
    if (auto v = cell(Col::dst_port_class); v && !v->empty()) {
      auto pc = port_class_from_string(*v);
      if (!pc) CellParser{row, Col::dst_port_class}.fail(*v, "well_known|registered|dynamic");
      r.dst_port_class = *pc;
    } else {
      r.dst_port_class = port_class_for(r.dst_port);
    }
    r.tcp_rate = real(Col::tcp_rate);
    r.tcp_ack_cnt_asym = real(Col::tcp_ack_cnt_asym);
    r.pkt_asym = real(Col::pkt_asym);
    r.byt_asym = real(Col::byt_asym);
    r.tcp_stat = bits(Col::tcp_stat);
    r.ip_min_ttl = integer(Col::ip_min_ttl);
    r.ip_max_ttl = integer(Col::ip_max_ttl);
    r.per_ps = real(Col::per_ps);
    r.tcp_seq_fcnt_rate = real(Col::tcp_seq_fcnt_rate);
    r.tcp_ack_fcnt_rate = real(Col::tcp_ack_fcnt_rate);
    r.est_bw_per_flow = real(Col::est_bw_per_flow);
    r.tcp_aggr_flags = bits(Col::tcp_aggr_flags);
    r.tcp_aggr_anomaly = bits(Col::tcp_aggr_anomaly);
    r.tcp_aggr_options = bits(Col::tcp_aggr_options);
    r.tcp_states = bits(Col::tcp_states);

    if (auto v = cell(Col::label)) {
      auto label = label_from_alias(*v);
      if (!label) {
        CellParser{row, Col::label}.fail(*v, "normal_traffic|service_incident|dos_attack");
      }
      out.labels.push_back(*label);
    }
    double weight = 1.0;
    if (auto v = cell(Col::weight); v && !v->empty()) {
      weight = CellParser{row, Col::weight}.real(*v);
      if (!(weight > 0.0)) CellParser{row, Col::weight}.fail(*v, "a positive weight");
    }
    out.weights.push_back(weight);
    out.records.push_back(r);
  }
  if (out.records.empty()) throw EmptyInputError("flow file has a header but no data rows");
  return out;
}

std::vector<FlowRecord> parse_flow_file(std::istream& in) { return parse_flow_csv(in).records; }

std::vector<LabeledFlow> to_labeled_flows(const ParsedFlows& parsed) {
  if (!parsed.labeled) throw FormatError("Label", "flow file has no 'Label' column");
  std::vector<LabeledFlow> flows;
  flows.reserve(parsed.records.size());
  for (std::size_t i = 0; i < parsed.records.size(); ++i) {
    flows.push_back({parsed.records[i], parsed.labels[i], parsed.weights[i]});
  }
  return flows;
}

void write_flow_csv(std::ostream& out, std::span<const FlowRecord> records) {
  write_header(out, false);
  for (const auto& r : records) {
    write_record(out, r);
    out << '\n';
  }
}

void write_labeled_flow_csv(std::ostream& out, std::span<const LabeledFlow> flows) {
  write_header(out, true);
  for (const auto& f : flows) {
    write_record(out, f.flow);
    out << ',' << to_string(f.label) << ',' << format_double(f.weight) << '\n';
  }
}

}  // namespace flowguard
