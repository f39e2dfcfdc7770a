#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowguard/flow_model.hpp"

namespace flowguard {

/// Column header names of the flow CSV contract, in canonical write order.
/// "Flowindex", "DstPortClass", "Label" and "Weight" are optional on input.
std::span<const std::string_view> flow_csv_columns();

struct ParsedFlows {
  std::vector<FlowRecord> records;
  std::vector<ClassLabel> labels;  // empty when the file has no Label column
  std::vector<double> weights;     // 1.0 unless a Weight column is present
  std::vector<std::string> warnings;
  bool labeled = false;
};

/// Parses the full contract. Throws EmptyInputError, FormatError, RowError.
ParsedFlows parse_flow_csv(std::istream& in);

/// Records only, in file order.
std::vector<FlowRecord> parse_flow_file(std::istream& in);

/// Requires a Label column.
std::vector<LabeledFlow> to_labeled_flows(const ParsedFlows& parsed);

void write_flow_csv(std::ostream& out, std::span<const FlowRecord> records);
void write_labeled_flow_csv(std::ostream& out, std::span<const LabeledFlow> flows);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace flowguard
