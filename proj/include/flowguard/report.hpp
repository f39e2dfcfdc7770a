#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowguard/knowledge.hpp"
#include "flowguard/neuralnet.hpp"
#include "flowguard/rating.hpp"

namespace flowguard {

/// Causes below this probability get no narrative block.
inline constexpr double kCauseThreshold = 0.01;

struct ProbableCause {
  ClassLabel label = ClassLabel::normal_traffic;
  double probability = 0.0;
  std::string narrative;

  friend bool operator==(const ProbableCause&, const ProbableCause&) = default;
};

struct IncidentReport {
  std::string incident_id;
  UtcTime created_at{};
  std::vector<std::int64_t> flows_covered;
  ClassDistribution distribution;
  std::vector<ProbableCause> probable_causes;  // descending probability
  std::vector<Suggestion> recommendations;
  std::string management_summary;
  std::string model_version;
  std::string kb_version;

  friend bool operator==(const IncidentReport&, const IncidentReport&) = default;
};

struct ReportMetadata {
  std::string incident_id;
  UtcTime created_at{};
  std::vector<std::int64_t> flows_covered;
  std::string model_version;
};

IncidentReport generate_report(const ClassDistribution& dist, const std::vector<Suggestion>& suggestions,
                               const KnowledgeBase& kb, const ReportMetadata& metadata);

enum class ReportFormat { structured_text, html };
std::optional<ReportFormat> report_format_from_string(std::string_view name);

/// structured_text is pretty-printed JSON with sorted keys; html is a
/// self-contained, print-friendly XHTML-style page.
std::string render(const IncidentReport& report, ReportFormat format);
/// Throws ValidationError for an unknown format name.
std::string render(const IncidentReport& report, std::string_view format);
IncidentReport parse_structured_report(std::string_view text);

}  // namespace flowguard
