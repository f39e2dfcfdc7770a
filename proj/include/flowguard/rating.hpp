#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "flowguard/flow_model.hpp"

namespace flowguard {

using UtcTime = std::chrono::sys_seconds;

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_utc(UtcTime t);
std::optional<UtcTime> parse_utc(std::string_view text);
UtcTime utc_now();

inline constexpr int kMinScore = 1;
inline constexpr int kMaxScore = 5;

/// Analyst rating of one suggested remediation for one flow of an incident.
struct Rating {
  std::string incident_id;
  std::int64_t flow_index = 0;
  std::string recommendation_id;
  ClassLabel rated_class = ClassLabel::normal_traffic;
  int score = 3;
  UtcTime timestamp{};
  std::optional<std::string> note;

  friend bool operator==(const Rating&, const Rating&) = default;
};

/// Throws ValidationError on a score outside 1..5 or empty identifiers.
void validate_rating(const Rating& r);

void to_json(nlohmann::json& j, const Rating& r);
void from_json(const nlohmann::json& j, Rating& r);

}  // namespace flowguard
