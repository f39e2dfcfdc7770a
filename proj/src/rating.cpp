#include "flowguard/rating.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>
#include <nlohmann/json.hpp>

#include "flowguard/errors.hpp"

namespace flowguard {

std::string format_utc(UtcTime t) {
  const std::time_t secs = t.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<UtcTime> parse_utc(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
    return std::nullopt;
  }
  auto field = [&](std::size_t pos, std::size_t len, int& out) {
    auto [p, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc{} && p == text.data() + pos + len;
  };
  int y, mo, d, h, mi, s;
  if (!field(0, 4, y) || !field(5, 2, mo) || !field(8, 2, d) || !field(11, 2, h) ||
      !field(14, 2, mi) || !field(17, 2, s)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(unsigned(mo)),
                                        std::chrono::day(unsigned(d))};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  return std::chrono::sys_days(ymd) + std::chrono::hours(h) + std::chrono::minutes(mi) +
         std::chrono::seconds(s);
}

UtcTime utc_now() {
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

void validate_rating(const Rating& r) {
  if (r.score < kMinScore || r.score > kMaxScore) {
    throw ValidationError("score", "score must be within 1..5, got " + std::to_string(r.score));
  }
  if (r.incident_id.empty()) throw ValidationError("incident_id", "incident_id is required");
  if (r.recommendation_id.empty()) {
    throw ValidationError("recommendation_id", "recommendation_id is required");
  }
}

void to_json(nlohmann::json& j, const Rating& r) {
  j = nlohmann::json{{"incident_id", r.incident_id},
                     {"flow_index", r.flow_index},
                     {"recommendation_id", r.recommendation_id},
                     {"rated_class", std::string(to_string(r.rated_class))},
                     {"score", r.score},
                     {"timestamp", format_utc(r.timestamp)}};
  if (r.note) j["note"] = *r.note;
}

void from_json(const nlohmann::json& j, Rating& r) {
  r.incident_id = j.at("incident_id").get<std::string>();
  r.flow_index = j.at("flow_index").get<std::int64_t>();
  r.recommendation_id = j.at("recommendation_id").get<std::string>();
  const auto cls = j.at("rated_class").get<std::string>();
  auto label = label_from_alias(cls);
  if (!label) throw ValidationError("rated_class", "unknown class '" + cls + "'");
  r.rated_class = *label;
  r.score = j.at("score").get<int>();
  const auto ts = j.at("timestamp").get<std::string>();
  auto t = parse_utc(ts);
  if (!t) throw ValidationError("timestamp", "timestamp must be YYYY-MM-DDTHH:MM:SSZ");
  r.timestamp = *t;
  if (j.contains("note") && !j["note"].is_null()) {
    r.note = j["note"].get<std::string>();
  } else {
    r.note.reset();
  }
}

}  // namespace flowguard
