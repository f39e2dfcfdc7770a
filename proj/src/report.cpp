#include "flowguard/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "flowguard/errors.hpp"

namespace flowguard {

using json = nlohmann::json;

namespace {

std::string percent(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f %%", 100.0 * p);
  return buf;
}

std::string escape_html(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&#39;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string guidance_text(const KnowledgeBase& kb, ClassLabel label, bool management) {
  auto it = kb.guidance.find(label);
  if (it == kb.guidance.end()) return {};
  return management ? it->second.management_summary : it->second.cause_narrative;
}

json to_json_report(const IncidentReport& r) {
  json causes = json::array();
  for (const auto& c : r.probable_causes) {
    causes.push_back({{"class", std::string(to_string(c.label))},
                      {"probability", c.probability},
                      {"narrative", c.narrative}});
  }
  json recs = json::array();
  for (const auto& s : r.recommendations) recs.push_back({{"entry", s.entry}, {"score", s.score}});
  json dist = json::object();
  for (ClassLabel c : kAllClasses) dist[std::string(to_string(c))] = r.distribution.probability(c);
  return json{{"incident_id", r.incident_id},
              {"created_at", format_utc(r.created_at)},
              {"flows_covered", r.flows_covered},
              {"distribution", dist},
              {"predicted", std::string(to_string(r.distribution.predicted))},
              {"probable_causes", causes},
              {"recommendations", recs},
              {"management_summary", r.management_summary},
              {"model_version", r.model_version},
              {"kb_version", r.kb_version}};
}

}  // namespace

IncidentReport generate_report(const ClassDistribution& dist, const std::vector<Suggestion>& suggestions,
                               const KnowledgeBase& kb, const ReportMetadata& metadata) {
  IncidentReport r;
  r.incident_id = metadata.incident_id;
  r.created_at = metadata.created_at;
  r.flows_covered = metadata.flows_covered;
  r.distribution = dist;
  r.recommendations = suggestions;
  r.model_version = metadata.model_version;
  r.kb_version = kb.version;

  for (ClassLabel c : kAllClasses) {
    const double p = dist.probability(c);
    if (p >= kCauseThreshold) r.probable_causes.push_back({c, p, guidance_text(kb, c, false)});
  }
  std::stable_sort(r.probable_causes.begin(), r.probable_causes.end(),
                   [](const ProbableCause& a, const ProbableCause& b) {
                     return a.probability > b.probability;
                   });

  const ClassLabel top = dist.predicted;
  std::string summary = "Most likely situation: " + std::string(display_name(top)) + " (" +
                        percent(dist.probability(top)) + " confidence). ";
  summary += guidance_text(kb, top, true);
  if (top != ClassLabel::normal_traffic && !suggestions.empty()) {
    summary += " Recommended first measure: " + suggestions.front().entry.title + ".";
  }
  r.management_summary = std::move(summary);
  return r;
}

std::optional<ReportFormat> report_format_from_string(std::string_view name) {
  if (name == "structured_text" || name == "json" || name == "text") return ReportFormat::structured_text;
  if (name == "html") return ReportFormat::html;
  return std::nullopt;
}

std::string render(const IncidentReport& report, std::string_view format) {
  auto f = report_format_from_string(format);
  if (!f) throw ValidationError("format", "unknown report format '" + std::string(format) + "'");
  return render(report, *f);
}

std::string render(const IncidentReport& report, ReportFormat format) {
  if (format == ReportFormat::structured_text) return to_json_report(report).dump(2) + "\n";

  std::ostringstream h;
  h << "<!DOCTYPE html>\n"
    << "<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\" />\n"
    << "<title>Incident report " << escape_html(report.incident_id) << "</title>\n"
    << "<style>body{font-family:sans-serif;max-width:60em;margin:2em auto}"
       "table{border-collapse:collapse}td,th{border:1px solid #999;padding:.3em .6em}"
       "@media print{.noprint{display:none}}</style>\n"
    << "</head>\n<body>\n";
  h << "<h1>Incident report " << escape_html(report.incident_id) << "</h1>\n";
  h << "<p>Created " << format_utc(report.created_at) << ". Model "
    << escape_html(report.model_version.substr(0, 12)) << ", knowledge base "
    << escape_html(report.kb_version) << ". Flows covered: " << report.flows_covered.size()
    << ".</p>\n";

  h << "<h2>Management summary</h2>\n<p>" << escape_html(report.management_summary) << "</p>\n";

  h << "<h2>Class probabilities</h2>\n<table>\n<tr><th>Class</th><th>Probability</th></tr>\n";
  for (ClassLabel c : kAllClasses) {
    h << "<tr><td>" << display_name(c) << "</td><td>" << percent(report.distribution.probability(c))
      << "</td></tr>\n";
  }
  h << "</table>\n";

  h << "<h2>Possible causes</h2>\n";
  for (const auto& cause : report.probable_causes) {
    h << "<div class=\"cause\">\n<h3>" << display_name(cause.label) << " (" << percent(cause.probability)
      << ")</h3>\n<p>" << escape_html(cause.narrative) << "</p>\n</div>\n";
  }

  h << "<h2>Recommended measures</h2>\n";
  std::map<RemediationLevel, std::vector<const Suggestion*>> by_level;
  for (const auto& s : report.recommendations) by_level[s.entry.level].push_back(&s);
  for (const auto& [level, items] : by_level) {
    h << "<h3>" << to_string(level) << " level</h3>\n<ol>\n";
    for (const Suggestion* s : items) {
      char score[32];
      std::snprintf(score, sizeof(score), "%.4f", s->score);
      h << "<li><strong>" << escape_html(s->entry.title) << "</strong> (score " << score << ")<br />"
        << escape_html(s->entry.detail);
      for (const auto& link : s->entry.links) {
        h << " <a href=\"" << escape_html(link) << "\">" << escape_html(link) << "</a>";
      }
      h << "</li>\n";
    }
    h << "</ol>\n";
  }
  h << "<p class=\"noprint\">Use the browser print function to produce a PDF handout.</p>\n";
  h << "</body>\n</html>\n";
  return h.str();
}

IncidentReport parse_structured_report(std::string_view text) {
  IncidentReport r;
  try {
    const auto j = json::parse(text);
    r.incident_id = j.at("incident_id").get<std::string>();
    auto t = parse_utc(j.at("created_at").get<std::string>());
    if (!t) throw ValidationError("created_at", "bad timestamp");
    r.created_at = *t;
    r.flows_covered = j.at("flows_covered").get<std::vector<std::int64_t>>();
    std::array<double, kNumClasses> p{};
    for (ClassLabel c : kAllClasses) {
      p[static_cast<std::size_t>(to_index(c))] = j.at("distribution").at(std::string(to_string(c))).get<double>();
    }
    r.distribution = ClassDistribution::from_probabilities(p);
    auto predicted = label_from_string(j.at("predicted").get<std::string>());
    if (!predicted) throw ValidationError("predicted", "unknown class");
    r.distribution.predicted = *predicted;
    for (const auto& c : j.at("probable_causes")) {
      auto label = label_from_string(c.at("class").get<std::string>());
      if (!label) throw ValidationError("probable_causes", "unknown class");
      r.probable_causes.push_back({*label, c.at("probability").get<double>(),
                                   c.at("narrative").get<std::string>()});
    }
    for (const auto& s : j.at("recommendations")) {
      r.recommendations.push_back({s.at("entry").get<RemediationEntry>(), s.at("score").get<double>()});
    }
    r.management_summary = j.at("management_summary").get<std::string>();
    r.model_version = j.at("model_version").get<std::string>();
    r.kb_version = j.at("kb_version").get<std::string>();
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("malformed structured report: ") + e.what());
  }
  return r;
}

}  // namespace flowguard
