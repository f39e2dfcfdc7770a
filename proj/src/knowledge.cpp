#include "flowguard/knowledge.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "flowguard/errors.hpp"

namespace flowguard {

using json = nlohmann::json;

namespace {

using C = ClassLabel;
using L = RemediationLevel;

RemediationEntry entry(std::string id, std::string title, std::string detail, L level,
                       std::vector<ClassLabel> classes, double base_rank,
                       std::vector<std::string> links = {}) {
  RemediationEntry e;
  e.recommendation_id = std::move(id);
  e.title = std::move(title);
  e.detail = std::move(detail);
  e.level = level;
  e.applicable_classes = std::move(classes);
  e.base_rank = base_rank;
  e.links = std::move(links);
  return e;
}

}  // namespace

std::string_view to_string(RemediationLevel level) {
  switch (level) {
    case L::hardware:
      return "hardware";
    case L::software:
      return "software";
    case L::organizational:
      return "organizational";
  }
  return "software";
}

std::optional<RemediationLevel> remediation_level_from_string(std::string_view name) {
  if (name == "hardware") return L::hardware;
  if (name == "software") return L::software;
  if (name == "organizational") return L::organizational;
  return std::nullopt;
}

bool RemediationEntry::applies_to(ClassLabel label) const {
  return std::find(applicable_classes.begin(), applicable_classes.end(), label) !=
         applicable_classes.end();
}

void KnowledgeBase::validate() const {
  if (entries.empty()) throw ValidationError("entries", "knowledge base has no entries");
  std::unordered_set<std::string> ids;
  for (const auto& e : entries) {
    if (e.recommendation_id.empty()) {
      throw ValidationError("recommendation_id", "entry without recommendation_id");
    }
    if (!ids.insert(e.recommendation_id).second) {
      throw ValidationError("recommendation_id", "duplicate recommendation_id " + e.recommendation_id);
    }
    if (e.applicable_classes.empty()) {
      throw ValidationError("applicable_classes", e.recommendation_id + " has no applicable classes");
    }
    if (!(e.base_rank >= 0.0 && e.base_rank <= 1.0)) {
      throw ValidationError("base_rank", e.recommendation_id + ": base_rank must be within [0,1]");
    }
    if (!(e.feedback_score >= kMinScore && e.feedback_score <= kMaxScore) || e.rating_count == 0) {
      throw ValidationError("feedback_score", e.recommendation_id + ": feedback_score must be within [1,5]");
    }
  }
  for (ClassLabel c : kAllClasses) {
    const bool covered = std::any_of(entries.begin(), entries.end(),
                                     [&](const RemediationEntry& e) { return e.applies_to(c); });
    if (!covered) {
      throw ValidationError("entries", "no entry for class " + std::string(to_string(c)));
    }
  }
}

const RemediationEntry* KnowledgeBase::find(std::string_view id) const {
  for (const auto& e : entries) {
    if (e.recommendation_id == id) return &e;
  }
  return nullptr;
}

KnowledgeBase default_knowledge_base() {
  KnowledgeBase kb;
  kb.version = "2026.1";
  kb.entries = {
      entry("dos-blacklist", "Temporarily blacklist attacking source addresses",
            "Add the offending source addresses to a time-limited block list at the perimeter "
            "firewall and review the list when the attack subsides.",
            L::software, {C::dos_attack}, 0.95),
      entry("dos-notify-provider", "Notify the upstream service provider",
            "Report the attack to the internet service provider with timestamps and targeted "
            "services so that filtering can be applied upstream.",
            L::organizational, {C::dos_attack}, 0.9),
      entry("dos-rate-limit", "Enable connection rate limiting and SYN cookies",
            "Activate per-source connection limits and SYN cookies on the edge devices and on the "
            "affected web servers.",
            L::software, {C::dos_attack}, 0.8),
      entry("dos-scrubbing", "Route traffic through a scrubbing appliance",
            "Divert inbound traffic for the targeted services through dedicated filtering "
            "hardware or a provider scrubbing centre.",
            L::hardware, {C::dos_attack}, 0.6),
      entry("svc-reboot", "Reboot the affected servers",
            "Restart the servers that host the failing service after capturing their current "
            "logs; verify the service answers afterwards.",
            L::hardware, {C::service_incident}, 0.9),
      entry("svc-inspect-logs", "Inspect service logs and restart failed daemons",
            "Check the web server and application logs for crashes, resource exhaustion or "
            "configuration errors and restart the failed processes.",
            L::software, {C::service_incident}, 0.85),
      entry("firewall-ruleset-review", "Review firewall rulesets",
            "Compare the active firewall rules with the documented baseline; look for rules that "
            "drop legitimate traffic or leave the service exposed.",
            L::software, {C::service_incident, C::dos_attack}, 0.75),
      entry("svc-check-dependencies", "Check upstream dependencies of the service",
            "Verify name resolution, databases and storage backends the service relies on.",
            L::software, {C::service_incident}, 0.7),
      entry("normal-no-action", "No action required; continue monitoring",
            "The traffic matches the expected behaviour. Keep the monitoring in place.",
            L::organizational, {C::normal_traffic}, 0.9),
      entry("normal-update-baseline", "Add confirmed benign flows to the traffic baseline",
            "Mark the flows as benign so that future analyses treat similar traffic as normal.",
            L::software, {C::normal_traffic}, 0.6),
      entry("normal-close-ticket", "Document the analysis and close the ticket",
            "Record the classification result in the ticketing system and close the case.",
            L::organizational, {C::normal_traffic}, 0.5),
      entry("preserve-evidence", "Preserve flow records for the incident file",
            "Export the flow records and this report to the incident file as a first step of "
            "forensic documentation.",
            L::organizational, {C::service_incident, C::dos_attack}, 0.5),
  };
  kb.guidance = {
      {C::normal_traffic,
       {"The observed flows match regular user access to the provided services.",
        "The analysed traffic is regular business activity. No action required beyond routine "
        "monitoring."}},
      {C::service_incident,
       {"Connections reach the service but fail or stall, which points to a malfunctioning or "
        "overloaded service rather than an attack.",
        "A service disruption is likely. Operations staff should restore the affected service; "
        "expect limited availability until it is restarted and verified."}},
      {C::dos_attack,
       {"A small set of sources floods the service with one-sided connection attempts at very "
        "high rates, the signature of a denial-of-service attack.",
        "A denial-of-service attack against company services is likely under way. Approve "
        "temporary blocking of the attacking sources and inform the service provider; consider "
        "notifying affected customers."}},
  };
  return kb;
}

std::vector<Suggestion> suggest(const ClassDistribution& dist, const KnowledgeBase& kb,
                                std::size_t top_n) {
  if (kb.entries.empty()) throw ValidationError("entries", "knowledge base is empty");
  std::vector<Suggestion> out;
  out.reserve(kb.entries.size());
  for (const auto& e : kb.entries) {
    double mass = 0.0;
    for (ClassLabel c : e.applicable_classes) mass += dist.probability(c);
    out.push_back({e, mass * e.base_rank * (e.feedback_score / 3.0)});
  }
  std::sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entry.recommendation_id < b.entry.recommendation_id;
  });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

KnowledgeBase apply_rating(KnowledgeBase kb, const Rating& rating) {
  validate_rating(rating);
  for (auto& e : kb.entries) {
    if (e.recommendation_id == rating.recommendation_id) {
      const double n = static_cast<double>(e.rating_count);
      e.feedback_score = (e.feedback_score * n + rating.score) / (n + 1.0);
      ++e.rating_count;
      return kb;
    }
  }
  throw NotFoundError("unknown recommendation_id " + rating.recommendation_id);
}

void to_json(json& j, const RemediationEntry& e) {
  std::vector<std::string> classes;
  for (ClassLabel c : e.applicable_classes) classes.emplace_back(to_string(c));
  j = json{{"recommendation_id", e.recommendation_id},
           {"title", e.title},
           {"detail", e.detail},
           {"level", std::string(to_string(e.level))},
           {"applicable_classes", classes},
           {"base_rank", e.base_rank},
           {"feedback_score", e.feedback_score},
           {"rating_count", e.rating_count},
           {"links", e.links}};
}

void from_json(const json& j, RemediationEntry& e) {
  e.recommendation_id = j.at("recommendation_id").get<std::string>();
  e.title = j.at("title").get<std::string>();
  e.detail = j.value("detail", std::string());
  const auto level = j.at("level").get<std::string>();
  auto lv = remediation_level_from_string(level);
  if (!lv) throw ValidationError("level", "unknown remediation level '" + level + "'");
  e.level = *lv;
  e.applicable_classes.clear();
  for (const auto& c : j.at("applicable_classes")) {
    auto label = label_from_alias(c.get<std::string>());
    if (!label) throw ValidationError("applicable_classes", "unknown class " + c.dump());
    e.applicable_classes.push_back(*label);
  }
  e.base_rank = j.at("base_rank").get<double>();
  e.feedback_score = j.value("feedback_score", 3.0);
  e.rating_count = j.value("rating_count", std::size_t{1});
  e.links = j.value("links", std::vector<std::string>{});
}

void to_json(json& j, const KnowledgeBase& kb) {
  json guidance = json::object();
  for (const auto& [label, g] : kb.guidance) {
    guidance[std::string(to_string(label))] = {{"cause_narrative", g.cause_narrative},
                                               {"management_summary", g.management_summary}};
  }
  j = json{{"format_version", kKnowledgeBaseFormatVersion},
           {"version", kb.version},
           {"entries", kb.entries},
           {"guidance", guidance}};
}

void from_json(const json& j, KnowledgeBase& kb) {
  const int fv = j.value("format_version", kKnowledgeBaseFormatVersion);
  if (fv != kKnowledgeBaseFormatVersion) {
    throw VersionError("knowledge base format_version " + std::to_string(fv) + " is not supported");
  }
  kb.version = j.at("version").get<std::string>();
  kb.entries = j.at("entries").get<std::vector<RemediationEntry>>();
  kb.guidance.clear();
  if (j.contains("guidance")) {
    for (const auto& [name, g] : j.at("guidance").items()) {
      auto label = label_from_string(name);
      if (!label) throw ValidationError("guidance", "unknown class " + name);
      kb.guidance[*label] = {g.value("cause_narrative", std::string()),
                             g.value("management_summary", std::string())};
    }
  }
}

void save_knowledge_base(const std::filesystem::path& path, const KnowledgeBase& kb) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out << json(kb).dump(2) << '\n';
    if (!out.flush()) throw Error("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

KnowledgeBase load_knowledge_base(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open knowledge base " + path.string());
  KnowledgeBase kb;
  try {
    kb = json::parse(in).get<KnowledgeBase>();
  } catch (const json::exception& e) {
    throw CorruptionError("knowledge base " + path.string() + " is malformed: " + e.what());
  }
  kb.validate();
  return kb;
}

}  // namespace flowguard
