#include "flowguard/incidents.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>

#include "flowguard/errors.hpp"

namespace flowguard {

using json = nlohmann::json;

std::string_view to_string(IncidentStatus status) {
  switch (status) {
    case IncidentStatus::open:
      return "open";
    case IncidentStatus::acknowledged:
      return "acknowledged";
    case IncidentStatus::resolved:
      return "resolved";
  }
  return "open";
}

std::optional<IncidentStatus> incident_status_from_string(std::string_view name) {
  if (name == "open") return IncidentStatus::open;
  if (name == "acknowledged") return IncidentStatus::acknowledged;
  if (name == "resolved") return IncidentStatus::resolved;
  return std::nullopt;
}

bool valid_transition(IncidentStatus from, IncidentStatus to) {
  return static_cast<int>(to) >= static_cast<int>(from);
}

double IncidentRecord::risk() const {
  return std::max(distribution.probability(ClassLabel::service_incident),
                  distribution.probability(ClassLabel::dos_attack));
}

std::vector<std::int64_t> IncidentRecord::flow_indices() const {
  std::vector<std::int64_t> out;
  out.reserve(flows.size());
  for (const auto& f : flows) out.push_back(f.flow_index);
  return out;
}

void to_json(json& j, const IncidentRecord& r) {
  json flows = json::array();
  for (const auto& f : r.flows) flows.push_back({{"flow_index", f.flow_index}, {"features", f.values}});
  json sugg = json::array();
  for (const auto& s : r.suggestions) sugg.push_back({{"entry", s.entry}, {"score", s.score}});
  j = json{{"incident_id", r.incident_id},
           {"created_at", format_utc(r.created_at)},
           {"flows", flows},
           {"distribution", r.distribution.p},
           {"suggestions", sugg},
           {"model_version", r.model_version},
           {"status", std::string(to_string(r.status))}};
}

void from_json(const json& j, IncidentRecord& r) {
  r.incident_id = j.at("incident_id").get<std::string>();
  auto t = parse_utc(j.at("created_at").get<std::string>());
  if (!t) throw CorruptionError("incident " + r.incident_id + " has a bad timestamp");
  r.created_at = *t;
  r.flows.clear();
  for (const auto& f : j.at("flows")) {
    FeatureVector fv;
    fv.flow_index = f.at("flow_index").get<std::int64_t>();
    fv.values = f.at("features").get<std::array<double, kNumFeatures>>();
    r.flows.push_back(fv);
  }
  r.distribution = ClassDistribution::from_probabilities(
      j.at("distribution").get<std::array<double, kNumClasses>>());
  r.suggestions.clear();
  for (const auto& s : j.at("suggestions")) {
    r.suggestions.push_back({s.at("entry").get<RemediationEntry>(), s.at("score").get<double>()});
  }
  r.model_version = j.value("model_version", std::string());
  auto status = incident_status_from_string(j.at("status").get<std::string>());
  if (!status) throw CorruptionError("incident " + r.incident_id + " has an unknown status");
  r.status = *status;
}

ClassDistribution aggregate_distribution(const std::vector<ClassDistribution>& parts) {
  std::array<double, kNumClasses> p{};
  if (parts.empty()) return ClassDistribution::from_probabilities(p);
  for (const auto& d : parts) {
    for (std::size_t k = 0; k < kNumClasses; ++k) p[k] += d.p[k];
  }
  for (double& v : p) v /= double(parts.size());
  return ClassDistribution::from_probabilities(p);
}

IncidentRepository::IncidentRepository(std::filesystem::path path) : path_(std::move(path)) {
  if (!path_.empty() && std::filesystem::exists(path_)) load();
}

void IncidentRepository::load() {
  std::ifstream in(path_);
  try {
    const auto doc = json::parse(in);
    incidents_ = doc.at("incidents").get<std::vector<IncidentRecord>>();
    next_id_ = doc.value("next_id", incidents_.size() + 1);
    idempotency_ = doc.value("idempotency_keys", std::map<std::string, std::vector<std::string>>{});
  } catch (const json::exception& e) {
    throw CorruptionError("incident file " + path_.string() + " is malformed: " + e.what());
  }
}

void IncidentRepository::persist() const {
  if (path_.empty()) return;
  json doc = {{"format_version", 1},
              {"next_id", next_id_},
              {"incidents", incidents_},
              {"idempotency_keys", idempotency_}};
  const auto tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << doc.dump() << '\n';
  }
  std::filesystem::rename(tmp, path_);
}

IncidentRecord IncidentRepository::create(std::vector<FeatureVector> flows, const ClassDistribution& dist,
                                          std::vector<Suggestion> suggestions, std::string model_version,
                                          UtcTime created_at) {
  std::unique_lock lock(mutex_);
  IncidentRecord r;
  char id[32];
  std::snprintf(id, sizeof(id), "INC-%06zu", next_id_++);
  r.incident_id = id;
  r.created_at = created_at;
  r.flows = std::move(flows);
  r.distribution = dist;
  r.suggestions = std::move(suggestions);
  r.model_version = std::move(model_version);
  incidents_.push_back(r);
  persist();
  return r;
}

std::optional<IncidentRecord> IncidentRepository::get(std::string_view incident_id) const {
  std::shared_lock lock(mutex_);
  for (const auto& r : incidents_) {
    if (r.incident_id == incident_id) return r;
  }
  return std::nullopt;
}

std::vector<IncidentRecord> IncidentRepository::list() const {
  std::shared_lock lock(mutex_);
  return incidents_;
}

IncidentRecord IncidentRepository::set_status(std::string_view incident_id, IncidentStatus status) {
  std::unique_lock lock(mutex_);
  for (auto& r : incidents_) {
    if (r.incident_id != incident_id) continue;
    if (!valid_transition(r.status, status)) {
      throw ValidationError("status", "cannot move incident from " + std::string(to_string(r.status)) +
                                          " to " + std::string(to_string(status)));
    }
    if (r.status != status) {
      r.status = status;
      persist();
    }
    return r;
  }
  throw NotFoundError("unknown incident " + std::string(incident_id));
}

std::optional<std::vector<std::string>> IncidentRepository::lookup_idempotency_key(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = idempotency_.find(key);
  if (it == idempotency_.end()) return std::nullopt;
  return it->second;
}

void IncidentRepository::remember_idempotency_key(const std::string& key, std::vector<std::string> ids) {
  std::unique_lock lock(mutex_);
  idempotency_[key] = std::move(ids);
  persist();
}

bool IncidentRepository::has_incident(std::string_view incident_id) const {
  return get(incident_id).has_value();
}

bool IncidentRepository::has_recommendation(std::string_view incident_id,
                                            std::string_view recommendation_id) const {
  auto r = get(incident_id);
  if (!r) return false;
  return std::any_of(r->suggestions.begin(), r->suggestions.end(), [&](const Suggestion& s) {
    return s.entry.recommendation_id == recommendation_id;
  });
}

std::optional<FeatureVector> IncidentRepository::resolve_flow(std::string_view incident_id,
                                                              std::int64_t flow_index) const {
  auto r = get(incident_id);
  if (!r) return std::nullopt;
  for (const auto& f : r->flows) {
    if (f.flow_index == flow_index) return f;
  }
  return std::nullopt;
}

}  // namespace flowguard
