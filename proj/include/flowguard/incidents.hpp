#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flowguard/feedback.hpp"
#include "flowguard/knowledge.hpp"
#include "flowguard/neuralnet.hpp"

namespace flowguard {

enum class IncidentStatus { open, acknowledged, resolved };
std::string_view to_string(IncidentStatus status);
std::optional<IncidentStatus> incident_status_from_string(std::string_view name);
/// open -> acknowledged -> resolved, plus open -> resolved; staying put is allowed.
bool valid_transition(IncidentStatus from, IncidentStatus to);

struct IncidentRecord {
  std::string incident_id;
  UtcTime created_at{};
  std::vector<FeatureVector> flows;
  ClassDistribution distribution;
  std::vector<Suggestion> suggestions;
  std::string model_version;
  IncidentStatus status = IncidentStatus::open;

  std::string report_ref() const { return "/api/reports/" + incident_id; }
  /// Highest probability over the non-normal classes; used for queue ordering.
  double risk() const;
  std::vector<std::int64_t> flow_indices() const;
};

void to_json(nlohmann::json& j, const IncidentRecord& r);
void from_json(const nlohmann::json& j, IncidentRecord& r);

/// Mean of the per-flow distributions.
ClassDistribution aggregate_distribution(const std::vector<ClassDistribution>& parts);

/// Thread-safe incident registry persisted as one JSON document. Implements
/// the lookups the feedback loop needs.
class IncidentRepository : public IncidentResolver {
 public:
  /// In-memory only when path is empty.
  explicit IncidentRepository(std::filesystem::path path = {});

  IncidentRecord create(std::vector<FeatureVector> flows, const ClassDistribution& dist,
                        std::vector<Suggestion> suggestions, std::string model_version,
                        UtcTime created_at);
  std::optional<IncidentRecord> get(std::string_view incident_id) const;
  std::vector<IncidentRecord> list() const;
  /// Throws NotFoundError or ValidationError (illegal transition).
  IncidentRecord set_status(std::string_view incident_id, IncidentStatus status);

  /// Replay protection for uploads: remembers which incidents a client key produced.
  std::optional<std::vector<std::string>> lookup_idempotency_key(const std::string& key) const;
  void remember_idempotency_key(const std::string& key, std::vector<std::string> incident_ids);

  bool has_incident(std::string_view incident_id) const override;
  bool has_recommendation(std::string_view incident_id,
                          std::string_view recommendation_id) const override;
  std::optional<FeatureVector> resolve_flow(std::string_view incident_id,
                                            std::int64_t flow_index) const override;

 private:
  void load();
  void persist() const;  // caller holds the exclusive lock

  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::vector<IncidentRecord> incidents_;
  std::map<std::string, std::vector<std::string>> idempotency_;
  std::size_t next_id_ = 1;
};

}  // namespace flowguard
