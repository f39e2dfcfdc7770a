#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flowguard/flow_model.hpp"
#include "flowguard/neuralnet.hpp"
#include "flowguard/rating.hpp"

namespace flowguard {

enum class RemediationLevel { hardware, software, organizational };

std::string_view to_string(RemediationLevel level);
std::optional<RemediationLevel> remediation_level_from_string(std::string_view name);

struct RemediationEntry {
  std::string recommendation_id;
  std::string title;
  std::string detail;
  RemediationLevel level = RemediationLevel::software;
  std::vector<ClassLabel> applicable_classes;
  double base_rank = 0.5;       // curation weight in [0,1]
  double feedback_score = 3.0;  // running mean of ratings, seeded with one pseudo-rating of 3
  std::size_t rating_count = 1;  // includes the pseudo-rating
  std::vector<std::string> links;

  bool applies_to(ClassLabel label) const;
  friend bool operator==(const RemediationEntry&, const RemediationEntry&) = default;
};

/// Per-class prose used by reports: what the cause means and what management should do.
struct ClassGuidance {
  std::string cause_narrative;
  std::string management_summary;

  friend bool operator==(const ClassGuidance&, const ClassGuidance&) = default;
};

inline constexpr int kKnowledgeBaseFormatVersion = 1;

struct KnowledgeBase {
  std::string version;
  std::vector<RemediationEntry> entries;
  std::map<ClassLabel, ClassGuidance> guidance;

  /// Unique ids, non-empty applicable classes, base_rank in [0,1],
  /// feedback_score in [1,5], and at least one entry per class.
  void validate() const;
  const RemediationEntry* find(std::string_view id) const;

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;
};

/// Best-practice entries shipped with the tool.
KnowledgeBase default_knowledge_base();

struct Suggestion {
  RemediationEntry entry;
  double score = 0.0;

  friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

/// score = (sum of p_c over applicable classes) * base_rank * feedback_score / 3,
/// descending, ties broken by recommendation_id, at most top_n results.
std::vector<Suggestion> suggest(const ClassDistribution& dist, const KnowledgeBase& kb,
                                std::size_t top_n);

/// Folds one rating into the entry's running-mean feedback score.
KnowledgeBase apply_rating(KnowledgeBase kb, const Rating& rating);

void to_json(nlohmann::json& j, const KnowledgeBase& kb);
void from_json(const nlohmann::json& j, KnowledgeBase& kb);
void to_json(nlohmann::json& j, const RemediationEntry& e);
void from_json(const nlohmann::json& j, RemediationEntry& e);

void save_knowledge_base(const std::filesystem::path& path, const KnowledgeBase& kb);
KnowledgeBase load_knowledge_base(const std::filesystem::path& path);

}  // namespace flowguard
