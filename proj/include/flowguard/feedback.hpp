#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowguard/flow_model.hpp"
#include "flowguard/neuralnet.hpp"
#include "flowguard/rating.hpp"
#include "flowguard/training.hpp"

namespace flowguard {

/// Lookup of incidents and their flows, implemented by the incident repository.
class IncidentResolver {
 public:
  virtual ~IncidentResolver() = default;
  virtual bool has_incident(std::string_view incident_id) const = 0;
  virtual bool has_recommendation(std::string_view incident_id,
                                  std::string_view recommendation_id) const = 0;
  virtual std::optional<FeatureVector> resolve_flow(std::string_view incident_id,
                                                    std::int64_t flow_index) const = 0;
};

enum class TrainingSetStatus { intact, incremental_missing, original_missing };
std::string_view to_string(TrainingSetStatus status);

/// Directory-backed training sets plus the rating log:
///
///   manifest.json          set files, their SHA-256, folded-rating count
///   original.dataset       immutable after create()
///   incremental-NNNN.dataset
///   ratings.jsonl          append-only, one rating per line
///
/// Writers are serialized by an internal mutex shared between copies.
class TrainingStore {
 public:
  static TrainingStore create(const std::filesystem::path& dir, const Dataset& original);
  static TrainingStore open(const std::filesystem::path& dir);

  const std::filesystem::path& directory() const { return dir_; }
  std::filesystem::path original_path() const;
  std::vector<std::filesystem::path> incremental_paths() const;
  std::string original_checksum() const;

  /// Verified load; throws UnrecoverableStoreError if missing or corrupted.
  Dataset load_original() const;
  /// Verified loads of every incremental set; throws CorruptionError on the first bad one.
  std::vector<Dataset> load_incrementals() const;
  /// Persists a feedback update as a new incremental set. Empty updates are ignored.
  /// Returns the new file name, or an empty string when nothing was written.
  std::string add_incremental(const Dataset& update);

  /// Appends a rating unless (incident_id, recommendation_id, timestamp) is already stored.
  /// Returns true when newly stored.
  bool append_rating(const Rating& rating);
  std::vector<Rating> ratings() const;
  /// Ratings not yet folded into an incremental set.
  std::vector<Rating> pending_ratings() const;
  void mark_ratings_folded(std::size_t count);

 private:
  struct Manifest {
    std::string original_file;
    std::string original_sha256;
    std::vector<std::pair<std::string, std::string>> incrementals;  // file, sha256
    std::size_t ratings_folded = 0;
  };

  TrainingStore(std::filesystem::path dir, Manifest manifest);
  void write_manifest() const;
  std::vector<Rating> read_ratings() const;

  std::filesystem::path dir_;
  Manifest manifest_;
  std::shared_ptr<std::mutex> mutex_ = std::make_shared<std::mutex>();
};

enum class RecordOutcome { stored, duplicate };

struct Acknowledgement {
  RecordOutcome outcome = RecordOutcome::stored;
  Rating rating;
};

/// Throws ValidationError for a malformed rating, NotFoundError for a dangling reference.
Acknowledgement record_rating(TrainingStore& store, const IncidentResolver& incidents,
                              const Rating& rating);

/// One sample per rating: label = rated_class, weight = score / 3.
Dataset build_training_update(const IncidentResolver& incidents, std::span<const Rating> ratings);

/// Builds an update from the store's pending ratings and persists it. Returns
/// the update (empty when there was nothing pending).
Dataset fold_pending_ratings(TrainingStore& store, const IncidentResolver& incidents);

/// Throws UnrecoverableStoreError when the original set is missing or corrupt;
/// otherwise reports whether every incremental set is present and intact.
TrainingSetStatus check_training_set(const TrainingStore& store);

enum class TrainMode { standard, retrain };
std::string_view to_string(TrainMode mode);

struct RetrainResult {
  Network net;
  TrainReport report;
  TrainMode mode = TrainMode::standard;
  TrainingSetStatus status = TrainingSetStatus::intact;
  std::size_t dataset_size = 0;
};

/// Intact store: continue training `net` on original + incrementals.
/// Missing or corrupted incremental: retrain mode, fresh parameters (config.seed)
/// trained on the original set only.
RetrainResult retrain(const TrainingStore& store, const Network& net, const TrainConfig& config);

}  // namespace flowguard
