#include "flowguard/feedback.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <tuple>

#include "flowguard/checksum.hpp"
#include "flowguard/dataset_io.hpp"
#include "flowguard/errors.hpp"

namespace flowguard {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kOriginalFile = "original.dataset";
constexpr const char* kRatingsFile = "ratings.jsonl";

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << bytes;
    if (!out.flush()) throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

auto rating_key(const Rating& r) {
  return std::make_tuple(r.incident_id, r.recommendation_id, r.timestamp);
}

}  // namespace

std::string_view to_string(TrainingSetStatus status) {
  switch (status) {
    case TrainingSetStatus::intact:
      return "intact";
    case TrainingSetStatus::incremental_missing:
      return "incremental_missing";
    case TrainingSetStatus::original_missing:
      return "original_missing";
  }
  return "intact";
}

std::string_view to_string(TrainMode mode) {
  return mode == TrainMode::retrain ? "retrain" : "standard";
}

TrainingStore::TrainingStore(fs::path dir, Manifest manifest)
    : dir_(std::move(dir)), manifest_(std::move(manifest)) {}

TrainingStore TrainingStore::create(const fs::path& dir, const Dataset& original) {
  if (original.empty()) throw EmptyDatasetError("original training set must not be empty");
  fs::create_directories(dir);
  if (fs::exists(dir / kManifestFile)) {
    throw Error("training store already exists at " + dir.string());
  }
  Dataset orig = original;
  orig.provenance = Provenance::original;
  const std::string bytes = serialize_dataset(orig);
  write_file_atomic(dir / kOriginalFile, bytes);
  Manifest m;
  m.original_file = kOriginalFile;
  m.original_sha256 = sha256_hex(bytes);
  TrainingStore store(dir, std::move(m));
  store.write_manifest();
  return store;
}

TrainingStore TrainingStore::open(const fs::path& dir) {
  auto text = read_file(dir / kManifestFile);
  if (!text) {
    throw UnrecoverableStoreError("training store manifest missing in " + dir.string() +
                                  "; the original set cannot be verified");
  }
  Manifest m;
  try {
    const auto doc = json::parse(*text);
    m.original_file = doc.at("original").at("file").get<std::string>();
    m.original_sha256 = doc.at("original").at("sha256").get<std::string>();
    for (const auto& inc : doc.at("incremental")) {
      m.incrementals.emplace_back(inc.at("file").get<std::string>(),
                                  inc.at("sha256").get<std::string>());
    }
    m.ratings_folded = doc.value("ratings_folded", std::size_t{0});
  } catch (const json::exception& e) {
    throw UnrecoverableStoreError("training store manifest is corrupt: " + std::string(e.what()));
  }
  return TrainingStore(dir, std::move(m));
}

void TrainingStore::write_manifest() const {
  json inc = json::array();
  for (const auto& [file, sha] : manifest_.incrementals) inc.push_back({{"file", file}, {"sha256", sha}});
  json doc = {{"format_version", 1},
              {"original", {{"file", manifest_.original_file}, {"sha256", manifest_.original_sha256}}},
              {"incremental", inc},
              {"ratings_folded", manifest_.ratings_folded}};
  write_file_atomic(dir_ / kManifestFile, doc.dump(2) + "\n");
}

fs::path TrainingStore::original_path() const { return dir_ / manifest_.original_file; }

std::vector<fs::path> TrainingStore::incremental_paths() const {
  std::vector<fs::path> out;
  for (const auto& [file, sha] : manifest_.incrementals) out.push_back(dir_ / file);
  return out;
}

std::string TrainingStore::original_checksum() const { return manifest_.original_sha256; }

Dataset TrainingStore::load_original() const {
  auto bytes = read_file(original_path());
  if (!bytes) throw UnrecoverableStoreError("original training set is missing: " + original_path().string());
  if (sha256_hex(*bytes) != manifest_.original_sha256) {
    throw UnrecoverableStoreError("original training set failed its checksum: " + original_path().string());
  }
  std::istringstream in(*bytes);
  return read_dataset(in);
}

std::vector<Dataset> TrainingStore::load_incrementals() const {
  std::vector<Dataset> out;
  for (const auto& [file, sha] : manifest_.incrementals) {
    auto bytes = read_file(dir_ / file);
    if (!bytes) throw CorruptionError("incremental set missing: " + file);
    if (sha256_hex(*bytes) != sha) throw CorruptionError("incremental set failed its checksum: " + file);
    std::istringstream in(*bytes);
    out.push_back(read_dataset(in));
  }
  return out;
}

std::string TrainingStore::add_incremental(const Dataset& update) {
  if (update.empty()) return {};
  std::lock_guard lock(*mutex_);
  Dataset ds = update;
  ds.provenance = Provenance::feedback_update;
  char name[40];
  std::snprintf(name, sizeof(name), "incremental-%04zu.dataset", manifest_.incrementals.size() + 1);
  const std::string bytes = serialize_dataset(ds);
  write_file_atomic(dir_ / name, bytes);
  manifest_.incrementals.emplace_back(name, sha256_hex(bytes));
  write_manifest();
  return name;
}

std::vector<Rating> TrainingStore::read_ratings() const {
  std::vector<Rating> out;
  std::ifstream in(dir_ / kRatingsFile);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line).get<Rating>());
    } catch (const json::exception& e) {
      throw CorruptionError("rating log line " + std::to_string(out.size() + 1) + " is malformed");
    }
  }
  return out;
}

bool TrainingStore::append_rating(const Rating& rating) {
  std::lock_guard lock(*mutex_);
  const auto key = rating_key(rating);
  for (const auto& r : read_ratings()) {
    if (rating_key(r) == key) return false;
  }
  std::ofstream out(dir_ / kRatingsFile, std::ios::app);
  if (!out) throw Error("cannot append to rating log in " + dir_.string());
  out << json(rating).dump() << '\n';
  if (!out.flush()) throw Error("failed appending to rating log");
  return true;
}

std::vector<Rating> TrainingStore::ratings() const {
  std::lock_guard lock(*mutex_);
  return read_ratings();
}

std::vector<Rating> TrainingStore::pending_ratings() const {
  auto all = ratings();
  const std::size_t folded = std::min(manifest_.ratings_folded, all.size());
  return std::vector<Rating>(all.begin() + static_cast<std::ptrdiff_t>(folded), all.end());
}

void TrainingStore::mark_ratings_folded(std::size_t count) {
  std::lock_guard lock(*mutex_);
  manifest_.ratings_folded += count;
  write_manifest();
}

Acknowledgement record_rating(TrainingStore& store, const IncidentResolver& incidents,
                              const Rating& rating) {
  validate_rating(rating);
  if (!incidents.has_incident(rating.incident_id)) {
    throw NotFoundError("unknown incident " + rating.incident_id);
  }
  if (!incidents.has_recommendation(rating.incident_id, rating.recommendation_id)) {
    throw NotFoundError("incident " + rating.incident_id + " has no recommendation " +
                        rating.recommendation_id);
  }
  if (!incidents.resolve_flow(rating.incident_id, rating.flow_index)) {
    throw NotFoundError("incident " + rating.incident_id + " has no flow " +
                        std::to_string(rating.flow_index));
  }
  const bool stored = store.append_rating(rating);
  return {stored ? RecordOutcome::stored : RecordOutcome::duplicate, rating};
}

Dataset build_training_update(const IncidentResolver& incidents, std::span<const Rating> ratings) {
  Dataset update;
  update.provenance = Provenance::feedback_update;
  for (const auto& r : ratings) {
    auto fv = incidents.resolve_flow(r.incident_id, r.flow_index);
    if (!fv) {
      throw NotFoundError("cannot resolve flow " + std::to_string(r.flow_index) + " of incident " +
                          r.incident_id);
    }
    update.push_back(*fv, r.rated_class, static_cast<double>(r.score) / 3.0);
  }
  return update;
}

Dataset fold_pending_ratings(TrainingStore& store, const IncidentResolver& incidents) {
  const auto pending = store.pending_ratings();
  Dataset update = build_training_update(incidents, pending);
  if (!update.empty()) {
    store.add_incremental(update);
    store.mark_ratings_folded(pending.size());
  }
  return update;
}

TrainingSetStatus check_training_set(const TrainingStore& store) {
  store.load_original();
  for (const auto& path : store.incremental_paths()) {
    if (!fs::exists(path)) return TrainingSetStatus::incremental_missing;
  }
  try {
    store.load_incrementals();
  } catch (const CorruptionError&) {
    return TrainingSetStatus::incremental_missing;
  }
  return TrainingSetStatus::intact;
}

RetrainResult retrain(const TrainingStore& store, const Network& net, const TrainConfig& config) {
  RetrainResult result;
  result.status = check_training_set(store);
  const Dataset original = store.load_original();
  if (result.status == TrainingSetStatus::intact) {
    const auto incrementals = store.load_incrementals();
    std::vector<const Dataset*> parts{&original};
    for (const auto& d : incrementals) parts.push_back(&d);
    const Dataset merged = merge_datasets(parts);
    result.mode = TrainMode::standard;
    result.dataset_size = merged.size();
    std::tie(result.net, result.report) = train(net, merged, config);
  } else {
    result.mode = TrainMode::retrain;
    result.dataset_size = original.size();
    Network fresh = Network::initialize(net.layer_sizes, net.alpha, config.seed);
    std::tie(result.net, result.report) = train(std::move(fresh), original, config);
  }
  return result;
}

}  // namespace flowguard
