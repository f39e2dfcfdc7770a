#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "flowguard/etl.hpp"
#include "flowguard/feedback.hpp"
#include "flowguard/incidents.hpp"
#include "flowguard/knowledge.hpp"
#include "flowguard/training.hpp"

namespace flowguard {

/// On-disk layout of a data directory shared by the CLI and the HTTP service.
struct Workspace {
  std::filesystem::path root;

  std::filesystem::path store_dir() const { return root / "store"; }
  std::filesystem::path incidents_file() const { return root / "incidents.json"; }
  std::filesystem::path kb_file() const { return root / "knowledge_base.json"; }
  std::filesystem::path model_file() const { return root / "model.weights.json"; }

  /// Loads the knowledge base, writing the default one first if absent.
  KnowledgeBase load_or_init_kb() const;
  bool has_store() const;
};

/// Groups flows by predicted class and records one incident per non-empty
/// group; the incident distribution is the mean of its flows' distributions.
std::vector<IncidentRecord> classify_and_record(IncidentRepository& incidents, const Network& net,
                                                const KnowledgeBase& kb,
                                                std::span<const FeatureVector> flows,
                                                std::size_t top_n, UtcTime now);

struct RatingSubmission {
  Acknowledgement ack;
  KnowledgeBase kb;  // after the rating was folded in (unchanged for duplicates)
};

/// Stores the rating, updates the entry's feedback score, and acknowledges an
/// open incident. Duplicates leave everything untouched.
RatingSubmission submit_rating(TrainingStore& store, IncidentRepository& incidents,
                               const KnowledgeBase& kb, const Rating& rating);

struct TrainingCycle {
  RetrainResult result;
  std::size_t folded_ratings = 0;
};

/// Folds pending ratings into a new incremental set and retrains.
TrainingCycle run_training_cycle(TrainingStore& store, const IncidentRepository& incidents,
                                 const Network& net, const TrainConfig& config);

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct ServiceConfig {
  Workspace workspace;
  std::filesystem::path model_path;  // defaults to workspace.model_file()
  TrainConfig train;
  std::size_t top_n = 5;
  std::size_t hidden1 = kDefaultHidden;
  std::size_t hidden2 = kDefaultHidden;
  MetricsCollection metrics = MetricsCollection::defaults();
  EtlOptions etl;
  std::function<UtcTime()> clock = utc_now;
  /// Runs on the training thread before any work; lets callers observe or gate jobs.
  std::function<void()> on_training_start;
};

struct TrainingJob {
  std::size_t job_id = 0;
  std::string state = "idle";  // idle | running | succeeded | failed
  std::optional<TrainMode> mode;
  std::size_t dataset_size = 0;
  std::size_t folded_ratings = 0;
  std::optional<EpochStats> last_epoch;
  std::string error;
};

/// Request handling for the JSON API. Reads run concurrently against an
/// immutable model snapshot; training runs on one background thread and swaps
/// the snapshot atomically when it finishes.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(const HttpRequest& request);

  std::shared_ptr<const Network> model() const;
  bool training_running() const { return training_.load(); }
  void wait_for_training();
  TrainingJob training_job() const;
  const IncidentRepository& incidents() const { return incidents_; }

 private:
  HttpResponse post_flows(const HttpRequest& req);
  HttpResponse list_incidents() const;
  HttpResponse get_incident(const std::string& id) const;
  HttpResponse post_rating(const std::string& id, const HttpRequest& req);
  HttpResponse post_status(const std::string& id, const HttpRequest& req);
  HttpResponse post_train();
  HttpResponse get_train() const;
  HttpResponse get_report(const std::string& id, const HttpRequest& req) const;
  HttpResponse get_model() const;
  void training_main(std::size_t job_id);

  ServiceConfig config_;
  IncidentRepository incidents_;
  mutable std::mutex kb_mutex_;  // serializes rating and knowledge-base writes
  KnowledgeBase kb_;
  std::optional<TrainingStore> store_;
  mutable std::mutex model_mutex_;
  std::shared_ptr<const Network> model_;
  bool model_trained_ = false;
  std::atomic<bool> training_{false};
  mutable std::mutex job_mutex_;
  TrainingJob job_;
  std::size_t job_counter_ = 0;
  std::thread training_thread_;
};

/// HTTP front end for a Service. bind() with port 0 picks a free port.
class HttpServer {
 public:
  explicit HttpServer(Service& service, const std::filesystem::path& static_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocking HTTP listener. Serves the API under /api and, when static_dir is
/// set, the analyst console from that directory.
void serve_http(Service& service, const std::string& host, int port,
                const std::filesystem::path& static_dir = {});

}  // namespace flowguard
