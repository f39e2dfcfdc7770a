#include "flowguard/service.hpp"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>
#include <sstream>

#include "flowguard/errors.hpp"
#include "flowguard/flow_csv.hpp"
#include "flowguard/report.hpp"
#include "flowguard/weights_io.hpp"

namespace flowguard {

using json = nlohmann::json;

namespace {

HttpResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump(2) + "\n"};
}

HttpResponse error_response(int status, const std::string& message, json detail = json::object()) {
  detail["error"] = message;
  return json_response(status, detail);
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string seg;
  while (std::getline(ss, seg, '/')) {
    if (!seg.empty()) parts.push_back(seg);
  }
  return parts;
}

json distribution_json(const ClassDistribution& d) {
  json out = json::object();
  for (ClassLabel c : kAllClasses) out[std::string(to_string(c))] = d.probability(c);
  return out;
}

json incident_json(const IncidentRecord& r, const std::vector<Rating>* ratings) {
  json sugg = json::array();
  for (const auto& s : r.suggestions) {
    sugg.push_back({{"recommendation_id", s.entry.recommendation_id},
                    {"title", s.entry.title},
                    {"detail", s.entry.detail},
                    {"level", std::string(to_string(s.entry.level))},
                    {"score", s.score}});
  }
  json out = {{"incident_id", r.incident_id},
              {"created_at", format_utc(r.created_at)},
              {"status", std::string(to_string(r.status))},
              {"distribution", distribution_json(r.distribution)},
              {"predicted", std::string(to_string(r.distribution.predicted))},
              {"risk", r.risk()},
              {"flows", r.flow_indices()},
              {"suggestions", sugg},
              {"report_ref", r.report_ref()},
              {"model_version", r.model_version}};
  if (ratings) {
    json rs = json::array();
    for (const auto& rating : *ratings) {
      if (rating.incident_id == r.incident_id) rs.push_back(rating);
    }
    out["ratings"] = rs;
  }
  return out;
}

json epoch_json(const EpochStats& e) {
  json out = {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"train_accuracy", e.train_accuracy}};
  if (e.validation_loss) out["validation_loss"] = *e.validation_loss;
  if (e.validation_accuracy) out["validation_accuracy"] = *e.validation_accuracy;
  return out;
}

}  // namespace

KnowledgeBase Workspace::load_or_init_kb() const {
  if (!std::filesystem::exists(kb_file())) {
    std::filesystem::create_directories(root);
    save_knowledge_base(kb_file(), default_knowledge_base());
  }
  return load_knowledge_base(kb_file());
}

bool Workspace::has_store() const { return std::filesystem::exists(store_dir() / "manifest.json"); }

std::vector<IncidentRecord> classify_and_record(IncidentRepository& incidents, const Network& net,
                                                const KnowledgeBase& kb,
                                                std::span<const FeatureVector> flows,
                                                std::size_t top_n, UtcTime now) {
  std::array<std::vector<FeatureVector>, kNumClasses> groups;
  std::array<std::vector<ClassDistribution>, kNumClasses> dists;
  for (const auto& fv : flows) {
    const auto d = predict(net, fv);
    const auto k = static_cast<std::size_t>(to_index(d.predicted));
    groups[k].push_back(fv);
    dists[k].push_back(d);
  }
  const std::string version = model_checksum(net);
  std::vector<IncidentRecord> created;
  // highest-risk groups first
  for (ClassLabel c : {ClassLabel::dos_attack, ClassLabel::service_incident, ClassLabel::normal_traffic}) {
    const auto k = static_cast<std::size_t>(to_index(c));
    if (groups[k].empty()) continue;
    const auto dist = aggregate_distribution(dists[k]);
    created.push_back(incidents.create(std::move(groups[k]), dist, suggest(dist, kb, top_n), version, now));
  }
  return created;
}

RatingSubmission submit_rating(TrainingStore& store, IncidentRepository& incidents,
                               const KnowledgeBase& kb, const Rating& rating) {
  RatingSubmission out{record_rating(store, incidents, rating), kb};
  if (out.ack.outcome == RecordOutcome::stored) {
    out.kb = apply_rating(kb, rating);
    auto incident = incidents.get(rating.incident_id);
    if (incident && incident->status == IncidentStatus::open) {
      incidents.set_status(rating.incident_id, IncidentStatus::acknowledged);
    }
  }
  return out;
}

TrainingCycle run_training_cycle(TrainingStore& store, const IncidentRepository& incidents,
                                 const Network& net, const TrainConfig& config) {
  TrainingCycle cycle;
  const auto update = fold_pending_ratings(store, incidents);
  cycle.folded_ratings = update.size();
  cycle.result = retrain(store, net, config);
  return cycle;
}

Service::Service(ServiceConfig config)
    : config_(std::move(config)), incidents_(config_.workspace.incidents_file()) {
  if (config_.model_path.empty()) config_.model_path = config_.workspace.model_file();
  std::filesystem::create_directories(config_.workspace.root);
  kb_ = config_.workspace.load_or_init_kb();
  if (config_.workspace.has_store()) store_ = TrainingStore::open(config_.workspace.store_dir());
  if (std::filesystem::exists(config_.model_path)) {
    model_ = std::make_shared<const Network>(load_weights(config_.model_path));
    model_trained_ = true;
  } else {
    model_ = std::make_shared<const Network>(Network::initialize(
        default_layer_sizes(config_.hidden1, config_.hidden2), kDefaultAlpha, config_.train.seed));
  }
}

Service::~Service() { wait_for_training(); }

void Service::wait_for_training() {
  if (training_thread_.joinable()) training_thread_.join();
}

std::shared_ptr<const Network> Service::model() const {
  std::lock_guard lock(model_mutex_);
  return model_;
}

TrainingJob Service::training_job() const {
  std::lock_guard lock(job_mutex_);
  return job_;
}

HttpResponse Service::handle(const HttpRequest& req) {
  const auto parts = split_path(req.path);
  try {
    if (parts.size() < 2 || parts[0] != "api") return error_response(404, "no such endpoint");
    const std::string& res = parts[1];
    if (res == "flows" && parts.size() == 2) {
      if (req.method == "POST") return post_flows(req);
    } else if (res == "incidents" && parts.size() == 2) {
      if (req.method == "GET") return list_incidents();
    } else if (res == "incidents" && parts.size() == 3) {
      if (req.method == "GET") return get_incident(parts[2]);
    } else if (res == "incidents" && parts.size() == 4 && parts[3] == "ratings") {
      if (req.method == "POST") return post_rating(parts[2], req);
    } else if (res == "incidents" && parts.size() == 4 && parts[3] == "status") {
      if (req.method == "POST") return post_status(parts[2], req);
    } else if (res == "train" && parts.size() == 2) {
      if (req.method == "POST") return post_train();
      if (req.method == "GET") return get_train();
    } else if (res == "reports" && parts.size() == 3) {
      if (req.method == "GET") return get_report(parts[2], req);
    } else if (res == "model" && parts.size() == 2) {
      if (req.method == "GET") return get_model();
    } else {
      return error_response(404, "no such endpoint");
    }
    return error_response(405, "method not allowed");
  } catch (const json::exception& e) {
    return error_response(400, std::string("malformed JSON body: ") + e.what());
  } catch (const RowError& e) {
    return error_response(400, e.what(), {{"row", e.row()}, {"column", e.column()}});
  } catch (const FormatError& e) {
    return error_response(400, e.what(), {{"column", e.column()}});
  } catch (const EmptyInputError& e) {
    return error_response(400, e.what());
  } catch (const ValidationError& e) {
    return error_response(422, e.what(), {{"field", e.field()}});
  } catch (const EmptyDatasetError& e) {
    return error_response(422, e.what());
  } catch (const NotFoundError& e) {
    return error_response(404, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

HttpResponse Service::post_flows(const HttpRequest& req) {
  std::string key;
  for (const auto& [name, value] : req.headers) {
    if (name.size() == 15 && std::equal(name.begin(), name.end(), "idempotency-key",
                                        [](char a, char b) { return std::tolower(static_cast<unsigned char>(a)) == b; })) {
      key = value;
    }
  }
  if (!key.empty()) {
    if (auto ids = incidents_.lookup_idempotency_key(key)) {
      json list = json::array();
      for (const auto& id : *ids) {
        if (auto r = incidents_.get(id)) list.push_back(incident_json(*r, nullptr));
      }
      return json_response(200, {{"incidents", list}, {"replayed", true}});
    }
  }

  std::istringstream in(req.body);
  const auto parsed = parse_flow_csv(in);
  json violations = json::array();
  for (const auto& r : parsed.records) {
    for (const auto& v : validate_flow(r).violations) {
      violations.push_back({{"flow_index", r.flow_index}, {"field", v.field}, {"message", v.message}});
    }
  }
  if (!violations.empty()) {
    return error_response(422, "flow validation failed", {{"violations", violations}});
  }
  const auto relevant = filter_relevant(parsed.records, config_.etl.allowed_protocols);
  if (relevant.empty()) throw EmptyDatasetError("every uploaded flow was filtered out as non-relevant");
  std::vector<FeatureVector> features;
  features.reserve(relevant.size());
  for (const auto& r : relevant) {
    features.push_back(to_feature_vector(r, config_.metrics, config_.etl.private_prefixes));
  }

  const auto net = model();
  KnowledgeBase kb;
  {
    std::lock_guard lock(kb_mutex_);
    kb = kb_;
  }
  const auto created = classify_and_record(incidents_, *net, kb, features, config_.top_n, config_.clock());
  std::vector<std::string> ids;
  json list = json::array();
  for (const auto& r : created) {
    ids.push_back(r.incident_id);
    list.push_back(incident_json(r, nullptr));
  }
  if (!key.empty()) incidents_.remember_idempotency_key(key, ids);
  return json_response(201, {{"incidents", list},
                             {"flows_received", parsed.records.size()},
                             {"flows_classified", relevant.size()},
                             {"flows_filtered", parsed.records.size() - relevant.size()},
                             {"warnings", parsed.warnings}});
}

HttpResponse Service::list_incidents() const {
  json list = json::array();
  for (const auto& r : incidents_.list()) list.push_back(incident_json(r, nullptr));
  return json_response(200, {{"incidents", list}});
}

HttpResponse Service::get_incident(const std::string& id) const {
  auto r = incidents_.get(id);
  if (!r) throw NotFoundError("unknown incident " + id);
  std::vector<Rating> ratings;
  if (store_) ratings = store_->ratings();
  return json_response(200, incident_json(*r, &ratings));
}

HttpResponse Service::post_rating(const std::string& id, const HttpRequest& req) {
  const auto body = json::parse(req.body);
  if (!body.is_object()) return error_response(400, "rating body must be a JSON object");
  auto incident = incidents_.get(id);
  if (!incident) throw NotFoundError("unknown incident " + id);
  if (!store_) throw ValidationError("store", "training store is not initialized; run 'flowguard init'");
  if (!body.contains("recommendation_id") || !body["recommendation_id"].is_string()) {
    return error_response(400, "recommendation_id (string) is required");
  }
  if (!body.contains("score") || !body["score"].is_number_integer()) {
    return error_response(400, "score (integer) is required");
  }

  Rating rating;
  rating.incident_id = id;
  rating.recommendation_id = body["recommendation_id"].get<std::string>();
  rating.score = body["score"].get<int>();
  rating.flow_index = body.contains("flow_index") ? body["flow_index"].get<std::int64_t>()
                                                  : incident->flows.front().flow_index;
  if (body.contains("rated_class")) {
    auto label = label_from_alias(body["rated_class"].get<std::string>());
    if (!label) throw ValidationError("rated_class", "unknown class");
    rating.rated_class = *label;
  } else {
    rating.rated_class = incident->distribution.predicted;
  }
  if (body.contains("timestamp")) {
    auto t = parse_utc(body["timestamp"].get<std::string>());
    if (!t) throw ValidationError("timestamp", "timestamp must be YYYY-MM-DDTHH:MM:SSZ");
    rating.timestamp = *t;
  } else {
    rating.timestamp = config_.clock();
  }
  if (body.contains("note") && body["note"].is_string()) rating.note = body["note"].get<std::string>();

  std::lock_guard lock(kb_mutex_);
  auto submission = submit_rating(*store_, incidents_, kb_, rating);
  if (submission.ack.outcome == RecordOutcome::stored) {
    save_knowledge_base(config_.workspace.kb_file(), submission.kb);
    kb_ = std::move(submission.kb);
  }
  const bool stored = submission.ack.outcome == RecordOutcome::stored;
  return json_response(stored ? 201 : 200,
                       {{"outcome", stored ? "stored" : "duplicate"},
                        {"rating", submission.ack.rating},
                        {"pending_ratings", store_->pending_ratings().size()}});
}

HttpResponse Service::post_status(const std::string& id, const HttpRequest& req) {
  const auto body = json::parse(req.body);
  if (!body.is_object() || !body.contains("status") || !body["status"].is_string()) {
    return error_response(400, "status (string) is required");
  }
  auto status = incident_status_from_string(body["status"].get<std::string>());
  if (!status) throw ValidationError("status", "status must be open, acknowledged or resolved");
  return json_response(200, incident_json(incidents_.set_status(id, *status), nullptr));
}

HttpResponse Service::post_train() {
  if (!store_) throw ValidationError("store", "training store is not initialized; run 'flowguard init'");
  bool expected = false;
  if (!training_.compare_exchange_strong(expected, true)) {
    return error_response(409, "a training job is already running", {{"job_id", training_job().job_id}});
  }
  wait_for_training();
  std::size_t job_id = 0;
  {
    std::lock_guard lock(job_mutex_);
    job_ = TrainingJob{};
    job_id = ++job_counter_;
    job_.job_id = job_id;
    job_.state = "running";
  }
  training_thread_ = std::thread([this, job_id] { training_main(job_id); });
  return json_response(202, {{"job_id", job_id}, {"state", "running"}});
}

void Service::training_main(std::size_t job_id) {
  try {
    if (config_.on_training_start) config_.on_training_start();
    auto current = model();
    auto cycle = run_training_cycle(*store_, incidents_, *current, config_.train);
    save_weights(cycle.result.net, config_.model_path);
    {
      std::lock_guard lock(model_mutex_);
      model_ = std::make_shared<const Network>(std::move(cycle.result.net));
      model_trained_ = true;
    }
    std::lock_guard lock(job_mutex_);
    job_.state = "succeeded";
    job_.mode = cycle.result.mode;
    job_.dataset_size = cycle.result.dataset_size;
    job_.folded_ratings = cycle.folded_ratings;
    if (!cycle.result.report.epochs.empty()) job_.last_epoch = cycle.result.report.epochs.back();
  } catch (const std::exception& e) {
    std::lock_guard lock(job_mutex_);
    job_.state = "failed";
    job_.error = e.what();
  }
  (void)job_id;
  training_.store(false);
}

HttpResponse Service::get_train() const {
  const auto job = training_job();
  json out = {{"job_id", job.job_id},
              {"state", job.state},
              {"dataset_size", job.dataset_size},
              {"folded_ratings", job.folded_ratings}};
  if (job.mode) out["mode"] = std::string(to_string(*job.mode));
  if (job.last_epoch) out["last_epoch"] = epoch_json(*job.last_epoch);
  if (!job.error.empty()) out["error"] = job.error;
  if (store_) out["pending_ratings"] = store_->pending_ratings().size();
  return json_response(200, out);
}

HttpResponse Service::get_report(const std::string& id, const HttpRequest& req) const {
  auto r = incidents_.get(id);
  if (!r) throw NotFoundError("unknown incident " + id);
  std::string format = "json";
  if (auto it = req.query.find("format"); it != req.query.end()) format = it->second;
  KnowledgeBase kb;
  {
    std::lock_guard lock(kb_mutex_);
    kb = kb_;
  }
  const auto report = generate_report(r->distribution, r->suggestions, kb,
                                      {r->incident_id, r->created_at, r->flow_indices(), r->model_version});
  const auto f = report_format_from_string(format);
  if (!f) throw ValidationError("format", "format must be html or json");
  return {200, *f == ReportFormat::html ? "text/html; charset=utf-8" : "application/json",
          render(report, *f)};
}

HttpResponse Service::get_model() const {
  const auto net = model();
  bool trained = false;
  {
    std::lock_guard lock(model_mutex_);
    trained = model_trained_;
  }
  json out = {{"layer_sizes", net->layer_sizes},
              {"alpha", net->alpha},
              {"model_version", model_checksum(*net)},
              {"dataset_checksum", net->dataset_checksum},
              {"trained", trained},
              {"training_running", training_running()}};
  {
    std::lock_guard lock(kb_mutex_);
    out["kb_version"] = kb_.version;
  }
  const auto job = training_job();
  if (job.last_epoch) out["last_training"] = epoch_json(*job.last_epoch);
  return json_response(200, out);
}

}  // namespace flowguard
