// flowguard command line: data preparation, training, incident handling and the HTTP service.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "flowguard/dataset_io.hpp"
#include "flowguard/errors.hpp"
#include "flowguard/etl.hpp"
#include "flowguard/feedback.hpp"
#include "flowguard/flow_csv.hpp"
#include "flowguard/incidents.hpp"
#include "flowguard/knowledge.hpp"
#include "flowguard/report.hpp"
#include "flowguard/service.hpp"
#include "flowguard/traffic_sim.hpp"
#include "flowguard/training.hpp"
#include "flowguard/weights_io.hpp"

namespace fg = flowguard;
using json = nlohmann::json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUnrecoverable = 3;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fg::NotFoundError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw fg::Error("cannot write " + path);
  return out;
}

// Accepts either a dataset file or a labeled flow CSV.
fg::Dataset load_training_data(const std::string& path) {
  auto in = open_input(path);
  if (fg::looks_like_dataset(in)) return fg::read_dataset(in);
  const auto parsed = fg::parse_flow_csv(in);
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
  return fg::build_dataset(fg::to_labeled_flows(parsed), fg::MetricsCollection::defaults());
}

std::vector<fg::FeatureVector> load_features(const std::string& path) {
  auto in = open_input(path);
  if (fg::looks_like_dataset(in)) return fg::read_dataset(in).features;
  const auto parsed = fg::parse_flow_csv(in);
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
  const fg::EtlOptions etl;
  const auto metrics = fg::MetricsCollection::defaults();
  std::vector<fg::FeatureVector> out;
  for (const auto& r : parsed.records) {
    const auto check = fg::validate_flow(r);
    if (!check.ok()) {
      const auto& v = check.violations.front();
      throw fg::ValidationError(v.field, "flow " + std::to_string(r.flow_index) + ": " + v.message);
    }
    if (!fg::is_relevant(r, etl.allowed_protocols)) continue;
    out.push_back(fg::to_feature_vector(r, metrics, etl.private_prefixes));
  }
  if (out.empty()) throw fg::EmptyDatasetError("no relevant flows in " + path);
  return out;
}

fg::ClassLabel parse_class(const std::string& name) {
  auto label = fg::label_from_alias(name);
  if (!label) throw fg::ValidationError("class", "unknown class '" + name + "'");
  return *label;
}

json distribution_json(const fg::ClassDistribution& d) {
  json out = json::object();
  for (auto c : fg::kAllClasses) out[std::string(fg::to_string(c))] = d.probability(c);
  return out;
}

void print_epochs(const fg::TrainReport& report) {
  if (report.epochs.empty()) return;
  const auto& last = report.epochs.back();
  std::printf("epochs=%zu train_loss=%.6f train_accuracy=%.4f", report.epochs.size(), last.train_loss,
              last.train_accuracy);
  if (last.validation_accuracy) std::printf(" validation_accuracy=%.4f", *last.validation_accuracy);
  std::printf("\n");
}

fg::Network load_workspace_model(const fg::Workspace& ws) {
  if (!std::filesystem::exists(ws.model_file())) {
    throw fg::NotFoundError("no model at " + ws.model_file().string() + "; run 'flowguard init' first");
  }
  return fg::load_weights(ws.model_file());
}

struct TrainFlags {
  std::size_t epochs = 200;
  std::uint64_t seed = 42;
  std::size_t batch = 32;
  double lr = 1e-3;
  double validation = 0.0;
  std::size_t hidden1 = fg::kDefaultHidden;
  std::size_t hidden2 = fg::kDefaultHidden;
  double alpha = fg::kDefaultAlpha;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--seed", seed, "Seed for initialization and shuffling")->capture_default_str();
    cmd->add_option("--batch-size", batch, "Mini-batch size")->capture_default_str();
    cmd->add_option("--learning-rate", lr, "ADAM step size")->capture_default_str();
    cmd->add_option("--validation", validation, "Held-out fraction in [0,1)")->capture_default_str();
    cmd->add_option("--hidden1", hidden1, "First hidden layer width")->capture_default_str();
    cmd->add_option("--hidden2", hidden2, "Second hidden layer width")->capture_default_str();
    cmd->add_option("--alpha", alpha, "Leaky ReLU slope (0 gives plain ReLU)")->capture_default_str();
  }

  fg::TrainConfig config() const {
    fg::TrainConfig c;
    c.epochs = epochs;
    c.seed = seed;
    c.batch_size = batch;
    c.validation_fraction = validation;
    c.adam.learning_rate = lr;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowguard: flow classification and incident handling support"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "flowguard 0.1.0");

  std::string data_dir = "flowguard-data";
  auto add_data_dir = [&](CLI::App* cmd) {
    cmd->add_option("--data-dir", data_dir, "Workspace directory")
        ->envname("FLOWGUARD_DATA_DIR")
        ->capture_default_str();
  };

  // ingest
  std::string ingest_in, ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Convert a labeled flow CSV into a dataset file");
  ingest->add_option("file", ingest_in, "Flow CSV")->required();
  ingest->add_option("--out", ingest_out, "Dataset file to write")->required();

  // simulate
  std::string sim_class = "all", sim_out;
  std::size_t sim_count = 100;
  std::uint64_t sim_seed = 7;
  auto* simulate = app.add_subcommand("simulate", "Generate labeled lab-scenario flows as CSV");
  simulate->add_option("--class", sim_class, "normal, service, dos or all")->capture_default_str();
  simulate->add_option("--count", sim_count, "Flows (per class for 'all')")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Generator seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "CSV file to write (stdout if omitted)");

  // train
  std::string train_data, train_out;
  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "Train a model from a dataset or labeled CSV");
  train->add_option("--data", train_data, "Dataset file or labeled flow CSV")->required();
  train->add_option("--out", train_out, "Weight file to write")->required();
  train_flags.add_to(train);

  // predict
  std::string pred_weights, pred_data;
  bool pred_json = false;
  auto* predict = app.add_subcommand("predict", "Classify flows with a saved model");
  predict->add_option("--weights", pred_weights, "Weight file")->required();
  predict->add_option("--data", pred_data, "Flow CSV or dataset file")->required();
  predict->add_flag("--json", pred_json, "Emit JSON lines");

  // init
  std::string init_data;
  TrainFlags init_flags;
  auto* init = app.add_subcommand("init", "Create a workspace: training store, knowledge base and model");
  add_data_dir(init);
  init->add_option("--data", init_data, "Original training set (dataset file or labeled CSV)")->required();
  init_flags.add_to(init);

  // classify
  std::string classify_flows;
  std::size_t classify_top = 5;
  auto* classify = app.add_subcommand("classify", "Classify uploaded flows and open incidents");
  add_data_dir(classify);
  classify->add_option("flows", classify_flows, "Flow CSV")->required();
  classify->add_option("--top", classify_top, "Remediations per incident")->capture_default_str();

  // incidents
  auto* incidents_cmd = app.add_subcommand("incidents", "List incidents");
  add_data_dir(incidents_cmd);

  // feedback add
  std::string fb_incident, fb_rec, fb_class, fb_note, fb_time;
  int fb_score = 0;
  std::int64_t fb_flow = -1;
  auto* feedback = app.add_subcommand("feedback", "Analyst feedback");
  feedback->require_subcommand(1);
  auto* fb_add = feedback->add_subcommand("add", "Rate a suggested remediation");
  add_data_dir(fb_add);
  fb_add->add_option("--incident", fb_incident, "Incident id")->required();
  fb_add->add_option("--recommendation", fb_rec, "Recommendation id")->required();
  fb_add->add_option("--score", fb_score, "Efficiency score 1..5")->required();
  fb_add->add_option("--class", fb_class, "Confirmed class (defaults to the predicted one)");
  fb_add->add_option("--flow", fb_flow, "Flow index (defaults to the incident's first flow)");
  fb_add->add_option("--note", fb_note, "Free-text note");
  fb_add->add_option("--timestamp", fb_time, "UTC time YYYY-MM-DDTHH:MM:SSZ (defaults to now)");

  // retrain
  TrainFlags retrain_flags;
  auto* retrain_cmd = app.add_subcommand("retrain", "Fold pending feedback and retrain the workspace model");
  add_data_dir(retrain_cmd);
  retrain_flags.add_to(retrain_cmd);

  // kb
  std::string kb_file, kb_id, kb_out;
  auto* kb = app.add_subcommand("kb", "Inspect the remediation knowledge base");
  kb->require_subcommand(1);
  kb->add_option("--file", kb_file, "Knowledge base file (defaults to the workspace one)");
  add_data_dir(kb);
  auto* kb_list = kb->add_subcommand("list", "List entries");
  kb_list->fallthrough();
  auto* kb_show = kb->add_subcommand("show", "Show one entry");
  kb_show->fallthrough();
  kb_show->add_option("id", kb_id, "Recommendation id")->required();
  auto* kb_export = kb->add_subcommand("export", "Write the knowledge base file");
  kb_export->fallthrough();
  kb_export->add_option("--out", kb_out, "Output file")->required();

  // report
  std::string rep_incident, rep_format = "html", rep_out;
  auto* report = app.add_subcommand("report", "Render an incident report");
  add_data_dir(report);
  report->add_option("--incident", rep_incident, "Incident id")->required();
  report->add_option("--format", rep_format, "html or json")->capture_default_str();
  report->add_option("--out", rep_out, "Output file (stdout if omitted)");

  // serve
  std::string listen = "127.0.0.1:8080", model_path, static_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  add_data_dir(serve);
  serve->add_option("--listen", listen, "host:port")->envname("FLOWGUARD_LISTEN")->capture_default_str();
  serve->add_option("--model", model_path, "Weight file (defaults to the workspace model)")
      ->envname("FLOWGUARD_MODEL");
  serve->add_option("--static", static_dir, "Directory with the analyst console")
      ->envname("FLOWGUARD_STATIC_DIR");

  CLI11_PARSE(app, argc, argv);

  try {
    const fg::Workspace ws{data_dir};

    if (*ingest) {
      const auto ds = load_training_data(ingest_in);
      fg::save_dataset(ingest_out, ds);
      std::printf("rows=%zu checksum=%s\n", ds.size(), fg::dataset_checksum(ds).c_str());
    } else if (*simulate) {
      std::vector<fg::LabeledFlow> flows;
      if (sim_class == "all") {
        flows = fg::generate_corpus_flows(sim_count, sim_seed);
      } else {
        flows = fg::generate_scenario(fg::ScenarioSpec::with_defaults(parse_class(sim_class), sim_count, sim_seed));
      }
      if (sim_out.empty()) {
        fg::write_labeled_flow_csv(std::cout, flows);
      } else {
        auto out = open_output(sim_out);
        fg::write_labeled_flow_csv(out, flows);
      }
    } else if (*train) {
      const auto ds = load_training_data(train_data);
      auto net = fg::Network::initialize(fg::default_layer_sizes(train_flags.hidden1, train_flags.hidden2),
                                         train_flags.alpha, train_flags.seed);
      auto [trained, rep] = fg::train(std::move(net), ds, train_flags.config());
      fg::save_weights(trained, std::filesystem::path(train_out));
      print_epochs(rep);
      std::printf("model=%s dataset=%s\n", fg::model_checksum(trained).c_str(), rep.dataset_checksum.c_str());
    } else if (*predict) {
      const auto net = fg::load_weights(std::filesystem::path(pred_weights));
      for (const auto& fv : load_features(pred_data)) {
        const auto d = fg::predict(net, fv);
        if (pred_json) {
          std::cout << json{{"flow_index", fv.flow_index},
                            {"predicted", std::string(fg::to_string(d.predicted))},
                            {"probabilities", distribution_json(d)}}
                           .dump()
                    << '\n';
        } else {
          std::printf("%lld\t%s\t%.6f\t%.6f\t%.6f\n", static_cast<long long>(fv.flow_index),
                      std::string(fg::to_string(d.predicted)).c_str(), d.p[0], d.p[1], d.p[2]);
        }
      }
    } else if (*init) {
      if (ws.has_store()) throw fg::ValidationError("data-dir", "workspace already initialized: " + data_dir);
      auto ds = load_training_data(init_data);
      ds.provenance = fg::Provenance::original;
      std::filesystem::create_directories(ws.root);
      auto store = fg::TrainingStore::create(ws.store_dir(), ds);
      ws.load_or_init_kb();
      auto net = fg::Network::initialize(fg::default_layer_sizes(init_flags.hidden1, init_flags.hidden2),
                                         init_flags.alpha, init_flags.seed);
      auto [trained, rep] = fg::train(std::move(net), ds, init_flags.config());
      fg::save_weights(trained, ws.model_file());
      print_epochs(rep);
      std::printf("workspace=%s original_rows=%zu\n", data_dir.c_str(), ds.size());
    } else if (*classify) {
      fg::IncidentRepository repo(ws.incidents_file());
      const auto net = load_workspace_model(ws);
      const auto kb_data = ws.load_or_init_kb();
      const auto features = load_features(classify_flows);
      for (const auto& r : fg::classify_and_record(repo, net, kb_data, features, classify_top, fg::utc_now())) {
        std::printf("%s\t%s\t%.4f\tflows=%zu\n", r.incident_id.c_str(),
                    std::string(fg::to_string(r.distribution.predicted)).c_str(),
                    r.distribution.probability(r.distribution.predicted), r.flows.size());
      }
    } else if (*incidents_cmd) {
      fg::IncidentRepository repo(ws.incidents_file());
      for (const auto& r : repo.list()) {
        std::printf("%s\t%s\t%s\t%.4f\t%.4f\t%.4f\n", r.incident_id.c_str(),
                    std::string(fg::to_string(r.status)).c_str(),
                    std::string(fg::to_string(r.distribution.predicted)).c_str(), r.distribution.p[0],
                    r.distribution.p[1], r.distribution.p[2]);
      }
    } else if (*fb_add) {
      fg::IncidentRepository repo(ws.incidents_file());
      auto store = fg::TrainingStore::open(ws.store_dir());
      const auto incident = repo.get(fb_incident);
      if (!incident) throw fg::NotFoundError("unknown incident " + fb_incident);
      fg::Rating rating;
      rating.incident_id = fb_incident;
      rating.recommendation_id = fb_rec;
      rating.score = fb_score;
      rating.flow_index = fb_flow >= 0 ? fb_flow : incident->flows.front().flow_index;
      rating.rated_class = fb_class.empty() ? incident->distribution.predicted : parse_class(fb_class);
      if (!fb_note.empty()) rating.note = fb_note;
      if (fb_time.empty()) {
        rating.timestamp = fg::utc_now();
      } else {
        auto t = fg::parse_utc(fb_time);
        if (!t) throw fg::ValidationError("timestamp", "expected YYYY-MM-DDTHH:MM:SSZ");
        rating.timestamp = *t;
      }
      const auto sub = fg::submit_rating(store, repo, ws.load_or_init_kb(), rating);
      if (sub.ack.outcome == fg::RecordOutcome::stored) fg::save_knowledge_base(ws.kb_file(), sub.kb);
      std::printf("%s pending=%zu\n", sub.ack.outcome == fg::RecordOutcome::stored ? "stored" : "duplicate",
                  store.pending_ratings().size());
    } else if (*retrain_cmd) {
      fg::IncidentRepository repo(ws.incidents_file());
      auto store = fg::TrainingStore::open(ws.store_dir());
      const auto net = load_workspace_model(ws);
      const auto cycle = fg::run_training_cycle(store, repo, net, retrain_flags.config());
      fg::save_weights(cycle.result.net, ws.model_file());
      std::printf("mode=%s status=%s dataset_size=%zu folded_ratings=%zu\n",
                  std::string(fg::to_string(cycle.result.mode)).c_str(),
                  std::string(fg::to_string(cycle.result.status)).c_str(), cycle.result.dataset_size,
                  cycle.folded_ratings);
      print_epochs(cycle.result.report);
    } else if (*kb) {
      fg::KnowledgeBase base;
      if (!kb_file.empty()) {
        base = fg::load_knowledge_base(kb_file);
      } else if (std::filesystem::exists(ws.kb_file())) {
        base = fg::load_knowledge_base(ws.kb_file());
      } else {
        base = fg::default_knowledge_base();
      }
      if (*kb_list) {
        for (const auto& e : base.entries) {
          std::string classes;
          for (auto c : e.applicable_classes) {
            if (!classes.empty()) classes += ',';
            classes += fg::to_string(c);
          }
          std::printf("%-26s %-14s rank=%.2f feedback=%.2f (%zu) %s [%s]\n", e.recommendation_id.c_str(),
                      std::string(fg::to_string(e.level)).c_str(), e.base_rank, e.feedback_score,
                      e.rating_count, e.title.c_str(), classes.c_str());
        }
      } else if (*kb_show) {
        const auto* e = base.find(kb_id);
        if (!e) throw fg::NotFoundError("unknown recommendation " + kb_id);
        std::cout << json(*e).dump(2) << '\n';
      } else if (*kb_export) {
        fg::save_knowledge_base(kb_out, base);
      }
    } else if (*report) {
      fg::IncidentRepository repo(ws.incidents_file());
      const auto r = repo.get(rep_incident);
      if (!r) throw fg::NotFoundError("unknown incident " + rep_incident);
      const auto doc = fg::generate_report(r->distribution, r->suggestions, ws.load_or_init_kb(),
                                           {r->incident_id, r->created_at, r->flow_indices(), r->model_version});
      const auto text = fg::render(doc, rep_format);
      if (rep_out.empty()) {
        std::cout << text;
      } else {
        open_output(rep_out) << text;
      }
    } else if (*serve) {
      const auto colon = listen.rfind(':');
      if (colon == std::string::npos) throw fg::ValidationError("listen", "expected host:port");
      fg::ServiceConfig config;
      config.workspace = ws;
      if (!model_path.empty()) config.model_path = model_path;
      fg::Service service(std::move(config));
      fg::serve_http(service, listen.substr(0, colon), std::stoi(listen.substr(colon + 1)), static_dir);
    }
  } catch (const fg::UnrecoverableStoreError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnrecoverable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
