#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "flowguard/dataset_io.hpp"
#include "flowguard/errors.hpp"
#include "flowguard/flow_csv.hpp"
#include "flowguard/report.hpp"
#include "flowguard/service.hpp"
#include "flowguard/traffic_sim.hpp"
#include "flowguard/weights_io.hpp"

namespace py = pybind11;
namespace fg = flowguard;

namespace {

fg::ClassLabel label_arg(const std::string& name) {
  auto l = fg::label_from_alias(name);
  if (!l) throw fg::ValidationError("label", "unknown class " + name);
  return *l;
}

fg::ClassDistribution dist_arg(const std::vector<double>& p) {
  if (p.size() != fg::kNumClasses) throw fg::ShapeError("expected 3 class probabilities");
  return fg::ClassDistribution::from_probabilities({p[0], p[1], p[2]});
}

py::dict distribution_dict(const fg::ClassDistribution& d) {
  py::dict out;
  for (auto c : fg::kAllClasses) out[py::str(std::string(fg::to_string(c)))] = d.probability(c);
  return out;
}

std::vector<fg::FeatureVector> csv_features(const std::string& text) {
  std::istringstream in(text);
  const auto parsed = fg::parse_flow_csv(in);
  const auto metrics = fg::MetricsCollection::defaults();
  const fg::EtlOptions etl;
  std::vector<fg::FeatureVector> out;
  for (const auto& r : fg::filter_relevant(parsed.records, etl.allowed_protocols)) {
    const auto v = fg::validate_flow(r);
    if (!v.ok()) throw fg::ValidationError(v.violations.front().field, v.violations.front().message);
    out.push_back(fg::to_feature_vector(r, metrics, etl.private_prefixes));
  }
  return out;
}

std::vector<double> values_of(const fg::FeatureVector& fv) { return {fv.values.begin(), fv.values.end()}; }

}  // namespace

PYBIND11_MODULE(_flowguard, m) {
  m.doc() = "flowguard native core";
  m.attr("__version__") = "0.1.0";

  auto base = py::register_exception<fg::Error>(m, "Error");
  py::register_exception<fg::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<fg::NotFoundError>(m, "NotFoundError", base.ptr());
  py::register_exception<fg::CorruptionError>(m, "CorruptionError", base.ptr());
  py::register_exception<fg::ShapeError>(m, "ShapeError", base.ptr());

  m.def("softmax", [](const std::vector<double>& z) { return fg::softmax(z); }, py::arg("logits"));
  m.def("leaky_relu", &fg::leaky_relu, py::arg("x"), py::arg("alpha") = fg::kDefaultAlpha);
  m.def("default_layer_sizes", &fg::default_layer_sizes, py::arg("hidden1") = fg::kDefaultHidden,
        py::arg("hidden2") = fg::kDefaultHidden);

  py::class_<fg::Dataset>(m, "Dataset")
      .def("__len__", &fg::Dataset::size)
      .def_property_readonly("labels",
                             [](const fg::Dataset& d) {
                               std::vector<std::string> out;
                               for (auto l : d.labels) out.emplace_back(fg::to_string(l));
                               return out;
                             })
      .def_property_readonly("weights", [](const fg::Dataset& d) { return d.weights; })
      .def_property_readonly("features",
                             [](const fg::Dataset& d) {
                               std::vector<std::vector<double>> out;
                               for (const auto& f : d.features) out.push_back(values_of(f));
                               return out;
                             })
      .def("checksum", &fg::dataset_checksum)
      .def("serialize", &fg::serialize_dataset);

  m.def("generate_corpus", [](std::size_t per_class, std::uint64_t seed) { return fg::generate_corpus(per_class, seed); },
        py::arg("per_class"), py::arg("seed") = 42);
  m.def(
      "simulate_csv",
      [](const std::string& kind, std::size_t count, std::uint64_t seed) {
        std::vector<fg::LabeledFlow> flows;
        if (kind == "all") {
          flows = fg::generate_corpus_flows(count, seed);
        } else {
          flows = fg::generate_scenario(fg::ScenarioSpec::with_defaults(label_arg(kind), count, seed));
        }
        std::ostringstream out;
        fg::write_labeled_flow_csv(out, flows);
        return out.str();
      },
      py::arg("kind") = "all", py::arg("count") = 100, py::arg("seed") = 42);
  m.def(
      "build_dataset",
      [](const std::string& csv_text) {
        std::istringstream in(csv_text);
        const auto flows = fg::to_labeled_flows(fg::parse_flow_csv(in));
        return fg::build_dataset(flows, fg::MetricsCollection::defaults());
      },
      py::arg("csv_text"));
  m.def(
      "features_from_csv",
      [](const std::string& csv_text) {
        std::vector<std::pair<std::int64_t, std::vector<double>>> out;
        for (const auto& fv : csv_features(csv_text)) out.emplace_back(fv.flow_index, values_of(fv));
        return out;
      },
      py::arg("csv_text"));
  m.def("save_dataset", [](const fg::Dataset& d, const std::filesystem::path& p) { fg::save_dataset(p, d); },
        py::arg("dataset"), py::arg("path"));
  m.def("load_dataset", [](const std::filesystem::path& p) { return fg::load_dataset(p); }, py::arg("path"));

  py::class_<fg::Network>(m, "Network")
      .def_static("initialize", &fg::Network::initialize, py::arg("layer_sizes") = fg::default_layer_sizes(),
                  py::arg("alpha") = fg::kDefaultAlpha, py::arg("seed") = 42)
      .def_static("load", [](const std::filesystem::path& p) { return fg::load_weights(p); }, py::arg("path"))
      .def("save", [](const fg::Network& n, const std::filesystem::path& p) { fg::save_weights(n, p); },
           py::arg("path"))
      .def_readonly("layer_sizes", &fg::Network::layer_sizes)
      .def_readonly("alpha", &fg::Network::alpha)
      .def("checksum", &fg::model_checksum)
      .def(
          "predict",
          [](const fg::Network& n, const std::vector<double>& x) { return distribution_dict(fg::predict(n, x)); },
          py::arg("features"))
      .def("__eq__", [](const fg::Network& a, const fg::Network& b) { return a == b; });

  m.def(
      "train",
      [](const fg::Network& net, const fg::Dataset& data, std::size_t epochs, std::uint64_t seed,
         std::size_t batch_size, double learning_rate, double validation_fraction) {
        fg::TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.seed = seed;
        cfg.batch_size = batch_size;
        cfg.adam.learning_rate = learning_rate;
        cfg.validation_fraction = validation_fraction;
        fg::Network out;
        fg::TrainReport rep;
        {
          py::gil_scoped_release release;
          std::tie(out, rep) = fg::train(net, data, cfg);
        }
        py::list history;
        for (const auto& e : rep.epochs) {
          py::dict row;
          row["epoch"] = e.epoch;
          row["train_loss"] = e.train_loss;
          row["train_accuracy"] = e.train_accuracy;
          if (e.validation_loss) row["validation_loss"] = *e.validation_loss;
          if (e.validation_accuracy) row["validation_accuracy"] = *e.validation_accuracy;
          history.append(row);
        }
        return py::make_tuple(out, history);
      },
      py::arg("net"), py::arg("dataset"), py::arg("epochs") = 200, py::arg("seed") = 42,
      py::arg("batch_size") = 32, py::arg("learning_rate") = 1e-3, py::arg("validation_fraction") = 0.0);
  m.def(
      "evaluate",
      [](const fg::Network& net, const fg::Dataset& data) {
        const auto e = fg::evaluate(net, data);
        return py::make_tuple(e.mean_loss, e.accuracy);
      },
      py::arg("net"), py::arg("dataset"));

  m.def(
      "suggest",
      [](const std::vector<double>& p, std::size_t top_n) {
        py::list out;
        for (const auto& s : fg::suggest(dist_arg(p), fg::default_knowledge_base(), top_n)) {
          py::dict row;
          row["recommendation_id"] = s.entry.recommendation_id;
          row["title"] = s.entry.title;
          row["score"] = s.score;
          out.append(row);
        }
        return out;
      },
      py::arg("probabilities"), py::arg("top_n") = 5);
  m.def(
      "render_report",
      [](const std::vector<double>& p, const std::string& incident_id, const std::string& created_at,
         const std::vector<std::int64_t>& flows, const std::string& format) {
        const auto t = fg::parse_utc(created_at);
        if (!t) throw fg::ValidationError("created_at", "expected YYYY-MM-DDTHH:MM:SSZ");
        const auto kb = fg::default_knowledge_base();
        const auto d = dist_arg(p);
        const auto report = fg::generate_report(d, fg::suggest(d, kb, 5), kb, {incident_id, *t, flows, ""});
        return fg::render(report, format);
      },
      py::arg("probabilities"), py::arg("incident_id"), py::arg("created_at"), py::arg("flows") = std::vector<std::int64_t>{},
      py::arg("format") = "json");

  py::class_<fg::Service>(m, "Service")
      .def(py::init([](const std::filesystem::path& root, std::size_t epochs, std::uint64_t seed) {
             fg::ServiceConfig cfg;
             cfg.workspace.root = root;
             cfg.train.epochs = epochs;
             cfg.train.seed = seed;
             return std::make_unique<fg::Service>(cfg);
           }),
           py::arg("workspace"), py::arg("epochs") = 200, py::arg("seed") = 42)
      .def(
          "handle",
          [](fg::Service& s, const std::string& method, const std::string& path, const std::string& body,
             const std::map<std::string, std::string>& query, const std::map<std::string, std::string>& headers) {
            fg::HttpRequest req{method, path, query, headers, body};
            fg::HttpResponse res;
            {
              py::gil_scoped_release release;
              res = s.handle(req);
            }
            return py::make_tuple(res.status, res.content_type, res.body);
          },
          py::arg("method"), py::arg("path"), py::arg("body") = "", py::arg("query") = std::map<std::string, std::string>{},
          py::arg("headers") = std::map<std::string, std::string>{})
      .def("wait_for_training", &fg::Service::wait_for_training, py::call_guard<py::gil_scoped_release>());
}
