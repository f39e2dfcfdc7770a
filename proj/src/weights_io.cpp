#include "flowguard/weights_io.hpp"

#include <fstream>
#include <istream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <ostream>

#include "flowguard/checksum.hpp"
#include "flowguard/errors.hpp"

namespace flowguard {

using json = nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "flowguard-weights";

}  // namespace

std::string model_checksum(const Network& net) {
  std::vector<double> buf;
  for (std::size_t s : net.layer_sizes) buf.push_back(static_cast<double>(s));
  buf.push_back(net.alpha);
  const auto flat = net.params.flatten();
  buf.insert(buf.end(), flat.begin(), flat.end());
  return sha256_hex(std::span<const double>(buf));
}

void save_weights(const Network& net, std::ostream& out) {
  net.check_shape();
  json doc;
  doc["format"] = kFormatName;
  doc["format_version"] = kWeightFormatVersion;
  doc["layer_sizes"] = net.layer_sizes;
  doc["alpha"] = net.alpha;
  doc["dataset_checksum"] = net.dataset_checksum;
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < net.params.weights.size(); ++l) {
    weights.push_back(net.params.weights[l].data);
    biases.push_back(net.params.biases[l]);
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  doc["parameter_checksum"] = model_checksum(net);
  out << doc.dump(1) << '\n';
}

void save_weights(const Network& net, const std::filesystem::path& path) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    save_weights(net, out);
    if (!out.flush()) throw Error("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Network load_weights(std::istream& in, std::size_t expected_inputs) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CorruptionError(std::string("weight file is not valid JSON: ") + e.what());
  }

  Network net;
  std::string stored_checksum;
  try {
    if (doc.at("format").get<std::string>() != kFormatName) {
      throw CorruptionError("not a flowguard weight file");
    }
    const int version = doc.at("format_version").get<int>();
    if (version != kWeightFormatVersion) {
      throw VersionError("weight file format_version " + std::to_string(version) +
                         " is not supported (expected " + std::to_string(kWeightFormatVersion) + ")");
    }
    net.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    net.alpha = doc.at("alpha").get<double>();
    net.dataset_checksum = doc.at("dataset_checksum").get<std::string>();
    const auto& w = doc.at("weights");
    const auto& b = doc.at("biases");
    if (!w.is_array() || !b.is_array() || w.size() != b.size() ||
        w.size() + 1 != net.layer_sizes.size()) {
      throw ShapeError("weight file parameter blocks do not match layer_sizes");
    }
    for (std::size_t l = 0; l < w.size(); ++l) {
      Matrix m;
      m.rows = net.layer_sizes[l + 1];
      m.cols = net.layer_sizes[l];
      m.data = w[l].get<std::vector<double>>();
      net.params.weights.push_back(std::move(m));
      net.params.biases.push_back(b[l].get<std::vector<double>>());
    }
    stored_checksum = doc.at("parameter_checksum").get<std::string>();
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("weight file is missing or has malformed fields: ") + e.what());
  }

  net.check_shape();
  if (expected_inputs != 0 && net.input_size() != expected_inputs) {
    throw ShapeError("weight file expects " + std::to_string(net.input_size()) +
                     " inputs, feature template has " + std::to_string(expected_inputs));
  }
  if (model_checksum(net) != stored_checksum) {
    throw CorruptionError("weight file parameter checksum mismatch");
  }
  return net;
}

Network load_weights(const std::filesystem::path& path, std::size_t expected_inputs) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open weight file " + path.string());
  return load_weights(in, expected_inputs);
}

}  // namespace flowguard
