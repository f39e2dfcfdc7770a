#include "flowguard/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "flowguard/checksum.hpp"
#include "flowguard/errors.hpp"
#include "flowguard/etl.hpp"
#include "flowguard/flow_csv.hpp"

namespace flowguard {

namespace {

constexpr std::string_view kMagic = "# flowguard-dataset ";

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string expect_line(std::istream& in, std::string_view what) {
  std::string line;
  if (!std::getline(in, line)) throw CorruptionError("dataset truncated before " + std::string(what));
  return strip_cr(line);
}

std::string_view after_prefix(const std::string& line, std::string_view prefix) {
  if (line.rfind(prefix, 0) != 0) {
    throw CorruptionError("dataset: expected '" + std::string(prefix) + "...', got '" + line + "'");
  }
  return std::string_view(line).substr(prefix.size());
}

template <typename T>
T parse_number(std::string_view s, std::size_t row, std::string_view column) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
    throw CorruptionError("dataset row " + std::to_string(row) + ": bad " + std::string(column) +
                          " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

static void write_rows(std::ostream& out, const Dataset& ds,
                       const std::vector<std::string>& feature_names) {
  out << "flow_index,label,weight";
  for (const auto& n : feature_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.features[i].flow_index << ',' << to_string(ds.labels[i]) << ','
        << format_double(ds.weights[i]);
    for (double v : ds.features[i].values) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_dataset(std::ostream& out, const Dataset& ds,
                   const std::vector<std::string>& feature_names) {
  if (!ds.consistent()) throw ShapeError("dataset sequences have mismatched lengths or bad weights");
  if (feature_names.size() != kNumFeatures) throw ShapeError("feature name list has wrong length");
  out << kMagic << kDatasetFormatVersion << '\n';
  out << "# provenance " << to_string(ds.provenance) << '\n';
  out << "# rows " << ds.size() << '\n';
  write_rows(out, ds, feature_names);
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  write_dataset(out, ds, MetricsCollection::defaults().feature_names());
}

Dataset read_dataset(std::istream& in) {
  std::string line = expect_line(in, "header");
  auto version_text = after_prefix(line, kMagic);
  const int version = parse_number<int>(version_text, 0, "format version");
  if (version != kDatasetFormatVersion) {
    throw VersionError("dataset format version " + std::to_string(version) + " is not supported");
  }
  Dataset ds;
  line = expect_line(in, "provenance");
  auto prov = provenance_from_string(after_prefix(line, "# provenance "));
  if (!prov) throw CorruptionError("dataset: unknown provenance in '" + line + "'");
  ds.provenance = *prov;
  line = expect_line(in, "row count");
  const auto rows = parse_number<std::size_t>(after_prefix(line, "# rows "), 0, "row count");
  line = expect_line(in, "column header");
  if (line.rfind("flow_index,label,weight,", 0) != 0) {
    throw CorruptionError("dataset: bad column header");
  }

  ds.features.reserve(rows);
  for (std::size_t row = 1; row <= rows; ++row) {
    line = expect_line(in, "row " + std::to_string(row));
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    while (true) {
      auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() != 3 + kNumFeatures) {
      throw CorruptionError("dataset row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells");
    }
    FeatureVector fv;
    fv.flow_index = parse_number<std::int64_t>(cells[0], row, "flow_index");
    auto label = label_from_string(cells[1]);
    if (!label) throw CorruptionError("dataset row " + std::to_string(row) + ": bad label");
    const double weight = parse_number<double>(cells[2], row, "weight");
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      fv.values[k] = parse_number<double>(cells[3 + k], row, "feature");
    }
    ds.push_back(fv, *label, weight);
  }
  if (std::getline(in, line) && !strip_cr(line).empty()) {
    throw CorruptionError("dataset has trailing rows beyond the declared count");
  }
  if (!ds.consistent()) throw CorruptionError("dataset has non-positive weights");
  return ds;
}

std::string serialize_dataset(const Dataset& ds) {
  std::ostringstream out;
  write_dataset(out, ds);
  return out.str();
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_dataset(out, ds);
  if (!out.flush()) throw Error("failed writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open dataset " + path.string());
  return read_dataset(in);
}

std::string dataset_checksum(const Dataset& ds) {
  std::ostringstream out;
  write_rows(out, ds, MetricsCollection::defaults().feature_names());
  return sha256_hex(out.str());
}

bool looks_like_dataset(std::istream& in) {
  const auto pos = in.tellg();
  std::string line;
  const bool ok = static_cast<bool>(std::getline(in, line)) && line.rfind(kMagic, 0) == 0;
  in.clear();
  in.seekg(pos);
  return ok;
}

}  // namespace flowguard
