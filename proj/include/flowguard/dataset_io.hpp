#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowguard/flow_model.hpp"

namespace flowguard {

inline constexpr int kDatasetFormatVersion = 1;

/// Columnar text format:
///
///   # flowguard-dataset 1
///   # provenance original
///   # rows 8
///   flow_index,label,weight,<22 feature names>
///   <one row per sample>
///
/// Reals use the shortest round-trip decimal form, so write/read is exact.
void write_dataset(std::ostream& out, const Dataset& ds,
                   const std::vector<std::string>& feature_names);
void write_dataset(std::ostream& out, const Dataset& ds);
Dataset read_dataset(std::istream& in);

std::string serialize_dataset(const Dataset& ds);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

/// Content hash of the canonical serialization.
std::string dataset_checksum(const Dataset& ds);

/// True when the stream starts with the dataset magic line.
bool looks_like_dataset(std::istream& in);

}  // namespace flowguard
