#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "flowguard/neuralnet.hpp"

namespace flowguard {

inline constexpr int kWeightFormatVersion = 1;

/// JSON container:
///   format, format_version, layer_sizes, alpha, dataset_checksum,
///   weights (one row-major flat array per layer), biases, parameter_checksum.
void save_weights(const Network& net, std::ostream& out);
void save_weights(const Network& net, const std::filesystem::path& path);

/// Throws CorruptionError (unparsable, truncated, checksum mismatch),
/// VersionError, or ShapeError (inconsistent shapes, or an input width other
/// than `expected_inputs` when that is non-zero).
Network load_weights(std::istream& in, std::size_t expected_inputs = kNumFeatures);
Network load_weights(const std::filesystem::path& path, std::size_t expected_inputs = kNumFeatures);

/// SHA-256 over the topology, alpha and the flat parameter vector. Used as the
/// model version in reports.
std::string model_checksum(const Network& net);

}  // namespace flowguard
