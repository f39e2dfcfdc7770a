#pragma once

#include <span>
#include <string>
#include <string_view>

namespace flowguard {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// SHA-256 over the raw IEEE-754 bytes of a sequence of doubles.
std::string sha256_hex(std::span<const double> values);

}  // namespace flowguard
