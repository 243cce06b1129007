#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace liveguard {

/// Shortest decimal that round-trips the exact double value.
std::string format_double(double value);

/// Strict full-string parse; nullopt on anything else.
std::optional<double> parse_double(std::string_view text);
std::optional<unsigned long long> parse_u64(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);

}  // namespace liveguard
