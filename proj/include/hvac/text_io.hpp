#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hvac {

/// Shortest round-trippable decimal form ("%.17g").
std::string format_double(double value);

/// Fixed-point with `digits` decimals, for human-facing report columns.
std::string format_fixed(double value, int digits);

/// Whole-field numeric parse; rejects trailing junk, empty fields and NaN.
std::optional<double> parse_double(std::string_view text);

std::vector<std::string> split_fields(std::string_view line, char sep = ',');

std::string_view trim(std::string_view text);

/// Writes through a sibling temporary file and renames it into place, so
/// readers never observe a partial file.
void write_file_atomically(const std::filesystem::path &path,
                           const std::function<void(std::ostream &)> &writer);

} // namespace hvac
