#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace collapse {

/// Numeric table with a header row. Every cell is a double.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Column position by header name; throws ValidationError if absent.
  std::size_t column(std::string_view name) const;
};

// 17 significant digits (round-trips a double exactly); NaN renders as "nan".
std::string format_number(double value);

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace collapse
