#pragma once

#include <string>
#include <vector>

namespace sae {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;       // -1 if absent
  int require_column(const std::string& name) const;  // SchemaError if absent
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

// Shortest decimal representation that round-trips exactly (std::to_chars).
std::string format_double(double value);
// Fixed-precision rendering for reports.
std::string format_fixed(double value, int decimals);

double parse_double(const std::string& token, long row, const std::string& column);

}  // namespace sae
