#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace milcarb {

// Minimal CSV support: UTF-8, comma-separated, first row is the header.
// Quoted fields with embedded commas/quotes are handled; empty cells are
// missing values.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;             // -1 if absent
  int require_column(const std::string& name) const;     // throws DataError
};

CsvTable read_csv(const std::string& path);

// Cell parsing. Empty cells return NaN from parse_numeric; anything else
// that fails to parse throws DataError with row/column context.
double parse_numeric(const std::string& cell, const std::string& context);

// Atomic write: writes to <path>.tmp then renames.
void write_text_atomic(const std::string& path, const std::string& contents);

std::string format_double(double v);

}  // namespace milcarb
