#include "milcarb/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "milcarb/errors.hpp"

namespace milcarb {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

int CsvTable::require_column(const std::string& name) const {
  int idx = column(name);
  if (idx < 0) throw DataError("missing column '" + name + "'");
  return idx;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  for (auto& h : split_csv_line(line)) table.header.push_back(trim(h));
  size_t ncol = table.header.size();
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != ncol) {
      std::ostringstream os;
      os << path << ": row " << (table.rows.size() + 2) << " has "
         << cells.size() << " cells, expected " << ncol;
      throw DataError(os.str());
    }
    for (auto& c : cells) c = trim(c);
    table.rows.push_back(std::move(cells));
  }
  return table;
}

double parse_numeric(const std::string& cell, const std::string& context) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw DataError("non-numeric cell '" + cell + "' at " + context);
  return value;
}

void write_text_atomic(const std::string& path, const std::string& contents) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + tmp);
    out << contents;
    if (!out) throw DataError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace milcarb
