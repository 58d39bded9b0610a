#include "milcarb/keyval.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "milcarb/errors.hpp"

namespace milcarb {

namespace {
std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str(), path);
}

KeyValueFile KeyValueFile::parse(const std::string& text,
                                 const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << origin << ":" << lineno << ": expected key = value";
      throw ConfigError(os.str());
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ": empty key");
    kv.entries_[key] = value;
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

std::string KeyValueFile::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw ConfigError(origin_ + ": missing key '" + key + "'");
  return it->second;
}

std::string KeyValueFile::get_or(const std::string& key,
                                 const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
  std::string v = get(key);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(origin_ + ": key '" + key + "' is not numeric: " + v);
  return out;
}

double KeyValueFile::get_double_or(const std::string& key,
                                   double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int KeyValueFile::get_int_or(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  double v = get_double(key);
  return static_cast<int>(v);
}

std::optional<double> KeyValueFile::maybe_double(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_double(key);
}

std::vector<std::string> KeyValueFile::get_list_or(const std::string& key) const {
  std::vector<std::string> out;
  if (!has(key)) return out;
  std::string v = get(key);
  size_t start = 0;
  while (start <= v.size()) {
    size_t sep = v.find(';', start);
    std::string item =
        sep == std::string::npos ? v.substr(start) : v.substr(start, sep - start);
    item = trim(item);
    if (!item.empty()) out.push_back(item);
    if (sep == std::string::npos) break;
    start = sep + 1;
  }
  return out;
}

}  // namespace milcarb
