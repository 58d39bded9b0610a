#pragma once

#include <stdexcept>
#include <string>

namespace milcarb {

// Error categories map onto CLI exit codes: config -> 2, data -> 3, solver -> 4.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace milcarb
