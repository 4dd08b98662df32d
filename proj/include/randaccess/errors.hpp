#pragma once

#include <stdexcept>
#include <string>

namespace randaccess {

// A Lyapunov contract that cannot be met even with a perfect link.
class InfeasibleContract : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The dual iteration detected that the access design problem has no solution.
class InfeasibleInstance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationUnstable : public std::runtime_error {
 public:
  SimulationUnstable(int system, long slot, const std::string& what)
      : std::runtime_error(what), system_(system), slot_(slot) {}

  int system() const { return system_; }
  long slot() const { return slot_; }

 private:
  int system_;
  long slot_;
};

// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration problems carry the JSON path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace randaccess
