#pragma once

#include <stdexcept>
#include <string>

namespace footcast {

// Base class for every error raised by the library. `kind()` is a short
// machine-parseable tag used by the CLI's one-line error output.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

struct OutOfBoundsError : Error {
  explicit OutOfBoundsError(const std::string& what) : Error("out_of_bounds", what) {}
};

struct StructuralError : Error {
  explicit StructuralError(const std::string& what) : Error("structural", what) {}
};

struct EmptyScanError : Error {
  explicit EmptyScanError(const std::string& what) : Error("empty_scan", what) {}
};

struct InsufficientSamplesError : Error {
  explicit InsufficientSamplesError(const std::string& what)
      : Error("insufficient_samples", what) {}
};

struct LoadError : Error {
  explicit LoadError(const std::string& what) : Error("load", what) {}
};

struct TrainingError : Error {
  explicit TrainingError(const std::string& what) : Error("training", what) {}
};

struct PlanningError : Error {
  explicit PlanningError(const std::string& what) : Error("planning", what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace footcast
