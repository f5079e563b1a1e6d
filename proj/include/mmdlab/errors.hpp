#pragma once

#include <stdexcept>
#include <string>

namespace mmdlab {

// Bad configuration, unreadable input files, schema violations. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear solver did not converge to the requested tolerance. Exit code 3.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A generator request exceeded the configured resource budget.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A chain refinement step could not be realized; names level and hop.
class RefinementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested plot series is absent from a report.
class ExportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mmdlab
