#pragma once

#include <stdexcept>
#include <string>

namespace pbml {

/// Invalid configuration or input file. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while a run is executing. The CLI maps this to exit code 2.
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pbml
