#pragma once

#include <stdexcept>
#include <string>

namespace xlhwr {

// Error categories map 1:1 onto CLI exit codes (see tools/xlhwr.cpp).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Not enough samples/frames to fit or score a model.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bundles or artifacts that cannot be combined (feature geometry, version).
struct CompatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A character required by an operation has no mapping/decomposition.
struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace xlhwr
