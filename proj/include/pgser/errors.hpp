#pragma once

#include <stdexcept>
#include <string>

namespace pgser {

/// Invalid configuration or invalid arguments. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A required input artifact does not exist or cannot be opened. Exit code 3.
struct MissingArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A persisted artifact exists but its content is malformed.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A pipeline stage failed mid-flight. Exit code 4.
struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pgser
