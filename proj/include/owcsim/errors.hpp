#pragma once

#include <stdexcept>

namespace owcsim {

/// Malformed serialized artifact (bad magic, version mismatch, truncation).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad command-line usage (CLI exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration file (CLI exit code 3).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failure (CLI exit code 4).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A required model/data artifact is absent (CLI exit code 5).
struct MissingArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace owcsim
