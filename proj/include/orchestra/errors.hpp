#pragma once

#include <stdexcept>

namespace orchestra {

/// File could not be opened, read or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input was readable but malformed (JSON, PNG, model file contents).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed (factorisation, non-finite objective).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace orchestra
