#pragma once

#include <stdexcept>

namespace sxen {

/// Raised on file-system failures and malformed on-disk data.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when training cannot continue (non-finite gradients or loss).
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sxen
