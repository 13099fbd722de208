#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace combcast {

/// Malformed or inconsistent input data (CSV content, observation gaps, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Not enough training history to fit a data-driven combination.
class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

/// Collects non-fatal warnings raised while processing; pass nullptr to discard.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag != nullptr) diag->warn(std::move(message));
}

}  // namespace combcast
