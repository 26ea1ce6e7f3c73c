#ifndef MACE_ERRORS_H_
#define MACE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mace {

// Invalid task layout, run configuration or other static setup.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API called out of order, e.g. stepping a finished episode.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Violation of the one-scalar-per-agent-per-step communication contract.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Numerical failure during learning (NaN loss, diverged parameters).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mace

#endif  // MACE_ERRORS_H_
