#pragma once

#include <stdexcept>
#include <string>

namespace rflab {

// Precondition or chart/domain violation by the caller.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical procedure failed to meet its tolerance (step failure, no root,
// certification failure, budget exhausted).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rflab
