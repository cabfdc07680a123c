#pragma once

#include <stdexcept>

namespace flatbez {

/// Argument outside the mathematical domain of an operation (tau ∉ [0,1], q > N, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Reference trajectory drives a flatness map through a singularity (zero thrust).
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constraint system is infeasible at compile time (a constant relation fails).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration; message carries the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flatbez
