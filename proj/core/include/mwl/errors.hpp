#pragma once

#include <stdexcept>
#include <string>

namespace mwl {

/// Precondition on an argument violated (empty interval, a <= -1, coarsening, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration: bad config keys, cost cap exceeded, a <= 2 in a decomposition.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inequality instance whose right-hand side (or comparison side) vanishes.
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mwl
