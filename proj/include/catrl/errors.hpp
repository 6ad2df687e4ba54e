#pragma once

#include <stdexcept>
#include <string>

namespace catrl {

// Query outside the support of a distribution or the domain of a map.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid environment, algorithm or hyperparameter configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MalformedEpisode : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative solver hit its sweep cap before reaching tolerance.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOp : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace catrl
