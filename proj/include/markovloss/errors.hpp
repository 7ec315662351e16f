#pragma once

#include <stdexcept>
#include <string>

namespace markovloss {

/// Malformed arguments: bad dimensions, non-finite data, unparsable files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Model parameters that violate their invariants (non-stochastic rows,
/// non-positive variances, ...).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Data that is well-formed but mutually inconsistent, e.g. pairwise
/// marginals that do not agree on their shared unary marginal.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested computation exceeds a hard size guard.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace markovloss
