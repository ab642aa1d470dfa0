#pragma once

#include <stdexcept>
#include <string>

namespace myoeval {

// Invalid argument or configuration value.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file contents. The message names the offending field or line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular or ill-conditioned estimates, undefined statistics.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Classifier kinds that have an interface slot but no implementation.
class NotImplementedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A single recording could not be evaluated (e.g. every prompt discarded).
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace myoeval
