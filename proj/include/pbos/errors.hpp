#pragma once

#include <stdexcept>
#include <string>

namespace pbos {

// Bad configuration: dimension mismatch, out-of-range hyperparameter,
// unknown game or rule name.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A loss evaluated to a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, int player)
      : std::runtime_error(what), player_(player) {}
  int player() const { return player_; }

 private:
  int player_;
};

// Linear solve failure (singular system).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace pbos
