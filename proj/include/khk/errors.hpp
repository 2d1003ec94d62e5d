#pragma once

#include <stdexcept>
#include <string>

namespace khk {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The Kahan map has a pole at this point: det(I - eps f'(x)) vanished
/// relative to the scale-aware threshold.
class SingularStep : public std::runtime_error {
 public:
  SingularStep(const std::string& what, double delta)
      : std::runtime_error(what), delta_(delta) {}
  double delta() const noexcept { return delta_; }

 private:
  double delta_;
};

/// A closed-form integral or coefficient has a vanishing denominator.
class DenominatorZero : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedSystem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace khk
