#pragma once

#include <stdexcept>
#include <string>

namespace floquet {

/// Bad input: malformed model, out-of-range option, dimension mismatch.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The model violates a structural requirement (e.g. non-nilpotent J0).
class ModelError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

/// Requested approximation order exceeds what the polynomial engine can hold.
class OrderTooHighError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

/// Numeric range problem: overflow guard, evaluation outside the period.
class RangeError : public std::range_error {
  public:
    using std::range_error::range_error;
};

/// Bisection bracket without a sign change.
class BracketError : public std::runtime_error {
  public:
    BracketError(double lo, double hi, double margin_lo, double margin_hi)
        : std::runtime_error("no sign change in bracket [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]: margins " + std::to_string(margin_lo) +
                             ", " + std::to_string(margin_hi)),
          lo_(lo), hi_(hi), margin_lo_(margin_lo), margin_hi_(margin_hi) {}

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double margin_lo() const noexcept { return margin_lo_; }
    double margin_hi() const noexcept { return margin_hi_; }

  private:
    double lo_, hi_, margin_lo_, margin_hi_;
};

}  // namespace floquet
