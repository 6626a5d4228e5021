#pragma once

#include <stdexcept>
#include <string>

namespace kq {

// Caller broke a precondition (dimension mismatch, bad grid, ...).
class contract_error : public std::invalid_argument {
public:
  explicit contract_error(const std::string& what) : std::invalid_argument(what) {}
};

// Input is outside the mathematical domain of the operation
// (non-PD matrix, non-convex potential, ...).  Carries the offending value.
class domain_error : public std::domain_error {
public:
  domain_error(const std::string& what, double offending)
      : std::domain_error(what + " (offending value " + std::to_string(offending) + ")"),
        offending_value(offending) {}
  explicit domain_error(const std::string& what)
      : std::domain_error(what), offending_value(0.0) {}
  double offending_value;
};

// A numerical routine could not reach the requested tolerance.
// Carries the best estimate it produced and the estimated error.
class tolerance_error : public std::runtime_error {
public:
  tolerance_error(const std::string& what, double best, double err)
      : std::runtime_error(what + " (best estimate " + std::to_string(best) +
                           ", err est " + std::to_string(err) + ")"),
        best_estimate(best), err_estimate(err) {}
  double best_estimate;
  double err_estimate;
};

// Triangle with a zero-length side where an angle was requested.
class degenerate_triangle : public std::domain_error {
public:
  explicit degenerate_triangle(const std::string& what) : std::domain_error(what) {}
};

}  // namespace kq
