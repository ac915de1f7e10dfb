#pragma once

#include <stdexcept>
#include <string>

namespace robusthedge {

/// Argument outside the domain of an operation (off-grid time, value outside E, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A functional that was required to be Dupire-concave showed a non-monotone
/// difference quotient.
class ConcavityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The spot is outside the convex hull of the next lattice slice, so no
/// martingale kernel exists.
class InfeasibleModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation requested on an object larger than a configured cap.
class CapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace robusthedge
