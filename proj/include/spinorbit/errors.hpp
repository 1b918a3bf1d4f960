#pragma once

#include <stdexcept>
#include <string>

namespace spinorbit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Precondition of an operation violated by the caller.
struct ContractViolation : Error {
  using Error::Error;
};

// State not representable in the requested chart (P0 = 0, W0 = 0, b = a, ...).
struct ChartError : Error {
  using Error::Error;
};

// Quadrature argument outside the admissible band of the quartic.
struct BandError : Error {
  using Error::Error;
};

// Integrator hit a singularity (step-size underflow / non-finite derivative).
struct SingularityError : Error {
  SingularityError(const std::string& what, double t_last)
      : Error(what), t_last(t_last) {}
  double t_last;
};

}  // namespace spinorbit
