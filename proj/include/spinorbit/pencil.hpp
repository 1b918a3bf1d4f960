#pragma once

#include <Eigen/Dense>

#include "spinorbit/errors.hpp"

namespace spinorbit {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vec4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Mat4 = Eigen::Matrix<Scalar, 4, 4>;
template <typename Scalar>
using Mat5 = Eigen::Matrix<Scalar, 5, 5>;

// Parameters of the bracket/metric pencil and of the Hamiltonian
// h = (c h1 + d h2)/2. a selects the bracket {.,.}_a (a = -1 Poincare,
// a = 0 Galilean, a = 1 Euclidean); b selects the partner bracket whose
// Casimirs h1, h2 drive the flow.
template <typename Scalar>
struct PencilParams {
  Scalar a{-1};
  Scalar b{0};
  Scalar c{1};
  Scalar d{1};

  PencilParams() = default;
  PencilParams(Scalar a_, Scalar b_, Scalar c_, Scalar d_) : a(a_), b(b_), c(c_), d(d_) {
    if (a < Scalar(-1) || a > Scalar(1) || b < Scalar(-1) || b > Scalar(1))
      throw ContractViolation("pencil parameters a, b must lie in [-1, 1]");
  }
};

using PencilParamsd = PencilParams<double>;

// Pencil metric eta^a = diag(a, 1, 1, 1).
template <typename Scalar>
Mat4<Scalar> metric(Scalar a) {
  if (a < Scalar(-1) || a > Scalar(1))
    throw ContractViolation("metric deformation a must lie in [-1, 1]");
  Mat4<Scalar> eta = Mat4<Scalar>::Identity();
  eta(0, 0) = a;
  return eta;
}

}  // namespace spinorbit
