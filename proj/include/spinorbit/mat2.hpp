#pragma once

#include <complex>

#include <Eigen/Dense>

#include "spinorbit/pencil.hpp"

namespace spinorbit {

template <typename Scalar>
using Mat2c = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
template <typename Scalar>
using Vec2c = Eigen::Matrix<std::complex<Scalar>, 2, 1>;
template <typename Scalar>
using Mat4c = Eigen::Matrix<std::complex<Scalar>, 4, 4>;

template <typename Scalar>
Mat2c<Scalar> sigma(int mu) {
  using C = std::complex<Scalar>;
  Mat2c<Scalar> s;
  switch (mu) {
    case 0: s << C(1), C(0), C(0), C(1); break;
    case 1: s << C(0), C(1), C(1), C(0); break;
    case 2: s << C(0), C(0, -1), C(0, 1), C(0); break;
    case 3: s << C(1), C(0), C(0), C(-1); break;
    default: throw ContractViolation("sigma index must be 0..3");
  }
  return s;
}

// tilde(B) = sigma2 B^T sigma2;  B tilde(B) = det(B) I,  tilde(AB) = tilde(B) tilde(A).
template <typename Scalar>
Mat2c<Scalar> tilde(const Mat2c<Scalar>& b) {
  const Mat2c<Scalar> s2 = sigma<Scalar>(2);
  return s2 * b.transpose() * s2;
}

// Components of a (not necessarily Hermitian) A = A^mu sigma_mu: A^mu = Tr(A sigma_mu)/2.
template <typename Scalar>
std::complex<Scalar> matrix_component(const Mat2c<Scalar>& a, int mu) {
  return (a * sigma<Scalar>(mu)).trace() / Scalar(2);
}

template <typename Scalar>
Mat2c<Scalar> matrix_from_components(Scalar a0, const Vec3<Scalar>& av) {
  Mat2c<Scalar> m = a0 * sigma<Scalar>(0);
  for (int k = 0; k < 3; ++k) m += av(k) * sigma<Scalar>(k + 1);
  return m;
}

template <typename Scalar>
bool is_hermitian(const Mat2c<Scalar>& a, Scalar tol = Scalar(1e-12)) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * (Scalar(1) + a.cwiseAbs().maxCoeff());
}

}  // namespace spinorbit
