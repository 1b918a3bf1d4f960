#pragma once

#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "spinorbit/pencil.hpp"

namespace spinorbit {

// Point of the dual space: energy component P0, momentum P, boost part L,
// angular momentum J. Bijective with the strictly upper triangular 5x5
// matrix rho through state_to_matrix / matrix_to_state.
template <typename Scalar>
struct PoincareState {
  Scalar p0{0};
  Vec3<Scalar> p = Vec3<Scalar>::Zero();
  Vec3<Scalar> l = Vec3<Scalar>::Zero();
  Vec3<Scalar> j = Vec3<Scalar>::Zero();
};

using PoincareStated = PoincareState<double>;

// Pauli-Lubansky pair (W0, W).
template <typename Scalar>
struct SpinVector {
  Scalar w0{0};
  Vec3<Scalar> w = Vec3<Scalar>::Zero();
};

// W0 = -J.P, W = a P0 J + L x P. Transversal: a P0 W0 + P.W = 0 identically.
template <typename Scalar>
SpinVector<Scalar> pauli_lubansky(const PoincareState<Scalar>& x, Scalar a) {
  SpinVector<Scalar> s;
  s.w0 = -x.j.dot(x.p);
  s.w = a * x.p0 * x.j + x.l.cross(x.p);
  return s;
}

// c1 = a (P0)^2 + P.P
template <typename Scalar>
Scalar casimir_c1(const PoincareState<Scalar>& x, Scalar a) {
  return a * x.p0 * x.p0 + x.p.squaredNorm();
}

// c2 = a (W0)^2 + W.W
template <typename Scalar>
Scalar casimir_c2(const PoincareState<Scalar>& x, Scalar a) {
  const SpinVector<Scalar> s = pauli_lubansky(x, a);
  return a * s.w0 * s.w0 + s.w.squaredNorm();
}

template <typename Scalar>
Scalar transversality_residual(const PoincareState<Scalar>& x, Scalar a) {
  const SpinVector<Scalar> s = pauli_lubansky(x, a);
  return a * x.p0 * s.w0 + x.p.dot(s.w);
}

// Strictly upper triangular layout:
//   row 0: (P0 P1 P2 P3), row 1: (L1 L2 L3), row 2: (J3 -J2), row 3: (J1).
template <typename Scalar>
Mat5<Scalar> state_to_matrix(const PoincareState<Scalar>& x) {
  Mat5<Scalar> rho = Mat5<Scalar>::Zero();
  rho(0, 1) = x.p0;
  rho(0, 2) = x.p(0);
  rho(0, 3) = x.p(1);
  rho(0, 4) = x.p(2);
  rho(1, 2) = x.l(0);
  rho(1, 3) = x.l(1);
  rho(1, 4) = x.l(2);
  rho(2, 3) = x.j(2);
  rho(2, 4) = -x.j(1);
  rho(3, 4) = x.j(0);
  return rho;
}

template <typename Scalar>
PoincareState<Scalar> matrix_to_state(const Mat5<Scalar>& rho) {
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c <= r; ++c)
      if (rho(r, c) != Scalar(0))
        throw ContractViolation("matrix_to_state: matrix is not strictly upper triangular");
  PoincareState<Scalar> x;
  x.p0 = rho(0, 1);
  x.p << rho(0, 2), rho(0, 3), rho(0, 4);
  x.l << rho(1, 2), rho(1, 3), rho(1, 4);
  x.j << rho(3, 4), -rho(2, 4), rho(2, 3);
  return x;
}

// Algebra element with translation y, boost u, rotation omega:
// X_{k0} = u_k, X_{0k} = -a u_k, spatial block acts as v -> omega x v.
template <typename Scalar>
Mat5<Scalar> algebra_element(const Vec4<Scalar>& y, const Vec3<Scalar>& u,
                             const Vec3<Scalar>& omega, Scalar a) {
  Mat5<Scalar> chi = Mat5<Scalar>::Zero();
  for (int i = 0; i < 4; ++i) chi(1 + i, 0) = y(i);
  for (int k = 0; k < 3; ++k) {
    chi(2 + k, 1) = u(k);
    chi(1, 2 + k) = -a * u(k);
  }
  chi(2, 3) = -omega(2);
  chi(3, 2) = omega(2);
  chi(2, 4) = omega(1);
  chi(4, 2) = -omega(1);
  chi(3, 4) = -omega(0);
  chi(4, 3) = omega(0);
  return chi;
}

// <chi, rho> = Tr(chi rho); equals y0 P0 + y.P + u.L + omega.J for
// algebra_element(y, u, omega) paired with state_to_matrix.
template <typename Scalar>
Scalar pairing(const Mat5<Scalar>& chi, const Mat5<Scalar>& rho) {
  return (chi * rho).trace();
}

// Group element (tau, Lambda) with Lambda eta^a Lambda^T = eta^a.
template <typename Scalar>
struct GroupElement {
  Vec4<Scalar> tau = Vec4<Scalar>::Zero();
  Mat4<Scalar> lambda = Mat4<Scalar>::Identity();

  static GroupElement identity() { return {}; }
};

template <typename Scalar>
bool is_pencil_isometry(const Mat4<Scalar>& lambda, Scalar a, Scalar tol = Scalar(1e-12)) {
  const Mat4<Scalar> eta = metric(a);
  return ((lambda * eta * lambda.transpose() - eta).cwiseAbs().maxCoeff() <= tol);
}

// exp of the (boost, rotation) generator; always lands in the isometry group.
template <typename Scalar>
GroupElement<Scalar> make_group_element(const Vec4<Scalar>& tau, const Vec3<Scalar>& u,
                                        const Vec3<Scalar>& omega, Scalar a) {
  const Mat5<Scalar> chi = algebra_element(Vec4<Scalar>::Zero().eval(), u, omega, a);
  GroupElement<Scalar> g;
  g.tau = tau;
  g.lambda = chi.template block<4, 4>(1, 1).exp();
  return g;
}

// Coadjoint action. Defined by <Ad*_g rho, chi> = <rho, g^-1 chi g>, i.e.
// Ad*_g rho = Pi(g rho g^-1) with Pi the projection onto strictly upper
// triangular matrices along the annihilator of the algebra:
//   P'      = Lambda^-T P              (4-vector row of the conjugated matrix)
//   L'_k    = D_{0k} - a D_{k0}
//   S'_{kl} = D_{kl} - D_{lk} (k<l),   D = tau P^T Lambda^-1 + Lambda S Lambda^-1.
// Leaves c1 and c2 invariant.
template <typename Scalar>
PoincareState<Scalar> coadjoint(const GroupElement<Scalar>& g, const PoincareState<Scalar>& x,
                                Scalar a) {
  if (!is_pencil_isometry(g.lambda, a))
    throw ContractViolation("coadjoint: Lambda does not preserve the pencil metric");

  Vec4<Scalar> r;
  r << x.p0, x.p(0), x.p(1), x.p(2);
  Mat4<Scalar> S = Mat4<Scalar>::Zero();
  S(0, 1) = x.l(0);
  S(0, 2) = x.l(1);
  S(0, 3) = x.l(2);
  S(1, 2) = x.j(2);
  S(1, 3) = -x.j(1);
  S(2, 3) = x.j(0);

  const Mat4<Scalar> lam_inv = g.lambda.inverse();
  const Vec4<Scalar> rp = lam_inv.transpose() * r;
  const Mat4<Scalar> D = g.tau * (r.transpose() * lam_inv) + g.lambda * S * lam_inv;

  PoincareState<Scalar> out;
  out.p0 = rp(0);
  out.p << rp(1), rp(2), rp(3);
  for (int k = 0; k < 3; ++k) out.l(k) = D(0, 1 + k) - a * D(1 + k, 0);
  out.j(2) = D(1, 2) - D(2, 1);
  out.j(1) = -(D(1, 3) - D(3, 1));
  out.j(0) = D(2, 3) - D(3, 2);
  return out;
}

}  // namespace spinorbit
