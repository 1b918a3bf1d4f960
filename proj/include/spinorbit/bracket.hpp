#pragma once

#include <array>

#include "spinorbit/observable.hpp"

namespace spinorbit {

// Lie-Poisson bracket {f,g}_a in vector-calculus form:
//   a P0 (f_P.g_L - f_L.g_P) + J.(a f_L x g_L + f_J x g_J)
//   + g_P0 P.f_L - f_P0 P.g_L + P.(f_P x g_J + f_J x g_P)
//   + L.(f_L x g_J + f_J x g_L).
template <typename Scalar>
Scalar bracket_gradients(const StateGradient<Scalar>& f, const StateGradient<Scalar>& g,
                         const PoincareState<Scalar>& x, Scalar a) {
  Scalar v = a * x.p0 * (f.p.dot(g.l) - f.l.dot(g.p));
  v += x.j.dot(a * f.l.cross(g.l) + f.j.cross(g.j));
  v += g.p0 * x.p.dot(f.l) - f.p0 * x.p.dot(g.l);
  v += x.p.dot(f.p.cross(g.j) + f.j.cross(g.p));
  v += x.l.dot(f.l.cross(g.j) + f.j.cross(g.l));
  return v;
}

template <typename Scalar>
Scalar bracket_a(const Observable<Scalar>& f, const Observable<Scalar>& g,
                 const PoincareState<Scalar>& x, Scalar a) {
  return bracket_gradients(f.gradient(x), g.gradient(x), x, a);
}

// Member of the bracket pencil {.,.}_a + eps {.,.}_b.
template <typename Scalar>
Scalar bracket_pencil(const Observable<Scalar>& f, const Observable<Scalar>& g,
                      const PoincareState<Scalar>& x, Scalar a, Scalar b, Scalar eps) {
  const StateGradient<Scalar> fg = f.gradient(x), gg = g.gradient(x);
  return bracket_gradients(fg, gg, x, a) + eps * bracket_gradients(fg, gg, x, b);
}

// Poisson tensor Pi_{ij} = {x_i, x_j}_a at x, coordinates (P0, P, L, J).
template <typename Scalar>
Eigen::Matrix<Scalar, 10, 10> poisson_matrix(const PoincareState<Scalar>& x, Scalar a) {
  Eigen::Matrix<Scalar, 10, 10> pi = Eigen::Matrix<Scalar, 10, 10>::Zero();
  auto eps = [](int i, int j, int k) { return Scalar(((i - j) * (j - k) * (k - i)) / 2); };
  for (int k = 0; k < 3; ++k) {
    pi(0, 4 + k) = -x.p(k);                     // {P0, L_k}
    pi(1 + k, 4 + k) = a * x.p0;                // {P_k, L_k}
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        const Scalar e = eps(i + 1, j + 1, k + 1);
        if (e == Scalar(0)) continue;
        pi(1 + i, 7 + j) += e * x.p(k);         // {P_i, J_j}
        pi(4 + i, 4 + j) += a * e * x.j(k);     // {L_i, L_j}
        pi(4 + i, 7 + j) += e * x.l(k);         // {L_i, J_j}
        pi(7 + i, 7 + j) += e * x.j(k);         // {J_i, J_j}
      }
  // antisymmetric completion
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < i; ++j) pi(i, j) = -pi(j, i);
  return pi;
}

// Hamiltonian vector field from a gradient: dx_i/dt = {x_i, h} = Pi grad h.
template <typename Scalar>
PoincareState<Scalar> hamiltonian_field(const StateGradient<Scalar>& gh,
                                        const PoincareState<Scalar>& x, Scalar a) {
  PoincareState<Scalar> dot;
  dot.p0 = -x.p.dot(gh.l);
  dot.p = a * x.p0 * gh.l + gh.j.cross(x.p);
  dot.l = x.p * gh.p0 - a * x.p0 * gh.p + a * gh.l.cross(x.j) + gh.j.cross(x.l);
  dot.j = gh.p.cross(x.p) + gh.l.cross(x.l) + gh.j.cross(x.j);
  return dot;
}

// Observable affine in the coordinates; closed under the coordinate bracket,
// with exact gradients. Used by the Jacobi / pencil property tests.
template <typename Scalar>
struct LinearObservable {
  Scalar c0{0};
  std::array<Scalar, 10> coeff{};

  Scalar operator()(const PoincareState<Scalar>& x) const {
    Scalar v = c0;
    for (int i = 0; i < 10; ++i) v += coeff[i] * detail::state_coord(x, i);
    return v;
  }

  Observable<Scalar> to_observable() const {
    auto self = *this;
    return Observable<Scalar>(
        [self](const PoincareState<Scalar>& x) { return self(x); },
        [self](const PoincareState<Scalar>&) {
          StateGradient<Scalar> g;
          for (int i = 0; i < 10; ++i) detail::grad_coord(g, i) = self.coeff[i];
          return g;
        });
  }

  static LinearObservable coordinate(int i) {
    LinearObservable f;
    f.coeff[i] = Scalar(1);
    return f;
  }
};

// {f, g}_a of two affine observables is again affine (linear Poisson
// structure); evaluated through the structure constants.
template <typename Scalar>
LinearObservable<Scalar> linear_bracket(const LinearObservable<Scalar>& f,
                                        const LinearObservable<Scalar>& g, Scalar a) {
  LinearObservable<Scalar> out;
  auto eps = [](int i, int j, int k) { return Scalar(((i - j) * (j - k) * (k - i)) / 2); };
  auto add = [&out](int coord, Scalar v) { out.coeff[coord] += v; };
  enum Kind { kP0, kP, kL, kJ };
  auto kind = [](int i) { return i == 0 ? kP0 : (i < 4 ? kP : (i < 7 ? kL : kJ)); };
  auto comp = [](int i) { return i == 0 ? 0 : (i - 1) % 3; };  // 0-based vector component
  for (int i = 0; i < 10; ++i) {
    if (f.coeff[i] == Scalar(0)) continue;
    for (int j = 0; j < 10; ++j) {
      const Scalar w = f.coeff[i] * g.coeff[j];
      if (w == Scalar(0)) continue;
      const int ki = kind(i), kj = kind(j);
      const int ci = comp(i) + 1, cj = comp(j) + 1;  // 1-based for eps
      if (ki == kP0 && kj == kL) add(1 + comp(j), -w);              // {P0,L_k} = -P_k
      else if (ki == kL && kj == kP0) add(1 + comp(i), w);          // {L_k,P0} = +P_k
      else if (ki == kP && kj == kL && ci == cj) add(0, a * w);     // {P_k,L_k} = a P0
      else if (ki == kL && kj == kP && ci == cj) add(0, -a * w);
      else if (ki == kP && kj == kJ)                                 // {P_i,J_j} = e_ijk P_k
        for (int k = 1; k <= 3; ++k) add(k, w * eps(ci, cj, k));
      else if (ki == kJ && kj == kP)                                 // {J_i,P_j} = e_ijk P_k
        for (int k = 1; k <= 3; ++k) add(k, w * eps(ci, cj, k));
      else if (ki == kL && kj == kL)                                 // {L_i,L_j} = a e_ijk J_k
        for (int k = 1; k <= 3; ++k) add(6 + k, a * w * eps(ci, cj, k));
      else if (ki == kL && kj == kJ)                                 // {L_i,J_j} = e_ijk L_k
        for (int k = 1; k <= 3; ++k) add(3 + k, w * eps(ci, cj, k));
      else if (ki == kJ && kj == kL)                                 // {J_i,L_j} = e_ijk L_k
        for (int k = 1; k <= 3; ++k) add(3 + k, w * eps(ci, cj, k));
      else if (ki == kJ && kj == kJ)                                 // {J_i,J_j} = e_ijk J_k
        for (int k = 1; k <= 3; ++k) add(6 + k, w * eps(ci, cj, k));
    }
  }
  return out;
}

// Pencil version of linear_bracket.
template <typename Scalar>
LinearObservable<Scalar> linear_bracket_pencil(const LinearObservable<Scalar>& f,
                                               const LinearObservable<Scalar>& g, Scalar a,
                                               Scalar b, Scalar eps) {
  LinearObservable<Scalar> ba = linear_bracket(f, g, a);
  const LinearObservable<Scalar> bb = linear_bracket(f, g, b);
  ba.c0 += eps * bb.c0;
  for (int i = 0; i < 10; ++i) ba.coeff[i] += eps * bb.coeff[i];
  return ba;
}

}  // namespace spinorbit
