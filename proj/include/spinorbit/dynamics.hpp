#pragma once

#include "spinorbit/bracket.hpp"

namespace spinorbit {

// h1 = b (P0)^2 + P.P  (Casimir of {.,.}_b)
template <typename Scalar>
Scalar h1(const PoincareState<Scalar>& x, Scalar b) {
  return b * x.p0 * x.p0 + x.p.squaredNorm();
}

// h2 = b (P.J)^2 + |b P0 J + L x P|^2  (second Casimir of {.,.}_b)
template <typename Scalar>
Scalar h2(const PoincareState<Scalar>& x, Scalar b) {
  const Vec3<Scalar> wb = b * x.p0 * x.j + x.l.cross(x.p);
  const Scalar pj = x.p.dot(x.j);
  return b * pj * pj + wb.squaredNorm();
}

template <typename Scalar>
struct HamiltonianValue {
  Scalar h{0};
  Scalar h1{0};
  Scalar h2{0};
};

template <typename Scalar>
HamiltonianValue<Scalar> hamiltonian(const PoincareState<Scalar>& x,
                                     const PencilParams<Scalar>& prm) {
  HamiltonianValue<Scalar> v;
  v.h1 = h1(x, prm.b);
  v.h2 = h2(x, prm.b);
  v.h = (prm.c * v.h1 + prm.d * v.h2) / 2;
  return v;
}

// The paper-style rewriting of h in terms of (P0, W, J); equals h only up to
// Casimir multiples: h = hamiltonian_third_form + (c/2) c1 + (b d / 2a) c2.
// Undefined at a = 0.
template <typename Scalar>
Scalar hamiltonian_third_form(const PoincareState<Scalar>& x, const PencilParams<Scalar>& prm) {
  if (prm.a == Scalar(0)) throw ChartError("third-form Hamiltonian divides by a");
  const SpinVector<Scalar> s = pauli_lubansky(x, prm.a);
  const Scalar j2 = x.j.squaredNorm();
  return (prm.b - prm.a) / 2 *
         (prm.c * x.p0 * x.p0 + prm.d * (prm.b - prm.a) * x.p0 * x.p0 * j2 -
          prm.d / prm.a * s.w.squaredNorm() + 2 * prm.d * x.p0 * s.w.dot(x.j));
}

template <typename Scalar>
StateGradient<Scalar> hamiltonian_gradient(const PoincareState<Scalar>& x,
                                           const PencilParams<Scalar>& prm) {
  const Vec3<Scalar> wb = prm.b * x.p0 * x.j + x.l.cross(x.p);
  const Scalar pj = x.p.dot(x.j);
  StateGradient<Scalar> g;
  g.p0 = prm.c * prm.b * x.p0 + prm.d * prm.b * wb.dot(x.j);
  g.p = prm.c * x.p + prm.d * (prm.b * pj * x.j + wb.cross(x.l));
  g.l = prm.d * x.p.cross(wb);
  g.j = prm.d * (prm.b * pj * x.p + prm.b * x.p0 * wb);
  return g;
}

template <typename Scalar>
Observable<Scalar> h1_observable(Scalar b) {
  return Observable<Scalar>(
      [b](const PoincareState<Scalar>& x) { return h1(x, b); },
      [b](const PoincareState<Scalar>& x) {
        StateGradient<Scalar> g;
        g.p0 = 2 * b * x.p0;
        g.p = 2 * x.p;
        return g;
      });
}

template <typename Scalar>
Observable<Scalar> h2_observable(Scalar b) {
  return Observable<Scalar>(
      [b](const PoincareState<Scalar>& x) { return h2(x, b); },
      [b](const PoincareState<Scalar>& x) {
        const Vec3<Scalar> wb = b * x.p0 * x.j + x.l.cross(x.p);
        const Scalar pj = x.p.dot(x.j);
        StateGradient<Scalar> g;
        g.p0 = 2 * b * wb.dot(x.j);
        g.p = 2 * b * pj * x.j + 2 * wb.cross(x.l);
        g.l = 2 * x.p.cross(wb);
        g.j = 2 * b * pj * x.p + 2 * b * x.p0 * wb;
        return g;
      });
}

template <typename Scalar>
Observable<Scalar> hamiltonian_observable(const PencilParams<Scalar>& prm) {
  return Observable<Scalar>(
      [prm](const PoincareState<Scalar>& x) { return hamiltonian(x, prm).h; },
      [prm](const PoincareState<Scalar>& x) { return hamiltonian_gradient(x, prm); });
}

// Flow in the (P0, P, L, J) chart. dP0/dt = dJ/dt = 0 identically.
template <typename Scalar>
PoincareState<Scalar> vf_pl(const PoincareState<Scalar>& x, const PencilParams<Scalar>& prm) {
  const Scalar ba = prm.b - prm.a;
  const Scalar j2 = x.j.squaredNorm();
  PoincareState<Scalar> dot;
  dot.p0 = Scalar(0);
  dot.j = Vec3<Scalar>::Zero();
  dot.p = ba * prm.d * x.p0 * (x.p.cross(x.p.cross(x.l)) + prm.b * x.p0 * x.j.cross(x.p));
  dot.l = ba * (prm.c * x.p0 * x.p + prm.b * prm.d * x.p0 * j2 * x.p +
                prm.d * x.p0 * x.l.cross(x.p.cross(x.l)) +
                prm.d * x.p.squaredNorm() * x.j.cross(x.l) -
                prm.d * x.p.dot(x.l) * x.j.cross(x.p) +
                prm.b * prm.d * x.p0 * x.p0 * x.j.cross(x.l));
  return dot;
}

// Flow in the (P, W) chart; P0 and J are frozen integrals.
template <typename Scalar>
std::pair<Vec3<Scalar>, Vec3<Scalar>> vf_pw(Scalar p0, const Vec3<Scalar>& j,
                                            const Vec3<Scalar>& p, const Vec3<Scalar>& w,
                                            const PencilParams<Scalar>& prm) {
  const Scalar ba = prm.b - prm.a;
  const Scalar pj = p.dot(j);
  const Vec3<Scalar> dp = ba * prm.d * p0 * (-p.cross(w) + ba * p0 * j.cross(p));
  const Vec3<Scalar> dw = ba * prm.d *
                          (pj * p.cross(w) + prm.b * p0 * p0 * j.cross(w) +
                           prm.a * p0 * pj * j.cross(p));
  return {dp, dw};
}

// Reduced triple (W0, y, z) = (-J.P, J.W, J.(P x W)) plus the frozen
// integrals of the trajectory it came from.
template <typename Scalar>
struct ReducedState {
  Scalar w0{0}, y{0}, z{0};
  Scalar p0{0};     // frozen P0
  Scalar jmag2{0};  // frozen |J|^2
  Scalar c1{0}, c2{0}, h2{0};
  Scalar beta{0};   // first-integral constant, set by quadrature::reduce
};

using ReducedStated = ReducedState<double>;

// dW0 = (b-a) d P0 z,  dy = -(b-a) d W0 z,
// dz  = (b-a) d W0 (-c2 P0 + a P0 W0^2 + (c1 + a P0^2) y - a c1 P0 J^2).
// The |W|^2-term of the printed equation is restored here (the raw spatial
// square, not the Casimir); this is the version the chain rule from the
// (P, W) flow produces.
template <typename Scalar>
std::array<Scalar, 3> vf_reduced(const ReducedState<Scalar>& r, const PencilParams<Scalar>& prm) {
  const Scalar ba = prm.b - prm.a;
  const Scalar dw0 = ba * prm.d * r.p0 * r.z;
  const Scalar dy = -ba * prm.d * r.w0 * r.z;
  const Scalar dz = ba * prm.d * r.w0 *
                    (-r.c2 * r.p0 + prm.a * r.p0 * r.w0 * r.w0 +
                     (r.c1 + prm.a * r.p0 * r.p0) * r.y - prm.a * r.c1 * r.p0 * r.jmag2);
  return {dw0, dy, dz};
}

// Polar angle rates in the chart J = (0, 0, J):
//   dphi/dt = (b-a) d P0 [ (b-a) P0 J + y/J + W0^2 (y - a P0 J^2) / (J^3 Pperp^2) ]
//   dpsi/dt = (b-a) d [ b P0^2 J + W0^2/J + W0^2 (y - a P0 J^2)^2 / (J^3 Wperp^2) ]
// with Pperp^2 = c1 - a P0^2 - W0^2/J^2 and Wperp^2 = c2 - a W0^2 - y^2/J^2.
template <typename Scalar>
std::pair<Scalar, Scalar> vf_angles(const ReducedState<Scalar>& r,
                                    const PencilParams<Scalar>& prm) {
  const Scalar ba = prm.b - prm.a;
  const Scalar j2 = r.jmag2;
  if (j2 <= Scalar(0)) throw ChartError("angle chart requires J != 0");
  const Scalar jmag = std::sqrt(j2);
  const Scalar pperp2 = r.c1 - prm.a * r.p0 * r.p0 - r.w0 * r.w0 / j2;
  const Scalar wperp2 = r.c2 - prm.a * r.w0 * r.w0 - r.y * r.y / j2;
  const Scalar scale = std::max(Scalar(1), std::abs(r.c1) + std::abs(r.c2));
  if (std::abs(pperp2) < Scalar(1e-10) * scale || std::abs(wperp2) < Scalar(1e-10) * scale)
    throw SingularityError("angle rates: transverse radius below tolerance", 0.0);
  const Scalar common = r.w0 * r.w0 * (r.y - prm.a * r.p0 * j2);
  const Scalar dphi =
      ba * prm.d * r.p0 * (ba * r.p0 * jmag + r.y / jmag + common / (jmag * j2 * pperp2));
  const Scalar dpsi =
      ba * prm.d *
      (prm.b * r.p0 * r.p0 * jmag + r.w0 * r.w0 / jmag +
       r.w0 * r.w0 * (r.y - prm.a * r.p0 * j2) * (r.y - prm.a * r.p0 * j2) /
           (jmag * j2 * wperp2));
  return {dphi, dpsi};
}

// ---- chart maps ----

template <typename Scalar>
ReducedState<Scalar> reduce_observables(Scalar p0, const Vec3<Scalar>& j, const Vec3<Scalar>& p,
                                        const Vec3<Scalar>& w, const PencilParams<Scalar>& prm) {
  ReducedState<Scalar> r;
  r.w0 = -j.dot(p);
  r.y = j.dot(w);
  r.z = j.dot(p.cross(w));
  r.p0 = p0;
  r.jmag2 = j.squaredNorm();
  r.c1 = prm.a * p0 * p0 + p.squaredNorm();
  const Scalar w0 = r.w0;
  r.c2 = prm.a * w0 * w0 + w.squaredNorm();
  const Vec3<Scalar> wb = w + (prm.b - prm.a) * p0 * j;
  r.h2 = prm.b * w0 * w0 + wb.squaredNorm();
  return r;
}

}  // namespace spinorbit
