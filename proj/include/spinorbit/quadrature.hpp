#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "spinorbit/gauss_kronrod.hpp"
#include "spinorbit/trajectory.hpp"

namespace spinorbit {

// Coefficients of the first integral (P0 z)^2 = q4 (W0)^4 + q2 (W0)^2 + q0.
template <typename Scalar>
struct QuarticCoeffs {
  Scalar q4{0}, q2{0}, q0{0};

  Scalar operator()(Scalar w0) const {
    const Scalar s = w0 * w0;
    return (q4 * s + q2) * s + q0;
  }
  Scalar derivative(Scalar w0) const { return (4 * q4 * w0 * w0 + 2 * q2) * w0; }
};

namespace detail {

template <typename Scalar>
Scalar k_const(const ReducedState<Scalar>& r, const PencilParams<Scalar>& prm) {
  const Scalar ba = prm.b - prm.a;
  return (r.h2 - r.c2) / (2 * ba * r.p0) - ba * r.p0 * r.jmag2 / 2;
}

}  // namespace detail

// Conserved quartic coefficients, derived from the reduced flow with y
// eliminated: q4 = (a P0^2 - c1)/4,
// q2 = -c2 P0^2 - a c1 P0^2 J^2 + (c1 + a P0^2) K P0. q0 is the trajectory
// constant beta. (The printed radicand has a different q4; it is not
// conserved -- see quartic_coeffs_printed and the fit test.)
template <typename Scalar>
QuarticCoeffs<Scalar> quartic_coeffs(const ReducedState<Scalar>& r,
                                     const PencilParams<Scalar>& prm) {
  if (prm.b == prm.a || r.p0 == Scalar(0))
    throw ChartError("quartic coefficients need b != a and P0 != 0");
  QuarticCoeffs<Scalar> q;
  q.q4 = (prm.a * r.p0 * r.p0 - r.c1) / 4;
  q.q2 = -r.c2 * r.p0 * r.p0 - prm.a * r.c1 * r.p0 * r.p0 * r.jmag2 +
         (r.c1 + prm.a * r.p0 * r.p0) * detail::k_const(r, prm) * r.p0;
  q.q0 = r.beta;
  return q;
}

// Verbatim coefficients of the printed radicand, kept for comparison.
template <typename Scalar>
QuarticCoeffs<Scalar> quartic_coeffs_printed(const ReducedState<Scalar>& r,
                                             const PencilParams<Scalar>& prm) {
  QuarticCoeffs<Scalar> q;
  q.q4 = -(r.c1 + prm.a * r.p0 * r.p0) / 4;
  q.q2 = r.c1 *
         (r.h2 - r.c2 - (prm.b * prm.b - prm.a * prm.a) * r.p0 * r.p0 * r.jmag2) /
         (2 * (prm.b - prm.a));
  q.q0 = r.beta;
  return q;
}

// Reduce a full state to (W0, y, z) and freeze the integrals; beta is fixed
// from the initial condition.
template <typename Scalar>
ReducedState<Scalar> reduce(const PoincareState<Scalar>& x, const PencilParams<Scalar>& prm) {
  const SpinVector<Scalar> s = pauli_lubansky(x, prm.a);
  ReducedState<Scalar> r = reduce_observables(x.p0, x.j, x.p, s.w, prm);
  if (prm.b != prm.a && r.p0 != Scalar(0)) {
    const QuarticCoeffs<Scalar> q = quartic_coeffs(r, prm);
    const Scalar pz = r.p0 * r.z;
    r.beta = pz * pz - q.q4 * std::pow(r.w0, 4) - q.q2 * r.w0 * r.w0;
  }
  return r;
}

// y as a function of W0 along the trajectory (algebraic identity).
template <typename Scalar>
Scalar y_of_w0(Scalar w0, const ReducedState<Scalar>& r, const PencilParams<Scalar>& prm) {
  if (r.p0 == Scalar(0) || prm.b == prm.a)
    throw ChartError("y(W0) undefined for P0 = 0 or b = a");
  return -w0 * w0 / (2 * r.p0) + detail::k_const(r, prm);
}

// z as a function of W0; branch picks the sign of the square root.
template <typename Scalar>
Scalar z_of_w0(Scalar w0, const ReducedState<Scalar>& r, const PencilParams<Scalar>& prm,
               int branch = +1) {
  const QuarticCoeffs<Scalar> q = quartic_coeffs(r, prm);
  Scalar rad = q(w0);
  const Scalar scale =
      std::max({std::abs(q.q0), std::abs(q.q2) * w0 * w0, std::abs(q.q4) * std::pow(w0, 4),
                Scalar(1e-30)});
  if (rad < -Scalar(1e-12) * scale)
    throw BandError("z(W0): W0 outside the oscillation band (negative radicand)");
  rad = std::max(rad, Scalar(0));
  return Scalar(branch >= 0 ? 1 : -1) * std::sqrt(rad) / r.p0;
}

// Real roots of the even quartic, ascending. Multiplicity is 2 where the
// discriminant (in s = W0^2) vanishes or at a root s = 0.
template <typename Scalar>
std::vector<Scalar> quartic_roots(const QuarticCoeffs<Scalar>& q) {
  std::vector<Scalar> roots;
  const Scalar scale = std::max({std::abs(q.q4), std::abs(q.q2), std::abs(q.q0)});
  auto push_s = [&](Scalar s) {
    if (s < -Scalar(1e-13) * scale) return;
    s = std::max(s, Scalar(0));
    const Scalar w = std::sqrt(s);
    roots.push_back(-w);
    if (w > Scalar(0)) roots.push_back(w);
  };
  if (std::abs(q.q4) <= Scalar(1e-14) * scale) {
    if (std::abs(q.q2) > Scalar(1e-14) * scale) push_s(-q.q0 / q.q2);
  } else {
    const Scalar disc = q.q2 * q.q2 - 4 * q.q4 * q.q0;
    if (disc >= Scalar(0)) {
      const Scalar sq = std::sqrt(disc);
      // numerically stable pair
      const Scalar s1 = (-q.q2 - (q.q2 >= 0 ? sq : -sq)) / (2 * q.q4);
      const Scalar s2 = (q.q0 / q.q4) / s1;
      push_s(s1);
      if (std::abs(s2 - s1) > Scalar(1e-13) * std::max(std::abs(s1), Scalar(1))) push_s(s2);
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Elapsed evolution parameter between two W0 values inside one monotone band:
// t = (1/((b-a)d)) Int dW0 / sqrt(q4 W0^4 + q2 W0^2 + q0). Signed by the
// direction of traversal; the motion realizes it on the branch where
// sign(dW0/dt) = sign((b-a) d z). Square-root substitutions remove the
// endpoint singularities at simple band-edge roots.
template <typename Scalar>
Scalar time_of_w0(Scalar w0_from, Scalar w0_to, const ReducedState<Scalar>& r,
                  const PencilParams<Scalar>& prm) {
  if (prm.b == prm.a || prm.d == Scalar(0))
    throw ChartError("time_of_w0: W0 is frozen when b = a or d = 0");
  if (w0_from == w0_to) return Scalar(0);
  const QuarticCoeffs<Scalar> q = quartic_coeffs(r, prm);
  const std::vector<Scalar> roots = quartic_roots(q);

  const Scalar lo = std::min(w0_from, w0_to), hi = std::max(w0_from, w0_to);
  const Scalar span = hi - lo;
  const Scalar edge_tol = Scalar(1e-9) * std::max(span, Scalar(1));
  std::optional<Scalar> r_lo, r_hi;
  for (const Scalar root : roots) {
    if (root > lo + edge_tol && root < hi - edge_tol)
      throw BandError("time_of_w0: interval crosses a quartic root");
    if (root <= lo + edge_tol && (!r_lo || root > *r_lo)) r_lo = root;
    if (root >= hi - edge_tol && (!r_hi || root < *r_hi)) r_hi = root;
  }
  auto is_double_root = [&](Scalar root) {
    const Scalar scale = std::max({std::abs(q.q4) * std::pow(root, 3),
                                   std::abs(q.q2) * std::abs(root), Scalar(1e-30)});
    return std::abs(q.derivative(root)) <= Scalar(1e-8) * std::max(scale, Scalar(1e-14));
  };
  if (r_lo && std::abs(lo - *r_lo) <= edge_tol && is_double_root(*r_lo))
    throw BandError("time_of_w0: band terminates asymptotically at a double root");
  if (r_hi && std::abs(hi - *r_hi) <= edge_tol && is_double_root(*r_hi))
    throw BandError("time_of_w0: band terminates asymptotically at a double root");

  auto integrand = [&](Scalar w) { return Scalar(1) / std::sqrt(std::max(q(w), Scalar(1e-300))); };
  const Scalar mid = (lo + hi) / 2;
  Scalar total = 0;
  // left half: substitute w = r_lo + u^2 when a band edge exists
  if (r_lo && *r_lo <= lo + edge_tol) {
    const Scalar base = std::min(*r_lo, lo);
    const Scalar u0 = std::sqrt(std::max(lo - base, Scalar(0)));
    const Scalar u1 = std::sqrt(mid - base);
    total += integrate_gk<Scalar>(
        [&](Scalar u) { return 2 * u * integrand(base + u * u); }, u0, u1);
  } else {
    total += integrate_gk<Scalar>(integrand, lo, mid);
  }
  if (r_hi && *r_hi >= hi - edge_tol) {
    const Scalar base = std::max(*r_hi, hi);
    const Scalar u0 = std::sqrt(std::max(base - hi, Scalar(0)));
    const Scalar u1 = std::sqrt(base - mid);
    total += integrate_gk<Scalar>(
        [&](Scalar u) { return 2 * u * integrand(base - u * u); }, u0, u1);
  } else {
    total += integrate_gk<Scalar>(integrand, mid, hi);
  }
  const Scalar sign = (w0_to >= w0_from) ? Scalar(1) : Scalar(-1);
  return sign * total / ((prm.b - prm.a) * prm.d);
}

// Right side of the xi quadrature: F(W0) = W0 dxi/dt - xi dW0/dt, a
// polynomial in W0 with frozen coefficients (the c-term survives d = 0).
template <typename Scalar>
Scalar xi_integrand(Scalar w0, const ReducedState<Scalar>& r, const PencilParams<Scalar>& prm) {
  const Scalar ba = prm.b - prm.a;
  if (ba == Scalar(0)) return Scalar(0);
  const Scalar k = detail::k_const(r, prm);
  const Scalar w2 = w0 * w0;
  const Scalar p02 = r.p0 * r.p0;
  return ba * r.p0 *
         (-prm.c * w2 +
          prm.d * (w2 * w2 / (4 * p02) -
                   (ba * r.jmag2 / 2 + (r.h2 - r.c2) / (2 * p02 * ba)) * w2 -
                   r.c2 * r.jmag2 + k * k));
}

namespace detail {

template <typename Scalar>
Scalar w0_at(const Trajectory<Scalar>& traj, Scalar t) {
  const Eigen::VectorX<Scalar> y = traj.dense(t);
  switch (traj.chart) {
    case Chart::Reduced:
    case Chart::Angles:
      return y(0);
    case Chart::PL:
      return -y.template segment<3>(7).dot(y.template segment<3>(1));
    case Chart::PW:
      return -traj.j.dot(y.template head<3>());
    default:
      throw ChartError("xi_of_t: trajectory chart does not expose W0");
  }
}

}  // namespace detail

// xi(t) = W0(t) [ xi0/W0(t0) + Int_{t0}^{t} F(W0(s))/W0(s)^2 ds ].
// The combination W0 dxi/dt - xi dW0/dt is the closed (b11)-type expression;
// dividing by (W0)^2 integrates it without ever forming L.
template <typename Scalar>
Scalar xi_of_t(const Trajectory<Scalar>& traj, Scalar t, const PencilParams<Scalar>& prm,
               Scalar xi0) {
  const ReducedState<Scalar>& r = traj.frozen;
  const Scalar t0 = traj.t_begin();
  const Scalar w00 = detail::w0_at(traj, t0);
  if (std::abs(w00) < Scalar(1e-12)) throw ChartError("xi_of_t: W0(t0) = 0");
  // guard: W0 must not cross zero on the window
  const int n = 32;
  for (int i = 0; i <= n; ++i) {
    const Scalar s = t0 + (t - t0) * Scalar(i) / n;
    if (detail::w0_at(traj, s) * w00 <= Scalar(0))
      throw ChartError("xi_of_t: W0 crosses zero inside the window");
  }
  const Scalar integral = (t == t0)
                              ? Scalar(0)
                              : integrate_gk<Scalar>(
                                    [&](Scalar s) {
                                      const Scalar w = detail::w0_at(traj, s);
                                      return xi_integrand(w, r, prm) / (w * w);
                                    },
                                    t0, t, Scalar(1e-11), Scalar(1e-13));
  return detail::w0_at(traj, t) * (xi0 / w00 + integral);
}

// L = -(J x W + xi P)/W0 on the chart W0 != 0.
template <typename Scalar>
Vec3<Scalar> l_from_w(const Vec3<Scalar>& p, const Vec3<Scalar>& j, const Vec3<Scalar>& w,
                      Scalar xi) {
  const Scalar w0 = -j.dot(p);
  const Scalar scale = std::max(Scalar(1), j.norm() * p.norm());
  if (std::abs(w0) < Scalar(1e-13) * scale)
    throw ChartError("l_from_w: W0 = 0 is outside the inversion chart");
  return -(j.cross(w) + xi * p) / w0;
}

// Position of the massive particle from the inversion of the angular-momentum
// relation: X = (J/2 x P)/detP + P0 (L/2)/detP - ((P.(L/2)) + detP X0) P/(P0 detP),
// detP = (P0)^2 - |P|^2 = -c1 at a = -1. X0 = c t.
template <typename Scalar>
Vec3<Scalar> worldline_from_l(Scalar p0, const Vec3<Scalar>& p, const Vec3<Scalar>& l,
                              const Vec3<Scalar>& j, Scalar x0) {
  const Scalar detp = p0 * p0 - p.squaredNorm();
  if (std::abs(detp) < Scalar(1e-12) * std::max(Scalar(1), p0 * p0))
    throw ChartError("worldline: massless state (det P = 0) has no position chart");
  if (p0 == Scalar(0)) throw ChartError("worldline: P0 = 0");
  const Vec3<Scalar> lh = l / 2, jh = j / 2;
  return jh.cross(p) / detp + p0 * lh / detp - (p.dot(lh) + detp * x0) * p / (p0 * detp);
}

// Same position expressed through the closed-form layer (no L):
// X = (1/(2 detP)) J x (P - (P0/W0) W) - (P/P0) (X0 + (xi + z/detP)/(2 W0)).
template <typename Scalar>
Vec3<Scalar> worldline_closed_form(Scalar p0, const Vec3<Scalar>& p, const Vec3<Scalar>& w,
                                   const Vec3<Scalar>& j, Scalar xi, Scalar x0) {
  const Scalar detp = p0 * p0 - p.squaredNorm();
  const Scalar w0 = -j.dot(p);
  if (std::abs(detp) < Scalar(1e-12) * std::max(Scalar(1), p0 * p0))
    throw ChartError("worldline: massless state (det P = 0) has no position chart");
  if (std::abs(w0) < Scalar(1e-13)) throw ChartError("worldline closed form needs W0 != 0");
  const Scalar z = j.dot(p.cross(w));
  return j.cross(p - (p0 / w0) * w) / (2 * detp) - (p / p0) * (x0 + (xi + z / detp) / (2 * w0));
}

template <typename Scalar>
struct WorldlinePoint {
  Vec3<Scalar> x;
  Scalar y0;          // impact components per the flag inversion
  Vec3<Scalar> y;
};

// Worldline of a massive trajectory in the PL chart at evolution parameter t,
// with X0 = cspeed t and the dilatation parameter delta of the flag picture
// (0 unless the state came from a flag). Rejects massless data (c1 = 0 at a = -1);
// the position chart lives in the a = -1 interpretation regardless of the
// pencil member driving the flow.
template <typename Scalar>
WorldlinePoint<Scalar> worldline_x(const Trajectory<Scalar>& traj, Scalar t,
                                   Scalar cspeed = Scalar(1), Scalar delta = Scalar(0)) {
  if (traj.chart != Chart::PL)
    throw ChartError("worldline_x expects a PL-chart trajectory");
  const Eigen::VectorX<Scalar> yv = traj.dense(t);
  PoincareState<Scalar> x;
  x.p0 = yv(0);
  x.p = yv.template segment<3>(1);
  x.l = yv.template segment<3>(4);
  x.j = yv.template segment<3>(7);
  const Scalar c1 = casimir_c1(x, Scalar(-1));
  if (!(c1 < Scalar(0)))
    throw ChartError("worldline_x: state is not massive (c1 >= 0 at a = -1)");

  WorldlinePoint<Scalar> out;
  out.x = worldline_from_l(x.p0, x.p, x.l, x.j, cspeed * t);
  // matrix-level Pauli-Lubansky components: W_k -> W_k/2, W^0 -> -W^0/2
  const SpinVector<Scalar> s = pauli_lubansky(x, Scalar(-1));
  const Scalar detp = -c1;
  out.y0 = -(-s.w0 / 2 - delta * x.p0) / detp;
  out.y = -(s.w / 2 + delta * x.p) / detp;
  return out;
}

// Inverse of the polar parameterization in the chart J = (0, 0, J):
// P3 = -W0/J, W3 = y(W0)/J, transverse radii from the frozen Casimirs,
// angles as given. Invalid (W0, state) pairs (negative radicands) rejected.
template <typename Scalar>
std::pair<Vec3<Scalar>, Vec3<Scalar>> reconstruct_pw(Scalar w0, Scalar phi, Scalar psi,
                                                     const ReducedState<Scalar>& r,
                                                     const PencilParams<Scalar>& prm) {
  if (!(r.jmag2 > Scalar(0))) throw ChartError("reconstruct_pw requires J != 0");
  const Scalar jmag = std::sqrt(r.jmag2);
  const Scalar y = y_of_w0(w0, r, prm);
  const Scalar pperp2 = r.c1 - prm.a * r.p0 * r.p0 - w0 * w0 / r.jmag2;
  const Scalar wperp2 = r.c2 - prm.a * w0 * w0 - y * y / r.jmag2;
  const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), std::abs(r.c1) + std::abs(r.c2));
  if (pperp2 < -tol || wperp2 < -tol)
    throw ContractViolation("reconstruct_pw: inconsistent (W0, state) pair");
  const Scalar pperp = std::sqrt(std::max(pperp2, Scalar(0)));
  const Scalar wperp = std::sqrt(std::max(wperp2, Scalar(0)));
  Vec3<Scalar> p(pperp * std::cos(phi), pperp * std::sin(phi), -w0 / jmag);
  Vec3<Scalar> w(wperp * std::cos(psi), wperp * std::sin(psi), y / jmag);
  return {p, w};
}

}  // namespace spinorbit
