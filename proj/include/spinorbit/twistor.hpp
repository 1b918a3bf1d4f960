#pragma once

#include <array>
#include <functional>

#include "spinorbit/dynamics.hpp"
#include "spinorbit/mat2.hpp"

namespace spinorbit {

// Twistor Hermitian form of signature (++--), Phi = i [[0, -I], [I, 0]].
template <typename Scalar>
Mat4c<Scalar> twistor_form() {
  using C = std::complex<Scalar>;
  Mat4c<Scalar> phi = Mat4c<Scalar>::Zero();
  phi.template block<2, 2>(0, 2) = -C(0, 1) * Mat2c<Scalar>::Identity();
  phi.template block<2, 2>(2, 0) = C(0, 1) * Mat2c<Scalar>::Identity();
  return phi;
}

// Positive projective twistor in the xi2 = 1 chart: v = (zeta1, zeta2, zeta, 1),
// Delta = i(conj(zeta) zeta1 - zeta conj(zeta1) + zeta2 - conj(zeta2)) > 0.
// alpha > 0 scales the symplectic form; alpha/2 is the helicity.
template <typename Scalar>
struct TwistorPoint {
  using C = std::complex<Scalar>;
  C zeta1{0}, zeta2{0}, zeta{0};
  Scalar alpha{1};

  TwistorPoint() = default;
  TwistorPoint(C z1, C z2, C z, Scalar alpha_) : zeta1(z1), zeta2(z2), zeta(z), alpha(alpha_) {
    if (!(alpha > Scalar(0))) throw ContractViolation("twistor scale alpha must be positive");
    if (!(delta() > Scalar(0)))
      throw ContractViolation("twistor point is not positive (Delta <= 0)");
  }

  Scalar delta() const {
    return (C(0, 1) * (std::conj(zeta) * zeta1 - zeta * std::conj(zeta1) + zeta2 -
                       std::conj(zeta2)))
        .real();
  }

  Eigen::Matrix<std::complex<Scalar>, 4, 1> homogeneous() const {
    Eigen::Matrix<C, 4, 1> v;
    v << zeta1, zeta2, zeta, C(1);
    return v;
  }
};

using TwistorPointd = TwistorPoint<double>;

// Momentum-map data shared by the massless and massive realizations.
// M tilde(P) = R - i W defines the matrix-level Pauli-Lubansky W (Hermitian).
template <typename Scalar>
struct SpinObservables {
  Mat2c<Scalar> P, M, W, R;
};

template <typename Scalar>
void split_pauli_lubansky(SpinObservables<Scalar>& obs) {
  const Mat2c<Scalar> mp = obs.M * tilde(obs.P);
  obs.R = ((mp + mp.adjoint()) / Scalar(2)).eval();
  obs.W = (std::complex<Scalar>(0, 1) * (mp - mp.adjoint()) / Scalar(2)).eval();
}

template <typename Scalar>
struct MasslessMap {
  SpinObservables<Scalar> obs;
  Scalar dilatation{0};
  Mat2c<Scalar> accel;    // acceleration block of the su(2,2)* image
  Mat4c<Scalar> block;    // full (trace-free) matrix of the map
};

// J^+_alpha([v]) = i alpha (1/4 - v v^dag Phi / Delta); lower-left block is
// P = (alpha/Delta) xi xi^dag, upper-left carries M and the dilatation.
template <typename Scalar>
MasslessMap<Scalar> momentum_map_massless(const TwistorPoint<Scalar>& v) {
  using C = std::complex<Scalar>;
  const Scalar D = v.delta();
  if (!(D > Scalar(0))) throw ChartError("massless momentum map needs Delta > 0");
  Vec2c<Scalar> eta, xi;
  eta << v.zeta1, v.zeta2;
  xi << v.zeta, C(1);

  MasslessMap<Scalar> m;
  m.obs.P = (v.alpha / D) * (xi * xi.adjoint());
  const C xe = xi.adjoint() * eta;
  m.obs.M = (v.alpha / D) * (eta * xi.adjoint() - (xe / Scalar(2)) * Mat2c<Scalar>::Identity());
  split_pauli_lubansky(m.obs);
  m.dilatation = (v.alpha / D) * xe.real();
  m.accel = -(v.alpha / D) * (eta * eta.adjoint());

  const auto vv = v.homogeneous();
  m.block = C(0, v.alpha) *
            (Mat4c<Scalar>::Identity() / Scalar(4) -
             (vv * vv.adjoint() * twistor_form<Scalar>()) / D);
  return m;
}

// Canonical coordinate observables (P0, P, L, J) of the mapped point:
// P^mu = Tr(P sigma_mu)/2, L_k + i J_k = Tr(M sigma_k).
template <typename Scalar>
PoincareState<Scalar> observables_from_coords(const TwistorPoint<Scalar>& v) {
  const MasslessMap<Scalar> m = momentum_map_massless(v);
  PoincareState<Scalar> x;
  x.p0 = matrix_component(m.obs.P, 0).real();
  for (int k = 0; k < 3; ++k) {
    x.p(k) = matrix_component(m.obs.P, k + 1).real();
    const std::complex<Scalar> lj = (m.obs.M * sigma<Scalar>(k + 1)).trace();
    x.l(k) = lj.real();
    x.j(k) = lj.imag();
  }
  return x;
}

// The paper's printed coordinate lists, kept verbatim as regression anchors.
// Relative to the canonical extraction: P-components carry a factor -i
// (canonical = i * printed), L and J agree exactly, the spatial W-components
// carry -i and the printed W^0 additionally flips sign.
template <typename Scalar>
std::array<std::complex<Scalar>, 14> printed_coordinate_observables(const TwistorPoint<Scalar>& v) {
  using C = std::complex<Scalar>;
  const C z1 = v.zeta1, z2 = v.zeta2, z = v.zeta;
  const C zb1 = std::conj(z1), zb2 = std::conj(z2), zb = std::conj(z);
  const Scalar D = v.delta();
  const C i(0, 1);
  const Scalar al = v.alpha;
  std::array<C, 14> o;
  o[0] = -i * al / (2 * D) * (z * zb + Scalar(1));               // (49) P0
  o[1] = -i * al / (2 * D) * (z + zb);                           // (50) P1
  o[2] = -al / (2 * D) * (zb - z);                               // (51) P2
  o[3] = -i * al / (2 * D) * (z * zb - Scalar(1));               // (52) P3
  o[4] = al / (2 * D) * (z2 * zb + zb2 * z + z1 + zb1);          // (53) L1
  o[5] = i * al / (2 * D) * (-z2 * zb + zb2 * z + z1 - zb1);     // (54) L2
  o[6] = al / (2 * D) * (z1 * zb + zb1 * z - z2 - zb2);          // (55) L3
  o[7] = -i * al / (2 * D) * (z2 * zb - zb2 * z + z1 - zb1);     // (56) J1
  o[8] = -al / (2 * D) * (z2 * zb + zb2 * z - z1 - zb1);         // (57) J2
  o[9] = -i * al / (2 * D) * (z1 * zb - zb1 * z - z2 + zb2);     // (58) J3
  o[10] = i * al * al / (4 * D) * (z * zb + Scalar(1));          // (62) W0
  o[11] = -i * al * al / (4 * D) * (z + zb);                     // (63) W1
  o[12] = -al * al / (4 * D) * (zb - z);                         // (64) W2
  o[13] = -i * al * al / (4 * D) * (z * zb - Scalar(1));         // (65) W3
  return o;
}

// ---- the symplectic bracket (47) ----

// Wirtinger-differentiable observable on the twistor chart. The gradient
// callback returns (dF/dzeta_j, dF/dconj(zeta_j)) for j = (zeta1, zeta2, zeta).
template <typename Scalar>
class TwistorObservable {
 public:
  using C = std::complex<Scalar>;
  using Coords = Eigen::Matrix<C, 3, 1>;
  using ValueFn = std::function<C(const TwistorPoint<Scalar>&)>;
  using GradFn = std::function<std::pair<Coords, Coords>(const TwistorPoint<Scalar>&)>;

  TwistorObservable(ValueFn value, GradFn grad = nullptr)
      : value_(std::move(value)), grad_(std::move(grad)) {}

  C operator()(const TwistorPoint<Scalar>& v) const { return value_(v); }

  std::pair<Coords, Coords> wirtinger(const TwistorPoint<Scalar>& v) const {
    if (grad_) return grad_(v);
    if (!value_)
      throw ContractViolation("twistor observable has neither gradient nor value evaluator");
    Coords dz = Coords::Zero(), dzb = Coords::Zero();
    const Scalar eps = Scalar(1e-6);
    for (int k = 0; k < 3; ++k) {
      auto shift = [&](Scalar dx, Scalar dy) {
        TwistorPoint<Scalar> w = v;
        C* comp[3] = {&w.zeta1, &w.zeta2, &w.zeta};
        *comp[k] += C(dx, dy);
        return value_(w);
      };
      const C fx = (shift(eps, 0) - shift(-eps, 0)) / (2 * eps);
      const C fy = (shift(0, eps) - shift(0, -eps)) / (2 * eps);
      dz(k) = (fx - C(0, 1) * fy) / Scalar(2);
      dzb(k) = (fx + C(0, 1) * fy) / Scalar(2);
    }
    return {dz, dzb};
  }

 private:
  ValueFn value_;
  GradFn grad_;
};

namespace detail {

// T matrix of the bracket (47) in the ordering (zeta1, zeta2, zeta):
// {F,G} = -(Delta/alpha) (F_zbar^T T G_z + F_z^T conj(T) G_zbar).
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, 3, 3> bracket_matrix(const TwistorPoint<Scalar>& v) {
  using C = std::complex<Scalar>;
  Eigen::Matrix<C, 3, 3> t;
  t << C(0), -std::conj(v.zeta1), C(-1),
       v.zeta1, v.zeta2 - std::conj(v.zeta2), v.zeta,
       C(1), -std::conj(v.zeta), C(0);
  return t;
}

}  // namespace detail

template <typename Scalar>
std::complex<Scalar> twistor_bracket(const TwistorObservable<Scalar>& f,
                                     const TwistorObservable<Scalar>& g,
                                     const TwistorPoint<Scalar>& v) {
  const auto [fz, fzb] = f.wirtinger(v);
  const auto [gz, gzb] = g.wirtinger(v);
  const auto t = detail::bracket_matrix(v);
  return -(v.delta() / v.alpha) *
         ((fzb.transpose() * t * gz).value() + (fz.transpose() * t.conjugate() * gzb).value());
}

// Analytic Wirtinger gradients of the ten pulled-back coordinate observables,
// index order (P0, P1..P3, L1..L3, J1..J3).
template <typename Scalar>
TwistorObservable<Scalar> pulled_back_coordinate(int idx, Scalar alpha) {
  using C = std::complex<Scalar>;
  using Coords = typename TwistorObservable<Scalar>::Coords;
  if (idx < 0 || idx >= 10) throw ContractViolation("coordinate index out of range");

  // each observable is (alpha/2Delta) N with N a low-degree polynomial
  struct Part {
    std::function<C(C, C, C, C, C, C)> n;          // N(z1,z2,z, conj...)
    std::function<Coords(C, C, C, C, C, C)> nz;    // dN/dzeta_j
    std::function<Coords(C, C, C, C, C, C)> nzb;   // dN/dconj(zeta_j)
  };
  static const C i(0, 1);
  auto mk = [alpha](Part part) {
    auto val = [part, alpha](const TwistorPoint<Scalar>& v) {
      const C z1 = v.zeta1, z2 = v.zeta2, z = v.zeta;
      return alpha / (2 * v.delta()) * part.n(z1, z2, z, std::conj(z1), std::conj(z2),
                                              std::conj(z));
    };
    auto grad = [part, alpha](const TwistorPoint<Scalar>& v) {
      const C z1 = v.zeta1, z2 = v.zeta2, z = v.zeta;
      const C zb1 = std::conj(z1), zb2 = std::conj(z2), zb = std::conj(z);
      const Scalar D = v.delta();
      const C nval = part.n(z1, z2, z, zb1, zb2, zb);
      const Coords nz = part.nz(z1, z2, z, zb1, zb2, zb);
      const Coords nzb = part.nzb(z1, z2, z, zb1, zb2, zb);
      // dDelta/d(zeta1, zeta2, zeta) and conjugates
      Coords dDz, dDzb;
      dDz << i * zb, i, -i * zb1;
      dDzb << -i * z, -i, i * z1;
      const Scalar pref = alpha / 2;
      Coords gz, gzb;
      for (int k = 0; k < 3; ++k) {
        gz(k) = pref * (nz(k) * D - nval * dDz(k)) / (D * D);
        gzb(k) = pref * (nzb(k) * D - nval * dDzb(k)) / (D * D);
      }
      return std::make_pair(gz, gzb);
    };
    return TwistorObservable<Scalar>(val, grad);
  };

  auto coords3 = [](C a, C b, C c) { Coords v; v << a, b, c; return v; };
  switch (idx) {
    case 0: return mk({[](C, C, C z, C, C, C zb) { return z * zb + Scalar(1); },
                       [coords3](C, C, C, C, C, C zb) { return coords3(0, 0, zb); },
                       [coords3](C, C, C z, C, C, C) { return coords3(0, 0, z); }});
    case 1: return mk({[](C, C, C z, C, C, C zb) { return z + zb; },
                       [coords3](C, C, C, C, C, C) { return coords3(0, 0, 1); },
                       [coords3](C, C, C, C, C, C) { return coords3(0, 0, 1); }});
    case 2: return mk({[](C, C, C z, C, C, C zb) { return i * (z - zb); },
                       [coords3](C, C, C, C, C, C) { return coords3(0, 0, i); },
                       [coords3](C, C, C, C, C, C) { return coords3(0, 0, -i); }});
    case 3: return mk({[](C, C, C z, C, C, C zb) { return z * zb - Scalar(1); },
                       [coords3](C, C, C, C, C, C zb) { return coords3(0, 0, zb); },
                       [coords3](C, C, C z, C, C, C) { return coords3(0, 0, z); }});
    case 4:  // L1: N = z1 + zb1 + zb z2 + z zb2
      return mk({[](C z1, C z2, C z, C zb1, C zb2, C zb) { return z1 + zb1 + zb * z2 + z * zb2; },
                 [coords3](C, C, C, C, C zb2, C zb) { return coords3(1, zb, zb2); },
                 [coords3](C, C z2, C z, C, C, C) { return coords3(1, z, z2); }});
    case 5:  // L2: N = i(z1 - zb1 - zb z2 + z zb2)
      return mk({[](C z1, C z2, C z, C zb1, C zb2, C zb) {
                   return i * (z1 - zb1 - zb * z2 + z * zb2);
                 },
                 [coords3](C, C, C, C, C zb2, C zb) { return coords3(i, -i * zb, i * zb2); },
                 [coords3](C, C z2, C z, C, C, C) { return coords3(-i, i * z, -i * z2); }});
    case 6:  // L3: N = zb z1 + z zb1 - z2 - zb2
      return mk({[](C z1, C z2, C z, C zb1, C zb2, C zb) {
                   return zb * z1 + z * zb1 - z2 - zb2;
                 },
                 [coords3](C, C, C, C zb1, C, C zb) { return coords3(zb, -1, zb1); },
                 [coords3](C z1, C, C z, C, C, C) { return coords3(z, -1, z1); }});
    case 7:  // J1: N = -i(z1 - zb1 + zb z2 - z zb2)
      return mk({[](C z1, C z2, C z, C zb1, C zb2, C zb) {
                   return -i * (z1 - zb1 + zb * z2 - z * zb2);
                 },
                 [coords3](C, C, C, C, C zb2, C zb) { return coords3(-i, -i * zb, i * zb2); },
                 [coords3](C, C z2, C z, C, C, C) { return coords3(i, i * z, -i * z2); }});
    case 8:  // J2: N = z1 + zb1 - zb z2 - z zb2
      return mk({[](C z1, C z2, C z, C zb1, C zb2, C zb) {
                   return z1 + zb1 - zb * z2 - z * zb2;
                 },
                 [coords3](C, C, C, C, C zb2, C zb) { return coords3(1, -zb, -zb2); },
                 [coords3](C, C z2, C z, C, C, C) { return coords3(1, -z, -z2); }});
    default:  // J3: N = -i(zb z1 - z zb1 - z2 + zb2)
      return mk({[](C z1, C z2, C z, C zb1, C zb2, C zb) {
                   return -i * (zb * z1 - z * zb1 - z2 + zb2);
                 },
                 [coords3](C, C, C, C zb1, C, C zb) { return coords3(-i * zb, i, i * zb1); },
                 [coords3](C z1, C, C z, C, C, C) { return coords3(i * z, -i, -i * z1); }});
  }
}

// dzeta_j/dt = {zeta_j, h o J^+_alpha}_{alpha,+} with analytic Wirtinger
// derivatives chained through the coordinate observables.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, 3, 1> twistor_vf(const TwistorPoint<Scalar>& v,
                                                     const PencilParams<Scalar>& prm) {
  using C = std::complex<Scalar>;
  using Coords = typename TwistorObservable<Scalar>::Coords;
  if (prm.a != Scalar(-1))
    throw ChartError("the twistor realization carries the a = -1 bracket");
  const PoincareState<Scalar> x = observables_from_coords(v);
  const StateGradient<Scalar> gh = hamiltonian_gradient(x, prm);
  Coords hzb = Coords::Zero();
  for (int idx = 0; idx < 10; ++idx) {
    const Scalar w = detail::grad_coord(gh, idx);
    if (w == Scalar(0)) continue;
    const auto [gz, gzb] = pulled_back_coordinate(idx, v.alpha).wirtinger(v);
    (void)gz;
    hzb += w * gzb;
  }
  const auto t = detail::bracket_matrix(v);
  return (-(v.delta() / v.alpha) * (t.conjugate() * hzb)).eval();
}

// Printed rational form of the zeta equation; equals -1 x the canonical flow
// (the print uses the opposite flow-sign convention), kept as a regression anchor.
template <typename Scalar>
std::complex<Scalar> twistor_vf_zeta_printed(const TwistorPoint<Scalar>& v,
                                             const PencilParams<Scalar>& prm) {
  using C = std::complex<Scalar>;
  const Scalar D = v.delta(), al = v.alpha;
  const Scalar ba = prm.b - prm.a;
  return -C(std::pow(al, 3) / (8 * std::pow(D, 3)) * prm.d * ba * ba) *
         std::pow(v.zeta * std::conj(v.zeta) + Scalar(1), 3) *
         (v.zeta2 * v.zeta - v.zeta1);
}

// Inverse of observables_from_coords on the massless orbit (c1 = c2 = 0,
// positive helicity). Chart requires P0 != P3.
template <typename Scalar>
TwistorPoint<Scalar> pullback(const PoincareState<Scalar>& x,
                              Scalar orbit_tol = Scalar(1e-8)) {
  using C = std::complex<Scalar>;
  const Scalar a = Scalar(-1);
  const Scalar scale = std::max(Scalar(1), x.p.squaredNorm() + x.p0 * x.p0);
  if (std::abs(casimir_c1(x, a)) > orbit_tol * scale ||
      std::abs(casimir_c2(x, a)) > orbit_tol * scale * scale)
    throw ChartError("pullback: state is not on the massless orbit (c1 = c2 = 0)");
  if (std::abs(x.p0 - x.p(2)) <= Scalar(1e-14) * scale)
    throw ChartError("pullback: chart denominator P0 - P3 vanishes");
  const Scalar w0 = -x.j.dot(x.p);
  const Scalar alpha = 2 * w0 / x.p0;
  if (!(alpha > Scalar(0)))
    throw ChartError("pullback: state has non-positive helicity scale");
  const C zeta = C(x.p(0), -x.p(1)) / C(x.p0 - x.p(2));
  const Scalar D = alpha * (std::norm(zeta) + Scalar(1)) / (2 * x.p0);
  const C l1j1(x.l(0), x.j(0)), l2j2(x.l(1), x.j(1)), l3j3(x.l(2), x.j(2));
  const C zeta1 = D / (2 * alpha) * (l1j1 - C(0, 1) * l2j2);
  const C zeta2 = std::conj(zeta) * zeta1 - D / alpha * l3j3;
  return TwistorPoint<Scalar>(zeta1, zeta2, zeta, alpha);
}

// Conformal invariant of a twistor pair (s^2 of Eq.-level weight):
// ((a1-a2)/4)^2 + (a1 a2/4) |v1' Phi v2|^2 / (Delta1 Delta2).
template <typename Scalar>
Scalar s_squared(const TwistorPoint<Scalar>& v1, const TwistorPoint<Scalar>& v2) {
  const auto phi = twistor_form<Scalar>();
  const auto u1 = v1.homogeneous(), u2 = v2.homogeneous();
  const Scalar d1 = (u1.adjoint() * phi * u1).value().real();
  const Scalar d2 = (u2.adjoint() * phi * u2).value().real();
  const std::complex<Scalar> x = (u1.adjoint() * phi * u2).value();
  const Scalar sd = (v1.alpha - v2.alpha) / 4;
  return sd * sd + (v1.alpha * v2.alpha / 4) * std::norm(x) / (d1 * d2);
}

template <typename Scalar>
TwistorPoint<Scalar> apply_su22(const Mat4c<Scalar>& g, const TwistorPoint<Scalar>& v) {
  const auto u = (g * v.homogeneous()).eval();
  if (std::abs(u(3)) < Scalar(1e-14))
    throw ChartError("conformal image leaves the xi2 = 1 chart");
  return TwistorPoint<Scalar>(u(0) / u(3), u(1) / u(3), u(2) / u(3), v.alpha);
}

// ---- massive flag realization ----

// Flag ([xi], Z) with Im Z positive definite; alpha1, alpha2 are the scales of
// the two reduced twistor factors (s = (a1-a2)/4, delta = -(a1+a2)/4).
template <typename Scalar>
struct FlagPoint {
  Vec2c<Scalar> xi;
  Mat2c<Scalar> Z;
  Scalar alpha1{1}, alpha2{1};

  FlagPoint(const Vec2c<Scalar>& xi_, const Mat2c<Scalar>& Z_, Scalar a1, Scalar a2)
      : xi(xi_), Z(Z_), alpha1(a1), alpha2(a2) {
    const Mat2c<Scalar> y = im_z();
    const Scalar dety = (y(0, 0) * y(1, 1) - y(0, 1) * y(1, 0)).real();
    const Scalar try_ = (y(0, 0) + y(1, 1)).real();
    if (!(dety > Scalar(0)) || !(try_ > Scalar(0)))
      throw ContractViolation("flag: Im Z must be positive definite");
    if (xi.norm() < Scalar(1e-14)) throw ContractViolation("flag: xi must be nonzero");
  }

  Mat2c<Scalar> im_z() const {
    return ((Z - Z.adjoint()) / std::complex<Scalar>(0, 2)).eval();
  }
  Scalar spin() const { return (alpha1 - alpha2) / 4; }
  Scalar dilatation_delta() const { return -(alpha1 + alpha2) / 4; }
};

using FlagPointd = FlagPoint<double>;

template <typename Scalar>
struct MassiveMap {
  SpinObservables<Scalar> obs;
  Scalar delta{0};
  Mat4c<Scalar> block;
};

// Reduced momentum map of the flag space: P per the two-term rational matrix
// formula, M = Z P - Tr(Z P)/2, W from M tilde(P) = R - i W. Satisfies
// Tr PW = 0, det W = -s^2 det P, Tr P ImZ = 2 delta.
template <typename Scalar>
MassiveMap<Scalar> momentum_map_massive(const FlagPoint<Scalar>& f) {
  using C = std::complex<Scalar>;
  const Mat2c<Scalar> zz = f.Z - f.Z.adjoint();
  const C q = (f.xi.adjoint() * zz * f.xi).value();
  const C dz = zz(0, 0) * zz(1, 1) - zz(0, 1) * zz(1, 0);
  if (std::abs(q) < Scalar(1e-14) * (Scalar(1) + f.xi.squaredNorm()))
    throw ContractViolation("massive map: degenerate flag (xi' (Z - Z') xi = 0)");
  const Mat2c<Scalar> rho = f.xi * f.xi.adjoint();

  MassiveMap<Scalar> m;
  m.obs.P = -C(0, 1) * f.alpha1 / q * rho -
            C(0, 1) * f.alpha2 / (dz * q) * (tilde(zz) * tilde(rho) * tilde(zz));
  m.obs.M = f.Z * m.obs.P - ((f.Z * m.obs.P).trace() / Scalar(2)) * Mat2c<Scalar>::Identity();
  split_pauli_lubansky(m.obs);
  m.delta = f.dilatation_delta();

  m.block = Mat4c<Scalar>::Zero();
  const Mat2c<Scalar> idel = C(0, 1) * m.delta * Mat2c<Scalar>::Identity();
  m.block.template block<2, 2>(0, 0) = f.Z * m.obs.P - idel;
  m.block.template block<2, 2>(0, 2) = -f.Z * m.obs.P * f.Z.adjoint();
  m.block.template block<2, 2>(2, 0) = m.obs.P;
  m.block.template block<2, 2>(2, 2) = -m.obs.P * f.Z.adjoint() - idel;
  return m;
}

// Coordinate form of M (the long printed expression, with the Z factor the
// print drops from its third term restored); cross-check of (58k).
template <typename Scalar>
Mat2c<Scalar> massive_m_coordinate_form(const FlagPoint<Scalar>& f) {
  using C = std::complex<Scalar>;
  const Mat2c<Scalar> zz = f.Z - f.Z.adjoint();
  const C q = (f.xi.adjoint() * zz * f.xi).value();
  const C dz = zz(0, 0) * zz(1, 1) - zz(0, 1) * zz(1, 0);
  const Mat2c<Scalar> rho = f.xi * f.xi.adjoint();
  const Mat2c<Scalar> s2m = sigma<Scalar>(2);
  const C overlined =
      std::conj((f.xi.adjoint() * zz * s2m * f.Z.conjugate() * s2m * zz * f.xi).value());
  return -C(0, 1) * f.alpha1 / q * (f.Z * rho) +
         C(0, 1) * f.alpha1 / (Scalar(2) * q) * (f.xi.adjoint() * f.Z * f.xi).value() *
             Mat2c<Scalar>::Identity() -
         C(0, 1) * f.alpha2 / (dz * q) * (f.Z * tilde(zz) * tilde(rho) * tilde(zz)) +
         C(0, 1) * f.alpha2 / (Scalar(2) * dz * q) * overlined * Mat2c<Scalar>::Identity();
}

// Printed two-scale form of W; equals the (b42d) definition.
template <typename Scalar>
Mat2c<Scalar> massive_w_printed(const FlagPoint<Scalar>& f) {
  using C = std::complex<Scalar>;
  const Mat2c<Scalar> zz = f.Z - f.Z.adjoint();
  const C q = (f.xi.adjoint() * zz * f.xi).value();
  const C dz = zz(0, 0) * zz(1, 1) - zz(0, 1) * zz(1, 0);
  const Mat2c<Scalar> rho = f.xi * f.xi.adjoint();
  const Scalar delta = f.dilatation_delta();
  return -C(0, 1) * delta * f.alpha1 / q * tilde(rho) -
         C(0, 1) * f.alpha1 * f.alpha2 / (Scalar(2) * dz) * zz -
         C(0, 1) * delta * f.alpha2 / (dz * q) * (zz * rho * zz);
}

// Identify a flag with an orthogonal twistor pair: z = span(v1, v2), [v] = [v1].
// Orthogonality v1' Phi v2 = 0 within tol (relative).
template <typename Scalar>
FlagPoint<Scalar> flag_from_twistor_pair(const Eigen::Matrix<std::complex<Scalar>, 4, 1>& v1,
                                         Scalar alpha1,
                                         const Eigen::Matrix<std::complex<Scalar>, 4, 1>& v2,
                                         Scalar alpha2, Scalar tol = Scalar(1e-10)) {
  const auto phi = twistor_form<Scalar>();
  const std::complex<Scalar> ortho = (v1.adjoint() * phi * v2).value();
  if (std::abs(ortho) > tol * v1.norm() * v2.norm())
    throw ContractViolation("flag pair is not Phi-orthogonal");
  Mat2c<Scalar> xis, etas;
  etas.col(0) = v1.template head<2>();
  etas.col(1) = v2.template head<2>();
  xis.col(0) = v1.template tail<2>();
  xis.col(1) = v2.template tail<2>();
  if (std::abs(xis.determinant()) < Scalar(1e-12) * xis.norm())
    throw ChartError("twistor plane not a graph over the o-plane");
  const Mat2c<Scalar> Z = etas * xis.inverse();
  return FlagPoint<Scalar>(v1.template tail<2>(), Z, alpha1, alpha2);
}

// Inversion of the massive map: Y0, Y, X from the vector-form observables.
// Components are P^mu = Tr(P s_mu)/2, W^mu = Tr(W s_mu)/2, L_k + i J_k = Tr(M s_k);
// the L, J entering the position formula carry the extra factor 1/2.
template <typename Scalar>
struct FlagInversion {
  Scalar y0;
  Vec3<Scalar> y;
  Vec3<Scalar> x;
};

template <typename Scalar>
FlagInversion<Scalar> flag_invert(Scalar p0, const Vec3<Scalar>& p, const Vec3<Scalar>& l,
                                  const Vec3<Scalar>& j, Scalar w0, const Vec3<Scalar>& w,
                                  Scalar delta, Scalar x0) {
  const Scalar detp = p0 * p0 - p.squaredNorm();
  if (std::abs(detp) < Scalar(1e-14) * (Scalar(1) + p0 * p0))
    throw ChartError("flag inversion: det P = 0 (massless)");
  if (std::abs(p0) < Scalar(1e-14)) throw ChartError("flag inversion: P0 = 0");
  FlagInversion<Scalar> out;
  out.y0 = -(w0 - delta * p0) / detp;
  out.y = -(w + delta * p) / detp;
  const Vec3<Scalar> lh = l / 2, jh = j / 2;
  out.x = jh.cross(p) / detp + p0 * lh / detp - (p.dot(lh) + detp * x0) * p / (p0 * detp);
  return out;
}

}  // namespace spinorbit
