#pragma once

#include <functional>
#include <utility>

#include "spinorbit/state.hpp"

namespace spinorbit {

// Gradient of an observable with respect to the coordinates (P0, P, L, J).
template <typename Scalar>
struct StateGradient {
  Scalar p0{0};
  Vec3<Scalar> p = Vec3<Scalar>::Zero();
  Vec3<Scalar> l = Vec3<Scalar>::Zero();
  Vec3<Scalar> j = Vec3<Scalar>::Zero();
};

namespace detail {

template <typename Scalar>
Scalar& state_coord(PoincareState<Scalar>& x, int i) {
  if (i == 0) return x.p0;
  if (i < 4) return x.p(i - 1);
  if (i < 7) return x.l(i - 4);
  return x.j(i - 7);
}

template <typename Scalar>
Scalar state_coord(const PoincareState<Scalar>& x, int i) {
  if (i == 0) return x.p0;
  if (i < 4) return x.p(i - 1);
  if (i < 7) return x.l(i - 4);
  return x.j(i - 7);
}

template <typename Scalar>
Scalar& grad_coord(StateGradient<Scalar>& g, int i) {
  if (i == 0) return g.p0;
  if (i < 4) return g.p(i - 1);
  if (i < 7) return g.l(i - 4);
  return g.j(i - 7);
}

template <typename Scalar>
Scalar grad_coord(const StateGradient<Scalar>& g, int i) {
  if (i == 0) return g.p0;
  if (i < 4) return g.p(i - 1);
  if (i < 7) return g.l(i - 4);
  return g.j(i - 7);
}

}  // namespace detail

// Differentiable observable on the dual space. Built-ins carry analytic
// gradients; observables built from a bare value function fall back to
// central differences (step 1e-6 x coordinate scale).
template <typename Scalar>
class Observable {
 public:
  using ValueFn = std::function<Scalar(const PoincareState<Scalar>&)>;
  using GradientFn = std::function<StateGradient<Scalar>(const PoincareState<Scalar>&)>;

  Observable(ValueFn value, GradientFn gradient = nullptr)
      : value_(std::move(value)), gradient_(std::move(gradient)) {}

  Scalar operator()(const PoincareState<Scalar>& x) const { return value_(x); }

  StateGradient<Scalar> gradient(const PoincareState<Scalar>& x) const {
    if (gradient_) return gradient_(x);
    if (!value_)
      throw ContractViolation("observable has neither a gradient nor a value evaluator");
    StateGradient<Scalar> g;
    for (int i = 0; i < 10; ++i) {
      const Scalar scale = std::max(Scalar(1), std::abs(detail::state_coord(x, i)));
      const Scalar h = Scalar(1e-6) * scale;
      PoincareState<Scalar> xp = x, xm = x;
      detail::state_coord(xp, i) += h;
      detail::state_coord(xm, i) -= h;
      detail::grad_coord(g, i) = (value_(xp) - value_(xm)) / (2 * h);
    }
    return g;
  }

  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }

 private:
  ValueFn value_;
  GradientFn gradient_;
};

using Observabled = Observable<double>;

// Coordinate functions, index order (P0, P1..P3, L1..L3, J1..J3).
template <typename Scalar>
Observable<Scalar> coordinate_observable(int i) {
  if (i < 0 || i >= 10) throw ContractViolation("coordinate index out of range");
  return Observable<Scalar>(
      [i](const PoincareState<Scalar>& x) { return detail::state_coord(x, i); },
      [i](const PoincareState<Scalar>&) {
        StateGradient<Scalar> g;
        detail::grad_coord(g, i) = Scalar(1);
        return g;
      });
}

template <typename Scalar>
Observable<Scalar> casimir_c1_observable(Scalar a) {
  return Observable<Scalar>(
      [a](const PoincareState<Scalar>& x) { return casimir_c1(x, a); },
      [a](const PoincareState<Scalar>& x) {
        StateGradient<Scalar> g;
        g.p0 = 2 * a * x.p0;
        g.p = 2 * x.p;
        return g;
      });
}

template <typename Scalar>
Observable<Scalar> casimir_c2_observable(Scalar a) {
  return Observable<Scalar>(
      [a](const PoincareState<Scalar>& x) { return casimir_c2(x, a); },
      [a](const PoincareState<Scalar>& x) {
        const SpinVector<Scalar> s = pauli_lubansky(x, a);
        StateGradient<Scalar> g;
        g.p0 = 2 * a * s.w.dot(x.j);
        g.p = -2 * a * s.w0 * x.j + 2 * s.w.cross(x.l);
        g.l = 2 * x.p.cross(s.w);
        g.j = -2 * a * s.w0 * x.p + 2 * a * x.p0 * s.w;
        return g;
      });
}

}  // namespace spinorbit
