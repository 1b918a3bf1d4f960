#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "spinorbit/errors.hpp"

namespace spinorbit {

// Embedded Dormand-Prince 5(4) pair with PI step-size control and the
// standard order-4 continuous extension. Explicit and non-stiff on purpose;
// conservation along the flow is audited downstream, not enforced here.
template <typename Scalar, int N>
class DenseSolution {
 public:
  using Vec = Eigen::Matrix<Scalar, N, 1>;

  struct Segment {
    Scalar t, h;
    Vec r1, r2, r3, r4, r5;
  };

  bool empty() const { return segments_.empty(); }
  Scalar t_begin() const { return segments_.front().t; }
  Scalar t_end() const { return segments_.back().t + segments_.back().h; }

  Vec operator()(Scalar t) const {
    if (segments_.empty()) throw Error("dense solution holds no accepted steps");
    const Scalar lo = t_begin(), hi = t_end();
    if (t < lo - Scalar(1e-12) * (1 + std::abs(lo)) ||
        t > hi + Scalar(1e-12) * (1 + std::abs(hi)))
      throw ContractViolation("dense evaluation outside the integrated span");
    t = std::clamp(t, lo, hi);
    std::size_t k = 0, n = segments_.size();
    // binary search for the segment containing t
    std::size_t a = 0, b = n - 1;
    while (a < b) {
      const std::size_t m = (a + b + 1) / 2;
      if (segments_[m].t <= t) a = m; else b = m - 1;
    }
    k = a;
    const Segment& s = segments_[k];
    const Scalar th = (t - s.t) / s.h, th1 = Scalar(1) - th;
    return s.r1 + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
  }

  void push(const Segment& s) { segments_.push_back(s); }
  std::size_t steps() const { return segments_.size(); }

 private:
  std::vector<Segment> segments_;
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  std::size_t max_steps = 2'000'000;
};

template <typename Scalar, int N>
struct OdeOutcome {
  DenseSolution<Scalar, N> sol;
  bool singular = false;      // step-size underflow before reaching t1
  Scalar t_stop{0};           // last time with a valid state
  Eigen::Matrix<Scalar, N, 1> y_stop;
};

// Integrates to t1 or to the point where the step size underflows (the
// caller decides whether that is an error); see integrate_dopri5 for the
// throwing variant.
template <typename Scalar, int N, typename F>
OdeOutcome<Scalar, N> integrate_dopri5_outcome(F&& f, const Eigen::Matrix<Scalar, N, 1>& y0,
                                               Scalar t0, Scalar t1,
                                               const OdeOptions& opt = {}) {
  using Vec = Eigen::Matrix<Scalar, N, 1>;
  if (!(t1 > t0)) throw ContractViolation("integrate: t1 must exceed t0");
  if (!(opt.rtol > 0) || !(opt.atol > 0))
    throw ContractViolation("integrate: tolerances must be positive");

  static constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5,
                          c5 = Scalar(8) / 9;
  static constexpr Scalar a21 = Scalar(1) / 5;
  static constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  static constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
  static constexpr Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187,
                          a53 = Scalar(64448) / 6561, a54 = Scalar(-212) / 729;
  static constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33,
                          a63 = Scalar(46732) / 5247, a64 = Scalar(49) / 176,
                          a65 = Scalar(-5103) / 18656;
  static constexpr Scalar b1 = Scalar(35) / 384, b3 = Scalar(500) / 1113,
                          b4 = Scalar(125) / 192, b5 = Scalar(-2187) / 6784,
                          b6 = Scalar(11) / 84;
  static constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695,
                          e4 = Scalar(71) / 1920, e5 = Scalar(-17253) / 339200,
                          e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;
  static constexpr Scalar d1 = Scalar(-12715105075.0) / Scalar(11282082432.0),
                          d3 = Scalar(87487479700.0) / Scalar(32700410799.0),
                          d4 = Scalar(-10690763975.0) / Scalar(1880347072.0),
                          d5 = Scalar(701980252875.0) / Scalar(199316789632.0),
                          d6 = Scalar(-1453857185.0) / Scalar(822651844.0),
                          d7 = Scalar(69997945.0) / Scalar(29380423.0);

  OdeOutcome<Scalar, N> out;
  DenseSolution<Scalar, N>& sol = out.sol;
  Vec y = y0;
  Scalar t = t0;
  Vec k1 = f(t, y);
  if (!k1.allFinite()) throw Error("integrate: non-finite derivative at the initial state");

  // initial step size from the scale of y and f
  Scalar h = std::min(Scalar(1e-2) * (t1 - t0),
                      Scalar(0.01) * (Scalar(1) + y.norm()) / (Scalar(1) + k1.norm()));
  h = std::max(h, Scalar(16) * std::numeric_limits<Scalar>::epsilon() * (t1 - t0));

  Scalar facold = Scalar(1e-4);
  const Scalar beta = Scalar(0.04), expo1 = Scalar(0.2) - beta * Scalar(0.75),
               safe = Scalar(0.9);

  std::size_t nsteps = 0;
  while (t < t1) {
    if (++nsteps > opt.max_steps) throw Error("integrate: step budget exhausted");
    h = std::min(h, t1 - t);
    const Scalar hmin = Scalar(16) * std::numeric_limits<Scalar>::epsilon() *
                        std::max(std::abs(t), Scalar(1));
    if (h < hmin) {
      out.singular = true;
      break;
    }

    bool evals_ok = true;
    Vec k2, k3, k4, k5, k6, k7, ynew;
    Scalar err = std::numeric_limits<Scalar>::infinity();
    try {
      k2 = f(t + c2 * h, y + h * (a21 * k1));
      k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
      k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      k7 = f(t + h, ynew);
      const Vec e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      Scalar sum = 0;
      for (int i = 0; i < N; ++i) {
        const Scalar sc =
            opt.atol + opt.rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
        sum += (e(i) / sc) * (e(i) / sc);
      }
      err = std::sqrt(sum / N);
      if (!ynew.allFinite() || !std::isfinite(err)) evals_ok = false;
    } catch (const SingularityError&) {
      evals_ok = false;  // reject and shrink toward the singular locus
    }

    if (evals_ok && err <= Scalar(1)) {
      typename DenseSolution<Scalar, N>::Segment seg;
      seg.t = t;
      seg.h = h;
      const Vec ydiff = ynew - y;
      const Vec bspl = h * k1 - ydiff;
      seg.r1 = y;
      seg.r2 = ydiff;
      seg.r3 = bspl;
      seg.r4 = ydiff - h * k7 - bspl;
      seg.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      sol.push(seg);
      t += h;
      y = ynew;
      k1 = k7;  // FSAL
      facold = std::max(err, Scalar(1e-4));
      const Scalar fac = std::pow(err, expo1) / std::pow(facold, beta);
      h *= std::min(Scalar(5), std::max(Scalar(0.2), safe / fac));
    } else {
      const Scalar shrink =
          evals_ok ? std::max(Scalar(0.2), safe * std::pow(err, Scalar(-0.2))) : Scalar(0.3);
      h *= std::min(Scalar(1), shrink);
    }
  }
  out.t_stop = t;
  out.y_stop = y;
  return out;
}

// Throwing variant: a singularity before t1 raises SingularityError.
template <typename Scalar, int N, typename F>
DenseSolution<Scalar, N> integrate_dopri5(F&& f, const Eigen::Matrix<Scalar, N, 1>& y0,
                                          Scalar t0, Scalar t1, const OdeOptions& opt = {}) {
  auto out = integrate_dopri5_outcome<Scalar, N>(f, y0, t0, t1, opt);
  if (out.singular)
    throw SingularityError("integrate: step size underflow (singularity hit)",
                           static_cast<double>(out.t_stop));
  return out.sol;
}

}  // namespace spinorbit
