#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "spinorbit/errors.hpp"

namespace spinorbit {

// 15-point Kronrod rule with embedded 7-point Gauss error estimate.
template <typename Scalar, typename F>
std::pair<Scalar, Scalar> gk15(F&& f, Scalar a, Scalar b) {
  static const std::array<double, 8> xk = {
      0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
      0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
  static const std::array<double, 8> wk = {
      0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
      0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
  static const std::array<double, 4> wg = {0.129484966168870, 0.279705391489277,
                                           0.381830050505119, 0.417959183673469};
  const Scalar c = (a + b) / 2, hw = (b - a) / 2;
  Scalar k = 0, g = 0;
  for (int i = 0; i < 8; ++i) {
    const Scalar x = Scalar(xk[i]) * hw;
    const Scalar f1 = f(c - x);
    const Scalar f2 = (i == 7) ? f1 : f(c + x);
    const Scalar pair_sum = (i == 7) ? f1 : f1 + f2;
    k += Scalar(wk[i]) * pair_sum;
    if (i % 2 == 1) g += Scalar(wg[i / 2]) * pair_sum;
  }
  k *= hw;
  g *= hw;
  return {k, std::abs(k - g)};
}

// Adaptive bisection on the interval stack until the summed error estimate
// meets atol + rtol |I|.
template <typename Scalar, typename F>
Scalar integrate_gk(F&& f, Scalar a, Scalar b, Scalar rtol = Scalar(1e-11),
                    Scalar atol = Scalar(1e-13), int max_intervals = 4000) {
  if (a == b) return Scalar(0);
  struct Iv {
    Scalar a, b, val, err;
  };
  auto eval = [&](Scalar lo, Scalar hi) {
    auto [v, e] = gk15(f, lo, hi);
    return Iv{lo, hi, v, e};
  };
  std::vector<Iv> ivs{eval(a, b)};
  for (int n = 0; n < max_intervals; ++n) {
    Scalar total = 0, err = 0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < ivs.size(); ++i) {
      total += ivs[i].val;
      err += ivs[i].err;
      if (ivs[i].err > ivs[worst].err) worst = i;
    }
    if (err <= atol + rtol * std::abs(total)) return total;
    const Iv w = ivs[worst];
    const Scalar m = (w.a + w.b) / 2;
    if (m == w.a || m == w.b)
      throw Error("adaptive quadrature: interval collapsed before convergence");
    ivs[worst] = eval(w.a, m);
    ivs.push_back(eval(m, w.b));
  }
  throw Error("adaptive quadrature failed to converge");
}

}  // namespace spinorbit
