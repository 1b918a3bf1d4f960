#pragma once

#include <random>
#include <string>
#include <vector>

#include "spinorbit/scenario.hpp"

namespace spinorbit {

struct SuiteResult {
  std::string name;
  std::vector<CheckResult> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace verify_detail {

inline double uni(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3<double> vec3(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return Vec3<double>(uni(rng, lo, hi), uni(rng, lo, hi), uni(rng, lo, hi));
}

inline PoincareStated state(std::mt19937_64& rng) {
  PoincareStated x;
  x.p0 = uni(rng, 0.5, 2.0);
  x.p = vec3(rng);
  x.l = vec3(rng);
  x.j = vec3(rng);
  return x;
}

inline TwistorPointd twistor(std::mt19937_64& rng) {
  for (;;) {
    const std::complex<double> z1(uni(rng, -1, 1), uni(rng, -1, 1));
    const std::complex<double> z2(uni(rng, -1, 1), uni(rng, -1, 1));
    const std::complex<double> z(uni(rng, -1, 1), uni(rng, -1, 1));
    const double delta =
        (std::complex<double>(0, 1) *
         (std::conj(z) * z1 - z * std::conj(z1) + z2 - std::conj(z2)))
            .real();
    if (delta > 0.3) return TwistorPointd(z1, z2, z, uni(rng, 0.5, 2.0));
  }
}

inline FlagPointd flag(std::mt19937_64& rng) {
  auto randc = [&rng] { return std::complex<double>(uni(rng, -1, 1), uni(rng, -1, 1)); };
  Mat2c<double> m, n;
  m << randc(), randc(), randc(), randc();
  n << randc(), randc(), randc(), randc();
  const Mat2c<double> x = (m + m.adjoint()) / 2;
  const Mat2c<double> y = n * n.adjoint() + 0.3 * Mat2c<double>::Identity();
  Vec2c<double> xi;
  do {
    xi << randc(), randc();
  } while (xi.norm() < 0.3);
  return FlagPointd(xi, x + std::complex<double>(0, 1) * y, uni(rng, 0.5, 2.0),
                    uni(rng, 0.2, 1.5));
}

}  // namespace verify_detail

inline SuiteResult verify_brackets(long seed, int trials) {
  std::mt19937_64 rng(seed);
  using LO = LinearObservable<double>;
  SuiteResult out{"brackets", {}};
  double jac = 0, pencil = 0;
  auto pick = [&rng] { return std::uniform_int_distribution<int>(0, 9)(rng); };
  for (double a : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    for (int t = 0; t < trials; ++t) {
      const auto x = verify_detail::state(rng);
      const int i = pick(), j = pick(), k = pick();
      auto term = [&](int p, int q, int r) {
        const auto inner = linear_bracket(LO::coordinate(q), LO::coordinate(r), a);
        return bracket_a(coordinate_observable<double>(p), inner.to_observable(), x, a);
      };
      jac = std::max(jac, std::abs(term(i, j, k) + term(j, k, i) + term(k, i, j)));
    }
  }
  for (double eps : {-1.0, 0.3, 2.0}) {
    for (int t = 0; t < trials; ++t) {
      const auto x = verify_detail::state(rng);
      const double a = verify_detail::uni(rng, -1, 1), b = verify_detail::uni(rng, -1, 1);
      const int i = pick(), j = pick(), k = pick();
      auto term = [&](int p, int q, int r) {
        const auto inner = linear_bracket_pencil(LO::coordinate(q), LO::coordinate(r), a, b, eps);
        return bracket_pencil(coordinate_observable<double>(p), inner.to_observable(), x, a, b,
                              eps);
      };
      pencil = std::max(pencil, std::abs(term(i, j, k) + term(j, k, i) + term(k, i, j)));
    }
  }
  out.checks.push_back({"jacobi", jac, 1e-10, jac < 1e-10, ""});
  out.checks.push_back({"pencil-jacobi", pencil, 1e-10, pencil < 1e-10, ""});
  return out;
}

inline SuiteResult verify_casimirs(long seed, int trials) {
  std::mt19937_64 rng(seed);
  SuiteResult out{"casimirs", {}};
  double worst1 = 0, worst2 = 0;
  for (int t = 0; t < trials; ++t) {
    const auto x = verify_detail::state(rng);
    const double a = verify_detail::uni(rng, -1, 1);
    const auto c1o = casimir_c1_observable(a);
    const auto c2o = casimir_c2_observable(a);
    for (int k = 0; k < 10; ++k) {
      const auto f = coordinate_observable<double>(k);
      worst1 = std::max(worst1, std::abs(bracket_a(c1o, f, x, a)));
      worst2 = std::max(worst2, std::abs(bracket_a(c2o, f, x, a)));
    }
  }
  out.checks.push_back({"c1-bracket", worst1, 1e-10, worst1 < 1e-10, ""});
  out.checks.push_back({"c2-bracket", worst2, 1e-10, worst2 < 1e-10, ""});
  return out;
}

inline SuiteResult verify_involution(long seed, int trials) {
  std::mt19937_64 rng(seed);
  SuiteResult out{"involution", {}};
  double worst = 0;
  for (int t = 0; t < trials; ++t) {
    const auto x = verify_detail::state(rng);
    const double a = verify_detail::uni(rng, -1, 1), b = verify_detail::uni(rng, -1, 1);
    worst = std::max(worst, std::abs(bracket_a(h1_observable(b), h2_observable(b), x, a)));
  }
  out.checks.push_back({"h1-h2", worst, 1e-9, worst < 1e-9, ""});
  return out;
}

inline SuiteResult verify_chart_equivalence(long seed, int trials) {
  std::mt19937_64 rng(seed);
  SuiteResult out{"chart-equivalence", {}};
  double worst_eq = 0, worst_cons = 0, worst_trans = 0, worst_drift = 0;
  const int samples = 101;
  int done = 0;
  while (done < trials) {
    const auto x0 = verify_detail::state(rng);
    const PencilParamsd prm{verify_detail::uni(rng, -1, 1), verify_detail::uni(rng, -1, 1),
                            verify_detail::uni(rng, 0.3, 1.0), verify_detail::uni(rng, 0.3, 1.0)};
    // relative drift needs references away from zero
    const auto hv = hamiltonian(x0, prm);
    if (std::abs(casimir_c1(x0, prm.a)) < 0.05 || std::abs(casimir_c2(x0, prm.a)) < 0.05 ||
        std::abs(hv.h1) < 0.05 || std::abs(hv.h2) < 0.05 || std::abs(hv.h) < 0.05)
      continue;
    ++done;
    auto pl = integrate_pl(x0, prm, 0.0, 10.0, {}, samples);
    const auto s0 = pauli_lubansky(x0, prm.a);
    auto pw = integrate_pw(x0.p0, x0.j, x0.p, s0.w, prm, 0.0, 10.0, {}, samples);
    auto red = integrate_reduced(reduce(x0, prm), prm, 0.0, 10.0, {}, samples);
    for (int i = 0; i < samples; ++i) {
      const auto xi = detail::unpack_pl(Eigen::Matrix<double, 10, 1>(pl.states[i]));
      const auto si = pauli_lubansky(xi, prm.a);
      worst_eq = std::max(worst_eq, (pw.states[i].head<3>() - xi.p).cwiseAbs().maxCoeff());
      worst_eq = std::max(worst_eq, (pw.states[i].tail<3>() - si.w).cwiseAbs().maxCoeff());
      worst_eq = std::max(worst_eq, std::abs(red.states[i](0) - (-xi.j.dot(xi.p))));
      worst_eq = std::max(worst_eq, std::abs(red.states[i](1) - xi.j.dot(si.w)));
      worst_eq = std::max(worst_eq, std::abs(red.states[i](2) - xi.j.dot(xi.p.cross(si.w))));
    }
    const auto repd = conservation_audit(pl);
    worst_drift = std::max({worst_drift, repd.max_rel_drift.c1, repd.max_rel_drift.c2,
                            repd.max_rel_drift.h1, repd.max_rel_drift.h2, repd.max_rel_drift.h});
    worst_cons = std::max(worst_cons, conservation_audit(pw).max_rel_drift.h);
    worst_trans = std::max(worst_trans, conservation_audit(pw).max_transversality);
  }
  // d = 0 free drift closed forms
  double worst_drift0 = 0;
  for (int t = 0; t < 3; ++t) {
    const auto x0 = verify_detail::state(rng);
    const PencilParamsd prm{-1.0, verify_detail::uni(rng, -1, 1),
                            verify_detail::uni(rng, 0.3, 1.0), 0.0};
    auto pl = integrate_pl(x0, prm, 0.0, 10.0, {}, 21);
    for (int i = 0; i < 21; ++i) {
      const double ti = pl.times[i];
      const Vec3<double> l_expect = x0.l + (prm.b - prm.a) * prm.c * x0.p0 * x0.p * ti;
      worst_drift0 = std::max(
          worst_drift0, (pl.states[i].segment<3>(4) - l_expect).cwiseAbs().maxCoeff());
      worst_drift0 =
          std::max(worst_drift0, (pl.states[i].segment<3>(1) - x0.p).cwiseAbs().maxCoeff());
    }
    if (casimir_c1(x0, -1.0) < -0.05) {
      const auto w0p = worldline_x(pl, 0.0);
      const auto w1p = worldline_x(pl, 5.0);
      const auto w2p = worldline_x(pl, 10.0);
      const Vec3<double> dv = (w2p.x - w1p.x) / 5.0 - (w1p.x - w0p.x) / 5.0;
      worst_drift0 = std::max(worst_drift0, dv.cwiseAbs().maxCoeff());
    }
  }
  out.checks.push_back({"pl-pw-reduced", worst_eq, 1e-6, worst_eq < 1e-6, ""});
  out.checks.push_back({"conservation", worst_drift, 1e-8, worst_drift < 1e-8, ""});
  out.checks.push_back({"pw-transversality", worst_trans, 1e-9, worst_trans < 1e-9, ""});
  out.checks.push_back({"free-drift", worst_drift0, 1e-9, worst_drift0 < 1e-9, ""});
  (void)worst_cons;
  return out;
}

inline SuiteResult verify_quadrature(long seed, int trials) {
  std::mt19937_64 rng(seed);
  SuiteResult out{"quadrature", {}};
  double worst_fi = 0, worst_fit = 0, worst_tm = 0, worst_rec = 0, worst_inv = 0;
  int done = 0, attempts = 0;
  while (done < trials && attempts < trials * 60) {
    ++attempts;
    PoincareStated x0 = verify_detail::state(rng);
    x0.j = Vec3<double>(0, 0, verify_detail::uni(rng, 0.6, 1.3));
    const PencilParamsd prm{-1.0, verify_detail::uni(rng, -0.5, 0.7),
                            verify_detail::uni(rng, 0.5, 1.2),
                            verify_detail::uni(rng, 0.4, 1.0)};
    if (std::abs(prm.b - prm.a) < 0.3) continue;
    const auto r0 = reduce(x0, prm);
    auto red = integrate_reduced(r0, prm, 0.0, 15.0, {}, 301);
    double w0_min = 1e30, w0_max = -1e30;
    for (const auto& s : red.states) {
      w0_min = std::min(w0_min, s(0));
      w0_max = std::max(w0_max, s(0));
    }
    if (w0_max - w0_min < 0.05) continue;  // needs a visible oscillation band
    ++done;

    const auto q = quartic_coeffs(r0, prm);
    Eigen::MatrixXd A(red.states.size(), 3);
    Eigen::VectorXd b(red.states.size());
    for (std::size_t i = 0; i < red.states.size(); ++i) {
      const double w0 = red.states[i](0), z = red.states[i](2);
      const double pz = r0.p0 * z;
      const double scale = std::max({std::abs(q.q0), std::abs(q.q2) * w0 * w0,
                                     std::abs(q.q4) * std::pow(w0, 4), pz * pz, 1e-12});
      worst_fi = std::max(worst_fi, std::abs(pz * pz - q(w0)) / scale);
      A(i, 0) = std::pow(w0, 4);
      A(i, 1) = w0 * w0;
      A(i, 2) = 1.0;
      b(i) = pz * pz;
    }
    const Eigen::Vector3d fit = A.colPivHouseholderQr().solve(b);
    const double qs = std::max({std::abs(q.q4), std::abs(q.q2), std::abs(q.q0)});
    worst_fit = std::max(worst_fit, (fit - Eigen::Vector3d(q.q4, q.q2, q.q0)).cwiseAbs()
                                            .maxCoeff() / qs);

    // quadrature clock vs the ODE clock on the longest monotone stretch
    std::size_t i0 = 0, best_len = 0, best_start = 0;
    for (std::size_t i = 1; i < red.states.size(); ++i) {
      if ((red.states[i](2) < 0) != (red.states[i0](2) < 0)) {
        if (i - i0 > best_len) { best_len = i - i0; best_start = i0; }
        i0 = i;
      }
    }
    if (red.states.size() - i0 > best_len) { best_len = red.states.size() - i0; best_start = i0; }
    if (best_len > 12) {
      const std::size_t ia = best_start + best_len / 4;
      const std::size_t ib = best_start + (3 * best_len) / 4;
      if (std::abs(red.states[ib](0) - red.states[ia](0)) > 1e-4) {
        const double t_expect = red.times[ib] - red.times[ia];
        const double t_quad =
            time_of_w0(red.states[ia](0), red.states[ib](0), r0, prm);
        worst_tm = std::max(worst_tm, std::abs(std::abs(t_quad) - t_expect));
      }
    }

    // polar reconstruction round trip on the initial state
    const auto s0 = pauli_lubansky(x0, prm.a);
    if (x0.p.head<2>().norm() > 0.05 && s0.w.head<2>().norm() > 0.05) {
      const double phi = std::atan2(x0.p(1), x0.p(0));
      const double psi = std::atan2(s0.w(1), s0.w(0));
      const auto [p, w] = reconstruct_pw(r0.w0, phi, psi, r0, prm);
      worst_rec = std::max(worst_rec, (p - x0.p).cwiseAbs().maxCoeff());
      worst_rec = std::max(worst_rec, (w - s0.w).cwiseAbs().maxCoeff());
    }
    if (std::abs(x0.j.dot(x0.p)) > 0.05) {
      const Vec3<double> l = l_from_w(x0.p, x0.j, s0.w, x0.j.dot(x0.l));
      worst_inv = std::max(worst_inv, (l - x0.l).cwiseAbs().maxCoeff());
    }
  }
  out.checks.push_back({"first-integral", worst_fi, 1e-8, worst_fi < 1e-8,
                        "trials " + std::to_string(done)});
  out.checks.push_back({"fit-vs-derived", worst_fit, 1e-6, worst_fit < 1e-6, "relative"});
  out.checks.push_back({"time-map", worst_tm, 1e-6, worst_tm < 1e-6, ""});
  out.checks.push_back({"reconstruction", worst_rec, 1e-8, worst_rec < 1e-8, ""});
  out.checks.push_back({"l-inversion", worst_inv, 1e-10, worst_inv < 1e-10, ""});
  return out;
}

inline SuiteResult verify_twistor_massless(long seed, int trials) {
  std::mt19937_64 rng(seed);
  SuiteResult out{"twistor-massless", {}};
  double worst_cas = 0, worst_hel = 0, worst_poisson = 0, worst_pull = 0;
  for (int t = 0; t < trials; ++t) {
    const auto v = verify_detail::twistor(rng);
    const auto x = observables_from_coords(v);
    worst_cas = std::max(worst_cas, std::abs(casimir_c1(x, -1.0)));
    worst_cas = std::max(worst_cas, std::abs(casimir_c2(x, -1.0)));
    const auto s = pauli_lubansky(x, -1.0);
    worst_hel = std::max(worst_hel, (s.w - (v.alpha / 2) * x.p).cwiseAbs().maxCoeff());
    worst_hel = std::max(worst_hel, std::abs(s.w0 - (v.alpha / 2) * x.p0));
    const auto w = pullback(x);
    worst_pull = std::max({worst_pull, std::abs(w.zeta1 - v.zeta1),
                           std::abs(w.zeta2 - v.zeta2), std::abs(w.zeta - v.zeta)});
  }
  // Poisson-map property at a smaller number of points (100 bracket pairs each)
  const int points = std::max(1, trials / 10);
  for (int t = 0; t < points; ++t) {
    const auto v = verify_detail::twistor(rng);
    const auto x = observables_from_coords(v);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const auto tw = twistor_bracket(pulled_back_coordinate(i, v.alpha),
                                        pulled_back_coordinate(j, v.alpha), v);
        const double lp = bracket_a(coordinate_observable<double>(i),
                                    coordinate_observable<double>(j), x, -1.0);
        worst_poisson = std::max(worst_poisson, std::abs(tw - std::complex<double>(lp)));
      }
  }
  out.checks.push_back({"casimirs", worst_cas, 1e-12, worst_cas < 1e-12, ""});
  out.checks.push_back({"helicity", worst_hel, 1e-12, worst_hel < 1e-12, ""});
  out.checks.push_back({"poisson-map", worst_poisson, 1e-8, worst_poisson < 1e-8, ""});
  out.checks.push_back({"pullback-identity", worst_pull, 1e-10, worst_pull < 1e-10, ""});
  return out;
}

inline SuiteResult verify_twistor_flow(long seed, int trials) {
  std::mt19937_64 rng(seed);
  SuiteResult out{"twistor-flow", {}};
  double worst = 0;
  const int samples = 81;
  for (int t = 0; t < trials; ++t) {
    const auto v0 = verify_detail::twistor(rng);
    const PencilParamsd prm{-1.0, verify_detail::uni(rng, -0.6, 0.8),
                            verify_detail::uni(rng, 0.3, 1.0),
                            verify_detail::uni(rng, 0.2, 0.8)};
    const auto x0 = observables_from_coords(v0);
    auto pl = integrate_pl(x0, prm, 0.0, 5.0, {}, samples);
    auto tw = integrate_twistor(v0, prm, 0.0, 5.0, {}, samples);
    for (int i = 0; i < samples; ++i) {
      const auto w = pullback(detail::unpack_pl(Eigen::Matrix<double, 10, 1>(pl.states[i])));
      const auto& y = tw.states[i];
      worst = std::max(worst, std::abs(w.zeta1 - std::complex<double>(y(0), y(1))));
      worst = std::max(worst, std::abs(w.zeta2 - std::complex<double>(y(2), y(3))));
      worst = std::max(worst, std::abs(w.zeta - std::complex<double>(y(4), y(5))));
    }
  }
  out.checks.push_back({"pullback-vs-direct", worst, 1e-5, worst < 1e-5, "sup norm, t in [0,5]"});
  return out;
}

inline SuiteResult verify_flag_massive(long seed, int trials) {
  std::mt19937_64 rng(seed);
  SuiteResult out{"flag-massive", {}};
  double worst_trpw = 0, worst_det = 0, worst_inv = 0;
  for (int t = 0; t < trials; ++t) {
    const auto f = verify_detail::flag(rng);
    const auto m = momentum_map_massive(f);
    const double s = f.spin();
    const double scale =
        m.obs.P.cwiseAbs().maxCoeff() * m.obs.W.cwiseAbs().maxCoeff() + 1.0;
    worst_trpw = std::max(worst_trpw, std::abs((m.obs.P * m.obs.W).trace()) / scale);
    const std::complex<double> detw = m.obs.W.determinant(), detp = m.obs.P.determinant();
    worst_det = std::max(worst_det, std::abs(detw + s * s * detp) /
                                        std::max(1.0, std::abs(detw) + std::abs(detp)));
    const double p0 = matrix_component(m.obs.P, 0).real();
    Vec3<double> p, w, l, j;
    for (int k = 0; k < 3; ++k) {
      p(k) = matrix_component(m.obs.P, k + 1).real();
      w(k) = matrix_component(m.obs.W, k + 1).real();
      const std::complex<double> lj = (m.obs.M * sigma<double>(k + 1)).trace();
      l(k) = lj.real();
      j(k) = lj.imag();
    }
    const double w0 = matrix_component(m.obs.W, 0).real();
    const Mat2c<double> X = (f.Z + f.Z.adjoint()) / 2, Y = f.im_z();
    const double x0 = matrix_component(X, 0).real();
    const auto inv = flag_invert(p0, p, l, j, w0, w, m.delta, x0);
    worst_inv = std::max(worst_inv, std::abs(inv.y0 - matrix_component(Y, 0).real()));
    for (int k = 0; k < 3; ++k) {
      worst_inv = std::max(worst_inv, std::abs(inv.y(k) - matrix_component(Y, k + 1).real()));
      worst_inv = std::max(worst_inv, std::abs(inv.x(k) - matrix_component(X, k + 1).real()));
    }
  }
  out.checks.push_back({"tr-pw", worst_trpw, 1e-10, worst_trpw < 1e-10, "scaled"});
  out.checks.push_back({"det-w", worst_det, 1e-9, worst_det < 1e-9, "relative"});
  out.checks.push_back({"inversion", worst_inv, 1e-9, worst_inv < 1e-9, ""});
  return out;
}

inline SuiteResult verify_suite(const std::string& name, long seed, int trials) {
  if (name == "brackets") return verify_brackets(seed, trials > 0 ? trials : 100);
  if (name == "casimirs") return verify_casimirs(seed, trials > 0 ? trials : 100);
  if (name == "involution") return verify_involution(seed, trials > 0 ? trials : 1000);
  if (name == "chart-equivalence")
    return verify_chart_equivalence(seed, trials > 0 ? trials : 20);
  if (name == "quadrature") return verify_quadrature(seed, trials > 0 ? trials : 10);
  if (name == "twistor-massless") return verify_twistor_massless(seed, trials > 0 ? trials : 100);
  if (name == "twistor-flow") return verify_twistor_flow(seed, trials > 0 ? trials : 3);
  if (name == "flag-massive") return verify_flag_massive(seed, trials > 0 ? trials : 100);
  throw ConfigError("unknown verification suite '" + name + "'");
}

inline const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {
      "brackets",        "casimirs",  "involution",       "chart-equivalence",
      "quadrature",      "twistor-massless", "twistor-flow", "flag-massive"};
  return names;
}

}  // namespace spinorbit
