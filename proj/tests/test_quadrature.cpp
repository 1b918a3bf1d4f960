#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "spinorbit/quadrature.hpp"

using namespace spinorbit;
using testutil::random_state;
using testutil::uniform;
using Vec3d = Vec3<double>;

namespace {

PencilParamsd osc_params() { return {-1.0, 0.3, 1.0, 0.5}; }

PoincareStated osc_state() {
  PoincareStated x;
  x.p0 = 1.3;
  x.p = Vec3d(0.4, -0.2, 0.6);
  x.l = Vec3d(-0.3, 0.5, 0.1);
  x.j = Vec3d(0, 0, 0.9);
  return x;
}

// massive state whose W0 band stays away from zero (xi chart valid)
PoincareStated xi_state() {
  PoincareStated x;
  x.p0 = 1.5541076921375545;
  x.p = Vec3d(-0.79318482, 0.73605591, -0.71116122);
  x.l = Vec3d(0.4077354, 0.11544492, 0.11004381);
  x.j = Vec3d(0, 0, 1.11685004);
  return x;
}

// zero of z(t) near a sample index, refined by bisection on the dense output
double refine_turning(const Trajectoryd& traj, double tlo, double thi) {
  auto z = [&](double t) { return traj.dense(t)(2); };
  double flo = z(tlo);
  for (int i = 0; i < 80; ++i) {
    const double tm = (tlo + thi) / 2, fm = z(tm);
    if ((flo < 0) == (fm < 0)) {
      tlo = tm;
      flo = fm;
    } else {
      thi = tm;
    }
  }
  return (tlo + thi) / 2;
}

}  // namespace

TEST_CASE("gauss-kronrod engine") {
  CHECK(integrate_gk<double>([](double x) { return std::cos(x); }, 0.0, 1.0) ==
        doctest::Approx(std::sin(1.0)).epsilon(1e-12));
  // integrable endpoint behaviour after the u-substitution used downstream
  const double v = integrate_gk<double>([](double u) { return 2.0; }, 0.0, 1.0);
  CHECK(v == doctest::Approx(2.0));
}

TEST_CASE("reduce and the first-integral constant") {
  const auto prm = osc_params();

  SUBCASE("J = 0 collapses to the origin with beta = 0") {
    auto x = osc_state();
    x.j.setZero();
    const auto r = reduce(x, prm);
    CHECK(r.w0 == 0.0);
    CHECK(r.y == 0.0);
    CHECK(r.z == 0.0);
    CHECK(r.beta == 0.0);
  }

  SUBCASE("L = 0 with J parallel to P gives z = 0") {
    PoincareStated x;
    x.p0 = 1.1;
    x.p = Vec3d(0, 0, 0.7);
    x.j = Vec3d(0, 0, 0.4);
    x.l.setZero();
    const auto r = reduce(x, prm);
    CHECK(std::abs(r.z) < 1e-15);
  }

  SUBCASE("beta is constant along the flow") {
    const auto r0 = reduce(osc_state(), prm);
    auto traj = integrate_reduced(r0, prm, 0.0, 10.0, {}, 201);
    const auto q = quartic_coeffs(r0, prm);
    const double scale = std::max({std::abs(q.q0), std::abs(q.q2), std::abs(q.q4), 1.0});
    for (const auto& s : traj.states) {
      const double pz = r0.p0 * s(2);
      const double beta = pz * pz - q.q4 * std::pow(s(0), 4) - q.q2 * s(0) * s(0);
      CHECK(std::abs(beta - r0.beta) / scale < 1e-8);
    }
  }
}

TEST_CASE("quartic coefficients: derived vs printed vs fitted") {
  const auto prm = osc_params();
  const auto r0 = reduce(osc_state(), prm);

  SUBCASE("printed coefficient instantiation (documented mismatch)") {
    ReducedStated r;
    r.p0 = 3.0;
    r.c1 = -4.0;
    r.jmag2 = 1.0;
    r.c2 = 1.0;
    r.h2 = 1.5;
    const auto qp = quartic_coeffs_printed(r, prm);
    CHECK(qp.q4 == doctest::Approx(13.0 / 4.0));  // -(c1 + a P0^2)/4 as printed
    const auto qd = quartic_coeffs(r, prm);
    CHECK(qd.q4 == doctest::Approx(-5.0 / 4.0));  // (a P0^2 - c1)/4, the conserved one
  }

  SUBCASE("J = 0 data has q0 = 0 and a double root at W0 = 0") {
    auto x = osc_state();
    x.j.setZero();
    const auto r = reduce(x, prm);
    const auto q = quartic_coeffs(r, prm);
    CHECK(q.q0 == 0.0);
    const auto roots = quartic_roots(q);
    REQUIRE(!roots.empty());
    bool zero_root = false;
    for (double rt : roots) zero_root = zero_root || std::abs(rt) < 1e-12;
    CHECK(zero_root);
    CHECK(std::abs(q.derivative(0.0)) == 0.0);
  }

  SUBCASE("least-squares fit along the trajectory matches the derived values") {
    auto traj = integrate_reduced(r0, prm, 0.0, 20.0, {}, 400);
    Eigen::MatrixXd A(traj.states.size(), 3);
    Eigen::VectorXd b(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const double w0 = traj.states[i](0), z = traj.states[i](2);
      A(i, 0) = std::pow(w0, 4);
      A(i, 1) = w0 * w0;
      A(i, 2) = 1.0;
      b(i) = r0.p0 * r0.p0 * z * z;
    }
    const Eigen::Vector3d fit = A.colPivHouseholderQr().solve(b);
    const auto qd = quartic_coeffs(r0, prm);
    CHECK(fit(0) == doctest::Approx(qd.q4).epsilon(1e-6));
    CHECK(fit(1) == doctest::Approx(qd.q2).epsilon(1e-6));
    CHECK(fit(2) == doctest::Approx(qd.q0).epsilon(1e-6));
    // and the printed q4 is far outside the fit uncertainty
    const auto qp = quartic_coeffs_printed(r0, prm);
    CHECK(std::abs(fit(0) - qp.q4) > 1e-3);
  }
}

TEST_CASE("y(W0) and z(W0)") {
  const auto prm = osc_params();
  const auto r0 = reduce(osc_state(), prm);

  SUBCASE("initial value matches J.W and dy/dW0 = -W0/P0") {
    CHECK(y_of_w0(r0.w0, r0, prm) == doctest::Approx(r0.y).epsilon(1e-10));
    const double h = 1e-6;
    const double dy =
        (y_of_w0(r0.w0 + h, r0, prm) - y_of_w0(r0.w0 - h, r0, prm)) / (2 * h);
    CHECK(dy == doctest::Approx(-r0.w0 / r0.p0).epsilon(1e-9));
  }

  SUBCASE("trajectory identities") {
    auto traj = integrate_reduced(r0, prm, 0.0, 10.0, {}, 201);
    for (const auto& s : traj.states) {
      CHECK(std::abs(s(1) - y_of_w0(s(0), r0, prm)) < 1e-7);
      CHECK(std::abs(std::abs(z_of_w0(s(0), r0, prm)) - std::abs(s(2))) < 1e-7);
    }
  }

  SUBCASE("z vanishes at a simple root and branches carry the sign") {
    const auto q = quartic_coeffs(r0, prm);
    const auto roots = quartic_roots(q);
    REQUIRE(roots.size() >= 2);
    // oscillation band of the trajectory: the pair of roots bracketing w0(0)
    double rlo = -1e30, rhi = 1e30;
    for (double rt : roots) {
      if (rt <= r0.w0 && rt > rlo) rlo = rt;
      if (rt >= r0.w0 && rt < rhi) rhi = rt;
    }
    CHECK(std::abs(z_of_w0(rhi, r0, prm)) < 1e-7);
    CHECK(z_of_w0(0.5 * rlo + 0.5 * rhi, r0, prm, +1) > 0.0);
    CHECK(z_of_w0(0.5 * rlo + 0.5 * rhi, r0, prm, -1) < 0.0);
  }

  SUBCASE("outside the band the radicand is rejected") {
    const auto q = quartic_coeffs(r0, prm);
    const auto roots = quartic_roots(q);
    const double beyond = roots.back() + 1.0;
    if (q(beyond) < 0) CHECK_THROWS_AS(z_of_w0(beyond, r0, prm), BandError);
  }
}

TEST_CASE("time map of the quadrature") {
  const auto prm = osc_params();
  const auto r0 = reduce(xi_state(), prm);
  auto traj = integrate_reduced(r0, prm, 0.0, 12.0, {}, 601);

  SUBCASE("degenerate requests") {
    CHECK(time_of_w0(0.1, 0.1, r0, prm) == 0.0);
    PencilParamsd frozen{-1.0, 0.3, 1.0, 0.0};
    CHECK_THROWS_AS(time_of_w0(0.0, 0.1, r0, frozen), ChartError);
  }

  SUBCASE("matches the ODE clock inside a monotone band") {
    // find a maximal stretch without a z sign change
    std::size_t i0 = 0;
    std::size_t best_len = 0, best_start = 0;
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
      if ((traj.states[i](2) < 0) != (traj.states[i0](2) < 0)) {
        if (i - i0 > best_len) {
          best_len = i - i0;
          best_start = i0;
        }
        i0 = i;
      }
    }
    if (traj.states.size() - i0 > best_len) {
      best_len = traj.states.size() - i0;
      best_start = i0;
    }
    REQUIRE(best_len > 10);
    // stay inside the stretch, away from its turning ends
    const std::size_t ia = best_start + best_len / 4;
    const std::size_t ib = best_start + (3 * best_len) / 4;
    const double t_expect = traj.times[ib] - traj.times[ia];
    const double t_quad =
        time_of_w0(traj.states[ia](0), traj.states[ib](0), r0, prm);
    CHECK(std::abs(std::abs(t_quad) - t_expect) < 1e-6);
  }

  SUBCASE("root-to-root integral equals the ODE half-period") {
    const auto q = quartic_coeffs(r0, prm);
    const auto roots = quartic_roots(q);
    double rlo = -1e30, rhi = 1e30;
    for (double rt : roots) {
      if (rt <= r0.w0 && rt > rlo) rlo = rt;
      if (rt >= r0.w0 && rt < rhi) rhi = rt;
    }
    // consecutive turning times from the dense solution
    std::vector<double> turns;
    for (std::size_t i = 1; i < traj.states.size() && turns.size() < 3; ++i)
      if ((traj.states[i](2) < 0) != (traj.states[i - 1](2) < 0))
        turns.push_back(refine_turning(traj, traj.times[i - 1], traj.times[i]));
    REQUIRE(turns.size() >= 2);
    const double half_period_ode = turns[1] - turns[0];
    const double half_period_quad = std::abs(time_of_w0(rlo, rhi, r0, prm));
    CHECK(half_period_quad == doctest::Approx(half_period_ode).epsilon(1e-6));
    // forth and back doubles the traversal time
    CHECK(std::abs(time_of_w0(rlo, rhi, r0, prm)) +
              std::abs(time_of_w0(rhi, rlo, r0, prm)) ==
          doctest::Approx(2 * half_period_quad).epsilon(1e-12));
  }

  SUBCASE("interval crossing a root is rejected") {
    const auto q = quartic_coeffs(r0, prm);
    const auto roots = quartic_roots(q);
    double rhi = 1e30;
    for (double rt : roots)
      if (rt >= r0.w0 && rt < rhi) rhi = rt;
    CHECK_THROWS_AS(time_of_w0(rhi - 0.05, rhi + 0.05, r0, prm), BandError);
  }
}

TEST_CASE("xi reconstruction") {
  const auto prm = osc_params();
  const auto x0 = xi_state();
  const auto r0 = reduce(x0, prm);
  const double xi0 = x0.j.dot(x0.l);
  auto red = integrate_reduced(r0, prm, 0.0, 6.0, {}, 121);
  auto pl = integrate_pl(x0, prm, 0.0, 6.0, {}, 121);

  SUBCASE("initial condition is reproduced") {
    CHECK(xi_of_t(red, 0.0, prm, xi0) == doctest::Approx(xi0).epsilon(1e-12));
  }

  SUBCASE("matches J.L along the matched full trajectory") {
    for (int i = 0; i < 121; i += 10) {
      const double t = pl.times[i];
      const double xi_true = x0.j.dot(Vec3d(pl.states[i].segment<3>(4)));
      CHECK(xi_of_t(red, t, prm, xi0) == doctest::Approx(xi_true).epsilon(1e-7));
    }
  }

  SUBCASE("finite-difference rate matches the closed integrand") {
    const double t = 2.0, h = 1e-4;
    const double xm = xi_of_t(red, t - h, prm, xi0), xp = xi_of_t(red, t + h, prm, xi0);
    const double dxi_fd = (xp - xm) / (2 * h);
    const auto y = red.dense(t);
    ReducedStated r = r0;
    r.w0 = y(0);
    r.y = y(1);
    r.z = y(2);
    const double xi_t = xi_of_t(red, t, prm, xi0);
    const double dw0 = vf_reduced(r, prm)[0];
    const double dxi = (xi_integrand(r.w0, r, prm) + xi_t * dw0) / r.w0;
    CHECK(dxi_fd == doctest::Approx(dxi).epsilon(1e-6));
  }

  SUBCASE("c = d = 0 freezes xi W0; d = 0 drifts it linearly") {
    const PencilParamsd frozen{-1.0, 0.3, 0.0, 0.0};
    const auto rf = reduce(x0, frozen);
    auto redf = integrate_reduced(rf, frozen, 0.0, 5.0, {}, 51);
    CHECK(xi_of_t(redf, 5.0, frozen, xi0) * redf.dense(5.0)(0) ==
          doctest::Approx(xi0 * rf.w0).epsilon(1e-10));

    const PencilParamsd drift{-1.0, 0.3, 1.0, 0.0};
    const auto rd = reduce(x0, drift);
    auto redd = integrate_reduced(rd, drift, 0.0, 5.0, {}, 51);
    auto pld = integrate_pl(x0, drift, 0.0, 5.0, {}, 51);
    // W0 is frozen at d = 0, and xi(t) = J.L(t) grows linearly
    const double xi_end = xi_of_t(redd, 5.0, drift, xi0);
    const double xi_true = x0.j.dot(Vec3d(pld.states.back().segment<3>(4)));
    CHECK(xi_end == doctest::Approx(xi_true).epsilon(1e-9));
    const double slope = -(drift.b - drift.a) * drift.c * x0.p0 * rd.w0;
    CHECK(xi_end == doctest::Approx(xi0 + 5.0 * slope).epsilon(1e-9));
  }

  SUBCASE("W0 crossing zero is rejected") {
    // the generic oscillation state's band straddles zero
    const auto rx = reduce(osc_state(), prm);
    auto crossing = integrate_reduced(rx, prm, 0.0, 6.0, {}, 61);
    CHECK_THROWS_AS(xi_of_t(crossing, 6.0, prm, 0.0), ChartError);
  }
}

TEST_CASE("l_from_w inversion") {
  auto rng = testutil::make_rng(83);

  SUBCASE("recovers L from (W, xi) wherever W0 != 0") {
    int done = 0;
    while (done < 50) {
      const auto x = random_state(rng);
      const double a = uniform(rng);
      if (std::abs(x.j.dot(x.p)) < 0.05) continue;
      ++done;
      const auto s = pauli_lubansky(x, a);
      const double xi = x.j.dot(x.l);
      const Vec3d l = l_from_w(x.p, x.j, s.w, xi);
      CHECK((l - x.l).cwiseAbs().maxCoeff() < 1e-10);
      // and feeding back reproduces W and xi
      PoincareStated y = x;
      y.l = l;
      const auto s2 = pauli_lubansky(y, a);
      CHECK((s2.w - s.w).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(x.j.dot(l) == doctest::Approx(xi).epsilon(1e-10));
    }
  }

  SUBCASE("xi = 0 makes L orthogonal to J") {
    PoincareStated x;
    x.p0 = 1.0;
    x.p = Vec3d(0.3, 0.1, 0.8);
    x.j = Vec3d(0.2, -0.5, 0.4);
    const Vec3d w(0.6, -0.1, 0.2);
    const Vec3d l = l_from_w(x.p, x.j, w, 0.0);
    CHECK(std::abs(x.j.dot(l)) < 1e-12);
  }

  SUBCASE("W0 = 0 is rejected") {
    const Vec3d p(1, 0, 0), j(0, 1, 0), w(0, 0, 1);
    CHECK_THROWS_AS(l_from_w(p, j, w, 0.3), ChartError);
  }
}

TEST_CASE("polar reconstruction round trip") {
  const auto prm = osc_params();
  const auto x0 = osc_state();
  const auto r0 = reduce(x0, prm);
  auto pl = integrate_pl(x0, prm, 0.0, 8.0, {}, 81);

  for (int i = 0; i < 81; i += 8) {
    const auto xi = detail::unpack_pl(Eigen::Matrix<double, 10, 1>(pl.states[i]));
    const auto si = pauli_lubansky(xi, prm.a);
    const double w0 = -xi.j.dot(xi.p);
    const double phi = std::atan2(xi.p(1), xi.p(0));
    const double psi = std::atan2(si.w(1), si.w(0));
    const auto [p, w] = reconstruct_pw(w0, phi, psi, r0, prm);
    CHECK((p - xi.p).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((w - si.w).cwiseAbs().maxCoeff() < 1e-8);
    // Casimir and transversality structure of the output
    CHECK(r0.c1 - prm.a * r0.p0 * r0.p0 == doctest::Approx(p.squaredNorm()).epsilon(1e-10));
    const Vec3d jvec(0, 0, std::sqrt(r0.jmag2));
    const double w0_out = -jvec.dot(p);
    CHECK(std::abs(prm.a * r0.p0 * w0_out + p.dot(w)) < 1e-10);
  }

  SUBCASE("invalid pair is rejected") {
    const auto q = quartic_coeffs(r0, prm);
    const auto roots = quartic_roots(q);
    const double outside = std::abs(roots.back()) * 4 + 10.0;
    CHECK_THROWS_AS(reconstruct_pw(outside, 0.0, 0.0, r0, prm), ContractViolation);
  }
}

TEST_CASE("worldline of the massive particle") {
  const auto prm = osc_params();
  const auto x0 = xi_state();
  REQUIRE(casimir_c1(x0, -1.0) < 0.0);
  auto pl = integrate_pl(x0, prm, 0.0, 6.0, {}, 121);
  auto red = integrate_reduced(reduce(x0, prm), prm, 0.0, 6.0, {}, 121);
  const double xi0 = x0.j.dot(x0.l);

  SUBCASE("d = 0 free drift is a straight line") {
    const PencilParamsd drift{-1.0, 0.3, 1.0, 0.0};
    auto traj = integrate_pl(x0, drift, 0.0, 10.0, {}, 11);
    const auto w0 = worldline_x(traj, 0.0);
    const auto w1 = worldline_x(traj, 5.0);
    const auto w2 = worldline_x(traj, 10.0);
    const Vec3d v1 = (w1.x - w0.x) / 5.0, v2 = (w2.x - w1.x) / 5.0;
    CHECK((v1 - v2).cwiseAbs().maxCoeff() < 1e-9);
    // drift along P
    CHECK(v1.cross(x0.p).norm() < 1e-9 * v1.norm() * x0.p.norm());
  }

  SUBCASE("closed form agrees with the L-route") {
    for (double t : {0.5, 1.5, 3.0, 5.5}) {
      const auto yv = pl.dense(t);
      const auto xt = detail::unpack_pl(Eigen::Matrix<double, 10, 1>(yv));
      const auto st = pauli_lubansky(xt, prm.a);
      const double xi_t = xi_of_t(red, t, prm, xi0);
      const Vec3d xa = worldline_from_l(xt.p0, xt.p, xt.l, xt.j, t);
      const Vec3d xb = worldline_closed_form(xt.p0, xt.p, st.w, xt.j, xi_t, t);
      CHECK((xa - xb).cwiseAbs().maxCoeff() < 1e-7);
      const auto wp = worldline_x(pl, t);
      CHECK((wp.x - xa).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("massless states are rejected") {
    PoincareStated nullstate;
    nullstate.p0 = 1.0;
    nullstate.p = Vec3d(0, 0, 1.0);
    nullstate.j = Vec3d(0.1, 0, 0.5);
    nullstate.l = Vec3d(0.2, 0.3, 0);
    auto traj = integrate_pl(nullstate, prm, 0.0, 0.5, {}, 5);
    CHECK_THROWS_AS(worldline_x(traj, 0.2), ChartError);
  }
}
