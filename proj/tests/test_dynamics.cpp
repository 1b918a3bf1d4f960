#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "spinorbit/quadrature.hpp"
#include "spinorbit/trajectory.hpp"

using namespace spinorbit;
using testutil::random_state;
using testutil::random_vec3;
using testutil::uniform;
using Vec3d = Vec3<double>;

namespace {

PencilParamsd generic_params() { return {-1.0, 0.3, 1.0, 0.5}; }

PoincareStated generic_state() {
  PoincareStated x;
  x.p0 = 1.3;
  x.p = Vec3d(0.4, -0.2, 0.6);
  x.l = Vec3d(-0.3, 0.5, 0.1);
  x.j = Vec3d(0.2, -0.4, 0.7);
  return x;
}

}  // namespace

TEST_CASE("h1 and h2 basics") {
  auto rng = testutil::make_rng(41);
  PoincareStated x;
  x.p0 = 1;
  x.p = Vec3d(1, 0, 0);
  CHECK(h1(x, -1.0) == 0.0);
  CHECK(h1(x, 0.0) == doctest::Approx(x.p.squaredNorm()));
  for (int i = 0; i < 20; ++i) {
    const auto s = random_state(rng);
    const double b = uniform(rng);
    CHECK(h1(s, b) == doctest::Approx(casimir_c1(s, b)).epsilon(1e-14));
    CHECK(h2(s, b) == doctest::Approx(casimir_c2(s, b)).epsilon(1e-13));
  }
  PoincareStated y;
  y.p0 = 0.8;
  y.p = Vec3d(0.1, 0.2, 0.3);
  CHECK(h2(y, 0.7) == 0.0);  // J = L = 0
}

TEST_CASE("h1, h2 in involution") {
  auto rng = testutil::make_rng(43);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = random_state(rng);
    const double a = uniform(rng), b = uniform(rng);
    const double v = bracket_a(h1_observable(b), h2_observable(b), x, a);
    worst = std::max(worst, std::abs(v));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("hamiltonian value and third-form identity") {
  auto rng = testutil::make_rng(47);
  const auto x = generic_state();
  CHECK(hamiltonian(x, {-1.0, 0.3, 0.0, 0.0}).h == 0.0);
  const PencilParamsd donly{-1.0, 0.3, 0.8, 0.0};
  CHECK(hamiltonian(x, donly).h ==
        doctest::Approx(0.4 * (0.3 * x.p0 * x.p0 + x.p.squaredNorm())).epsilon(1e-14));

  // third expression equals h shifted by Casimir multiples
  for (int i = 0; i < 25; ++i) {
    const auto s = random_state(rng);
    const PencilParamsd prm{-1.0, 0.3, uniform(rng), uniform(rng)};
    const double lhs = hamiltonian(s, prm).h;
    const double rhs = hamiltonian_third_form(s, prm) + prm.c / 2 * casimir_c1(s, prm.a) +
                       prm.b * prm.d / (2 * prm.a) * casimir_c2(s, prm.a);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
  CHECK_THROWS_AS(hamiltonian_third_form(x, {0.0, 0.3, 1.0, 1.0}), ChartError);
}

TEST_CASE("vf_pl against the bracket oracle") {
  auto rng = testutil::make_rng(53);

  SUBCASE("b = a freezes the flow") {
    const PencilParamsd prm{0.4, 0.4, 1.1, -0.7};
    const auto dot = vf_pl(generic_state(), prm);
    CHECK(dot.p.norm() == 0.0);
    CHECK(dot.l.norm() == 0.0);
  }

  SUBCASE("d = 0 leaves only the linear L drift") {
    const PencilParamsd prm{-1.0, 0.2, 0.9, 0.0};
    const auto x = generic_state();
    const auto dot = vf_pl(x, prm);
    CHECK(dot.p.norm() == 0.0);
    CHECK(dot.l.isApprox(((prm.b - prm.a) * prm.c * x.p0 * x.p).eval(), 1e-14));
  }

  SUBCASE("matches {coordinate, h} with finite-difference gradients") {
    for (int i = 0; i < 20; ++i) {
      const auto x = random_state(rng);
      const PencilParamsd prm{uniform(rng), uniform(rng), uniform(rng), uniform(rng)};
      const auto dot = vf_pl(x, prm);
      const Observable<double> h_fd(
          [prm](const PoincareStated& s) { return hamiltonian(s, prm).h; });
      Eigen::Matrix<double, 10, 1> dv, expect;
      dv << dot.p0, dot.p, dot.l, dot.j;
      for (int k = 0; k < 10; ++k)
        expect(k) = bracket_a(coordinate_observable<double>(k), h_fd, x, prm.a);
      CHECK((dv - expect).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  SUBCASE("P0 and J are conserved identically") {
    for (int i = 0; i < 10; ++i) {
      const auto dot = vf_pl(random_state(rng),
                             {uniform(rng), uniform(rng), uniform(rng), uniform(rng)});
      CHECK(dot.p0 == 0.0);
      CHECK(dot.j.norm() == 0.0);
    }
  }
}

TEST_CASE("vf_pw push-forward consistency") {
  auto rng = testutil::make_rng(59);

  SUBCASE("b = a freezes the flow") {
    const PencilParamsd prm{-0.3, -0.3, 1.0, 1.0};
    const auto x = generic_state();
    const auto s = pauli_lubansky(x, prm.a);
    const auto [dp, dw] = vf_pw(x.p0, x.j, x.p, s.w, prm);
    CHECK(dp.norm() == 0.0);
    CHECK(dw.norm() == 0.0);
  }

  SUBCASE("chain rule from the PL flow") {
    for (int i = 0; i < 30; ++i) {
      const auto x = random_state(rng);
      const PencilParamsd prm{uniform(rng), uniform(rng), uniform(rng), uniform(rng)};
      const auto s = pauli_lubansky(x, prm.a);
      const auto dot = vf_pl(x, prm);
      // W = a P0 J + L x P with P0, J frozen
      const Vec3d dw_chain = dot.l.cross(x.p) + x.l.cross(dot.p);
      const auto [dp, dw] = vf_pw(x.p0, x.j, x.p, s.w, prm);
      CHECK((dp - dot.p).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((dw - dw_chain).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  SUBCASE("transverse momentum with P.J = 0 keeps only the J x W term") {
    const PencilParamsd prm{-1.0, 0.3, 1.0, 0.7};
    const double p0 = 1.1;
    const Vec3d j(0, 0, 0.8);
    const Vec3d p(0.5, -0.2, 0);  // orthogonal to J
    const Vec3d w = -p0 * j;      // L = 0 state
    const auto [dp, dw] = vf_pw(p0, j, p, w, prm);
    const Vec3d expected = (prm.b - prm.a) * prm.d * prm.b * p0 * p0 * j.cross(w);
    CHECK((dw - expected).cwiseAbs().maxCoeff() < 1e-14);
    (void)dp;
  }
}

TEST_CASE("vf_reduced chain rule") {
  auto rng = testutil::make_rng(61);

  SUBCASE("J = 0 data is a fixed point") {
    PoincareStated x = generic_state();
    x.j.setZero();
    const auto prm = generic_params();
    const auto r = reduce(x, prm);
    CHECK(r.w0 == 0.0);
    CHECK(r.y == 0.0);
    CHECK(r.z == 0.0);
    const auto d = vf_reduced(r, prm);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.0);
    CHECK(d[2] == 0.0);
  }

  SUBCASE("z = 0, W0 = 0 freezes the triple") {
    auto r = reduce(generic_state(), generic_params());
    r.w0 = 0;
    r.z = 0;
    const auto d = vf_reduced(r, generic_params());
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.0);
    CHECK(d[2] == 0.0);
  }

  SUBCASE("matches the derivative of (W0, y, z) along the PW flow") {
    for (int i = 0; i < 30; ++i) {
      const auto x = random_state(rng);
      const PencilParamsd prm{uniform(rng), uniform(rng), uniform(rng), uniform(rng)};
      const auto s = pauli_lubansky(x, prm.a);
      const auto [dp, dw] = vf_pw(x.p0, x.j, x.p, s.w, prm);
      const double dw0 = -x.j.dot(dp);
      const double dy = x.j.dot(dw);
      const double dz = x.j.dot(dp.cross(s.w) + x.p.cross(dw));
      const auto r = reduce(x, prm);
      const auto d = vf_reduced(r, prm);
      CHECK(std::abs(d[0] - dw0) < 1e-8);
      CHECK(std::abs(d[1] - dy) < 1e-8);
      CHECK(std::abs(d[2] - dz) < 1e-8);
    }
  }
}

TEST_CASE("vf_angles projection oracle") {
  auto rng = testutil::make_rng(67);

  SUBCASE("b = a gives zero rates") {
    PoincareStated x = generic_state();
    x.j = Vec3d(0, 0, 0.9);
    const PencilParamsd prm{0.2, 0.2, 1.0, 1.0};
    const auto r = reduce(x, prm);
    const auto [dphi, dpsi] = vf_angles(r, prm);
    CHECK(dphi == 0.0);
    CHECK(dpsi == 0.0);
  }

  SUBCASE("agrees with the rates projected from the PW flow") {
    int tested = 0;
    while (tested < 25) {
      auto x = random_state(rng);
      x.j = Vec3d(0, 0, uniform(rng, 0.5, 1.5));
      const PencilParamsd prm{uniform(rng), uniform(rng), uniform(rng), uniform(rng)};
      const auto s = pauli_lubansky(x, prm.a);
      const double pperp2 = x.p.head<2>().squaredNorm();
      const double wperp2 = s.w.head<2>().squaredNorm();
      if (pperp2 < 1e-3 || wperp2 < 1e-3) continue;
      ++tested;
      const auto [dp, dw] = vf_pw(x.p0, x.j, x.p, s.w, prm);
      const double dphi_direct = (x.p(0) * dp(1) - x.p(1) * dp(0)) / pperp2;
      const double dpsi_direct = (s.w(0) * dw(1) - s.w(1) * dw(0)) / wperp2;
      const auto r = reduce(x, prm);
      const auto [dphi, dpsi] = vf_angles(r, prm);
      CHECK(dphi == doctest::Approx(dphi_direct).epsilon(1e-7));
      CHECK(dpsi == doctest::Approx(dpsi_direct).epsilon(1e-7));
    }
  }

  SUBCASE("rates stay finite at a turning point of W0") {
    PoincareStated x = generic_state();
    x.j = Vec3d(0, 0, 0.9);
    const auto prm = generic_params();
    const auto r0 = reduce(x, prm);
    auto traj = integrate_reduced(r0, prm, 0.0, 10.0, {}, 401);
    std::size_t best = 0;
    for (std::size_t i = 0; i < traj.states.size(); ++i)
      if (std::abs(traj.states[i](2)) < std::abs(traj.states[best](2))) best = i;
    auto r = r0;
    r.w0 = traj.states[best](0);
    r.y = traj.states[best](1);
    r.z = traj.states[best](2);
    const auto [dphi, dpsi] = vf_angles(r, prm);
    CHECK(std::isfinite(dphi));
    CHECK(std::isfinite(dpsi));
  }

  SUBCASE("near-singular transverse radius is diagnosed") {
    auto r = reduce(generic_state(), generic_params());
    r.jmag2 = 1.0;
    r.c2 = r.w0 * r.w0 * generic_params().a + r.y * r.y;  // forces Wperp^2 = 0
    CHECK_THROWS_AS(vf_angles(r, generic_params()), SingularityError);
  }
}

TEST_CASE("integrator basics") {
  SUBCASE("dense output reproduces a known solution") {
    auto vf = [](double t, const Eigen::Matrix<double, 1, 1>& y) {
      (void)y;
      return Eigen::Matrix<double, 1, 1>(std::cos(t));
    };
    const auto sol =
        integrate_dopri5<double, 1>(vf, Eigen::Matrix<double, 1, 1>(0.0), 0.0, 10.0);
    for (double t = 0; t <= 10.0; t += 0.37)
      CHECK(sol(t)(0) == doctest::Approx(std::sin(t)).epsilon(1e-9));
  }

  SUBCASE("finite-time blowup is reported as a singularity") {
    auto vf = [](double, const Eigen::Matrix<double, 1, 1>& y) {
      return Eigen::Matrix<double, 1, 1>(1.0 + y(0) * y(0));
    };
    const auto out =
        integrate_dopri5_outcome<double, 1>(vf, Eigen::Matrix<double, 1, 1>(0.0), 0.0, 3.0);
    CHECK(out.singular);
    CHECK(out.t_stop == doctest::Approx(M_PI / 2).epsilon(1e-3));
    CHECK_THROWS_AS(
        (integrate_dopri5<double, 1>(vf, Eigen::Matrix<double, 1, 1>(0.0), 0.0, 3.0)),
        SingularityError);
  }

  SUBCASE("bad spans and tolerances are rejected") {
    auto vf = [](double, const Eigen::Matrix<double, 1, 1>&) {
      return Eigen::Matrix<double, 1, 1>(0.0);
    };
    CHECK_THROWS_AS(
        (integrate_dopri5<double, 1>(vf, Eigen::Matrix<double, 1, 1>(0.0), 1.0, 0.0)),
        ContractViolation);
    OdeOptions bad;
    bad.rtol = -1;
    CHECK_THROWS_AS(
        (integrate_dopri5<double, 1>(vf, Eigen::Matrix<double, 1, 1>(0.0), 0.0, 1.0, bad)),
        ContractViolation);
  }
}

TEST_CASE("free drift closed form and frozen pencil") {
  const auto x = generic_state();

  SUBCASE("d = 0: L grows linearly, P constant") {
    const PencilParamsd prm{-1.0, 0.0, 1.0, 0.0};
    auto traj = integrate_pl(x, prm, 0.0, 10.0, {}, 21);
    const Vec3d l_expect = x.l + (prm.b - prm.a) * prm.c * x.p0 * x.p * 10.0;
    const auto& last = traj.states.back();
    CHECK((last.segment<3>(1) - x.p).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((last.segment<3>(4) - l_expect).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("b = a: constant trajectory") {
    const PencilParamsd prm{0.5, 0.5, 1.0, 1.0};
    auto traj = integrate_pl(x, prm, 0.0, 5.0, {}, 11);
    CHECK((traj.states.back() - traj.states.front()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("conservation along generic trajectories") {
  auto rng = testutil::make_rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_state(rng);
    const PencilParamsd prm{uniform(rng), uniform(rng), uniform(rng, 0.3, 1.0),
                            uniform(rng, 0.3, 1.0)};
    auto traj = integrate_pl(x, prm, 0.0, 10.0, {}, 101);
    const auto rep = conservation_audit(traj);
    CHECK(rep.max_rel_drift.c1 < 1e-8);
    CHECK(rep.max_rel_drift.c2 < 1e-8);
    CHECK(rep.max_rel_drift.h1 < 1e-8);
    CHECK(rep.max_rel_drift.h2 < 1e-8);
    CHECK(rep.max_rel_drift.h < 1e-8);
  }
}

TEST_CASE("chart equivalence PL / PW / reduced") {
  const auto x = generic_state();
  const auto prm = generic_params();
  const int samples = 101;
  auto pl = integrate_pl(x, prm, 0.0, 10.0, {}, samples);
  const auto s0 = pauli_lubansky(x, prm.a);
  auto pw = integrate_pw(x.p0, x.j, x.p, s0.w, prm, 0.0, 10.0, {}, samples);
  auto red = integrate_reduced(reduce(x, prm), prm, 0.0, 10.0, {}, samples);

  double worst_pw = 0, worst_red = 0, worst_trans = 0;
  for (int i = 0; i < samples; ++i) {
    const auto xi = detail::unpack_pl(Eigen::Matrix<double, 10, 1>(pl.states[i]));
    const auto si = pauli_lubansky(xi, prm.a);
    worst_pw = std::max(worst_pw,
                        (pw.states[i].head<3>() - xi.p).cwiseAbs().maxCoeff());
    worst_pw = std::max(worst_pw,
                        (pw.states[i].tail<3>() - si.w).cwiseAbs().maxCoeff());
    const Vec3d pwp = pw.states[i].head<3>(), pww = pw.states[i].tail<3>();
    worst_trans = std::max(worst_trans,
                           std::abs(prm.a * x.p0 * (-x.j.dot(pwp)) + pwp.dot(pww)));
    worst_red = std::max(worst_red, std::abs(red.states[i](0) - (-xi.j.dot(xi.p))));
    worst_red = std::max(worst_red, std::abs(red.states[i](1) - xi.j.dot(si.w)));
    worst_red = std::max(worst_red, std::abs(red.states[i](2) - xi.j.dot(xi.p.cross(si.w))));
  }
  CHECK(worst_pw < 1e-6);
  CHECK(worst_red < 1e-6);
  CHECK(worst_trans < 1e-9);
}

TEST_CASE("angles chart tracks the PL flow") {
  PoincareStated x = generic_state();
  x.j = Vec3d(0, 0, 0.9);
  const auto prm = generic_params();
  const auto s0 = pauli_lubansky(x, prm.a);
  const double phi0 = std::atan2(x.p(1), x.p(0));
  const double psi0 = std::atan2(s0.w(1), s0.w(0));
  const int samples = 81;
  auto ang = integrate_angles(reduce(x, prm), phi0, psi0, prm, 0.0, 6.0, {}, samples);
  auto pl = integrate_pl(x, prm, 0.0, 6.0, {}, samples);
  double worst = 0;
  for (int i = 0; i < samples; ++i) {
    const auto xi = detail::unpack_pl(Eigen::Matrix<double, 10, 1>(pl.states[i]));
    const auto si = pauli_lubansky(xi, prm.a);
    const double phi = ang.states[i](3), psi = ang.states[i](4);
    worst = std::max(worst, std::abs(std::cos(phi) - xi.p(0) / xi.p.head<2>().norm()));
    worst = std::max(worst, std::abs(std::sin(phi) - xi.p(1) / xi.p.head<2>().norm()));
    worst = std::max(worst, std::abs(std::cos(psi) - si.w(0) / si.w.head<2>().norm()));
    worst = std::max(worst, std::abs(std::sin(psi) - si.w(1) / si.w.head<2>().norm()));
    // z reproduced by the relative angle: z = J Pperp Wperp sin(psi - phi)
    const double pperp = xi.p.head<2>().norm(), wperp = si.w.head<2>().norm();
    const double z_angle = 0.9 * pperp * wperp * std::sin(psi - phi);
    worst = std::max(worst, std::abs(z_angle - ang.states[i](2)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("conservation audit flags corrupted samples") {
  const auto prm = generic_params();
  auto traj = integrate_pl(generic_state(), prm, 0.0, 2.0, {}, 21);
  const auto clean = conservation_audit(traj);
  CHECK(clean.max_rel_drift.h < 1e-9);
  traj.states[10](2) += 0.1;  // corrupt one sample
  const auto dirty = conservation_audit(traj);
  CHECK(dirty.max_rel_drift.h > 1e-3);
}
