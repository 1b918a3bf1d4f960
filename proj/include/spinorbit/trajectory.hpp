#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spinorbit/dynamics.hpp"
#include "spinorbit/ode.hpp"
#include "spinorbit/twistor.hpp"

namespace spinorbit {

enum class Chart { PL, PW, Reduced, Angles, Twistor };

inline const char* chart_name(Chart c) {
  switch (c) {
    case Chart::PL: return "PL";
    case Chart::PW: return "PW";
    case Chart::Reduced: return "REDUCED";
    case Chart::Angles: return "ANGLES";
    case Chart::Twistor: return "TWISTOR";
  }
  return "?";
}

template <typename Scalar>
struct AuditRecord {
  Scalar c1{0}, c2{0}, h1{0}, h2{0}, h{0}, transversality{0};
};

// Sampled trajectory in one chart, with dense in-span evaluation and the
// frozen integrals needed to interpret the chart components.
template <typename Scalar>
struct Trajectory {
  Chart chart{Chart::PL};
  PencilParams<Scalar> params;
  std::vector<Scalar> times;
  std::vector<Eigen::VectorX<Scalar>> states;
  std::vector<AuditRecord<Scalar>> audit;

  // frozen context (validity depends on chart)
  Scalar p0{0};
  Vec3<Scalar> j = Vec3<Scalar>::Zero();
  ReducedState<Scalar> frozen;  // w0/y/z hold the initial values
  Scalar alpha{0};              // twistor chart

  std::function<Eigen::VectorX<Scalar>(Scalar)> dense;

  Scalar t_begin() const { return times.front(); }
  Scalar t_end() const { return times.back(); }
};

using Trajectoryd = Trajectory<double>;

// Singularity abort carrying the truncated trajectory (last good state is
// the final sample).
template <typename Scalar>
struct TrajectorySingularity : SingularityError {
  TrajectorySingularity(const std::string& what, Scalar t_last, Trajectory<Scalar> partial_)
      : SingularityError(what, static_cast<double>(t_last)), partial(std::move(partial_)) {}
  Trajectory<Scalar> partial;
};

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, 10, 1> pack_pl(const PoincareState<Scalar>& x) {
  Eigen::Matrix<Scalar, 10, 1> v;
  v << x.p0, x.p, x.l, x.j;
  return v;
}

template <typename Scalar>
PoincareState<Scalar> unpack_pl(const Eigen::Matrix<Scalar, 10, 1>& v) {
  PoincareState<Scalar> x;
  x.p0 = v(0);
  x.p = v.template segment<3>(1);
  x.l = v.template segment<3>(4);
  x.j = v.template segment<3>(7);
  return x;
}

template <typename Scalar>
AuditRecord<Scalar> audit_pl(const PoincareState<Scalar>& x, const PencilParams<Scalar>& prm) {
  AuditRecord<Scalar> r;
  r.c1 = casimir_c1(x, prm.a);
  r.c2 = casimir_c2(x, prm.a);
  const HamiltonianValue<Scalar> hv = hamiltonian(x, prm);
  r.h1 = hv.h1;
  r.h2 = hv.h2;
  r.h = hv.h;
  r.transversality = transversality_residual(x, prm.a);
  return r;
}

template <typename Scalar>
AuditRecord<Scalar> audit_pw(Scalar p0, const Vec3<Scalar>& j, const Vec3<Scalar>& p,
                             const Vec3<Scalar>& w, const PencilParams<Scalar>& prm) {
  AuditRecord<Scalar> r;
  const Scalar w0 = -j.dot(p);
  r.c1 = prm.a * p0 * p0 + p.squaredNorm();
  r.c2 = prm.a * w0 * w0 + w.squaredNorm();
  r.h1 = prm.b * p0 * p0 + p.squaredNorm();
  const Vec3<Scalar> wb = w + (prm.b - prm.a) * p0 * j;
  r.h2 = prm.b * w0 * w0 + wb.squaredNorm();
  r.h = (prm.c * r.h1 + prm.d * r.h2) / 2;
  r.transversality = prm.a * p0 * w0 + p.dot(w);
  return r;
}

template <typename Scalar>
AuditRecord<Scalar> audit_reduced(const ReducedState<Scalar>& frozen,
                                  const PencilParams<Scalar>& prm) {
  AuditRecord<Scalar> r;
  r.c1 = frozen.c1;
  r.c2 = frozen.c2;
  r.h1 = frozen.c1 + (prm.b - prm.a) * frozen.p0 * frozen.p0;
  r.h2 = frozen.h2;
  r.h = (prm.c * r.h1 + prm.d * r.h2) / 2;
  r.transversality = Scalar(0);
  return r;
}

template <typename Scalar, int N, typename VF, typename AuditFn>
Trajectory<Scalar> sample_run(Chart chart, VF&& vf, const Eigen::Matrix<Scalar, N, 1>& y0,
                              const PencilParams<Scalar>& prm, Scalar t0, Scalar t1,
                              const OdeOptions& opt, int samples, AuditFn&& make_audit) {
  if (samples < 2) throw ContractViolation("trajectory needs at least 2 samples");
  Trajectory<Scalar> traj;
  traj.chart = chart;
  traj.params = prm;
  auto out = integrate_dopri5_outcome<Scalar, N>(vf, y0, t0, t1, opt);
  const Scalar tend = out.sol.empty() ? t0 : out.sol.t_end();
  if (out.sol.empty()) {
    traj.times.push_back(t0);
    traj.states.push_back(y0);
    traj.audit.push_back(make_audit(y0));
  } else {
    for (int i = 0; i < samples; ++i) {
      const Scalar t = t0 + (tend - t0) * Scalar(i) / Scalar(samples - 1);
      const Eigen::Matrix<Scalar, N, 1> y = out.sol(t);
      traj.times.push_back(t);
      traj.states.push_back(y);
      traj.audit.push_back(make_audit(y));
    }
    auto sol = out.sol;
    traj.dense = [sol](Scalar t) { return Eigen::VectorX<Scalar>(sol(t)); };
  }
  if (out.singular)
    throw TrajectorySingularity<Scalar>(
        "integration hit a singularity; trajectory truncated", out.t_stop, std::move(traj));
  return traj;
}

}  // namespace detail

// (P0, P, L, J) chart; state layout (P0, P, L, J).
template <typename Scalar>
Trajectory<Scalar> integrate_pl(const PoincareState<Scalar>& x0, const PencilParams<Scalar>& prm,
                                Scalar t0, Scalar t1, const OdeOptions& opt = {},
                                int samples = 101) {
  auto vf = [prm](Scalar, const Eigen::Matrix<Scalar, 10, 1>& y) {
    return detail::pack_pl(vf_pl(detail::unpack_pl(y), prm));
  };
  auto traj = detail::sample_run<Scalar, 10>(
      Chart::PL, vf, detail::pack_pl(x0), prm, t0, t1, opt, samples,
      [prm](const Eigen::Matrix<Scalar, 10, 1>& y) {
        return detail::audit_pl(detail::unpack_pl(y), prm);
      });
  traj.p0 = x0.p0;
  traj.j = x0.j;
  return traj;
}

// (P, W) chart; state layout (P, W), P0 and J frozen.
template <typename Scalar>
Trajectory<Scalar> integrate_pw(Scalar p0, const Vec3<Scalar>& j, const Vec3<Scalar>& p0v,
                                const Vec3<Scalar>& w0v, const PencilParams<Scalar>& prm,
                                Scalar t0, Scalar t1, const OdeOptions& opt = {},
                                int samples = 101) {
  auto vf = [prm, p0, j](Scalar, const Eigen::Matrix<Scalar, 6, 1>& y) {
    const Vec3<Scalar> p = y.template head<3>(), w = y.template tail<3>();
    const auto [dp, dw] = vf_pw(p0, j, p, w, prm);
    Eigen::Matrix<Scalar, 6, 1> dy;
    dy << dp, dw;
    return dy;
  };
  Eigen::Matrix<Scalar, 6, 1> y0;
  y0 << p0v, w0v;
  auto traj = detail::sample_run<Scalar, 6>(
      Chart::PW, vf, y0, prm, t0, t1, opt, samples,
      [prm, p0, j](const Eigen::Matrix<Scalar, 6, 1>& y) {
        return detail::audit_pw(p0, j, y.template head<3>().eval(),
                                y.template tail<3>().eval(), prm);
      });
  traj.p0 = p0;
  traj.j = j;
  return traj;
}

// Reduced chart; state layout (W0, y, z), everything else frozen in r0.
template <typename Scalar>
Trajectory<Scalar> integrate_reduced(const ReducedState<Scalar>& r0,
                                     const PencilParams<Scalar>& prm, Scalar t0, Scalar t1,
                                     const OdeOptions& opt = {}, int samples = 101) {
  auto vf = [prm, r0](Scalar, const Eigen::Matrix<Scalar, 3, 1>& y) {
    ReducedState<Scalar> r = r0;
    r.w0 = y(0);
    r.y = y(1);
    r.z = y(2);
    const auto d = vf_reduced(r, prm);
    return Eigen::Matrix<Scalar, 3, 1>(d[0], d[1], d[2]);
  };
  Eigen::Matrix<Scalar, 3, 1> y0(r0.w0, r0.y, r0.z);
  auto traj = detail::sample_run<Scalar, 3>(
      Chart::Reduced, vf, y0, prm, t0, t1, opt, samples,
      [prm, r0](const Eigen::Matrix<Scalar, 3, 1>&) { return detail::audit_reduced(r0, prm); });
  traj.p0 = r0.p0;
  traj.frozen = r0;
  return traj;
}

// Angle chart (J = (0,0,J)); state layout (W0, y, z, phi, psi).
template <typename Scalar>
Trajectory<Scalar> integrate_angles(const ReducedState<Scalar>& r0, Scalar phi0, Scalar psi0,
                                    const PencilParams<Scalar>& prm, Scalar t0, Scalar t1,
                                    const OdeOptions& opt = {}, int samples = 101) {
  auto vf = [prm, r0](Scalar, const Eigen::Matrix<Scalar, 5, 1>& y) {
    ReducedState<Scalar> r = r0;
    r.w0 = y(0);
    r.y = y(1);
    r.z = y(2);
    const auto d = vf_reduced(r, prm);
    const auto [dphi, dpsi] = vf_angles(r, prm);
    Eigen::Matrix<Scalar, 5, 1> dy;
    dy << d[0], d[1], d[2], dphi, dpsi;
    return dy;
  };
  Eigen::Matrix<Scalar, 5, 1> y0;
  y0 << r0.w0, r0.y, r0.z, phi0, psi0;
  auto traj = detail::sample_run<Scalar, 5>(
      Chart::Angles, vf, y0, prm, t0, t1, opt, samples,
      [prm, r0](const Eigen::Matrix<Scalar, 5, 1>&) { return detail::audit_reduced(r0, prm); });
  traj.p0 = r0.p0;
  traj.frozen = r0;
  return traj;
}

// Twistor chart; state layout (Re z1, Im z1, Re z2, Im z2, Re z, Im z), alpha frozen.
template <typename Scalar>
Trajectory<Scalar> integrate_twistor(const TwistorPoint<Scalar>& v0,
                                     const PencilParams<Scalar>& prm, Scalar t0, Scalar t1,
                                     const OdeOptions& opt = {}, int samples = 101) {
  const Scalar alpha = v0.alpha;
  auto unpack = [alpha](const Eigen::Matrix<Scalar, 6, 1>& y) {
    return TwistorPoint<Scalar>({y(0), y(1)}, {y(2), y(3)}, {y(4), y(5)}, alpha);
  };
  auto vf = [prm, unpack](Scalar, const Eigen::Matrix<Scalar, 6, 1>& y) {
    const auto dz = twistor_vf(unpack(y), prm);
    Eigen::Matrix<Scalar, 6, 1> dy;
    dy << dz(0).real(), dz(0).imag(), dz(1).real(), dz(1).imag(), dz(2).real(), dz(2).imag();
    return dy;
  };
  Eigen::Matrix<Scalar, 6, 1> y0;
  y0 << v0.zeta1.real(), v0.zeta1.imag(), v0.zeta2.real(), v0.zeta2.imag(), v0.zeta.real(),
      v0.zeta.imag();
  auto traj = detail::sample_run<Scalar, 6>(
      Chart::Twistor, vf, y0, prm, t0, t1, opt, samples,
      [prm, unpack](const Eigen::Matrix<Scalar, 6, 1>& y) {
        return detail::audit_pl(observables_from_coords(unpack(y)), prm);
      });
  traj.alpha = alpha;
  return traj;
}

// Max drifts of the audited quantities, recomputed from the stored samples
// (so deliberately corrupted samples are flagged).
template <typename Scalar>
struct AuditReport {
  AuditRecord<Scalar> max_abs_drift;   // |q(t) - q(t0)|
  AuditRecord<Scalar> max_rel_drift;   // scaled by max(|q(t0)|, 1e-8)
  Scalar max_transversality{0};
};

template <typename Scalar>
AuditRecord<Scalar> recompute_audit(const Trajectory<Scalar>& traj, std::size_t i) {
  const auto& y = traj.states[i];
  switch (traj.chart) {
    case Chart::PL:
      return detail::audit_pl(detail::unpack_pl(Eigen::Matrix<Scalar, 10, 1>(y)), traj.params);
    case Chart::PW:
      return detail::audit_pw(traj.p0, traj.j, Vec3<Scalar>(y.template head<3>()),
                              Vec3<Scalar>(y.template tail<3>()), traj.params);
    case Chart::Reduced:
    case Chart::Angles:
      return detail::audit_reduced(traj.frozen, traj.params);
    case Chart::Twistor: {
      TwistorPoint<Scalar> v({y(0), y(1)}, {y(2), y(3)}, {y(4), y(5)}, traj.alpha);
      return detail::audit_pl(observables_from_coords(v), traj.params);
    }
  }
  throw Error("unknown chart");
}

template <typename Scalar>
AuditReport<Scalar> conservation_audit(const Trajectory<Scalar>& traj) {
  AuditReport<Scalar> rep;
  const AuditRecord<Scalar> q0 = recompute_audit(traj, 0);
  auto upd = [](Scalar& abs_d, Scalar& rel_d, Scalar q, Scalar ref) {
    const Scalar d = std::abs(q - ref);
    abs_d = std::max(abs_d, d);
    rel_d = std::max(rel_d, d / std::max(std::abs(ref), Scalar(1e-8)));
  };
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const AuditRecord<Scalar> q = recompute_audit(traj, i);
    upd(rep.max_abs_drift.c1, rep.max_rel_drift.c1, q.c1, q0.c1);
    upd(rep.max_abs_drift.c2, rep.max_rel_drift.c2, q.c2, q0.c2);
    upd(rep.max_abs_drift.h1, rep.max_rel_drift.h1, q.h1, q0.h1);
    upd(rep.max_abs_drift.h2, rep.max_rel_drift.h2, q.h2, q0.h2);
    upd(rep.max_abs_drift.h, rep.max_rel_drift.h, q.h, q0.h);
    rep.max_transversality = std::max(rep.max_transversality, std::abs(q.transversality));
  }
  return rep;
}

}  // namespace spinorbit
