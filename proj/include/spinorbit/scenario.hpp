#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "spinorbit/quadrature.hpp"
#include "spinorbit/trajectory.hpp"
#include "spinorbit/twistor.hpp"

namespace spinorbit {

// Scenario configuration error (maps to the usage exit status).
struct ConfigError : Error {
  using Error::Error;
};

// Flat key = value scenario file. Documented keys:
//   a, b, c, d           pencil / Hamiltonian parameters
//   chart                PL | PW | REDUCED | TWISTOR
//   t0, t1, samples      evolution window and sample count
//   rel_tol, abs_tol     integrator tolerances
//   seed                 seed echoed into reports (randomized checks)
//   speed_of_light       X0 = c t scale for worldline output (default 1)
//   delta                flag dilatation parameter for massive identities
//   checks               comma list of: conservation, chart-equivalence,
//                        quadrature, twistor-pullback, massive-identities
//   initial.p0, initial.p, initial.l, initial.j     PL / PW / REDUCED charts
//   initial.w                                       PW chart (instead of l)
//   initial.zeta1, initial.zeta2, initial.zeta      TWISTOR chart (re, im)
//   initial.alpha                                   TWISTOR chart scale
struct Scenario {
  PencilParamsd params;
  Chart chart = Chart::PL;
  double t0 = 0, t1 = 10;
  int samples = 101;
  OdeOptions ode;
  long seed = 0;
  double speed_of_light = 1.0;
  double delta = 0.0;
  std::vector<std::string> checks;

  // initial data (validity depends on chart)
  PoincareStated initial;            // PL / REDUCED
  Vec3<double> initial_w = Vec3<double>::Zero();  // PW
  bool has_initial_w = false;
  TwistorPointd::C zeta1{0}, zeta2{0}, zeta{0};
  double alpha = 1.0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_numbers(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    std::size_t pos = 0;
    double x;
    try {
      x = std::stod(tok, &pos);
    } catch (...) {
      throw ConfigError("scenario key '" + key + "': cannot parse number '" + tok + "'");
    }
    if (pos != tok.size())
      throw ConfigError("scenario key '" + key + "': trailing characters in '" + tok + "'");
    out.push_back(x);
  }
  return out;
}

inline double parse_one(const std::string& v, const std::string& key) {
  const auto xs = parse_numbers(v, key);
  if (xs.size() != 1) throw ConfigError("scenario key '" + key + "' expects one number");
  return xs[0];
}

inline Vec3<double> parse_vec3(const std::string& v, const std::string& key) {
  const auto xs = parse_numbers(v, key);
  if (xs.size() != 3) throw ConfigError("scenario key '" + key + "' expects three numbers");
  return Vec3<double>(xs[0], xs[1], xs[2]);
}

inline std::complex<double> parse_complex(const std::string& v, const std::string& key) {
  const auto xs = parse_numbers(v, key);
  if (xs.size() != 2)
    throw ConfigError("scenario key '" + key + "' expects two numbers (re, im)");
  return {xs[0], xs[1]};
}

}  // namespace detail

inline Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("scenario line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (kv.count(key))
      throw ConfigError("scenario key '" + key + "' given twice");
    kv[key] = val;
  }

  double a = -1, b = 0, c = 1, d = 1;
  bool has_p0 = false, has_p = false, has_j = false;
  bool has_z1 = false, has_z2 = false, has_z = false;
  for (const auto& [key, val] : kv) {
    using detail::parse_complex;
    using detail::parse_one;
    using detail::parse_vec3;
    if (key == "a") a = parse_one(val, key);
    else if (key == "b") b = parse_one(val, key);
    else if (key == "c") c = parse_one(val, key);
    else if (key == "d") d = parse_one(val, key);
    else if (key == "chart") {
      if (val == "PL") sc.chart = Chart::PL;
      else if (val == "PW") sc.chart = Chart::PW;
      else if (val == "REDUCED") sc.chart = Chart::Reduced;
      else if (val == "TWISTOR") sc.chart = Chart::Twistor;
      else throw ConfigError("unknown chart '" + val + "'");
    } else if (key == "t0") sc.t0 = parse_one(val, key);
    else if (key == "t1") sc.t1 = parse_one(val, key);
    else if (key == "samples") sc.samples = static_cast<int>(parse_one(val, key));
    else if (key == "rel_tol") sc.ode.rtol = parse_one(val, key);
    else if (key == "abs_tol") sc.ode.atol = parse_one(val, key);
    else if (key == "seed") sc.seed = static_cast<long>(parse_one(val, key));
    else if (key == "speed_of_light") sc.speed_of_light = parse_one(val, key);
    else if (key == "delta") sc.delta = parse_one(val, key);
    else if (key == "checks") {
      std::stringstream ss(val);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        tok = detail::trim(tok);
        if (!tok.empty()) sc.checks.push_back(tok);
      }
    } else if (key == "initial.p0") { sc.initial.p0 = parse_one(val, key); has_p0 = true; }
    else if (key == "initial.p") { sc.initial.p = parse_vec3(val, key); has_p = true; }
    else if (key == "initial.l") sc.initial.l = parse_vec3(val, key);
    else if (key == "initial.j") { sc.initial.j = parse_vec3(val, key); has_j = true; }
    else if (key == "initial.w") { sc.initial_w = parse_vec3(val, key); sc.has_initial_w = true; }
    else if (key == "initial.zeta1") { sc.zeta1 = parse_complex(val, key); has_z1 = true; }
    else if (key == "initial.zeta2") { sc.zeta2 = parse_complex(val, key); has_z2 = true; }
    else if (key == "initial.zeta") { sc.zeta = parse_complex(val, key); has_z = true; }
    else if (key == "initial.alpha") sc.alpha = parse_one(val, key);
    else throw ConfigError("unknown scenario key '" + key + "'");
  }

  try {
    sc.params = PencilParamsd(a, b, c, d);
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  if (!(sc.t1 > sc.t0)) throw ConfigError("scenario needs t1 > t0");
  if (sc.samples < 2) throw ConfigError("scenario needs samples >= 2");
  if (!(sc.ode.rtol > 0) || !(sc.ode.atol > 0))
    throw ConfigError("scenario tolerances must be positive");

  // chart preconditions
  switch (sc.chart) {
    case Chart::PL:
      if (!has_p0 || !has_p) throw ConfigError("PL chart needs initial.p0 and initial.p");
      break;
    case Chart::PW: {
      if (!has_p0 || !has_p || !has_j || !sc.has_initial_w)
        throw ConfigError("PW chart needs initial.p0/p/j/w");
      const double w0 = -sc.initial.j.dot(sc.initial.p);
      const double resid = sc.params.a * sc.initial.p0 * w0 + sc.initial.p.dot(sc.initial_w);
      if (std::abs(resid) > 1e-9 * std::max(1.0, sc.initial.p.norm() * sc.initial_w.norm()))
        throw ConfigError("PW initial data violates transversality");
      break;
    }
    case Chart::Reduced:
      if (!has_p0 || !has_p || !has_j)
        throw ConfigError("REDUCED chart needs the full initial state to reduce");
      break;
    case Chart::Twistor: {
      if (!has_z1 || !has_z2 || !has_z)
        throw ConfigError("TWISTOR chart needs initial.zeta1/zeta2/zeta");
      try {
        TwistorPointd probe(sc.zeta1, sc.zeta2, sc.zeta, sc.alpha);
      } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
      }
      break;
    }
    default:
      throw ConfigError("unsupported scenario chart");
  }
  const std::vector<std::string> known = {"conservation", "chart-equivalence", "quadrature",
                                          "twistor-pullback", "massive-identities"};
  for (const auto& chk : sc.checks) {
    bool ok = false;
    for (const auto& k : known) ok = ok || (k == chk);
    if (!ok) throw ConfigError("unknown check '" + chk + "'");
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  return parse_scenario(in);
}

// ---- run artifacts ----

struct CheckResult {
  std::string name;
  double residual = 0;
  double tolerance = 0;
  bool pass = true;
  std::string note;
};

struct RunResult {
  int status = 0;  // 0 pass, 1 check failed, 2 usage, 3 singularity
  std::vector<CheckResult> checks;
  std::string message;
};

namespace detail {

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::vector<std::string> chart_columns(Chart chart) {
  switch (chart) {
    case Chart::PL:
      return {"P0", "P1", "P2", "P3", "L1", "L2", "L3", "J1", "J2", "J3"};
    case Chart::PW:
      return {"P1", "P2", "P3", "W1", "W2", "W3"};
    case Chart::Reduced:
      return {"W0", "y", "z"};
    case Chart::Angles:
      return {"W0", "y", "z", "phi", "psi"};
    case Chart::Twistor:
      return {"re_zeta1", "im_zeta1", "re_zeta2", "im_zeta2", "re_zeta", "im_zeta"};
  }
  return {};
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectoryd& traj) {
  std::ofstream out(path);
  out << "t";
  for (const auto& c : chart_columns(traj.chart)) out << "," << c;
  out << ",c1,c2,h1,h2,h,transversality\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << fmt(traj.times[i]);
    for (int k = 0; k < traj.states[i].size(); ++k) out << "," << fmt(traj.states[i](k));
    const auto& a = traj.audit[i];
    out << "," << fmt(a.c1) << "," << fmt(a.c2) << "," << fmt(a.h1) << "," << fmt(a.h2) << ","
        << fmt(a.h) << "," << fmt(a.transversality) << "\n";
  }
}

inline void write_plot_script(const std::filesystem::path& path, const Trajectoryd& traj) {
  std::ofstream out(path);
  out << "#!/usr/bin/env python3\n"
         "# Plots the columns of trajectory.csv produced alongside this script.\n"
         "import csv\n"
         "import matplotlib.pyplot as plt\n"
         "from pathlib import Path\n\n"
         "rows = list(csv.DictReader(open(Path(__file__).parent / 'trajectory.csv')))\n"
         "t = [float(r['t']) for r in rows]\n"
         "fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(8, 9), sharex=True)\n"
         "for col in [";
  const auto cols = chart_columns(traj.chart);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? ", " : "") << "'" << cols[i] << "'";
  out << "]:\n"
         "    ax0.plot(t, [float(r[col]) for r in rows], label=col)\n"
         "ax0.set_ylabel('chart components')\n"
         "ax0.legend(ncol=4, fontsize=8)\n"
         "for col in ['c1', 'c2', 'h1', 'h2', 'h']:\n"
         "    q0 = float(rows[0][col])\n"
         "    ax1.plot(t, [abs(float(r[col]) - q0) for r in rows], label='drift ' + col)\n"
         "ax1.set_yscale('log')\n"
         "ax1.set_xlabel('t')\n"
         "ax1.set_ylabel('|drift|')\n"
         "ax1.legend(fontsize=8)\n"
         "fig.tight_layout()\n"
         "fig.savefig(Path(__file__).parent / 'trajectory.png', dpi=150)\n"
         "print('wrote trajectory.png')\n";
}

}  // namespace detail

namespace detail {

inline Trajectoryd integrate_scenario(const Scenario& sc) {
  switch (sc.chart) {
    case Chart::PL:
      return integrate_pl(sc.initial, sc.params, sc.t0, sc.t1, sc.ode, sc.samples);
    case Chart::PW:
      return integrate_pw(sc.initial.p0, sc.initial.j, sc.initial.p, sc.initial_w, sc.params,
                          sc.t0, sc.t1, sc.ode, sc.samples);
    case Chart::Reduced:
      return integrate_reduced(reduce(sc.initial, sc.params), sc.params, sc.t0, sc.t1, sc.ode,
                               sc.samples);
    case Chart::Twistor:
      return integrate_twistor(TwistorPointd(sc.zeta1, sc.zeta2, sc.zeta, sc.alpha), sc.params,
                               sc.t0, sc.t1, sc.ode, sc.samples);
    default:
      throw ConfigError("unsupported scenario chart");
  }
}

inline CheckResult check_conservation(const Trajectoryd& traj) {
  const auto rep = conservation_audit(traj);
  CheckResult r{"conservation", 0.0, 1e-8, true, ""};
  r.residual = std::max({rep.max_rel_drift.c1, rep.max_rel_drift.c2, rep.max_rel_drift.h1,
                         rep.max_rel_drift.h2, rep.max_rel_drift.h});
  r.pass = r.residual < r.tolerance;
  return r;
}

inline CheckResult check_chart_equivalence(const Scenario& sc, const Trajectoryd& pl) {
  CheckResult r{"chart-equivalence", 0.0, 1e-6, true, ""};
  if (sc.chart != Chart::PL) throw ConfigError("check chart-equivalence requires chart = PL");
  const auto s0 = pauli_lubansky(sc.initial, sc.params.a);
  const auto pw = integrate_pw(sc.initial.p0, sc.initial.j, sc.initial.p, s0.w, sc.params,
                               sc.t0, sc.t1, sc.ode, sc.samples);
  const auto red = integrate_reduced(reduce(sc.initial, sc.params), sc.params, sc.t0, sc.t1,
                                     sc.ode, sc.samples);
  double worst = 0;
  for (int i = 0; i < sc.samples; ++i) {
    const auto xi = unpack_pl(Eigen::Matrix<double, 10, 1>(pl.states[i]));
    const auto si = pauli_lubansky(xi, sc.params.a);
    worst = std::max(worst, (pw.states[i].head<3>() - xi.p).cwiseAbs().maxCoeff());
    worst = std::max(worst, (pw.states[i].tail<3>() - si.w).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(red.states[i](0) - (-xi.j.dot(xi.p))));
    worst = std::max(worst, std::abs(red.states[i](1) - xi.j.dot(si.w)));
    worst = std::max(worst, std::abs(red.states[i](2) - xi.j.dot(xi.p.cross(si.w))));
  }
  r.residual = worst;
  r.pass = worst < r.tolerance;
  return r;
}

inline std::vector<CheckResult> check_quadrature(const Scenario& sc, const Trajectoryd&) {
  if (sc.chart != Chart::PL) throw ConfigError("check quadrature requires chart = PL");
  std::vector<CheckResult> out;
  const auto r0 = reduce(sc.initial, sc.params);
  if (sc.params.b == sc.params.a || r0.p0 == 0) {
    out.push_back({"quadrature.first-integral", 0.0, 1e-8, true,
                   "quartic undefined (b = a or P0 = 0); skipped"});
    return out;
  }
  const auto red = integrate_reduced(r0, sc.params, sc.t0, sc.t1, sc.ode, sc.samples);
  const auto q = quartic_coeffs(r0, sc.params);
  CheckResult fi{"quadrature.first-integral", 0.0, 1e-8, true, ""};
  for (const auto& s : red.states) {
    const double pz = r0.p0 * s(2);
    const double scale = std::max({std::abs(q.q0), std::abs(q.q2) * s(0) * s(0),
                                   std::abs(q.q4) * std::pow(s(0), 4), pz * pz, 1e-12});
    fi.residual = std::max(fi.residual, std::abs(pz * pz - q(s(0))) / scale);
  }
  fi.pass = fi.residual < fi.tolerance;
  out.push_back(fi);

  // time-map comparison on the longest monotone stretch, when W0 moves
  CheckResult tm{"quadrature.time-map", 0.0, 1e-6, true, ""};
  std::size_t i0 = 0, best_len = 0, best_start = 0;
  for (std::size_t i = 1; i < red.states.size(); ++i) {
    if ((red.states[i](2) < 0) != (red.states[i0](2) < 0)) {
      if (i - i0 > best_len) { best_len = i - i0; best_start = i0; }
      i0 = i;
    }
  }
  if (red.states.size() - i0 > best_len) { best_len = red.states.size() - i0; best_start = i0; }
  const std::size_t ia = best_start + best_len / 4;
  const std::size_t ib = best_start + (3 * best_len) / 4;
  const double dw = (ib > ia) ? std::abs(red.states[ib](0) - red.states[ia](0)) : 0.0;
  if (sc.params.d != 0 && ib > ia && dw > 1e-6) {
    const double t_expect = red.times[ib] - red.times[ia];
    const double t_quad = time_of_w0(red.states[ia](0), red.states[ib](0), r0, sc.params);
    tm.residual = std::abs(std::abs(t_quad) - t_expect);
    tm.pass = tm.residual < tm.tolerance;
  } else {
    tm.note = "W0 effectively constant; nothing to compare";
  }
  out.push_back(tm);
  return out;
}

inline CheckResult check_twistor_pullback(const Scenario& sc, const Trajectoryd& traj) {
  CheckResult r{"twistor-pullback", 0.0, 1e-10, true, ""};
  double worst = 0;
  if (sc.chart == Chart::Twistor) {
    for (const auto& y : traj.states) {
      const TwistorPointd v({y(0), y(1)}, {y(2), y(3)}, {y(4), y(5)}, traj.alpha);
      const auto w = pullback(observables_from_coords(v));
      worst = std::max(worst, std::abs(w.zeta1 - v.zeta1));
      worst = std::max(worst, std::abs(w.zeta2 - v.zeta2));
      worst = std::max(worst, std::abs(w.zeta - v.zeta));
    }
  } else if (sc.chart == Chart::PL) {
    for (const auto& y : traj.states) {
      const auto x = unpack_pl(Eigen::Matrix<double, 10, 1>(y));
      const auto v = pullback(x);  // throws ChartError off the massless orbit
      const auto x2 = observables_from_coords(v);
      worst = std::max(worst, std::abs(x2.p0 - x.p0));
      worst = std::max(worst, (x2.p - x.p).cwiseAbs().maxCoeff());
      worst = std::max(worst, (x2.l - x.l).cwiseAbs().maxCoeff());
      worst = std::max(worst, (x2.j - x.j).cwiseAbs().maxCoeff());
    }
  } else {
    throw ConfigError("check twistor-pullback requires chart = PL or TWISTOR");
  }
  r.residual = worst;
  r.pass = worst < r.tolerance;
  return r;
}

inline std::vector<CheckResult> check_massive_identities(const Scenario& sc,
                                                         const Trajectoryd& traj) {
  if (sc.chart != Chart::PL)
    throw ConfigError("check massive-identities requires chart = PL");
  CheckResult trpw{"massive.tr-pw", 0.0, 1e-10, true, "scaled"};
  CheckResult det{"massive.det-w", 0.0, 1e-9, true, "spin inferred at t0"};
  CheckResult inv_chk{"massive.inversion", 0.0, 1e-9, true, ""};
  double s2_ref = 0;
  bool first = true;
  for (const auto& y : traj.states) {
    const auto x = unpack_pl(Eigen::Matrix<double, 10, 1>(y));
    const double c1 = casimir_c1(x, -1.0);
    if (!(c1 < 0)) throw ConfigError("check massive-identities needs massive data (c1 < 0)");
    const Mat2c<double> pm = matrix_from_components(x.p0, x.p);
    Mat2c<double> mm = Mat2c<double>::Zero();
    for (int k = 0; k < 3; ++k)
      mm += (std::complex<double>(x.l(k), x.j(k)) / 2.0) * sigma<double>(k + 1);
    const Mat2c<double> mp = mm * tilde(pm);
    const Mat2c<double> wm = (std::complex<double>(0, 1) * (mp - mp.adjoint()) / 2.0).eval();
    const double scale = pm.cwiseAbs().maxCoeff() * wm.cwiseAbs().maxCoeff() + 1.0;
    trpw.residual = std::max(trpw.residual, std::abs((pm * wm).trace()) / scale);
    const double detp = pm.determinant().real(), detw = wm.determinant().real();
    if (first) { s2_ref = -detw / detp; first = false; }
    det.residual = std::max(det.residual, std::abs(detw + s2_ref * detp) /
                                              std::max(1.0, std::abs(detw) + std::abs(detp)));
    // inversion round trip through the position/impact variables (X0 = 0)
    Vec3<double> w;
    const double w0m = matrix_component(wm, 0).real();
    for (int k = 0; k < 3; ++k) w(k) = matrix_component(wm, k + 1).real();
    const auto inv = flag_invert(x.p0, x.p, x.l, x.j, w0m, w, sc.delta, 0.0);
    const Vec3<double> l_fwd = 2 * (x.p0 * inv.x - inv.y.cross(x.p));
    const Vec3<double> j_fwd = 2 * (inv.y0 * x.p + x.p0 * inv.y + inv.x.cross(x.p));
    inv_chk.residual = std::max(inv_chk.residual, (l_fwd - x.l).cwiseAbs().maxCoeff());
    inv_chk.residual = std::max(inv_chk.residual, (j_fwd - x.j).cwiseAbs().maxCoeff());
  }
  trpw.pass = trpw.residual < trpw.tolerance;
  det.pass = det.residual < det.tolerance;
  inv_chk.pass = inv_chk.residual < inv_chk.tolerance;
  return {trpw, det, inv_chk};
}

}  // namespace detail

// Integrates the scenario and writes trajectory.csv, report.txt, run.log and
// plot.py into out_dir. Exit-status semantics: 0 all checks pass, 1 a check
// failed, 3 singularity hit (partial trajectory written, checks skipped).
inline RunResult run_scenario(const Scenario& sc, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RunResult result;
  Trajectoryd traj;
  bool singular = false;
  try {
    traj = detail::integrate_scenario(sc);
  } catch (TrajectorySingularity<double>& e) {
    traj = std::move(e.partial);
    singular = true;
    result.status = 3;
    result.message = std::string(e.what()) + " at t = " + detail::fmt(e.t_last);
  }

  if (!singular) {
    for (const auto& name : sc.checks) {
      if (name == "conservation") result.checks.push_back(detail::check_conservation(traj));
      else if (name == "chart-equivalence")
        result.checks.push_back(detail::check_chart_equivalence(sc, traj));
      else if (name == "quadrature") {
        for (auto& c : detail::check_quadrature(sc, traj)) result.checks.push_back(c);
      } else if (name == "twistor-pullback")
        result.checks.push_back(detail::check_twistor_pullback(sc, traj));
      else if (name == "massive-identities") {
        for (auto& c : detail::check_massive_identities(sc, traj)) result.checks.push_back(c);
      }
    }
    for (const auto& c : result.checks)
      if (!c.pass) result.status = 1;
  }

  detail::write_trajectory_csv(out_dir / "trajectory.csv", traj);
  detail::write_plot_script(out_dir / "plot.py", traj);

  std::ofstream rep(out_dir / "report.txt");
  rep << "chart: " << chart_name(sc.chart) << "\n";
  rep << "a: " << detail::fmt(sc.params.a) << "\n";
  rep << "b: " << detail::fmt(sc.params.b) << "\n";
  rep << "c: " << detail::fmt(sc.params.c) << "\n";
  rep << "d: " << detail::fmt(sc.params.d) << "\n";
  rep << "t0: " << detail::fmt(sc.t0) << "\n";
  rep << "t1: " << detail::fmt(sc.t1) << "\n";
  rep << "samples: " << sc.samples << "\n";
  rep << "seed: " << sc.seed << "\n";
  const auto audit = conservation_audit(traj);
  rep << "max_rel_drift.c1: " << detail::fmt(audit.max_rel_drift.c1) << "\n";
  rep << "max_rel_drift.c2: " << detail::fmt(audit.max_rel_drift.c2) << "\n";
  rep << "max_rel_drift.h1: " << detail::fmt(audit.max_rel_drift.h1) << "\n";
  rep << "max_rel_drift.h2: " << detail::fmt(audit.max_rel_drift.h2) << "\n";
  rep << "max_rel_drift.h: " << detail::fmt(audit.max_rel_drift.h) << "\n";
  rep << "max_transversality: " << detail::fmt(audit.max_transversality) << "\n";
  for (const auto& c : result.checks) {
    rep << "check " << c.name << ": " << (c.pass ? "PASS" : "FAIL")
        << " residual=" << detail::fmt(c.residual) << " tol=" << detail::fmt(c.tolerance);
    if (!c.note.empty()) rep << " note=" << c.note;
    rep << "\n";
  }
  rep << "status: " << result.status << "\n";
  if (!result.message.empty()) rep << "message: " << result.message << "\n";

  std::ofstream log(out_dir / "run.log");
  log << "integrated chart " << chart_name(sc.chart) << " over [" << detail::fmt(sc.t0) << ", "
      << detail::fmt(sc.t1) << "] with " << sc.samples << " samples\n";
  if (singular) log << "singularity: " << result.message << "\n";
  for (const auto& c : result.checks)
    log << "check " << c.name << ": " << (c.pass ? "PASS" : "FAIL") << " (residual "
        << detail::fmt(c.residual) << ", tolerance " << detail::fmt(c.tolerance) << ")\n";
  log << "exit status " << result.status << "\n";
  return result;
}

}  // namespace spinorbit
