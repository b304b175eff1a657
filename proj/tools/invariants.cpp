#include "invariants.hpp"

#include "pflutter/config.hpp"
#include "pflutter/diagnostics.hpp"
#include "pflutter/equilibria.hpp"
#include "pflutter/flow.hpp"
#include "pflutter/io.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>

namespace pflutter {

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", x);
  return b;
}

Outcome operator_symmetry() {
  const GridSpec g = GridSpec::make(1.0, 1.0, 9, 9);
  const Eigen::MatrixXd L(laplacian_matrix(g)), K(biharmonic_matrix(g));
  const double sl = (L - L.transpose()).cwiseAbs().maxCoeff();
  const double sk = (K - K.transpose()).cwiseAbs().maxCoeff() / K.cwiseAbs().maxCoeff();
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues().minCoeff();
  return {sl == 0.0 && sk < 1e-14 && lmin > 0.0,
          "asym(lap)=" + fmt(sl) + " asym(bih)=" + fmt(sk) + " min eig=" + fmt(lmin)};
}

Outcome malpha_roundtrip() {
  const GridSpec g = GridSpec::make(1.0, 1.2, 17, 15);
  const PlateField w = random_smooth(g, 1.0, 5);
  const double alpha = 0.1;
  const PlateField rhs = w - alpha * laplacian(w, g);
  const double e = (helmholtz_malpha_solve(rhs, alpha, g) - w).cwiseAbs().maxCoeff();
  return {e <= 1e-10, "max err=" + fmt(e)};
}

Outcome linearity() {
  const GridSpec g = GridSpec::make(1.0, 1.0, 13, 13);
  const PlateField f = random_smooth(g, 1.0, 1), w = random_smooth(g, 1.0, 2);
  const double a = 0.7, b = -1.3;
  const PlateField l = biharmonic_clamped(a * f + b * w, g);
  const PlateField r = a * biharmonic_clamped(f, g) + b * biharmonic_clamped(w, g);
  const double e = (l - r).cwiseAbs().maxCoeff() / r.cwiseAbs().maxCoeff();
  const PlateField br = vk_bracket(f, a * w + b * f, g);
  const PlateField br2 = a * vk_bracket(f, w, g) + b * vk_bracket(f, f, g);
  const double e2 = (br - br2).cwiseAbs().maxCoeff() / br2.cwiseAbs().maxCoeff();
  return {e < 1e-13 && e2 < 1e-13, "bih=" + fmt(e) + " bracket=" + fmt(e2)};
}

Outcome bracket_symmetry() {
  double prev = 0.0;
  bool ok = true;
  std::string d;
  for (int n : {17, 33}) {
    const GridSpec g = GridSpec::make(1.0, 1.0, n, n);
    const PlateField u = random_smooth(g, 1.0, 3), w = random_smooth(g, 1.0, 4),
                     p = random_smooth(g, 1.0, 6);
    const double s = std::abs(inner_l2(vk_bracket(u, w, g), p, g) - inner_l2(vk_bracket(u, p, g), w, g));
    if (prev > 0.0) ok = ok && s < prev;
    prev = s;
    d += "n=" + std::to_string(n) + ":" + fmt(s) + " ";
  }
  return {ok, d};
}

Outcome airy_residual() {
  const GridSpec g = GridSpec::make(1.0, 1.0, 17, 17);
  const PlateField u = random_smooth(g, 0.5, 8);
  const AirySolution a = airy_solve(u, g);
  const PlateField r = biharmonic_clamped(a.v, g) + vk_bracket(u, u, g);
  PlateField ri = r;
  zero_boundary(ri, g);
  const double e = norm_l2(ri, g) / norm_l2(vk_bracket(u, u, g), g);
  return {is_clamped(a.v, g) && e < 1e-10, "rel residual=" + fmt(e)};
}

Outcome fv_jacobian() {
  const GridSpec g = GridSpec::make(1.0, 1.0, 13, 13);
  VonKarman vk(g, LoadSet::radial_beta(g, 3.0));
  const PlateField u = random_smooth(g, 0.3, 9), h = random_smooth(g, 1.0, 10);
  const PlateField j = vk.fv_jacobian_apply(u, h);
  const double eps = 1e-5;
  const PlateField fd = (vk.fv(u + eps * h) - vk.fv(u - eps * h)) / (2 * eps);
  const double e = (j - fd).norm() / j.norm();
  return {e < 1e-7, "rel FD err=" + fmt(e)};
}

Outcome causality() {
  const GridSpec g = GridSpec::make(1.0, 1.0, 9, 9);
  PhysParams p;
  p.U = 0.3;
  p.loads = LoadSet::zero(g);
  Integrator it(g, p, {8, 16}, 0.02);
  it.initialize(random_smooth(g, 0.05, 11), zeros(g), 0.0, Prehistory::Zero);
  for (int n = 0; n < 10; ++n) it.advance();
  const FlowHistory fh(it.history());
  FlowSampleSet s = box_samples({-0.5, 1.5, -0.5, 1.5, 0.0, 0.6}, 5, 5, 7, it.state().t);
  reconstruct(fh, s, p.U, it.t_star(), {8, 16});
  bool zero = true, nonzero = false;
  for (size_t k = 0; k < s.points.size(); ++k) {
    if (s.points[k].x3 > s.t)
      zero = zero && s.phi[k] == 0.0 && s.phi_t[k] == 0.0 && s.grad_phi[k][0] == 0.0 &&
             s.grad_phi[k][1] == 0.0 && s.grad_phi[k][2] == 0.0;
    else if (s.phi[k] != 0.0)
      nonzero = true;
  }
  return {zero && nonzero, zero ? "phi == 0 for x3 > t" : "nonzero phi beyond the front"};
}

Outcome io_roundtrip() {
  const GridSpec g = GridSpec::make(1.0, 0.7, 9, 7);
  const PlateField f = random_smooth(g, 1.0, 12);
  std::stringstream ss;
  write_snapshot(ss, {g, 0.125, f});
  const SnapshotRecord r = read_snapshot(ss);
  const bool exact = r.grid.same_as(g) && r.t == 0.125 && r.values == f;
  std::string bytes = ss.str();
  std::swap(bytes[0], bytes[3]);
  std::swap(bytes[1], bytes[2]);
  std::stringstream bad(bytes);
  bool rejected = false;
  try {
    read_snapshot(bad);
  } catch (const IoError&) {
    rejected = true;
  }
  return {exact && rejected, std::string(exact ? "bit exact" : "mismatch") + (rejected ? ", swapped magic rejected" : "")};
}

Outcome energy_run() {
  const GridSpec g = GridSpec::make(1.0, 1.0, 13, 13);
  PhysParams p;
  p.U = 0.5;
  p.loads = LoadSet::zero(g);
  Integrator it(g, p, {8, 16}, 0.01);
  it.initialize(random_smooth(g, 0.1, 13), zeros(g), 0.0, Prehistory::Constant);
  double prev = 0.0;
  bool ok = true;
  for (int n = 0; n < 100; ++n) {
    it.advance();
    const EnergyReport e = energy_report(it);
    ok = ok && e.E_star >= 0.0 && e.Pi_star >= 0.0 && e.diss_accum >= prev && std::isfinite(e.V);
    prev = e.diss_accum;
  }
  return {ok, "diss_accum=" + fmt(prev) + " power defect=" + fmt(it.counters().power_defect)};
}

Outcome equilibrium() {
  const GridSpec g = GridSpec::make(1.0, 1.0, 13, 13);
  PhysParams p;
  p.U = 0.0;
  p.loads = LoadSet::zero(g);
  p.loads.p0 = 50.0 * clamped_bump(g);
  const StationaryProblem prob(g, p, {8, 16});
  const EquilibriumResult r = prob.newton(zeros(g));
  return {r.converged && is_clamped(r.u_bar, g),
          "residual=" + fmt(r.residual_norm) + " iterations=" + std::to_string(r.iterations)};
}

Outcome config_rejects() {
  int rejected = 0;
  for (const char* bad : {R"({"phys": {"U": 1.2}})", R"({"phys": {"alpha": 0}})", R"({"nosuch": 1})",
                          R"({"grid": {"nx": 3}})", R"({"time": {"dt": -1}})"}) {
    try {
      parse_config(bad);
    } catch (const ConfigError&) {
      ++rejected;
    }
  }
  const bool stable = parse_config(R"({"phys": {"U": 0.5, "k": 0.2}})").hash ==
                      parse_config(R"({"phys": {"k": 0.2, "U": 0.5}})").hash;
  return {rejected == 5 && stable, std::to_string(rejected) + "/5 rejected, hash order independent"};
}

}  // namespace

bool run_invariant_suite(std::ostream& os) {
  const std::pair<const char*, std::function<Outcome()>> checks[] = {
      {"operator symmetry and positivity", operator_symmetry},
      {"M_alpha round trip", malpha_roundtrip},
      {"operator linearity", linearity},
      {"bracket symmetry under refinement", bracket_symmetry},
      {"Airy residual", airy_residual},
      {"f_v Jacobian vs finite differences", fv_jacobian},
      {"flow causality", causality},
      {"snapshot round trip", io_roundtrip},
      {"energy invariants along a run", energy_run},
      {"Newton equilibrium", equilibrium},
      {"config validation", config_rejects},
  };
  bool all = true;
  for (const auto& [name, fn] : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    os << (o.ok ? "PASS " : "FAIL ") << name << ": " << o.detail << " (" << fmt(sec) << " s)\n";
    all = all && o.ok;
  }
  os << (all ? "all checks passed\n" : "some checks failed\n");
  return all;
}

}  // namespace pflutter
