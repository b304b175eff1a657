// Acceptance suite: one PASS/FAIL line per criterion. With arguments, only
// the listed criterion numbers run. Exit code 0 iff every run criterion passes.
#include "pflutter/config.hpp"
#include "pflutter/diagnostics.hpp"
#include "pflutter/equilibria.hpp"
#include "pflutter/flow.hpp"
#include "pflutter/probes.hpp"

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

using namespace pflutter;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// least-squares slope of log e against log h
double loglog_slope(const std::vector<double>& h, const std::vector<double>& e) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double max_abs(const PlateField& f) { return f.cwiseAbs().maxCoeff(); }

// 1. manufactured solutions for the clamped biharmonic and M_alpha solves
Verdict c1_manufactured() {
  const double pi = std::numbers::pi, alpha = 0.1;
  auto fe = [](double x, double y) { return std::pow(x * (1 - x) * y * (1 - y), 2); };
  auto b4 = [](double x, double y) {
    const double p = x * x * (1 - x) * (1 - x), q = y * y * (1 - y) * (1 - y);
    return 24 * q + 2 * (2 - 12 * x + 12 * x * x) * (2 - 12 * y + 12 * y * y) + 24 * p;
  };
  auto ws = [&](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  std::vector<double> eb, em;
  for (int n : {17, 33, 65}) {
    const GridSpec g = GridSpec::make(1, 1, n, n);
    const SpdFieldSolver s(biharmonic_matrix(g), g);
    eb.push_back(max_abs(s.solve(sample(g, b4)) - sample(g, fe)));
    em.push_back(max_abs(helmholtz_malpha_solve((1 + 2 * alpha * pi * pi) * sample(g, ws), alpha, g) - sample(g, ws)));
  }
  const double r1 = eb[0] / eb[1], r2 = eb[1] / eb[2], r3 = em[0] / em[1], r4 = em[1] / em[2];
  return {std::min({r1, r2, r3, r4}) >= 3.5,
          fmt("biharmonic ratios %.2f %.2f, M_alpha ratios %.2f %.2f (need >= 3.5)", r1, r2, r3, r4)};
}

// 2. trilinear symmetry defect of the bracket falls like h^2
Verdict c2_bracket() {
  double worst = 1e300;
  std::string d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<double> h, e;
    for (int n : {17, 33, 65, 129}) {
      const GridSpec g = GridSpec::make(1, 1, n, n);
      const PlateField u = random_smooth(g, 1, 3 * seed), w = random_smooth(g, 1, 3 * seed + 1),
                       p = random_smooth(g, 1, 3 * seed + 2);
      e.push_back(std::abs(inner_l2(vk_bracket(u, w, g), p, g) - inner_l2(vk_bracket(u, p, g), w, g)));
      h.push_back(g.hx);
    }
    const double s = loglog_slope(h, e);
    worst = std::min(worst, s);
    d += fmt(" %.2f", s);
  }
  return {worst >= 1.8, "log-log slopes over 17..129 for 5 triples:" + d + " (need >= 1.8)"};
}

// 3. q_static telescopes at U = 0
Verdict c3_telescoping() {
  const GridSpec g = GridSpec::make(1, 1, 65, 65);
  const PlateField u = random_smooth(g, 1, 42);
  std::vector<double> r;
  std::string d;
  for (auto q : {QuadratureSpec{32, 100}, QuadratureSpec{64, 200}, QuadratureSpec{128, 400}}) {
    const AeroConfig cfg = make_aero_config(g, 0.0, q);
    r.push_back(norm_l2(q_static(u, cfg, g), g) / seminorm_h2(u, g));
    d += fmt(" (%d,%d): %.3e", q.n_theta, q.n_s, r.back());
  }
  const bool dec = r[1] < r[0] && r[2] < r[1];
  return {dec && r[2] <= 1e-3, "||q||/||u||_2 on 65x65" + d + (dec ? ", decreasing" : ", NOT decreasing")};
}

HistoryBuffer oscillating_history(const GridSpec& g, double U, double dt, double T) {
  const double ts = escape_time(g, U) + 0.2;
  HistoryBuffer h(g, dt, ts);
  const int n = static_cast<int>(std::ceil((ts + 3 * dt) / dt));
  for (int k = n; k >= 0; --k) {
    const double t = T - k * dt;
    h.push(t, sample(g, [&](double x, double y) {
             const double a = x * (1 - x), b = y * (1 - y);
             return 2.56 * a * a * b * b * (1 + 0.5 * x) * (std::sin(2 * t) + 0.3 * std::cos(3 * t));
           }));
  }
  return h;
}

// 4. trace identity of the reconstructed potential
Verdict c4_trace() {
  const double U = 0.5;
  std::vector<double> h, r;
  std::string d;
  for (auto [n, q, dt] : {std::tuple{17, QuadratureSpec{16, 128}, 0.02}, std::tuple{33, QuadratureSpec{32, 256}, 0.01},
                          std::tuple{65, QuadratureSpec{64, 512}, 0.005}}) {
    const GridSpec g = GridSpec::make(1, 1, n, n);
    const TraceCheck tc = trace_material_derivative(oscillating_history(g, U, dt, 3.0), make_aero_config(g, U, q));
    h.push_back(g.hx);
    r.push_back(tc.rel_residual);
    d += fmt(" %dx%d/(%d,%d): %.3e", n, n, q.n_theta, q.n_s, tc.rel_residual);
  }
  const double s = loglog_slope(h, r);
  // default resolution: 33x33 grid with the flow default quadrature (32, 256)
  return {r[1] <= 1e-2 && s > 0.0, "relative residual" + d + fmt(", slope %.2f", s)};
}

// 5. causality of the reconstruction
Verdict c5_causality() {
  const GridSpec g = GridSpec::make(1, 1, 17, 17);
  PhysParams p;
  p.U = 0.5;
  p.loads = LoadSet::zero(g);
  Integrator it(g, p, {16, 32}, 0.01);
  it.initialize(random_smooth(g, 0.05, 7), random_smooth(g, 0.5, 8), 0.0, Prehistory::Zero);
  for (int n = 0; n < 50; ++n) it.advance();
  const FlowHistory fh(it.history());
  FlowSampleSet s = box_samples({-0.5, 1.5, -0.5, 1.5, 0.0, 1.5}, 9, 9, 31, it.state().t);
  reconstruct(fh, s, p.U, it.t_star(), {16, 64});
  long beyond = 0, bad = 0, inside_nonzero = 0;
  for (size_t k = 0; k < s.points.size(); ++k) {
    if (s.points[k].x3 > s.t) {
      ++beyond;
      if (s.phi[k] != 0.0) ++bad;
    } else if (s.phi[k] != 0.0) {
      ++inside_nonzero;
    }
  }
  return {beyond > 0 && bad == 0 && inside_nonzero > 0,
          fmt("%ld points with x3 > t = %.2f, %ld nonzero; %ld nonzero points behind the front", beyond, s.t, bad,
              inside_nonzero)};
}

// 6. discrete power balance defect over [0, 10] is O(dt^2)
Verdict c6_power() {
  const GridSpec g = GridSpec::make(1, 1, 17, 17);
  PhysParams p;
  p.U = 0.5;
  p.loads = LoadSet::radial_beta(g, 5.0);
  std::vector<double> d;
  for (double dt : {0.01, 0.005, 0.0025}) {
    Integrator it(g, p, {16, 32}, dt);
    it.initialize(random_smooth(g, 0.1, 11), random_smooth(g, 0.5, 12), 0.0, Prehistory::Constant);
    const long n = std::lround(10.0 / dt);
    for (long k = 0; k < n; ++k) it.advance();
    d.push_back(it.counters().power_defect);
  }
  const double r1 = d[0] / d[1], r2 = d[1] / d[2];
  return {std::min(r1, r2) >= 3.5,
          fmt("defect %.3e %.3e %.3e for dt 0.01/0.005/0.0025, ratios %.2f %.2f", d[0], d[1], d[2], r1, r2)};
}

// 7. a Newton equilibrium stays put in the integrator
Verdict c7_persistence() {
  const GridSpec g = GridSpec::make(1, 1, 33, 33);
  PhysParams p;
  p.U = 0.5;
  p.loads = LoadSet::radial_beta(g, 5.0);
  p.loads.p0 = 100.0 * clamped_bump(g);
  const QuadratureSpec q{32, 64};
  const EquilibriumResult r = newton_solve(zeros(g), p, g, q);
  if (!r.converged) return {false, "Newton failed: " + r.message};
  Integrator it(g, p, q, 0.01);
  it.initialize(r.u_bar, zeros(g), 0.0, Prehistory::Constant);
  const double T = 10 * it.t_star(), n0 = seminorm_h2(r.u_bar, g);
  double worst = 0.0;
  while (it.state().t < T - 1e-9) {
    it.advance();
    worst = std::max(worst, seminorm_h2(it.state().u - r.u_bar, g) / n0);
  }
  return {worst <= 1e-8, fmt("Newton residual %.2e in %d iterations; max relative drift %.3e over 10 t* = %.2f",
                             r.residual_norm, r.iterations, worst, T)};
}

// 8. subsonic stabilization to the stationary set
Verdict c8_stabilization() {
  const GridSpec g = GridSpec::make(1, 1, 65, 65);
  RunSpec spec;
  spec.grid = g;
  spec.phys.U = 0.5;
  spec.phys.k = 0.1;
  spec.phys.alpha = 0.1;
  spec.phys.loads = LoadSet::zero(g);
  spec.quad = {16, 32};
  spec.dt = 0.005;
  spec.horizon = 345.0;
  spec.u0 = random_smooth(g, 0.05, 2024);
  spec.u1 = random_smooth(g, 0.5, 2025);
  spec.sample_every = 200;
  // the stationary set: Newton from zero and from the data
  const StationaryProblem prob(g, spec.phys, spec.quad);
  std::vector<PlateField> eqs;
  for (const PlateField& guess : {zeros(g), spec.u0}) {
    const EquilibriumResult e = prob.newton(guess);
    if (e.converged) eqs.push_back(e.u_bar);
  }
  if (eqs.empty()) return {false, "no equilibrium found"};
  ConvergenceMonitor mon(eqs, g);
  const RunResult res = run_trajectory(spec, [&](const Integrator& it) { mon.record(it.state()); });
  if (res.aborted) return {false, "run aborted: " + res.error};
  const auto& s = res.samples;
  const double ut0 = s.front().e.ut_l2alpha, ut1 = s.back().e.ut_l2alpha;
  // trailing window: last 10 time units
  size_t w = s.size() - 1;
  while (w > 0 && s[w].e.t > s.back().e.t - 10.0) --w;
  const double dtot = s.back().e.diss_accum, dinc = (dtot - s[w].e.diss_accum) / dtot;
  // the monitor records squared distances
  const double dist = std::sqrt(mon.series().final_ratio());
  const bool ok = ut1 < 1e-6 * ut0 && dinc < 1e-8 && dist < 1e-6;
  return {ok, fmt("|u_t| ratio %.3e (< 1e-6), trailing diss increment %.3e (< 1e-8), distance ratio %.3e (< 1e-6) at t = %.0f",
                  ut1 / ut0, dinc, dist, s.back().e.t)};
}

// 9. buckling: eigenvalue versus bisection, and the three equilibria above it
Verdict c9_buckling() {
  const GridSpec g = GridSpec::make(1, 1, 33, 33);
  const QuadratureSpec q{16, 32};
  const BucklingResult b = buckling_critical_load(g);
  const BisectionResult bis = bisect_critical_beta(g, q);
  const double rel = std::abs(bis.beta0 - b.beta0) / b.beta0;
  PhysParams p;
  p.U = 0.0;
  p.loads = LoadSet::radial_beta(g, 1.5 * b.beta0);
  const StationaryProblem prob(g, p, q);
  const EquilibriumResult z = prob.newton(zeros(g));
  NewtonOptions opt;
  opt.deflate_zero = true;
  const EquilibriumResult up = prob.newton(0.1 * b.mode / max_abs(b.mode), opt);
  const EquilibriumResult dn = prob.newton(-0.1 * b.mode / max_abs(b.mode), opt);
  const double nu = seminorm_h2(up.u_bar, g);
  const double sym = seminorm_h2(up.u_bar + dn.u_bar, g) / nu;
  const bool ok = rel <= 0.02 && z.converged && seminorm_h2(z.u_bar, g) == 0.0 && up.converged && dn.converged &&
                  nu > 1e-6 && sym <= 1e-10;
  return {ok, fmt("beta0 eigen %.6f bisection %.6f (rel %.2e); at 1.5 beta0: ||0|| = %.1e, ||u+||_2 = %.4e, "
                  "||u+ + u-||/||u+|| = %.2e",
                  b.beta0, bis.beta0, rel, seminorm_h2(z.u_bar, g), nu, sym)};
}

// 10. probe suite with held-out pairs
Verdict c10_probes() {
  const GridSpec g = GridSpec::make(1, 1, 17, 17);
  auto spec = [&](double k) {
    RunSpec s;
    s.grid = g;
    s.phys.U = 0.5;
    s.phys.k = k;
    s.phys.alpha = 0.1;
    s.phys.loads = LoadSet::radial_beta(g, 3.0);
    s.quad = {16, 32};
    s.dt = 0.01;
    s.horizon = 8 * escape_time(g, 0.5);
    s.sample_every = 5;
    return s;
  };
  auto pair = [&](std::uint64_t seed) {
    DataPair d;
    d.u0a = random_smooth(g, 0.05, seed);
    d.u1a = zeros(g);
    d.u0b = d.u0a + random_smooth(g, 0.005, seed + 7);
    d.u1b = random_smooth(g, 0.005, seed + 9);
    return d;
  };
  const DataPair fit = pair(1), held = pair(1001);
  const double ts = escape_time(g, 0.5);
  const ProbeReport lip = lipschitz_probe(spec(0.1), fit, &held);
  const ProbeReport qs = quasistability_probe(spec(0.2), fit, &held, 4 * ts);
  const std::pair<PlateField, PlateField> la{random_smooth(g, 0.05, 1), zeros(g)},
      lb{random_smooth(g, 0.05, 1001), zeros(g)};
  const ProbeReport ly = lyapunov_probe(spec(0.1), la, &lb);
  const bool ok = lip.pass && lip.held_out_pass && qs.pass && qs.held_out_pass && qs.constant("beta") < 1.0 &&
                  ly.pass && ly.held_out_pass && ly.constant("delta") > 0.0;
  return {ok, fmt("lipschitz C=%.3g a=%.3g held-out ratio %.2f; quasi beta=%.3g C=%.3g held-out ratio %.2f; "
                  "lyapunov delta=%.3g held-out ratio %.2f (held-out needs <= 2)",
                  lip.constant("C"), lip.constant("a"), lip.held_out_ratio, qs.constant("beta"), qs.constant("C_q"),
                  qs.held_out_ratio, ly.constant("delta"), ly.held_out_ratio)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::pair<const char*, std::function<Verdict()>> crit[] = {
      {"manufactured-solution convergence", c1_manufactured},
      {"bracket trilinear symmetry", c2_bracket},
      {"q telescoping at U = 0", c3_telescoping},
      {"trace identity", c4_trace},
      {"causality", c5_causality},
      {"discrete power balance", c6_power},
      {"equilibrium persistence", c7_persistence},
      {"subsonic stabilization", c8_stabilization},
      {"buckling multiplicity", c9_buckling},
      {"probe suite", c10_probes},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  bool all = true;
  for (int i = 0; i < 10; ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = crit[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s %s: %s [%.1f s]\n", i + 1, v.pass ? "PASS" : "FAIL", crit[i].first,
                v.detail.c_str(), sec);
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
