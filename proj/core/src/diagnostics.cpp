#include "pflutter/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pflutter {

void LyapunovWeights::validate() const {
  if (!(nu > 0.0) || !(mu > 0.0)) throw std::invalid_argument("lyapunov weights must be positive");
}

double lyapunov_memory_term(const HistoryBuffer& h, const std::deque<double>& pi_hist,
                            double t_star) {
  if (static_cast<int>(pi_hist.size()) != h.size())
    throw HistoryError("Pi_* history not aligned with the snapshot buffer");
  if (!h.covers(t_star)) throw HistoryError("history span shorter than t_star");
  const double dt = h.dt_hist();
  const int n = h.size();
  auto pi_lag = [&](int k) { return pi_hist[n - 1 - k]; };
  const int kmax = std::min(n - 1, static_cast<int>(std::floor(t_star / dt + 1e-9)));
  // inner integrals I(k dt) = int_{t - k dt}^t Pi_* by cumulative trapezoid
  std::vector<double> inner(kmax + 1, 0.0);
  for (int k = 1; k <= kmax; ++k) inner[k] = inner[k - 1] + 0.5 * dt * (pi_lag(k - 1) + pi_lag(k));
  double outer = 0.0;
  for (int k = 1; k <= kmax; ++k) outer += 0.5 * dt * (inner[k - 1] + inner[k]);
  const double rem = t_star - kmax * dt;
  if (rem > 1e-12 * dt && kmax + 1 < n) {
    const double lam = rem / dt;
    const double pi_end = (1.0 - lam) * pi_lag(kmax) + lam * pi_lag(kmax + 1);
    const double i_end = inner[kmax] + 0.5 * rem * (pi_lag(kmax) + pi_end);
    outer += 0.5 * rem * (inner[kmax] + i_end);
  }
  return outer;
}

double plate_energy(const PlateState& s, double alpha, const VonKarman& vk) {
  const double n = norm_l2alpha(s.v, alpha, vk.grid());
  const double h2 = seminorm_h2(s.u, vk.grid());
  return 0.5 * n * n + 0.5 * h2 * h2 + vk.potential_energy(s.u);
}

EnergyReport energy_report(const Integrator& it, const LyapunovWeights& w) {
  w.validate();
  const GridSpec& g = it.grid();
  const PhysParams& p = it.params();
  const PlateState& s = it.state();
  const PlateField& v = it.current_airy();
  EnergyReport e;
  e.t = s.t;
  e.ut_l2alpha = norm_l2alpha(s.v, p.alpha, g);
  e.ke = 0.5 * e.ut_l2alpha * e.ut_l2alpha;
  const double h2 = seminorm_h2(s.u, g);
  e.E_pl = e.ke + 0.5 * h2 * h2 + it.vk().potential_energy(s.u, v);
  e.Pi_star = it.vk().pi_star(s.u, v);
  e.E_star = e.ke + e.Pi_star;
  e.diss_accum = it.counters().diss_accum;
  e.power_residual = it.counters().power_defect;
  e.u_center = s.u[g.idx(g.nx / 2, g.ny / 2)];
  if (it.history().covers(it.t_star())) {
    const double ua = norm_l2alpha(s.u, p.alpha, g);
    e.V = e.E_pl + w.nu * (inner_l2alpha(s.v, s.u, p.alpha, g) + p.k * ua * ua) +
          w.mu * lyapunov_memory_term(it.history(), it.pi_star_history(), it.t_star());
    e.V_valid = true;
  } else {
    e.V = std::numeric_limits<double>::quiet_NaN();
  }
  return e;
}

double distance_to_set(const PlateState& s, const std::vector<PlateField>& eqs, const GridSpec& g,
                       int* nearest) {
  if (eqs.empty()) throw std::invalid_argument("convergence monitor needs at least one equilibrium");
  const double vt = seminorm_h1(s.v, g);
  double best = std::numeric_limits<double>::infinity();
  int bi = 0;
  for (int i = 0; i < static_cast<int>(eqs.size()); ++i) {
    const double d = seminorm_h2(s.u - eqs[i], g);
    const double val = d * d + vt * vt;
    if (val < best) {
      best = val;
      bi = i;
    }
  }
  if (nearest) *nearest = bi;
  return best;
}

double ConvergenceSeries::crossing_time(double frac) const {
  if (dist.empty()) return -1.0;
  for (size_t i = 0; i < dist.size(); ++i)
    if (dist[i] <= frac * dist[0]) return t[i];
  return -1.0;
}

double ConvergenceSeries::final_ratio() const {
  if (dist.empty()) return 0.0;
  return dist[0] > 0.0 ? dist.back() / dist[0] : dist.back();
}

ConvergenceMonitor::ConvergenceMonitor(std::vector<PlateField> eqs, const GridSpec& g)
    : eqs_(std::move(eqs)), g_(g) {
  if (eqs_.empty()) throw std::invalid_argument("convergence monitor needs at least one equilibrium");
  for (const auto& e : eqs_) check_field(e, g_);
}

void ConvergenceMonitor::record(const PlateState& s) {
  int k = 0;
  const double d = distance_to_set(s, eqs_, g_, &k);
  ser_.t.push_back(s.t);
  ser_.dist.push_back(d);
  ser_.nearest.push_back(k);
}

RunResult run_trajectory(const RunSpec& spec,
                         const std::function<void(const Integrator&)>& on_sample) {
  if (spec.sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  Integrator it(spec.grid, spec.phys, spec.quad, spec.dt);
  it.initialize(spec.u0, spec.u1, 0.0, spec.prehistory);
  RunResult res;
  res.t_star = it.t_star();
  auto take = [&] {
    res.samples.push_back({energy_report(it, spec.weights), it.state()});
    if (on_sample) on_sample(it);
  };
  take();
  const long nsteps = std::lround(spec.horizon / spec.dt);
  try {
    for (long n = 1; n <= nsteps; ++n) {
      it.advance();
      if (n % spec.sample_every == 0 || n == nsteps) take();
    }
  } catch (const InstabilityError& e) {
    res.aborted = true;
    res.error = e.what();
  }
  res.counters = it.counters();
  return res;
}

}  // namespace pflutter
