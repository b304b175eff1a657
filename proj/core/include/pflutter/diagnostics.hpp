#pragma once

#include "pflutter/integrator.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pflutter {

struct LyapunovWeights {
  double nu = 0.01;
  double mu = 0.01;
  void validate() const;
};

struct EnergyReport {
  double t = 0.0;
  double E_pl = 0.0;
  double E_star = 0.0;
  double Pi_star = 0.0;
  double ke = 0.0;  // 1/2 ||u_t||^2_{L2_alpha}
  double V = 0.0;
  bool V_valid = false;  // false when the history is shorter than t_star
  double diss_accum = 0.0;
  double power_residual = 0.0;  // accumulated |step power defect|
  double ut_l2alpha = 0.0;
  double u_center = 0.0;
};

/// V = E_pl + nu (<u_t,u>_a + k ||u||_a^2) + mu int_0^t* int_{t-s}^t Pi_*(tau) dtau ds,
/// trapezoid in tau over the snapshots and in s over the same nodes.
double lyapunov_memory_term(const HistoryBuffer& h, const std::deque<double>& pi_hist,
                            double t_star);

EnergyReport energy_report(const Integrator& it, const LyapunovWeights& w = {});

/// Plate energy E_pl = ke + 1/2 ||lap u||^2 + Pi_d(u).
double plate_energy(const PlateState& s, double alpha, const VonKarman& vk);

/// ||u - u_bar||_2^2 + ||u_t||_1^2 minimized over the candidates, with the
/// H2 and H1 seminorms (norms on clamped fields).
double distance_to_set(const PlateState& s, const std::vector<PlateField>& eqs, const GridSpec& g,
                       int* nearest = nullptr);

struct ConvergenceSeries {
  std::vector<double> t, dist;
  std::vector<int> nearest;
  /// first time dist <= frac * dist[0], or -1.
  double crossing_time(double frac) const;
  double final_ratio() const;
};

/// Tracks distance to a set of equilibria along a run.
class ConvergenceMonitor {
 public:
  ConvergenceMonitor(std::vector<PlateField> eqs, const GridSpec& g);
  void record(const PlateState& s);
  const ConvergenceSeries& series() const { return ser_; }

 private:
  std::vector<PlateField> eqs_;
  GridSpec g_;
  ConvergenceSeries ser_;
};

/// Everything needed to run one trajectory.
struct RunSpec {
  GridSpec grid;
  PhysParams phys;
  QuadratureSpec quad;
  double dt = 0.01;
  double horizon = 1.0;
  Prehistory prehistory = Prehistory::Constant;
  PlateField u0, u1;
  int sample_every = 1;  // steps between samples
  LyapunovWeights weights;
};

struct RunSample {
  EnergyReport e;
  PlateState state;
};

struct RunResult {
  std::vector<RunSample> samples;
  IntegratorCounters counters;
  double t_star = 0.0;
  bool aborted = false;
  std::string error;
};

/// Steps to the horizon, sampling every sample_every steps (and at t0).
/// Instability aborts are recorded, not thrown. on_sample, when given, is
/// called with the integrator after each sample.
RunResult run_trajectory(const RunSpec& spec,
                         const std::function<void(const Integrator&)>& on_sample = {});

}  // namespace pflutter
