#pragma once

#include "pflutter/diagnostics.hpp"

#include <string>
#include <utility>
#include <vector>

namespace pflutter {

struct ProbeReport {
  std::string kind;
  bool pass = false;
  std::vector<std::pair<std::string, double>> constants;
  /// max over fit samples of observed / bound (<= 1 when the fit holds)
  double fit_ratio = 0.0;
  bool held_out_checked = false;
  bool held_out_pass = false;
  /// max over held-out samples of observed / bound; passes when <= 2
  double held_out_ratio = 0.0;
  std::string note;

  double constant(const std::string& name) const;
};

/// Difference of two runs sampled at identical times.
struct PairSeries {
  std::vector<double> t;
  std::vector<double> Ez;    // ||z_t||^2_{L2_alpha} + ||lap z||^2
  std::vector<double> h2sq;  // ||lap z||^2
  std::vector<double> low;   // ||z||_{2-delta}^2 = (||grad z||^delta ||lap z||^(1-delta))^2
  double pre_integral = 0.0; // int_{-t*}^0 ||lap z||^2 from the prehistory
  double t_star = 0.0;
};

PairSeries difference_series(const RunResult& a, const RunResult& b, const GridSpec& g,
                             double alpha, Prehistory pre, double delta = 0.5);

struct LipschitzFit {
  double C = 1.0;
  double a = 0.0;
  double D0 = 0.0;
};

/// a = max(0, least-squares slope of log(E_z / D0)), C = smallest constant
/// with E_z <= C e^{a t} D0 on every sample.
LipschitzFit fit_lipschitz(const PairSeries& s);
/// max E_z / (C e^{a t} D0), 0 when z == 0.
double lipschitz_ratio(const LipschitzFit& f, const PairSeries& s);

struct QuasiWindow {
  double t0 = 0.0;
  double lhs = 0.0;  // E_z(t0+T) + int_{t0+T-t*}^{t0+T} ||lap z||^2
  double A = 0.0;    // E_z(t0) + int_{t0-t*}^{t0} ||lap z||^2
  double S = 0.0;    // sup over [t0, t0+T] of ||z||^2_{2-delta}
};

/// Windows [t0, t0+T] with t0 = 0, t*/2, t*, ... inside the series.
std::vector<QuasiWindow> quasi_windows(const PairSeries& s, double T);

struct QuasiFit {
  double beta = 0.0;
  double Cq = 0.0;
};

/// Minimizes sum_i (beta A_i + C S_i) subject to lhs_i <= beta A_i + C S_i,
/// beta, C >= 0 (two-variable LP solved by vertex enumeration).
QuasiFit fit_quasi(const std::vector<QuasiWindow>& w);
double quasi_ratio(const QuasiFit& f, const std::vector<QuasiWindow>& w);

struct LyapunovFit {
  double delta = 0.0;
  double C = 0.0;
  double V0 = 0.0;
  double level = 0.0;  // asymptotic target C/delta must not exceed it
  bool found = false;
};

/// Largest delta on a log grid in [1e-4, 4] whose minimal
///   C(delta) = max_t delta (V(t) - V0 e^{-delta t}) / (1 - e^{-delta t})
/// keeps C / delta <= 1.05 * max of V over the last tenth of the run.
LyapunovFit fit_lyapunov(const std::vector<double>& t, const std::vector<double>& V);
/// max V / (V0 e^{-delta t} + C/delta (1 - e^{-delta t})) with V0 of this series.
double lyapunov_ratio(const LyapunovFit& f, const std::vector<double>& t,
                      const std::vector<double>& V);

struct DataPair {
  PlateField u0a, u1a, u0b, u1b;
};

/// Runs both members of each pair (fit pair and held-out pair) from base
/// with the given initial data; the pairs must share all other settings.
ProbeReport lipschitz_probe(const RunSpec& base, const DataPair& fit, const DataPair* held_out);
ProbeReport quasistability_probe(const RunSpec& base, const DataPair& fit,
                                 const DataPair* held_out, double T, double delta = 0.5);
/// fit_data / held_data: (u0, u1) of one run each.
ProbeReport lyapunov_probe(const RunSpec& base, const std::pair<PlateField, PlateField>& fit_data,
                           const std::pair<PlateField, PlateField>* held_data);

/// V samples of a run (skipping samples where V is not available).
void lyapunov_series(const RunResult& r, std::vector<double>& t, std::vector<double>& V);

}  // namespace pflutter
