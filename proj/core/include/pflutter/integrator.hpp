#pragma once

#include "pflutter/aero.hpp"
#include "pflutter/grid.hpp"
#include "pflutter/solvers.hpp"
#include "pflutter/vonkarman.hpp"

#include <deque>
#include <memory>
#include <stdexcept>

namespace pflutter {

struct PhysParams {
  double U = 0.0;
  double alpha = 0.1;
  double k = 0.1;
  LoadSet loads;
  void validate(const GridSpec& g) const;
};

enum class Prehistory { Constant, Zero };

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scalars carried across steps; part of the checkpoint.
struct IntegratorCounters {
  long step = 0;
  double diss_accum = 0.0;     // k * sum dt ||v_mid||^2_{L2_alpha}
  double power_defect = 0.0;   // sum |dt <R_mid, v_mid>|
  double power_signed = 0.0;   // sum dt <R_mid, v_mid>
  double last_power = 0.0;     // dt <R_mid, v_mid> of the last step
  double estar0 = 0.0;         // E_* at start, for the blow-up detector
};

/// Second-order IMEX integrator for the reduced plate equation
///   M_a u_tt + lap^2 u + k M_a u_t + f_v(u) = p0 - (u_t + U u_x1) - q(u^t).
/// Crank-Nicolson on lap^2, M_a, k M_a d/dt and the piston u_t; AB2 on
/// f_v, U u_x1 and q. On the first step an implicit Euler substep predicts
/// u(t+dt) and the explicit force is averaged instead of extrapolated.
class Integrator {
 public:
  Integrator(const GridSpec& g, const PhysParams& p, const QuadratureSpec& quad, double dt);

  /// Sets u(t0) = u0, u_t(t0) = u1 and the prehistory on [t0 - t*, t0).
  void initialize(const PlateField& u0, const PlateField& u1, double t0, Prehistory mode);
  /// Starts from a supplied history (newest snapshot is u(t0)) and velocity.
  void initialize_from_history(HistoryBuffer h, const PlateField& u1);
  /// Exact resume: history, velocity, previous explicit force and counters.
  /// With has_prev = false the next step bootstraps as after initialize.
  void restore(HistoryBuffer h, const PlateField& v, const PlateField& n_prev,
               const IntegratorCounters& c, bool has_prev = true);

  /// One step from the current state; does not touch the history.
  PlateState step() const;
  /// step() + push + explicit-force update + diagnostics accumulation.
  void advance();

  const PlateState& state() const { return state_; }
  const HistoryBuffer& history() const { return *hist_; }
  const IntegratorCounters& counters() const { return cnt_; }
  const PlateField& explicit_force_prev() const { return n_prev_; }
  const PlateField& current_q() const { return q_cur_; }
  const PlateField& current_airy() const { return v_cur_; }
  /// Pi_* at each snapshot, aligned with history().at(k).
  const std::deque<double>& pi_star_history() const { return pi_hist_; }

  const GridSpec& grid() const { return g_; }
  const PhysParams& params() const { return p_; }
  const AeroConfig& aero() const { return aero_; }
  const VonKarman& vk() const { return *vk_; }
  double dt() const { return dt_; }
  double t_star() const { return aero_.t_star; }
  bool bootstrapped() const { return has_prev_; }

  /// M_a a + lap^2 u + k M_a u_t + f_v(u) - p0 + u_t + U u_x1 + q.
  PlateField pde_residual(const PlateState& s, const PlateField& accel, const PlateField& q) const;
  /// Same with a precomputed f_v(u).
  PlateField pde_residual(const PlateState& s, const PlateField& accel, const PlateField& q,
                          const PlateField& fvu) const;

  /// Ratio for the blow-up detector: E_* > ratio * (E_*(0) + 1) aborts.
  double blowup_ratio = 1e6;

 private:
  void refresh_current();  // q, Airy, explicit force at the newest time
  PlateField explicit_force(const PlateField& u, const PlateField& fvu, const PlateField& q) const;
  PlateField apply(const SpMat& a, const PlateField& f) const;

  GridSpec g_;
  PhysParams p_;
  AeroConfig aero_;
  double dt_;
  std::shared_ptr<VonKarman> vk_;
  SpMat m_, k_, c_;
  std::shared_ptr<SpdFieldSolver> cn_, ie_;

  PlateState state_;
  std::unique_ptr<HistoryBuffer> hist_;
  std::deque<double> pi_hist_;
  PlateField n_cur_, n_prev_, q_cur_, v_cur_, fv_cur_;
  bool has_prev_ = false;
  IntegratorCounters cnt_;
};

/// E_* = 1/2 ||u_t||^2_{L2_alpha} + Pi_*(u).
double estar(const PlateState& s, double alpha, double pi_star, const GridSpec& g);

}  // namespace pflutter
