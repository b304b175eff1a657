#pragma once

#include "pflutter/aero.hpp"
#include "pflutter/integrator.hpp"
#include "pflutter/vonkarman.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pflutter {

struct NewtonOptions {
  double tol = 1e-10;        // on ||G(u)|| / (1 + ||p0||)
  int max_iter = 50;
  double inner_tol = 1e-8;   // GMRES relative residual
  int inner_max = 600;
  int restart = 60;
  int max_halvings = 30;
  /// Newton on (1/||u||^2 + 1) G(u), which removes u = 0 as an attractor.
  bool deflate_zero = false;
};

struct EquilibriumResult {
  PlateField u_bar;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::optional<double> smallest_eig;
  std::string message;
};

struct EigenEstimate {
  double value = 0.0;
  PlateField vector;
};

/// Stationary reduced operator
///   G(u) = lap^2 u + f_v(u) + U u_x1 + q_static(u) - p0
/// with its Jacobian action and Newton solver on one grid.
class StationaryProblem {
 public:
  StationaryProblem(const GridSpec& g, const PhysParams& p, const QuadratureSpec& quad);

  PlateField residual(const PlateField& u) const;
  PlateField residual(const PlateField& u, const PlateField& v_airy) const;
  /// J(u) h = lap^2 h + f_v'(u) h + U h_x1 + q_static(h).
  PlateField jacobian_apply(const PlateField& u, const PlateField& v_airy, const PlateField& h) const;
  EquilibriumResult newton(const PlateField& guess, const NewtonOptions& opt = {}) const;
  /// Leftmost Ritz value of lap^-2 J(u) from m Arnoldi steps. Negative means
  /// the linearization has an unstable direction.
  EigenEstimate leftmost_eig(const PlateField& u, int m = 40) const;

  const GridSpec& grid() const { return g_; }
  const PhysParams& params() const { return p_; }
  const AeroConfig& aero() const { return aero_; }
  const VonKarman& vk() const { return *vk_; }
  double residual_scale() const { return 1.0 + norm_l2(p_.loads.p0, g_); }
  /// eps * || |K| |u| || / (1 + ||p0||): rounding bound of evaluating lap^2 u.
  /// Newton accepts a stagnated iterate below it even when tol is smaller.
  double rounding_floor(const PlateField& u) const;

 private:
  GridSpec g_;
  PhysParams p_;
  AeroConfig aero_;
  std::shared_ptr<VonKarman> vk_;
  SpMat kabs_;
};

class EquilibriumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PlateField stationary_residual(const PlateField& u, const PhysParams& p, const GridSpec& g,
                               const QuadratureSpec& quad);
EquilibriumResult newton_solve(const PlateField& guess, const PhysParams& p, const GridSpec& g,
                               const QuadratureSpec& quad, const NewtonOptions& opt = {});

struct BucklingResult {
  double lambda1 = 0.0;  // lap^2 h = lambda (-lap h)
  double beta0 = 0.0;    // lambda1 / 2
  PlateField mode;
  int iterations = 0;
};

/// Smallest clamped buckling eigenvalue by inverse iteration.
BucklingResult buckling_critical_load(const GridSpec& g, double tol = 1e-11, int max_iter = 1000);

/// Symmetric clamped bump 256 x^2 (lx-x)^2 y^2 (ly-y)^2 / (lx ly)^4, peak 1.
PlateField clamped_bump(const GridSpec& g);

struct BisectionResult {
  double beta0 = 0.0;
  double lo = 0.0, hi = 0.0;
  int tests = 0;
};

/// True when deflated Newton from a bump guess finds a nontrivial solution
/// (||lap_h u|| > 1e-6) for F0 = -beta (x1^2 + x2^2), p0 = 0, U = 0.
bool nontrivial_branch_exists(double beta, const GridSpec& g, const QuadratureSpec& quad);

/// Locates the onset of nontrivial equilibria by bisection on
/// nontrivial_branch_exists; the bracket grows from [0, 1] by doubling.
BisectionResult bisect_critical_beta(const GridSpec& g, const QuadratureSpec& quad,
                                     double rel_width = 2e-3);

struct BranchPoint {
  double param = 0.0;
  int branch = 0;  // 0 trivial/warm-started, +1 / -1 seeded from the Ritz vector
  PlateField u_bar;
  double norm_u2 = 0.0;  // ||lap_h u_bar||
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double smallest_eig = 0.0;
};

enum class SweepFamily { Beta, U };

/// Natural-parameter continuation. Branch 0 starts from zero and is warm
/// started; the first time its leftmost eigenvalue goes negative, branches
/// +1 and -1 are seeded with +-0.1 times the unit Ritz vector. A branch
/// stops at its first Newton failure.
std::vector<BranchPoint> continuation_sweep(SweepFamily fam, double from, double to, int steps,
                                            const PhysParams& base, const GridSpec& g,
                                            const QuadratureSpec& quad,
                                            const NewtonOptions& opt = {});

}  // namespace pflutter
