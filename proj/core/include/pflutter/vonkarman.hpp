#pragma once

#include "pflutter/grid.hpp"
#include "pflutter/solvers.hpp"

#include <memory>

namespace pflutter {

/// Transverse pressure p0 and in-plane stress function F0, nodal samples.
struct LoadSet {
  PlateField p0;
  PlateField F0;

  static LoadSet zero(const GridSpec& g) { return {zeros(g), zeros(g)}; }
  /// F0 = -beta (x1^2 + x2^2), p0 = 0.
  static LoadSet radial_beta(const GridSpec& g, double beta);
  void validate(const GridSpec& g) const;
};

struct AirySolution {
  PlateField v;
  double residual_norm = 0.0;
};

/// [u,w] = u11 w22 + u22 w11 - 2 u12 w12 on every node. Clamped inputs use
/// the ghost rule at the boundary, others one-sided differences.
PlateField vk_bracket(const PlateField& u, const PlateField& w, const GridSpec& g);
PlateField vk_bracket(const SecondDerivs& du, const SecondDerivs& dw, const GridSpec& g);

/// Derivatives with the clamped rule when the field is clamped.
SecondDerivs auto_second_derivatives(const PlateField& f, const GridSpec& g);

/// Airy stress function, nonlinear force and potential pieces on one grid.
/// The biharmonic factorization is built once and shared read-only.
class VonKarman {
 public:
  VonKarman(const GridSpec& g, LoadSet loads);

  const GridSpec& grid() const { return g_; }
  const LoadSet& loads() const { return loads_; }
  const SpdFieldSolver& biharmonic_solver() const { return *bih_; }

  /// Clamped solve of lap^2 v = -[u,u].
  AirySolution airy_solve(const PlateField& u) const;
  /// f_v(u) = -[u, v(u) + F0]; boundary ring set to zero.
  PlateField fv(const PlateField& u) const;
  PlateField fv(const PlateField& u, const PlateField& v) const;
  /// -[h, v(u) + F0] - [u, dv] with lap^2 dv = -2[u,h].
  PlateField fv_jacobian_apply(const PlateField& u, const PlateField& h) const;
  PlateField fv_jacobian_apply(const PlateField& u, const PlateField& v, const PlateField& h) const;

  /// Pi_d(u) = 1/4 ||lap v||^2 - 1/2 <[u,u], F0> - <p0, u>.
  double potential_energy(const PlateField& u) const;
  double potential_energy(const PlateField& u, const PlateField& v) const;
  /// Pi_*(u) = 1/2 (||lap u||^2 + 1/2 ||lap v||^2).
  double pi_star(const PlateField& u) const;
  double pi_star(const PlateField& u, const PlateField& v) const;

 private:
  GridSpec g_;
  LoadSet loads_;
  SecondDerivs dF0_;
  std::shared_ptr<SpdFieldSolver> bih_;
};

/// One-shot conveniences; each builds its own factorization.
AirySolution airy_solve(const PlateField& u, const GridSpec& g);
PlateField fv(const PlateField& u, const LoadSet& loads, const GridSpec& g);

}  // namespace pflutter
