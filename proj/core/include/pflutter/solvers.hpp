#pragma once

#include "pflutter/grid.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>

namespace pflutter {

using SpMat = Eigen::SparseMatrix<double>;

class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double residual)
      : std::runtime_error(what + " (relative residual " + format(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  static std::string format(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3e", x);
    return b;
  }
  double residual_;
};

/// Interior unknowns are numbered (i-1)*(ny-2) + (j-1).
Eigen::VectorXd restrict_interior(const PlateField& f, const GridSpec& g);
PlateField extend_interior(const Eigen::VectorXd& x, const GridSpec& g);

/// Dirichlet 5-point Laplacian on interior unknowns.
SpMat laplacian_matrix(const GridSpec& g);
/// Clamped 13-point biharmonic on interior unknowns (symmetric positive definite).
SpMat biharmonic_matrix(const GridSpec& g);
/// 1 - alpha lap_h on interior unknowns.
SpMat malpha_matrix(const GridSpec& g, double alpha);

/// Factor-once sparse SPD solver acting on plate fields with zero boundary.
class SpdFieldSolver {
 public:
  SpdFieldSolver(const SpMat& a, const GridSpec& g, double tol = 1e-12);
  /// Solves A w = rhs on the interior (rhs boundary ignored), refining until
  /// the normwise backward error is below tol; throws SolveError otherwise.
  PlateField solve(const PlateField& rhs, double* rel_residual = nullptr) const;
  const SpMat& matrix() const { return a_; }
  const GridSpec& grid() const { return g_; }

 private:
  SpMat a_;
  GridSpec g_;
  double tol_;
  double anorm_ = 0.0;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt_;
};

PlateField helmholtz_malpha_solve(const PlateField& rhs, double alpha, const GridSpec& g);

}  // namespace pflutter
