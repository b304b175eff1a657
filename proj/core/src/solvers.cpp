#include "pflutter/solvers.hpp"

#include <vector>

namespace pflutter {

Eigen::VectorXd restrict_interior(const PlateField& f, const GridSpec& g) {
  check_field(f, g);
  Eigen::VectorXd x(g.n_interior());
  const int m = g.ny - 2;
  for (int i = 1; i < g.nx - 1; ++i)
    for (int j = 1; j < g.ny - 1; ++j) x[(i - 1) * m + (j - 1)] = f[g.idx(i, j)];
  return x;
}

PlateField extend_interior(const Eigen::VectorXd& x, const GridSpec& g) {
  PlateField f = zeros(g);
  const int m = g.ny - 2;
  for (int i = 1; i < g.nx - 1; ++i)
    for (int j = 1; j < g.ny - 1; ++j) f[g.idx(i, j)] = x[(i - 1) * m + (j - 1)];
  return f;
}

SpMat laplacian_matrix(const GridSpec& g) {
  const int mx = g.nx - 2, my = g.ny - 2, n = mx * my;
  const double cx = 1.0 / (g.hx * g.hx), cy = 1.0 / (g.hy * g.hy);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * n);
  for (int i = 0; i < mx; ++i) {
    for (int j = 0; j < my; ++j) {
      const int r = i * my + j;
      t.emplace_back(r, r, -2.0 * (cx + cy));
      if (i > 0) t.emplace_back(r, r - my, cx);
      if (i + 1 < mx) t.emplace_back(r, r + my, cx);
      if (j > 0) t.emplace_back(r, r - 1, cy);
      if (j + 1 < my) t.emplace_back(r, r + 1, cy);
    }
  }
  SpMat l(n, n);
  l.setFromTriplets(t.begin(), t.end());
  return l;
}

SpMat biharmonic_matrix(const GridSpec& g) {
  const SpMat l = laplacian_matrix(g);
  const int mx = g.nx - 2, my = g.ny - 2, n = mx * my;
  const double cx = 1.0 / (g.hx * g.hx), cy = 1.0 / (g.hy * g.hy);
  // ghost reflection adds 2/h^4 on rows next to each clamped edge
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < mx; ++i) {
    for (int j = 0; j < my; ++j) {
      double d = 0.0;
      if (i == 0) d += 2.0 * cx * cx;
      if (i == mx - 1) d += 2.0 * cx * cx;
      if (j == 0) d += 2.0 * cy * cy;
      if (j == my - 1) d += 2.0 * cy * cy;
      if (d != 0.0) t.emplace_back(i * my + j, i * my + j, d);
    }
  }
  SpMat dg(n, n);
  dg.setFromTriplets(t.begin(), t.end());
  SpMat k = (l * l).pruned();
  k += dg;
  return k;
}

SpMat malpha_matrix(const GridSpec& g, double alpha) {
  SpMat id(g.n_interior(), g.n_interior());
  id.setIdentity();
  SpMat m = id - alpha * laplacian_matrix(g);
  return m;
}

SpdFieldSolver::SpdFieldSolver(const SpMat& a, const GridSpec& g, double tol)
    : a_(a), g_(g), tol_(tol), ldlt_(std::make_shared<Eigen::SimplicialLDLT<SpMat>>()) {
  ldlt_->compute(a_);
  if (ldlt_->info() != Eigen::Success) throw SolveError("sparse factorization failed", -1.0);
  // Frobenius norm, an upper bound of the spectral norm
  anorm_ = a_.norm();
}

PlateField SpdFieldSolver::solve(const PlateField& rhs, double* rel_residual) const {
  const Eigen::VectorXd b = restrict_interior(rhs, g_);
  Eigen::VectorXd x = ldlt_->solve(b);
  Eigen::VectorXd r = b - a_ * x;
  // normwise backward error ||r|| / (||A|| ||x|| + ||b||); the plain ratio
  // ||r|| / ||b|| cannot reach 1e-12 on fine clamped biharmonic grids
  const double bn = b.norm();
  auto backward = [&] {
    const double d = anorm_ * x.norm() + bn;
    return d > 0.0 ? r.norm() / d : 0.0;
  };
  double rel = backward();
  for (int it = 0; it < 3 && rel > 0.1 * tol_; ++it) {
    x += ldlt_->solve(r);
    r = b - a_ * x;
    rel = backward();
  }
  if (rel_residual) *rel_residual = rel;
  if (!x.allFinite() || rel > tol_) throw SolveError("linear solve did not converge", rel);
  return extend_interior(x, g_);
}

PlateField helmholtz_malpha_solve(const PlateField& rhs, double alpha, const GridSpec& g) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  return SpdFieldSolver(malpha_matrix(g, alpha), g).solve(rhs);
}

}  // namespace pflutter
