#pragma once
// Shared test helpers: a hand-rolled generator and dense reference operators
// written independently of the library stencils.

#include "pflutter/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>

namespace testsupport {

/// splitmix64; deterministic and independent of <random>.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform(double a = 0.0, double b = 1.0) {
    return a + (b - a) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

 private:
  std::uint64_t s_;
};

/// Smooth clamped field: window x^2 (1-x)^2 y^2 (1-y)^2 times a random
/// trigonometric polynomial. Returns analytic samples (no discrete ops).
struct SmoothClamped {
  double c[3][3];
  double lx = 1.0, ly = 1.0;
  SmoothClamped(Gen& g, double lx_ = 1.0, double ly_ = 1.0) : lx(lx_), ly(ly_) {
    for (auto& r : c)
      for (double& x : r) x = g.uniform(-1.0, 1.0);
  }
  double operator()(double x, double y) const {
    const double a = x / lx, b = y / ly;
    const double w = 256.0 * a * a * (1 - a) * (1 - a) * b * b * (1 - b) * (1 - b);
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += c[i][j] * std::cos(i * std::numbers::pi * a) * std::cos(j * 2.0 * b);
    return w * s;
  }
  pflutter::PlateField sample(const pflutter::GridSpec& g) const {
    pflutter::PlateField f = pflutter::sample(g, *this);
    pflutter::zero_boundary(f, g);
    return f;
  }
};

/// Dense clamped biharmonic on interior unknowns, built node by node from
/// the ghost rule: Laplacian on every node with mirror ghosts, then the
/// interior Laplacian of that.
inline Eigen::MatrixXd dense_biharmonic(const pflutter::GridSpec& g) {
  const int mx = g.nx - 2, my = g.ny - 2, n = mx * my;
  Eigen::MatrixXd K(n, n);
  for (int col = 0; col < n; ++col) {
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(g.nx, g.ny);
    u(col / my + 1, col % my + 1) = 1.0;
    auto val = [&](int i, int j) {
      if (i < 0) i = -i;
      if (j < 0) j = -j;
      if (i > g.nx - 1) i = 2 * (g.nx - 1) - i;
      if (j > g.ny - 1) j = 2 * (g.ny - 1) - j;
      return u(i, j);
    };
    Eigen::MatrixXd lap(g.nx, g.ny);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j)
        lap(i, j) = (val(i + 1, j) - 2 * val(i, j) + val(i - 1, j)) / (g.hx * g.hx) +
                    (val(i, j + 1) - 2 * val(i, j) + val(i, j - 1)) / (g.hy * g.hy);
    for (int r = 0; r < n; ++r) {
      const int i = r / my + 1, j = r % my + 1;
      K(r, col) = (lap(i + 1, j) - 2 * lap(i, j) + lap(i - 1, j)) / (g.hx * g.hx) +
                  (lap(i, j + 1) - 2 * lap(i, j) + lap(i, j - 1)) / (g.hy * g.hy);
    }
  }
  return K;
}

inline double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace testsupport
