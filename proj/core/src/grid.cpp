#include "pflutter/grid.hpp"

#include <cmath>

namespace pflutter {

GridSpec GridSpec::make(double lx, double ly, int nx, int ny) {
  if (nx < 5 || ny < 5) throw GridError("grid too small: nx and ny must be >= 5");
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
    throw GridError("grid lengths must be positive and finite");
  GridSpec g;
  g.lx = lx;
  g.ly = ly;
  g.nx = nx;
  g.ny = ny;
  g.hx = lx / (nx - 1);
  g.hy = ly / (ny - 1);
  return g;
}

PlateField zeros(const GridSpec& g) { return PlateField::Zero(g.size()); }

bool is_clamped(const PlateField& f, const GridSpec& g) {
  if (f.size() != g.size()) return false;
  for (int i = 0; i < g.nx; ++i) {
    if (f[g.idx(i, 0)] != 0.0 || f[g.idx(i, g.ny - 1)] != 0.0) return false;
  }
  for (int j = 0; j < g.ny; ++j) {
    if (f[g.idx(0, j)] != 0.0 || f[g.idx(g.nx - 1, j)] != 0.0) return false;
  }
  return true;
}

bool all_finite(const PlateField& f) { return f.allFinite(); }

void zero_boundary(PlateField& f, const GridSpec& g) {
  for (int i = 0; i < g.nx; ++i) {
    f[g.idx(i, 0)] = 0.0;
    f[g.idx(i, g.ny - 1)] = 0.0;
  }
  for (int j = 0; j < g.ny; ++j) {
    f[g.idx(0, j)] = 0.0;
    f[g.idx(g.nx - 1, j)] = 0.0;
  }
}

void check_field(const PlateField& f, const GridSpec& g) {
  if (g.nx < 5 || g.ny < 5) throw GridError("grid too small: nx and ny must be >= 5");
  if (f.size() != g.size()) throw GridError("field size does not match grid");
}

PlateField laplacian(const PlateField& f, const GridSpec& g) {
  check_field(f, g);
  PlateField out = zeros(g);
  const double cx = 1.0 / (g.hx * g.hx), cy = 1.0 / (g.hy * g.hy);
  for (int i = 1; i < g.nx - 1; ++i) {
    for (int j = 1; j < g.ny - 1; ++j) {
      const int k = g.idx(i, j);
      out[k] = cx * (f[k + g.ny] + f[k - g.ny] - 2.0 * f[k]) +
               cy * (f[k + 1] + f[k - 1] - 2.0 * f[k]);
    }
  }
  return out;
}

PlateField laplacian_clamped_ext(const PlateField& f, const GridSpec& g) {
  check_field(f, g);
  if (!is_clamped(f, g)) throw GridError("clamped operator applied to a non-clamped field");
  PlateField out = laplacian(f, g);
  const double cx = 1.0 / (g.hx * g.hx), cy = 1.0 / (g.hy * g.hy);
  // ghost = mirror, boundary value zero: only the normal second difference survives
  for (int j = 1; j < g.ny - 1; ++j) {
    out[g.idx(0, j)] = 2.0 * cx * f[g.idx(1, j)];
    out[g.idx(g.nx - 1, j)] = 2.0 * cx * f[g.idx(g.nx - 2, j)];
  }
  for (int i = 1; i < g.nx - 1; ++i) {
    out[g.idx(i, 0)] = 2.0 * cy * f[g.idx(i, 1)];
    out[g.idx(i, g.ny - 1)] = 2.0 * cy * f[g.idx(i, g.ny - 2)];
  }
  return out;
}

PlateField biharmonic_clamped(const PlateField& f, const GridSpec& g) {
  return laplacian(laplacian_clamped_ext(f, g), g);
}

namespace {

// Second difference along one axis with one-sided closure at the ends.
double d2_axis(const PlateField& f, int k, int pos, int n, int stride, double h2) {
  if (pos == 0)
    return (2.0 * f[k] - 5.0 * f[k + stride] + 4.0 * f[k + 2 * stride] - f[k + 3 * stride]) / h2;
  if (pos == n - 1)
    return (2.0 * f[k] - 5.0 * f[k - stride] + 4.0 * f[k - 2 * stride] - f[k - 3 * stride]) / h2;
  return (f[k + stride] + f[k - stride] - 2.0 * f[k]) / h2;
}

double d1_axis(const PlateField& f, int k, int pos, int n, int stride, double h) {
  if (pos == 0) return (-3.0 * f[k] + 4.0 * f[k + stride] - f[k + 2 * stride]) / (2.0 * h);
  if (pos == n - 1) return (3.0 * f[k] - 4.0 * f[k - stride] + f[k - 2 * stride]) / (2.0 * h);
  return (f[k + stride] - f[k - stride]) / (2.0 * h);
}

}  // namespace

SecondDerivs second_derivatives(const PlateField& f, const GridSpec& g, bool clamped) {
  check_field(f, g);
  SecondDerivs d{zeros(g), zeros(g), zeros(g)};
  const double hx2 = g.hx * g.hx, hy2 = g.hy * g.hy, c12 = 1.0 / (4.0 * g.hx * g.hy);
  for (int i = 1; i < g.nx - 1; ++i) {
    for (int j = 1; j < g.ny - 1; ++j) {
      const int k = g.idx(i, j);
      d.d11[k] = (f[k + g.ny] + f[k - g.ny] - 2.0 * f[k]) / hx2;
      d.d22[k] = (f[k + 1] + f[k - 1] - 2.0 * f[k]) / hy2;
      d.d12[k] = c12 * (f[k + g.ny + 1] - f[k + g.ny - 1] - f[k - g.ny + 1] + f[k - g.ny - 1]);
    }
  }
  if (clamped) {
    if (!is_clamped(f, g)) throw GridError("clamped derivatives of a non-clamped field");
    // mixed and tangential derivatives vanish on the ring
    for (int j = 1; j < g.ny - 1; ++j) {
      d.d11[g.idx(0, j)] = 2.0 * f[g.idx(1, j)] / hx2;
      d.d11[g.idx(g.nx - 1, j)] = 2.0 * f[g.idx(g.nx - 2, j)] / hx2;
    }
    for (int i = 1; i < g.nx - 1; ++i) {
      d.d22[g.idx(i, 0)] = 2.0 * f[g.idx(i, 1)] / hy2;
      d.d22[g.idx(i, g.ny - 1)] = 2.0 * f[g.idx(i, g.ny - 2)] / hy2;
    }
    return d;
  }
  PlateField f1(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const int k = g.idx(i, j);
      f1[k] = d1_axis(f, k, i, g.nx, g.ny, g.hx);
    }
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (!g.on_boundary(i, j)) continue;
      const int k = g.idx(i, j);
      d.d11[k] = d2_axis(f, k, i, g.nx, g.ny, hx2);
      d.d22[k] = d2_axis(f, k, j, g.ny, 1, hy2);
      d.d12[k] = d1_axis(f1, k, j, g.ny, 1, g.hy);
    }
  }
  return d;
}

FirstDerivs first_derivatives(const PlateField& f, const GridSpec& g, bool clamped) {
  check_field(f, g);
  FirstDerivs d{zeros(g), zeros(g)};
  if (clamped && !is_clamped(f, g)) throw GridError("clamped derivatives of a non-clamped field");
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const bool b = g.on_boundary(i, j);
      if (clamped && b) continue;  // normal via mirror ghost, tangential of zero data
      const int k = g.idx(i, j);
      d.d1[k] = d1_axis(f, k, i, g.nx, g.ny, g.hx);
      d.d2[k] = d1_axis(f, k, j, g.ny, 1, g.hy);
    }
  }
  return d;
}

PlateField dx1(const PlateField& f, const GridSpec& g) {
  check_field(f, g);
  PlateField out = zeros(g);
  const double c = 1.0 / (2.0 * g.hx);
  for (int i = 1; i < g.nx - 1; ++i)
    for (int j = 1; j < g.ny - 1; ++j) {
      const int k = g.idx(i, j);
      out[k] = c * (f[k + g.ny] - f[k - g.ny]);
    }
  return out;
}

double trapezoid_weight(const GridSpec& g, int i, int j) {
  double w = g.hx * g.hy;
  if (i == 0 || i == g.nx - 1) w *= 0.5;
  if (j == 0 || j == g.ny - 1) w *= 0.5;
  return w;
}

double inner_l2(const PlateField& a, const PlateField& b, const GridSpec& g) {
  if (a.size() != g.size() || b.size() != g.size()) throw GridError("grid mismatch");
  double s = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    const double wi = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
    double row = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      const double wj = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
      row += wj * a[g.idx(i, j)] * b[g.idx(i, j)];
    }
    s += wi * row;
  }
  return s * g.hx * g.hy;
}

double norm_l2(const PlateField& f, const GridSpec& g) { return std::sqrt(inner_l2(f, f, g)); }

namespace {

double grad_inner(const PlateField& a, const PlateField& b, const GridSpec& g) {
  if (a.size() != g.size() || b.size() != g.size()) throw GridError("grid mismatch");
  double s = 0.0;
  // x1-edges, trapezoid weight across x2
  for (int j = 0; j < g.ny; ++j) {
    const double wj = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    for (int i = 0; i + 1 < g.nx; ++i) {
      const int k = g.idx(i, j), kp = g.idx(i + 1, j);
      s += wj * (a[kp] - a[k]) * (b[kp] - b[k]) * (g.hy / g.hx);
    }
  }
  for (int i = 0; i < g.nx; ++i) {
    const double wi = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
    for (int j = 0; j + 1 < g.ny; ++j) {
      const int k = g.idx(i, j);
      s += wi * (a[k + 1] - a[k]) * (b[k + 1] - b[k]) * (g.hx / g.hy);
    }
  }
  return s;
}

}  // namespace

double grad_sq(const PlateField& f, const GridSpec& g) { return grad_inner(f, f, g); }

double norm_l2alpha(const PlateField& f, double alpha, const GridSpec& g) {
  return std::sqrt(inner_l2(f, f, g) + alpha * grad_sq(f, g));
}

double inner_l2alpha(const PlateField& a, const PlateField& b, double alpha, const GridSpec& g) {
  return inner_l2(a, b, g) + alpha * grad_inner(a, b, g);
}

double seminorm_h2(const PlateField& f, const GridSpec& g) {
  if (is_clamped(f, g)) return norm_l2(laplacian_clamped_ext(f, g), g);
  return norm_l2(laplacian(f, g), g);
}

double seminorm_h1(const PlateField& f, const GridSpec& g) { return std::sqrt(grad_sq(f, g)); }

namespace {

// Cell index and fraction; snaps to a node when within rounding of it.
inline void locate(double x, double h, int n, int& i, double& fr) {
  double a = x / h;
  const double r = std::nearbyint(a);
  if (std::abs(a - r) < 1e-10) a = r;
  i = static_cast<int>(std::floor(a));
  if (i >= n - 1) i = n - 2;
  if (i < 0) i = 0;
  fr = a - i;
}

}  // namespace

double sample_bilinear(const PlateField& f, const GridSpec& g, double x1, double x2) {
  if (!(x1 >= 0.0 && x1 <= g.lx && x2 >= 0.0 && x2 <= g.ly)) return 0.0;
  int i, j;
  double fa, fb;
  locate(x1, g.hx, g.nx, i, fa);
  locate(x2, g.hy, g.ny, j, fb);
  const int k = g.idx(i, j);
  return (1.0 - fa) * (1.0 - fb) * f[k] + fa * (1.0 - fb) * f[k + g.ny] +
         (1.0 - fa) * fb * f[k + 1] + fa * fb * f[k + g.ny + 1];
}

}  // namespace pflutter
