#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace pflutter {

/// Nodal scalar field on the plate grid, stored row-major with x2 fastest:
/// value at node (i, j) lives at index i * ny + j.
using PlateField = Eigen::VectorXd;

/// Uniform tensor grid on [0, lx] x [0, ly], node counts include the boundary.
struct GridSpec {
  double lx = 1.0;
  double ly = 1.0;
  int nx = 17;
  int ny = 17;
  double hx = 1.0 / 16;
  double hy = 1.0 / 16;

  /// Validated constructor; throws std::invalid_argument.
  static GridSpec make(double lx, double ly, int nx, int ny);

  int size() const { return nx * ny; }
  int idx(int i, int j) const { return i * ny + j; }
  double x(int i) const { return i * hx; }
  double y(int j) const { return j * hy; }
  bool on_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
  }
  int n_interior() const { return (nx - 2) * (ny - 2); }
  bool same_as(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
  }
};

struct PlateState {
  double t = 0.0;
  PlateField u;
  PlateField v;  // u_t
};

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

PlateField zeros(const GridSpec& g);

/// Samples f(x1, x2) at every node.
template <class F>
PlateField sample(const GridSpec& g, F&& f) {
  PlateField out(g.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) out[g.idx(i, j)] = f(g.x(i), g.y(j));
  return out;
}

bool is_clamped(const PlateField& f, const GridSpec& g);
bool all_finite(const PlateField& f);
void zero_boundary(PlateField& f, const GridSpec& g);
void check_field(const PlateField& f, const GridSpec& g);

/// 5-point Laplacian on interior nodes; boundary ring of the output is zero.
PlateField laplacian(const PlateField& f, const GridSpec& g);

/// Laplacian of a clamped field evaluated on every node, boundary values
/// taken from the ghost reflection u(ghost) = u(mirror).
PlateField laplacian_clamped_ext(const PlateField& f, const GridSpec& g);

/// 13-point clamped biharmonic. Throws GridError when f is not clamped.
PlateField biharmonic_clamped(const PlateField& f, const GridSpec& g);

struct SecondDerivs {
  PlateField d11, d12, d22;
};
struct FirstDerivs {
  PlateField d1, d2;
};

/// Centered second derivatives on all nodes. With clamped = true the ghost
/// rule closes the boundary stencils, otherwise one-sided formulas are used.
SecondDerivs second_derivatives(const PlateField& f, const GridSpec& g, bool clamped);
FirstDerivs first_derivatives(const PlateField& f, const GridSpec& g, bool clamped);

/// Centered d/dx1 on interior nodes, zero on the boundary ring.
PlateField dx1(const PlateField& f, const GridSpec& g);

/// Trapezoid quadrature weight of node (i, j).
double trapezoid_weight(const GridSpec& g, int i, int j);

double inner_l2(const PlateField& a, const PlateField& b, const GridSpec& g);
double norm_l2(const PlateField& f, const GridSpec& g);
/// ||grad f||^2 from edge differences; equals <-lap_h f, f> for zero-boundary f.
double grad_sq(const PlateField& f, const GridSpec& g);
/// ||f||_{L2_alpha} = sqrt(||f||^2 + alpha ||grad f||^2).
double norm_l2alpha(const PlateField& f, double alpha, const GridSpec& g);
/// <a, b> + alpha <grad a, grad b>.
double inner_l2alpha(const PlateField& a, const PlateField& b, double alpha, const GridSpec& g);
/// ||lap_h f||; clamped fields use the ghost-extended Laplacian so that
/// seminorm_h2(f)^2 == <biharmonic_clamped(f), f> exactly.
double seminorm_h2(const PlateField& f, const GridSpec& g);
/// H1 seminorm ||grad f||.
double seminorm_h1(const PlateField& f, const GridSpec& g);

/// Bilinear interpolation inside the closed rectangle, exactly 0 outside.
double sample_bilinear(const PlateField& f, const GridSpec& g, double x1, double x2);

}  // namespace pflutter
