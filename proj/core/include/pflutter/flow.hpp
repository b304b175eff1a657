#pragma once

#include "pflutter/aero.hpp"
#include "pflutter/grid.hpp"

#include <array>
#include <vector>

namespace pflutter {

struct Point3 {
  double x1 = 0.0, x2 = 0.0, x3 = 0.0;
};

/// Plate-history fields needed by the flow formulas, one set per snapshot.
/// u_t comes from second-order differences of the snapshots in time.
enum class Deriv { U, Ut, U1, U2, U11, U12, U22, Ut1, Ut2 };

class FlowHistory {
 public:
  explicit FlowHistory(const HistoryBuffer& h);

  const GridSpec& grid() const { return g_; }
  double t_newest() const { return t_.back(); }
  double t_oldest() const { return t_.front(); }
  double dt() const { return dt_; }
  /// Field d at snapshot k (k = 0 oldest).
  const PlateField& field(Deriv d, int k) const { return f_[k][static_cast<int>(d)]; }
  /// Bilinear in space, linear in time, zero outside the closed rectangle.
  double eval(Deriv d, double x1, double x2, double t) const;
  /// Whole field at time t (linear in time).
  PlateField field_at(Deriv d, double t) const;

 private:
  GridSpec g_;
  double dt_;
  std::vector<double> t_;
  std::vector<std::array<PlateField, 9>> f_;
};

class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// [u]_ext field d at (x1 - U s + r sin th, x2 - r cos th, t - s), r = sqrt(s^2 - x3^2).
double u_dagger(const FlowHistory& fh, Point3 x, double t, double s, double theta, double U,
                Deriv d);

struct FlowSampleSet {
  double t = 0.0;
  std::vector<Point3> points;
  std::vector<double> phi, phi_t;
  std::vector<std::array<double, 3>> grad_phi;
  /// Tensor layout when built by box_samples: index (i * ny + j) * nz + l.
  int nx = 0, ny = 0, nz = 0;
  std::array<double, 6> box{};
};

/// Tensor grid of sample points on [x0,x1] x [y0,y1] x [z0,z1].
FlowSampleSet box_samples(const std::array<double, 6>& box, int nx, int ny, int nz, double t);

/// Fills phi, phi_t and grad phi at every sample point. Points with x3 > t
/// (and x3 >= t_star, where the s-range is empty) get exact zeros. For
/// x3 > 0 the s-integrals use s = x3 cosh(sigma).
void reconstruct(const FlowHistory& fh, FlowSampleSet& samples, double U, double t_star,
                 const QuadratureSpec& quad);

struct TraceCheck {
  PlateField lhs, rhs;
  double rel_residual = 0.0;
};

/// (d_t + U d_x1) phi at x3 = 0 from the reconstruction versus
/// -(u_t + U u_x1) - q at the newest history time.
TraceCheck trace_material_derivative(const HistoryBuffer& h, const AeroConfig& cfg);

struct FlowEnergyBox {
  double E_fl = 0.0;
  double E_int = 0.0;
};

/// Box-truncated flow and interaction energies by trapezoid quadrature.
/// E_int uses the z = 0 layer and is zero when the box does not touch the plate.
FlowEnergyBox flow_energy_box(const FlowSampleSet& s, const PlateState& plate, double U,
                              const GridSpec& g);

}  // namespace pflutter
