#pragma once

#include "pflutter/grid.hpp"

#include <array>
#include <deque>
#include <vector>

namespace pflutter {

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

struct QuadratureSpec {
  int n_theta = 32;
  int n_s = 64;
  void validate() const;
};

struct AeroConfig {
  double U = 0.0;
  double t_star = 0.0;
  QuadratureSpec quad;
};

/// (x1 - (U + sin th) s, x2 - s cos th).
Point2 characteristic_point(Point2 x, double U, double theta, double s);

/// Exit time of s -> characteristic_point(x, U, theta, s) from the closed rectangle.
double ray_exit_time(Point2 x, double U, double theta, const GridSpec& g);

/// Sup over x in the rectangle and theta of the exit time, times (1 + 1e-6).
/// Throws std::invalid_argument unless 0 <= U < 1.
double escape_time(const GridSpec& g, double U);

AeroConfig make_aero_config(const GridSpec& g, double U, QuadratureSpec quad);

/// Plate snapshot with cached second derivatives. The cache is stored as
/// (nx+1) x (ny+1) interleaved triples (d11, d12, d22) with a zero pad row
/// and column, which keeps the shifted bilinear sweeps branch free.
struct Snapshot {
  double t = 0.0;
  PlateField u;
  std::vector<double> dpad;
};

Snapshot make_snapshot(double t, const PlateField& u, const GridSpec& g);

class HistoryBuffer {
 public:
  HistoryBuffer(const GridSpec& g, double dt_hist, double t_star);

  /// Appends u at time t; t must equal newest + dt_hist unless the buffer is
  /// empty. Evicts snapshots older than t - t_star - 2 dt_hist.
  void push(double t, const PlateField& u);

  /// Fills the buffer with a constant field on [t0 - t_star - 2 dt, t0].
  void fill_constant(double t0, const PlateField& u);

  bool empty() const { return snaps_.empty(); }
  int size() const { return static_cast<int>(snaps_.size()); }
  double span() const { return empty() ? 0.0 : snaps_.back().t - snaps_.front().t; }
  double dt_hist() const { return dt_; }
  double t_star() const { return t_star_; }
  const GridSpec& grid() const { return g_; }
  const Snapshot& newest() const { return snaps_.back(); }
  const Snapshot& oldest() const { return snaps_.front(); }
  /// lag 0 is the newest snapshot.
  const Snapshot& lag(int k) const { return snaps_[snaps_.size() - 1 - k]; }
  const Snapshot& at(int k) const { return snaps_[k]; }
  bool covers(double window) const;

  /// Linear time interpolation of u at time t inside the buffer.
  PlateField u_at(double t) const;

 private:
  GridSpec g_;
  double dt_;
  double t_star_;
  std::deque<Snapshot> snaps_;
};

class HistoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Delay potential q(u^t) at the newest buffer time.
PlateField q_eval(const HistoryBuffer& h, const AeroConfig& cfg);

/// q for the time-constant history u.
PlateField q_static(const PlateField& u, const AeroConfig& cfg, const GridSpec& g);

}  // namespace pflutter
