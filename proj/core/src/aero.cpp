#include "pflutter/aero.hpp"

#include "pflutter/parallel.hpp"
#include "pflutter/vonkarman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pflutter {

void QuadratureSpec::validate() const {
  if (n_theta < 8 || n_theta % 2 != 0)
    throw std::invalid_argument("quad.n_theta must be an even integer >= 8");
  if (n_s < 16) throw std::invalid_argument("quad.n_s must be >= 16");
}

Point2 characteristic_point(Point2 x, double U, double theta, double s) {
  return {x.x1 - (U + std::sin(theta)) * s, x.x2 - s * std::cos(theta)};
}

double ray_exit_time(Point2 x, double U, double theta, const GridSpec& g) {
  if (x.x1 < 0.0 || x.x1 > g.lx || x.x2 < 0.0 || x.x2 > g.ly) return 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  const double vx = -(U + std::sin(theta)), vy = -std::cos(theta);
  const double tx = vx < 0.0 ? x.x1 / -vx : (vx > 0.0 ? (g.lx - x.x1) / vx : inf);
  const double ty = vy < 0.0 ? x.x2 / -vy : (vy > 0.0 ? (g.ly - x.x2) / vy : inf);
  return std::min(tx, ty);
}

namespace {

// Sup over starting points of the exit time for one direction; the
// supremum sits at the corner opposite the velocity.
double sup_exit(double U, double theta, const GridSpec& g) {
  const double vx = -(U + std::sin(theta)), vy = -std::cos(theta);
  const Point2 corner{vx < 0.0 ? g.lx : 0.0, vy < 0.0 ? g.ly : 0.0};
  return ray_exit_time(corner, U, theta, g);
}

}  // namespace

double escape_time(const GridSpec& g, double U) {
  if (!(U >= 0.0 && U < 1.0))
    throw std::invalid_argument("escape_time requires 0 <= U < 1 (subsonic)");
  const int n = 8192;
  const double two_pi = 2.0 * std::numbers::pi;
  double best = 0.0, best_th = 0.0;
  for (int m = 0; m < n; ++m) {
    const double th = two_pi * m / n;
    const double e = sup_exit(U, th, g);
    if (e > best) {
      best = e;
      best_th = th;
    }
  }
  // golden-section refinement around the best sample
  double a = best_th - two_pi / n, b = best_th + two_pi / n;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = sup_exit(U, c, g), fd = sup_exit(U, d, g);
  for (int it = 0; it < 100; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = sup_exit(U, c, g);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = sup_exit(U, d, g);
    }
  }
  best = std::max({best, fc, fd});
  return best * (1.0 + 1e-6);
}

AeroConfig make_aero_config(const GridSpec& g, double U, QuadratureSpec quad) {
  quad.validate();
  return {U, escape_time(g, U), quad};
}

Snapshot make_snapshot(double t, const PlateField& u, const GridSpec& g) {
  Snapshot s;
  s.t = t;
  s.u = u;
  const SecondDerivs d = auto_second_derivatives(u, g);
  s.dpad.assign(static_cast<size_t>(g.nx + 1) * (g.ny + 1) * 3, 0.0);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const size_t p = (static_cast<size_t>(i) * (g.ny + 1) + j) * 3;
      const int k = g.idx(i, j);
      s.dpad[p] = d.d11[k];
      s.dpad[p + 1] = d.d12[k];
      s.dpad[p + 2] = d.d22[k];
    }
  return s;
}

HistoryBuffer::HistoryBuffer(const GridSpec& g, double dt_hist, double t_star)
    : g_(g), dt_(dt_hist), t_star_(t_star) {
  if (!(dt_hist > 0.0)) throw std::invalid_argument("dt_hist must be positive");
  if (!(t_star > 0.0) || !std::isfinite(t_star))
    throw std::invalid_argument("t_star must be positive and finite");
}

void HistoryBuffer::push(double t, const PlateField& u) {
  check_field(u, g_);
  if (!snaps_.empty()) {
    const double expect = snaps_.back().t + dt_;
    if (std::abs(t - expect) > 1e-9 * std::max(1.0, std::abs(t)))
      throw HistoryError("non-uniform history push");
  }
  snaps_.push_back(make_snapshot(t, u, g_));
  const double cutoff = t - t_star_ - 2.0 * dt_;
  while (snaps_.size() > 1 && snaps_.front().t < cutoff - 1e-9 * dt_) snaps_.pop_front();
}

void HistoryBuffer::fill_constant(double t0, const PlateField& u) {
  snaps_.clear();
  const int m = static_cast<int>(std::floor(t_star_ / dt_ + 2.0 + 1e-9));
  Snapshot base = make_snapshot(t0, u, g_);
  for (int k = m; k >= 0; --k) {
    Snapshot s = base;
    s.t = t0 - k * dt_;
    snaps_.push_back(std::move(s));
  }
}

bool HistoryBuffer::covers(double window) const {
  return !snaps_.empty() && span() >= window - 1e-9 * std::max(1.0, window);
}

PlateField HistoryBuffer::u_at(double t) const {
  if (snaps_.empty()) throw HistoryError("empty history");
  const double tau = (snaps_.back().t - t) / dt_;
  if (tau < -1e-9 || tau > (size() - 1) + 1e-9) throw HistoryError("time outside history buffer");
  int k0 = static_cast<int>(std::floor(tau + 1e-9));
  k0 = std::clamp(k0, 0, size() - 1);
  const double lam = std::max(0.0, tau - k0);
  if (lam < 1e-12 || k0 + 1 >= size()) return lag(k0).u;
  return (1.0 - lam) * lag(k0).u + lam * lag(k0 + 1).u;
}

namespace {

struct Level {
  const double* p = nullptr;
  double w = 0.0;
};

inline void split(double a, int& i0, double& fr) {
  const double r = std::nearbyint(a);
  if (std::abs(a - r) < 1e-10) a = r;
  i0 = static_cast<int>(std::floor(a));
  fr = a - i0;
}

// out(x) += weight * sum_levels w_l * [c . D](x + shift), bilinear, zero outside.
void accumulate_shift(double* out, const GridSpec& g, double sx, double sy, double c11,
                      double c12, double c22, const Level* levels, int n_levels, double weight) {
  int I0, J0;
  double fa, fb;
  split(sx / g.hx, I0, fa);
  split(sy / g.hy, J0, fb);
  const int i_lo = std::max(0, -I0);
  const int i_hi = std::min(g.nx - 1, (fa > 0.0 ? g.nx - 2 : g.nx - 1) - I0);
  const int j_lo = std::max(0, -J0);
  const int j_hi = std::min(g.ny - 1, (fb > 0.0 ? g.ny - 2 : g.ny - 1) - J0);
  if (i_lo > i_hi || j_lo > j_hi) return;
  const double w00 = (1.0 - fa) * (1.0 - fb), w10 = fa * (1.0 - fb);
  const double w01 = (1.0 - fa) * fb, w11 = fa * fb;
  const size_t rs = static_cast<size_t>(g.ny + 1) * 3;
  for (int l = 0; l < n_levels; ++l) {
    const double lw = weight * levels[l].w;
    for (int i = i_lo; i <= i_hi; ++i) {
      const double* r0 = levels[l].p + (static_cast<size_t>(i + I0) * (g.ny + 1) + J0) * 3;
      const double* r1 = r0 + rs;
      double* o = out + static_cast<size_t>(i) * g.ny;
      for (int j = j_lo; j <= j_hi; ++j) {
        const double* a = r0 + 3 * j;
        const double* b = r1 + 3 * j;
        const double v11 = w00 * a[0] + w01 * a[3] + w10 * b[0] + w11 * b[3];
        const double v12 = w00 * a[1] + w01 * a[4] + w10 * b[1] + w11 * b[4];
        const double v22 = w00 * a[2] + w01 * a[5] + w10 * b[2] + w11 * b[5];
        o[j] += lw * (c11 * v11 + c12 * v12 + c22 * v22);
      }
    }
  }
}

// levels_at(s, out) fills up to two time levels for lag s and returns the count.
template <class LevelsAt>
PlateField q_kernel(const GridSpec& g, const AeroConfig& cfg, LevelsAt&& levels_at) {
  const int nth = cfg.quad.n_theta, ns = cfg.quad.n_s;
  const double ds = cfg.t_star / (ns - 1);
  constexpr int kBlock = 4;
  const int nblocks = (nth + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> partial(nblocks);
  parallel_for(nblocks, [&](int b) {
    std::vector<double>& acc = partial[b];
    acc.assign(g.size(), 0.0);
    for (int m = b * kBlock; m < std::min(nth, (b + 1) * kBlock); ++m) {
      const double th = 2.0 * std::numbers::pi * m / nth;
      const double st = std::sin(th), ct = std::cos(th);
      for (int l = 0; l < ns; ++l) {
        const double s = l * ds;
        const double ws = (l == 0 || l == ns - 1) ? 0.5 * ds : ds;
        Level lv[2];
        const int nl = levels_at(s, lv);
        accumulate_shift(acc.data(), g, -(cfg.U + st) * s, -ct * s, st * st, 2.0 * st * ct,
                         ct * ct, lv, nl, ws);
      }
    }
  });
  PlateField q = zeros(g);
  for (int b = 0; b < nblocks; ++b)
    for (int k = 0; k < g.size(); ++k) q[k] += partial[b][k];
  q *= 1.0 / nth;  // (1/2pi) * (2pi/n_theta)
  zero_boundary(q, g);
  return q;
}

}  // namespace

PlateField q_eval(const HistoryBuffer& h, const AeroConfig& cfg) {
  const GridSpec& g = h.grid();
  if (!h.covers(cfg.t_star)) throw HistoryError("history span shorter than t_star");
  const double dt = h.dt_hist();
  const int n = h.size();
  return q_kernel(g, cfg, [&](double s, Level* lv) {
    double tau = s / dt;
    const double r = std::nearbyint(tau);
    if (std::abs(tau - r) < 1e-9) tau = r;
    int k0 = static_cast<int>(std::floor(tau));
    double lam = tau - k0;
    if (k0 >= n - 1) {  // within rounding of the oldest snapshot
      k0 = n - 1;
      lam = 0.0;
    }
    lv[0] = {h.lag(k0).dpad.data(), 1.0 - lam};
    if (lam == 0.0) return 1;
    lv[1] = {h.lag(k0 + 1).dpad.data(), lam};
    return 2;
  });
}

PlateField q_static(const PlateField& u, const AeroConfig& cfg, const GridSpec& g) {
  check_field(u, g);
  const Snapshot snap = make_snapshot(0.0, u, g);
  return q_kernel(g, cfg, [&](double, Level* lv) {
    lv[0] = {snap.dpad.data(), 1.0};
    return 1;
  });
}

}  // namespace pflutter
