#include "pflutter/flow.hpp"

#include "pflutter/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pflutter {

FlowHistory::FlowHistory(const HistoryBuffer& h) : g_(h.grid()), dt_(h.dt_hist()) {
  const int n = h.size();
  if (n < 3) throw FlowError("flow reconstruction needs at least three snapshots");
  t_.resize(n);
  f_.resize(n);
  for (int k = 0; k < n; ++k) {
    t_[k] = h.at(k).t;
    const PlateField& u = h.at(k).u;
    PlateField ut;
    if (k == 0)
      ut = (-3.0 * u + 4.0 * h.at(1).u - h.at(2).u) / (2.0 * dt_);
    else if (k == n - 1)
      ut = (3.0 * u - 4.0 * h.at(n - 2).u + h.at(n - 3).u) / (2.0 * dt_);
    else
      ut = (h.at(k + 1).u - h.at(k - 1).u) / (2.0 * dt_);
    const bool cl = is_clamped(u, g_);
    const FirstDerivs d1 = first_derivatives(u, g_, cl);
    const SecondDerivs d2 = second_derivatives(u, g_, cl);
    const FirstDerivs dt1 = first_derivatives(ut, g_, is_clamped(ut, g_));
    auto& a = f_[k];
    a[static_cast<int>(Deriv::U)] = u;
    a[static_cast<int>(Deriv::Ut)] = ut;
    a[static_cast<int>(Deriv::U1)] = d1.d1;
    a[static_cast<int>(Deriv::U2)] = d1.d2;
    a[static_cast<int>(Deriv::U11)] = d2.d11;
    a[static_cast<int>(Deriv::U12)] = d2.d12;
    a[static_cast<int>(Deriv::U22)] = d2.d22;
    a[static_cast<int>(Deriv::Ut1)] = dt1.d1;
    a[static_cast<int>(Deriv::Ut2)] = dt1.d2;
  }
}

namespace {

inline bool time_slot(const std::vector<double>& t, double dt, double tq, int& k, double& lam) {
  const double tau = (tq - t.front()) / dt;
  const int n = static_cast<int>(t.size());
  if (tau < -1e-9 || tau > (n - 1) + 1e-9) return false;
  k = std::clamp(static_cast<int>(std::floor(tau)), 0, n - 2);
  lam = std::clamp(tau - k, 0.0, 1.0);
  return true;
}

}  // namespace

double FlowHistory::eval(Deriv d, double x1, double x2, double t) const {
  int k;
  double lam;
  if (!time_slot(t_, dt_, t, k, lam)) throw FlowError("history underrun");
  const int c = static_cast<int>(d);
  const double a = sample_bilinear(f_[k][c], g_, x1, x2);
  if (lam == 0.0) return a;
  return (1.0 - lam) * a + lam * sample_bilinear(f_[k + 1][c], g_, x1, x2);
}

PlateField FlowHistory::field_at(Deriv d, double t) const {
  int k;
  double lam;
  if (!time_slot(t_, dt_, t, k, lam)) throw FlowError("history underrun");
  const int c = static_cast<int>(d);
  if (lam == 0.0) return f_[k][c];
  return (1.0 - lam) * f_[k][c] + lam * f_[k + 1][c];
}

double u_dagger(const FlowHistory& fh, Point3 x, double t, double s, double theta, double U,
                Deriv d) {
  if (s < x.x3) throw FlowError("u_dagger requires s >= x3");
  const double r = std::sqrt(std::max(0.0, s * s - x.x3 * x.x3));
  return fh.eval(d, x.x1 - U * s + r * std::sin(theta), x.x2 - r * std::cos(theta), t - s);
}

FlowSampleSet box_samples(const std::array<double, 6>& box, int nx, int ny, int nz, double t) {
  if (nx < 1 || ny < 1 || nz < 1) throw FlowError("box sample counts must be positive");
  if (box[4] < 0.0) throw FlowError("flow samples need x3 >= 0");
  FlowSampleSet s;
  s.t = t;
  s.nx = nx;
  s.ny = ny;
  s.nz = nz;
  s.box = box;
  auto coord = [](double a, double b, int n, int i) { return n == 1 ? a : a + (b - a) * i / (n - 1); };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int l = 0; l < nz; ++l)
        s.points.push_back({coord(box[0], box[1], nx, i), coord(box[2], box[3], ny, j),
                            coord(box[4], box[5], nz, l)});
  return s;
}

namespace {

struct PointResult {
  double phi = 0.0, phi_t = 0.0;
  std::array<double, 3> grad{0.0, 0.0, 0.0};
};

PointResult reconstruct_point(const FlowHistory& fh, Point3 x, double t, double U,
                              double t_star, const QuadratureSpec& quad) {
  PointResult res;
  if (x.x3 > t) return res;  // causality gate, before any quadrature
  if (x.x3 >= t_star) return res;
  const int nth = quad.n_theta, ns = quad.n_s;
  const double x3 = x.x3;
  const bool sub = x3 > 0.0;
  const double smax = sub ? std::acosh(t_star / x3) : t_star;  // sigma or s range
  const double dq = smax / (ns - 1);
  double phi = 0.0, g1 = 0.0, g2 = 0.0, g3 = 0.0, pt = 0.0;
  for (int l = 0; l < ns; ++l) {
    const double q = l * dq;
    const double wq = (l == 0 || l == ns - 1) ? 0.5 * dq : dq;
    const double s = sub ? x3 * std::cosh(q) : q;
    const double r = sub ? x3 * std::sinh(q) : q;
    const double jac = sub ? r : 1.0;        // ds
    const double w_sr = s;                   // (s/r) ds = s dsigma; at x3 = 0 it is 1 ds
    const double w_x3r = sub ? x3 : 0.0;     // (x3/r) ds
    const double cx = x.x1 - U * s, tq = t - s;
    double a_h = 0.0, a_h1 = 0.0, a_h2 = 0.0, a_dut = 0.0, a_dh = 0.0;
    for (int m = 0; m < nth; ++m) {
      const double th = 2.0 * std::numbers::pi * m / nth;
      const double st = std::sin(th), ct = std::cos(th);
      const double p1 = cx + r * st, p2 = x.x2 - r * ct;
      if (p1 < 0.0 || p1 > fh.grid().lx || p2 < 0.0 || p2 > fh.grid().ly) continue;
      const double ut = fh.eval(Deriv::Ut, p1, p2, tq);
      const double u1 = fh.eval(Deriv::U1, p1, p2, tq);
      const double ut1 = fh.eval(Deriv::Ut1, p1, p2, tq);
      const double ut2 = fh.eval(Deriv::Ut2, p1, p2, tq);
      const double u11 = fh.eval(Deriv::U11, p1, p2, tq);
      const double u12 = fh.eval(Deriv::U12, p1, p2, tq);
      const double h1 = ut1 + U * u11, h2 = ut2 + U * u12;
      a_h += ut + U * u1;
      a_h1 += h1;
      a_h2 += h2;
      a_dut += st * ut1 - ct * ut2;  // radial derivative along the dagger ray
      a_dh += st * h1 - ct * h2;
    }
    phi += wq * jac * a_h;
    g1 += wq * jac * a_h1;
    g2 += wq * jac * a_h2;
    pt += wq * (sub ? w_sr : 1.0) * a_dut;
    g3 += wq * w_x3r * a_dh;
  }
  const double inv = 1.0 / nth;  // (1/2pi) * (2pi/n_theta)
  // boundary terms of the phi_t formula at s = t_star and s = x3
  double ut_top = 0.0;
  {
    const double s = t_star, r = std::sqrt(std::max(0.0, s * s - x3 * x3));
    for (int m = 0; m < nth; ++m) {
      const double th = 2.0 * std::numbers::pi * m / nth;
      ut_top += fh.eval(Deriv::Ut, x.x1 - U * s + r * std::sin(th), x.x2 - r * std::cos(th), t - s);
    }
  }
  const double p1 = x.x1 - U * x3, tq = t - x3;
  const double ut_low = fh.eval(Deriv::Ut, p1, x.x2, tq);
  const double h_low = ut_low + U * fh.eval(Deriv::U1, p1, x.x2, tq);
  res.phi = -inv * phi;
  res.phi_t = inv * ut_top - ut_low - inv * pt;
  res.grad = {-inv * g1, -inv * g2, h_low + inv * g3};
  return res;
}

}  // namespace

void reconstruct(const FlowHistory& fh, FlowSampleSet& samples, double U, double t_star,
                 const QuadratureSpec& quad) {
  quad.validate();
  const double t = samples.t;
  if (t > fh.t_newest() + 1e-9 || t - t_star < fh.t_oldest() - 1e-9)
    throw FlowError("history does not cover [t - t_star, t]");
  const int n = static_cast<int>(samples.points.size());
  samples.phi.assign(n, 0.0);
  samples.phi_t.assign(n, 0.0);
  samples.grad_phi.assign(n, {0.0, 0.0, 0.0});
  parallel_for(n, [&](int i) {
    if (samples.points[i].x3 < 0.0) throw FlowError("flow samples need x3 >= 0");
    const PointResult r = reconstruct_point(fh, samples.points[i], t, U, t_star, quad);
    samples.phi[i] = r.phi;
    samples.phi_t[i] = r.phi_t;
    samples.grad_phi[i] = r.grad;
  });
}

TraceCheck trace_material_derivative(const HistoryBuffer& h, const AeroConfig& cfg) {
  if (!h.covers(cfg.t_star)) throw HistoryError("history span shorter than t_star");
  const GridSpec& g = h.grid();
  const FlowHistory fh(h);
  FlowSampleSet s;
  s.t = fh.t_newest();
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) s.points.push_back({g.x(i), g.y(j), 0.0});
  reconstruct(fh, s, cfg.U, cfg.t_star, cfg.quad);
  TraceCheck tc;
  tc.lhs = zeros(g);
  for (int k = 0; k < g.size(); ++k) tc.lhs[k] = s.phi_t[k] + cfg.U * s.grad_phi[k][0];
  zero_boundary(tc.lhs, g);
  const PlateField ut = fh.field_at(Deriv::Ut, s.t);
  const PlateField u1 = fh.field_at(Deriv::U1, s.t);
  tc.rhs = -(ut + cfg.U * u1) - q_eval(h, cfg);
  zero_boundary(tc.rhs, g);
  const double rn = norm_l2(tc.rhs, g);
  const double dn = norm_l2(tc.lhs - tc.rhs, g);
  tc.rel_residual = rn > 0.0 ? dn / rn : dn;
  return tc;
}

FlowEnergyBox flow_energy_box(const FlowSampleSet& s, const PlateState& plate, double U,
                              const GridSpec& g) {
  if (s.nx * s.ny * s.nz != static_cast<int>(s.points.size()) || s.nx < 2 || s.ny < 2)
    throw FlowError("flow_energy_box needs tensor-grid samples");
  const double dx = (s.box[1] - s.box[0]) / (s.nx - 1);
  const double dy = (s.box[3] - s.box[2]) / (s.ny - 1);
  const double dz = s.nz > 1 ? (s.box[5] - s.box[4]) / (s.nz - 1) : 0.0;
  auto w = [](int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };
  FlowEnergyBox e;
  const PlateField ux = first_derivatives(plate.u, g, is_clamped(plate.u, g)).d1;
  for (int i = 0; i < s.nx; ++i)
    for (int j = 0; j < s.ny; ++j)
      for (int l = 0; l < s.nz; ++l) {
        const int k = (i * s.ny + j) * s.nz + l;
        const auto& gr = s.grad_phi[k];
        const double dens = s.phi_t[k] * s.phi_t[k] + gr[0] * gr[0] + gr[1] * gr[1] +
                            gr[2] * gr[2] - U * U * gr[0] * gr[0];
        if (s.nz > 1) e.E_fl += 0.5 * dens * w(i, s.nx) * w(j, s.ny) * w(l, s.nz) * dx * dy * dz;
        if (l == 0 && s.box[4] == 0.0) {
          const Point3& p = s.points[k];
          e.E_int += 2.0 * U * s.phi[k] * sample_bilinear(ux, g, p.x1, p.x2) * w(i, s.nx) *
                     w(j, s.ny) * dx * dy;
        }
      }
  return e;
}

}  // namespace pflutter
