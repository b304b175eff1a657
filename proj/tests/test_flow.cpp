#include "pflutter/flow.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace pflutter;

namespace {

double W(double x, double y) {
  const double a = x * (1 - x), b = y * (1 - y);
  return 256.0 * a * a * b * b * (1 + 0.5 * x);
}
double tf(double t) { return std::sin(2 * t) + 0.3 * std::cos(3 * t); }

// oscillating history ending at T, long enough for t_star
HistoryBuffer oscillating(const GridSpec& g, double U, double dt, double T) {
  const double ts = escape_time(g, U) + 0.2;
  HistoryBuffer h(g, dt, ts);
  const int n = static_cast<int>(std::ceil((ts + 3 * dt) / dt));
  for (int k = n; k >= 0; --k) {
    const double t = T - k * dt;
    h.push(t, sample(g, [&](double x, double y) { return 0.01 * W(x, y) * tf(t); }));
  }
  return h;
}

FlowSampleSet at(const FlowHistory& fh, Point3 p, double t, double U, double ts, QuadratureSpec q) {
  FlowSampleSet s;
  s.t = t;
  s.points = {p};
  reconstruct(fh, s, U, ts, q);
  return s;
}

}  // namespace

TEST(Flow, DerivativesMatchFiniteDifferences) {
  const double U = 0.5, dt = 0.01, t = 2.9, e = 1e-3;
  const GridSpec g = GridSpec::make(1, 1, 33, 33);
  const HistoryBuffer h = oscillating(g, U, dt, 3.0);
  const FlowHistory fh(h);
  const double ts = escape_time(g, U);
  const QuadratureSpec q{64, 256};
  // quadrature error is absolute, so tolerances use one scale for all points
  const double scale = 1e-2;
  for (Point3 p : {Point3{0.4, 0.5, 0.3}, Point3{0.7, 0.3, 0.1}, Point3{0.5, 0.5, 0.8}, Point3{0.3, 0.6, 0.0}}) {
    const FlowSampleSet c = at(fh, p, t, U, ts, q);
    auto phi = [&](Point3 x, double tt) { return at(fh, x, tt, U, ts, q).phi[0]; };
    const double fdt = (phi(p, t + e) - phi(p, t - e)) / (2 * e);
    const double fd1 = (phi({p.x1 + e, p.x2, p.x3}, t) - phi({p.x1 - e, p.x2, p.x3}, t)) / (2 * e);
    const double fd2 = (phi({p.x1, p.x2 + e, p.x3}, t) - phi({p.x1, p.x2 - e, p.x3}, t)) / (2 * e);
    EXPECT_NEAR(c.phi_t[0], fdt, 0.01 * scale);
    EXPECT_NEAR(c.grad_phi[0][0], fd1, 0.01 * scale);
    EXPECT_NEAR(c.grad_phi[0][1], fd2, 0.01 * scale);
    if (p.x3 > 0.0) {
      const double fd3 = (phi({p.x1, p.x2, p.x3 + e}, t) - phi({p.x1, p.x2, p.x3 - e}, t)) / (2 * e);
      EXPECT_NEAR(c.grad_phi[0][2], fd3, 0.01 * scale);
    }
  }
}

// time-constant history: phi = -(1/2pi) int int U u_1 along the retarded
// characteristics, evaluated here straight from the analytic field
TEST(Flow, StationaryPotentialFormula) {
  const double U = 0.4, dt = 0.02;
  const GridSpec g = GridSpec::make(1, 1, 33, 33);
  const double ts = escape_time(g, U);
  HistoryBuffer h(g, dt, ts);
  const PlateField u = sample(g, [](double x, double y) { return 0.01 * W(x, y); });
  h.fill_constant(3.0, u);
  const FlowHistory fh(h);
  auto u1 = [](double x, double y) {
    if (x < 0 || x > 1 || y < 0 || y > 1) return 0.0;
    const double e = 1e-6;
    return 0.01 * (W(x + e, y) - W(x - e, y)) / (2 * e);
  };
  for (Point3 p : {Point3{0.5, 0.5, 0.0}, Point3{0.3, 0.7, 0.0}, Point3{0.6, 0.4, 0.25}}) {
    const int nth = 256, ns = 4000;
    double acc = 0.0;
    const double s0 = p.x3, s1 = ts;
    for (int m = 0; m < nth; ++m) {
      const double th = 2 * std::numbers::pi * m / nth;
      double line = 0.0;
      for (int k = 0; k <= ns; ++k) {
        const double s = s0 + (s1 - s0) * k / ns;
        const double r = std::sqrt(std::max(0.0, s * s - p.x3 * p.x3));
        const double w = (k == 0 || k == ns) ? 0.5 : 1.0;
        line += w * U * u1(p.x1 - U * s + r * std::sin(th), p.x2 - r * std::cos(th));
      }
      acc += line * (s1 - s0) / ns;
    }
    const double oracle = -acc / nth;
    const FlowSampleSet c = at(fh, p, 3.0, U, ts, {64, 512});
    EXPECT_NEAR(c.phi[0], oracle, 0.02 * std::abs(oracle)) << p.x1 << "," << p.x2 << "," << p.x3;
    EXPECT_LT(std::abs(c.phi_t[0]), 1e-3 * std::abs(c.phi[0]) + 1e-12);
  }
}

TEST(Flow, CausalityAndMemoryCutoff) {
  const double U = 0.3, dt = 0.01;
  const GridSpec g = GridSpec::make(1, 1, 17, 17);
  const double ts = escape_time(g, U);
  HistoryBuffer h(g, dt, ts);
  h.fill_constant(0.0, zeros(g));
  for (int k = 1; k <= 30; ++k) {
    const double t = k * dt;
    h.push(t, sample(g, [&](double x, double y) { return 0.01 * W(x, y) * std::sin(5 * t); }));
  }
  const FlowHistory fh(h);
  FlowSampleSet s = box_samples({-0.5, 1.5, -0.5, 1.5, 0.0, 2.0}, 7, 7, 21, 0.3);
  reconstruct(fh, s, U, ts, {16, 32});
  int zeros_checked = 0, nonzero = 0;
  for (size_t k = 0; k < s.points.size(); ++k) {
    if (s.points[k].x3 > s.t) {
      EXPECT_EQ(s.phi[k], 0.0);
      EXPECT_EQ(s.phi_t[k], 0.0);
      for (double gk : s.grad_phi[k]) EXPECT_EQ(gk, 0.0);
      ++zeros_checked;
    } else if (s.phi[k] != 0.0) {
      ++nonzero;
    }
  }
  EXPECT_GT(zeros_checked, 0);
  EXPECT_GT(nonzero, 0);
}

TEST(Flow, Errors) {
  const GridSpec g = GridSpec::make(1, 1, 17, 17);
  const HistoryBuffer h = oscillating(g, 0.5, 0.02, 3.0);
  const FlowHistory fh(h);
  EXPECT_THROW(u_dagger(fh, {0.5, 0.5, 0.3}, 2.9, 0.2, 0.0, 0.5, Deriv::U), FlowError);
  FlowSampleSet s = box_samples({0, 1, 0, 1, 0, 0.1}, 2, 2, 2, 10.0);
  EXPECT_THROW(reconstruct(fh, s, 0.5, escape_time(g, 0.5), {16, 32}), FlowError);
  EXPECT_THROW(box_samples({0, 1, 0, 1, -0.1, 0.1}, 2, 2, 2, 1.0), FlowError);
}

TEST(Flow, TraceIdentityConverges) {
  const double U = 0.5;
  double prev = 1e300;
  for (auto [n, nt, ns, dt] : {std::tuple{17, 16, 64, 0.02}, std::tuple{33, 32, 128, 0.01}}) {
    const GridSpec g = GridSpec::make(1, 1, n, n);
    const HistoryBuffer h = oscillating(g, U, dt, 3.0);
    const TraceCheck tc = trace_material_derivative(h, make_aero_config(g, U, {nt, ns}));
    EXPECT_LT(tc.rel_residual, prev);
    prev = tc.rel_residual;
  }
  EXPECT_LT(prev, 3e-2);
}
