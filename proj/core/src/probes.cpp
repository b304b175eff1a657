#include "pflutter/probes.hpp"

#include "pflutter/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pflutter {

double ProbeReport::constant(const std::string& name) const {
  for (const auto& [k, v] : constants)
    if (k == name) return v;
  throw std::out_of_range("probe constant not found: " + name);
}

PairSeries difference_series(const RunResult& a, const RunResult& b, const GridSpec& g,
                             double alpha, Prehistory pre, double delta) {
  if (a.samples.size() != b.samples.size()) throw std::invalid_argument("runs sampled differently");
  if (a.aborted || b.aborted) throw std::runtime_error("probe run aborted: " + a.error + b.error);
  PairSeries s;
  s.t_star = a.t_star;
  for (size_t i = 0; i < a.samples.size(); ++i) {
    const PlateState& x = a.samples[i].state;
    const PlateState& y = b.samples[i].state;
    if (std::abs(x.t - y.t) > 1e-12) throw std::invalid_argument("runs sampled at different times");
    const PlateField zu = x.u - y.u, zv = x.v - y.v;
    const double vt = norm_l2alpha(zv, alpha, g);
    const double h2 = seminorm_h2(zu, g), h1 = seminorm_h1(zu, g);
    s.t.push_back(x.t);
    s.Ez.push_back(vt * vt + h2 * h2);
    s.h2sq.push_back(h2 * h2);
    const double lo = std::pow(h1, delta) * std::pow(h2, 1.0 - delta);
    s.low.push_back(lo * lo);
  }
  // constant prehistory repeats u0 on [-t*, 0); zero prehistory gives nothing
  s.pre_integral = pre == Prehistory::Constant && !s.h2sq.empty() ? s.t_star * s.h2sq[0] : 0.0;
  return s;
}

LipschitzFit fit_lipschitz(const PairSeries& s) {
  LipschitzFit f;
  if (s.Ez.empty()) return f;
  f.D0 = s.Ez[0] + s.pre_integral;
  if (f.D0 <= 0.0) return f;  // z == 0
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  for (size_t i = 0; i < s.t.size(); ++i) {
    const double r = s.Ez[i] / f.D0;
    if (r <= 0.0) continue;
    const double y = std::log(r);
    st += s.t[i];
    sy += y;
    stt += s.t[i] * s.t[i];
    sty += s.t[i] * y;
    ++n;
  }
  const double den = n * stt - st * st;
  const double slope = (n > 1 && den > 0.0) ? (n * sty - st * sy) / den : 0.0;
  f.a = std::max(0.0, slope);
  f.C = 0.0;
  for (size_t i = 0; i < s.t.size(); ++i)
    f.C = std::max(f.C, s.Ez[i] / (f.D0 * std::exp(f.a * s.t[i])));
  return f;
}

double lipschitz_ratio(const LipschitzFit& f, const PairSeries& s) {
  const double D0 = s.Ez.empty() ? 0.0 : s.Ez[0] + s.pre_integral;
  if (D0 <= 0.0) return 0.0;
  double r = 0.0;
  for (size_t i = 0; i < s.t.size(); ++i)
    r = std::max(r, s.Ez[i] / (f.C * std::exp(f.a * s.t[i]) * D0));
  return r;
}

namespace {

// trapezoid of y over [t0, t1] from samples, linear inside sample intervals
double integrate(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
  double acc = 0.0;
  auto at = [&](double tq) {
    const auto it = std::lower_bound(t.begin(), t.end(), tq);
    if (it == t.begin()) return y.front();
    if (it == t.end()) return y.back();
    const size_t k = it - t.begin();
    const double lam = (tq - t[k - 1]) / (t[k] - t[k - 1]);
    return (1.0 - lam) * y[k - 1] + lam * y[k];
  };
  double prev_t = t0, prev_y = at(t0);
  for (size_t k = 0; k < t.size(); ++k) {
    if (t[k] <= t0) continue;
    if (t[k] >= t1) break;
    acc += 0.5 * (t[k] - prev_t) * (y[k] + prev_y);
    prev_t = t[k];
    prev_y = y[k];
  }
  acc += 0.5 * (t1 - prev_t) * (at(t1) + prev_y);
  return acc;
}

}  // namespace

std::vector<QuasiWindow> quasi_windows(const PairSeries& s, double T) {
  std::vector<QuasiWindow> out;
  if (s.t.size() < 2) return out;
  const double ts = s.t_star, t_end = s.t.back();
  const double tol = 1e-9 * std::max(1.0, t_end);
  for (int j = 0;; ++j) {
    const double t0 = s.t.front() + 0.5 * ts * j;
    if (t0 + T > t_end + tol) break;
    QuasiWindow w;
    w.t0 = t0;
    auto ez_at = [&](double tq) {
      size_t k = std::lower_bound(s.t.begin(), s.t.end(), tq - tol) - s.t.begin();
      k = std::min(k, s.t.size() - 1);
      return s.Ez[k];
    };
    auto mem = [&](double tq) {
      // int_{tq - t*}^{tq} ||lap z||^2, the part before t = 0 from the prehistory
      const double a = tq - ts;
      double v = 0.0;
      if (a < s.t.front()) {
        v += s.pre_integral * (s.t.front() - a) / ts;
        v += integrate(s.t, s.h2sq, s.t.front(), tq);
      } else {
        v += integrate(s.t, s.h2sq, a, tq);
      }
      return v;
    };
    w.A = ez_at(t0) + mem(t0);
    w.lhs = ez_at(t0 + T) + mem(t0 + T);
    for (size_t k = 0; k < s.t.size(); ++k)
      if (s.t[k] >= t0 - tol && s.t[k] <= t0 + T + tol) w.S = std::max(w.S, s.low[k]);
    out.push_back(w);
  }
  return out;
}

QuasiFit fit_quasi(const std::vector<QuasiWindow>& w) {
  QuasiFit best;
  if (w.empty()) return best;
  double sa = 0.0, ss = 0.0;
  for (const auto& x : w) {
    sa += x.A;
    ss += x.S;
  }
  auto feasible = [&](double b, double c) {
    if (b < 0.0 || c < 0.0) return false;
    for (const auto& x : w)
      if (x.lhs > (b * x.A + c * x.S) * (1.0 + 1e-12) + 1e-300) return false;
    return true;
  };
  double best_obj = std::numeric_limits<double>::infinity();
  auto consider = [&](double b, double c) {
    if (!std::isfinite(b) || !std::isfinite(c) || !feasible(b, c)) return;
    const double obj = b * sa + c * ss;
    if (obj < best_obj) {
      best_obj = obj;
      best = {b, c};
    }
  };
  // vertices on the axes
  double bmax = 0.0, cmax = 0.0;
  bool b_ok = true, c_ok = true;
  for (const auto& x : w) {
    if (x.A > 0.0) bmax = std::max(bmax, x.lhs / x.A); else if (x.lhs > 0.0) b_ok = false;
    if (x.S > 0.0) cmax = std::max(cmax, x.lhs / x.S); else if (x.lhs > 0.0) c_ok = false;
  }
  if (b_ok) consider(bmax, 0.0);
  if (c_ok) consider(0.0, cmax);
  // pairwise intersections of active constraints
  for (size_t i = 0; i < w.size(); ++i)
    for (size_t j = i + 1; j < w.size(); ++j) {
      const double det = w[i].A * w[j].S - w[j].A * w[i].S;
      if (std::abs(det) < 1e-300) continue;
      const double b = (w[i].lhs * w[j].S - w[j].lhs * w[i].S) / det;
      const double c = (w[i].A * w[j].lhs - w[j].A * w[i].lhs) / det;
      consider(b, c);
    }
  return best;
}

double quasi_ratio(const QuasiFit& f, const std::vector<QuasiWindow>& w) {
  double r = 0.0;
  for (const auto& x : w) {
    const double bound = f.beta * x.A + f.Cq * x.S;
    if (x.lhs > 0.0) r = std::max(r, bound > 0.0 ? x.lhs / bound : std::numeric_limits<double>::infinity());
  }
  return r;
}

namespace {

double lyap_c(double delta, const std::vector<double>& t, const std::vector<double>& V) {
  const double V0 = V.front();
  double c = 0.0;
  for (size_t i = 1; i < t.size(); ++i) {
    const double dt = t[i] - t.front();
    if (dt <= 0.0) continue;
    const double e = std::exp(-delta * dt);
    c = std::max(c, delta * (V[i] - V0 * e) / (1.0 - e));
  }
  return c;
}

}  // namespace

LyapunovFit fit_lyapunov(const std::vector<double>& t, const std::vector<double>& V) {
  LyapunovFit f;
  if (t.size() < 3) return f;
  f.V0 = V.front();
  const size_t tail0 = t.size() - std::max<size_t>(1, t.size() / 10);
  double tail = 0.0;
  for (size_t i = tail0; i < V.size(); ++i) tail = std::max(tail, V[i]);
  f.level = 1.05 * tail;
  const int n = 241;
  for (int k = n - 1; k >= 0; --k) {
    const double d = 1e-4 * std::pow(4e4, static_cast<double>(k) / (n - 1));
    const double c = lyap_c(d, t, V);
    if (c / d <= f.level) {
      f.delta = d;
      f.C = c;
      f.found = true;
      break;
    }
  }
  return f;
}

double lyapunov_ratio(const LyapunovFit& f, const std::vector<double>& t,
                      const std::vector<double>& V) {
  if (!f.found || t.empty()) return std::numeric_limits<double>::infinity();
  const double V0 = V.front();
  double r = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    const double dt = t[i] - t.front();
    const double e = std::exp(-f.delta * dt);
    const double bound = V0 * e + f.C / f.delta * (1.0 - e);
    if (V[i] > 0.0) r = std::max(r, bound > 0.0 ? V[i] / bound : std::numeric_limits<double>::infinity());
  }
  return r;
}

void lyapunov_series(const RunResult& r, std::vector<double>& t, std::vector<double>& V) {
  t.clear();
  V.clear();
  for (const auto& s : r.samples)
    if (s.e.V_valid) {
      t.push_back(s.e.t);
      V.push_back(s.e.V);
    }
}

namespace {

std::vector<RunResult> run_all(const RunSpec& base,
                               const std::vector<std::pair<PlateField, PlateField>>& data) {
  std::vector<RunResult> out(data.size());
  parallel_for(static_cast<int>(data.size()), [&](int i) {
    RunSpec s = base;
    s.u0 = data[i].first;
    s.u1 = data[i].second;
    out[i] = run_trajectory(s);
  });
  for (const auto& r : out)
    if (r.aborted) throw std::runtime_error("probe run aborted: " + r.error);
  return out;
}

std::vector<std::pair<PlateField, PlateField>> pair_data(const DataPair& fit, const DataPair* held) {
  std::vector<std::pair<PlateField, PlateField>> d = {{fit.u0a, fit.u1a}, {fit.u0b, fit.u1b}};
  if (held) {
    d.push_back({held->u0a, held->u1a});
    d.push_back({held->u0b, held->u1b});
  }
  return d;
}

}  // namespace

ProbeReport lipschitz_probe(const RunSpec& base, const DataPair& fit, const DataPair* held_out) {
  const auto runs = run_all(base, pair_data(fit, held_out));
  const double al = base.phys.alpha;
  const PairSeries s = difference_series(runs[0], runs[1], base.grid, al, base.prehistory);
  const LipschitzFit f = fit_lipschitz(s);
  ProbeReport r;
  r.kind = "lipschitz";
  r.constants = {{"C", f.C}, {"a", f.a}, {"D0", f.D0}};
  r.fit_ratio = lipschitz_ratio(f, s);
  r.pass = std::isfinite(f.C) && std::isfinite(f.a) && f.a >= 0.0 && r.fit_ratio <= 1.0 + 1e-9;
  if (held_out) {
    const PairSeries h = difference_series(runs[2], runs[3], base.grid, al, base.prehistory);
    r.held_out_checked = true;
    r.held_out_ratio = lipschitz_ratio(f, h);
    r.held_out_pass = r.held_out_ratio <= 2.0;
  }
  return r;
}

ProbeReport quasistability_probe(const RunSpec& base, const DataPair& fit,
                                 const DataPair* held_out, double T, double delta) {
  if (!(base.phys.k > 0.0)) throw std::invalid_argument("quasi-stability probe needs k > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  const auto runs = run_all(base, pair_data(fit, held_out));
  const double al = base.phys.alpha;
  const PairSeries s = difference_series(runs[0], runs[1], base.grid, al, base.prehistory, delta);
  const auto w = quasi_windows(s, T);
  ProbeReport r;
  r.kind = "quasi";
  if (w.empty()) {
    r.note = "run shorter than T: no window";
    return r;
  }
  const QuasiFit f = fit_quasi(w);
  r.constants = {{"beta", f.beta}, {"C_q", f.Cq}, {"T", T}, {"delta", delta},
                 {"windows", static_cast<double>(w.size())}};
  r.fit_ratio = quasi_ratio(f, w);
  r.pass = f.beta < 1.0 && r.fit_ratio <= 1.0 + 1e-9;
  if (held_out) {
    const PairSeries h = difference_series(runs[2], runs[3], base.grid, al, base.prehistory, delta);
    const auto wh = quasi_windows(h, T);
    r.held_out_checked = true;
    r.held_out_ratio = quasi_ratio(f, wh);
    r.held_out_pass = !wh.empty() && r.held_out_ratio <= 2.0;
  }
  return r;
}

ProbeReport lyapunov_probe(const RunSpec& base, const std::pair<PlateField, PlateField>& fit_data,
                           const std::pair<PlateField, PlateField>* held_data) {
  std::vector<std::pair<PlateField, PlateField>> d = {fit_data};
  if (held_data) d.push_back(*held_data);
  const auto runs = run_all(base, d);
  std::vector<double> t, V;
  lyapunov_series(runs[0], t, V);
  const LyapunovFit f = fit_lyapunov(t, V);
  ProbeReport r;
  r.kind = "lyapunov";
  r.constants = {{"delta", f.delta}, {"C_V", f.C}, {"V0", f.V0}, {"level", f.level}};
  r.fit_ratio = lyapunov_ratio(f, t, V);
  r.pass = f.found && f.delta > 0.0 && r.fit_ratio <= 1.0 + 1e-9;
  if (!f.found) r.note = "no delta > 0 on the grid reaches the observed tail level";
  if (held_data) {
    std::vector<double> th, Vh;
    lyapunov_series(runs[1], th, Vh);
    r.held_out_checked = true;
    r.held_out_ratio = lyapunov_ratio(f, th, Vh);
    r.held_out_pass = f.found && r.held_out_ratio <= 2.0;
  }
  return r;
}

}  // namespace pflutter
