#include "pflutter/integrator.hpp"

#include <cmath>
#include <string>

namespace pflutter {

void PhysParams::validate(const GridSpec& g) const {
  if (!(U >= 0.0 && U < 1.0))
    throw std::invalid_argument("U must lie in [0,1): the model is subsonic");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(k >= 0.0)) throw std::invalid_argument("k must be nonnegative");
  loads.validate(g);
}

double estar(const PlateState& s, double alpha, double pi_star, const GridSpec& g) {
  const double n = norm_l2alpha(s.v, alpha, g);
  return 0.5 * n * n + pi_star;
}

Integrator::Integrator(const GridSpec& g, const PhysParams& p, const QuadratureSpec& quad,
                       double dt)
    : g_(g), p_(p), dt_(dt) {
  p_.validate(g_);
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  aero_ = make_aero_config(g_, p_.U, quad);
  vk_ = std::make_shared<VonKarman>(g_, p_.loads);
  m_ = malpha_matrix(g_, p_.alpha);
  k_ = biharmonic_matrix(g_);
  SpMat id(g_.n_interior(), g_.n_interior());
  id.setIdentity();
  c_ = p_.k * m_ + id;
  const double idt = 1.0 / dt_;
  SpMat a_cn = (2.0 * idt * idt) * m_ + 0.5 * k_ + idt * c_;
  SpMat a_ie = (idt * idt) * m_ + k_ + idt * c_;
  cn_ = std::make_shared<SpdFieldSolver>(a_cn, g_, 1e-9);
  ie_ = std::make_shared<SpdFieldSolver>(a_ie, g_, 1e-9);
  hist_ = std::make_unique<HistoryBuffer>(g_, dt_, aero_.t_star);
}

PlateField Integrator::apply(const SpMat& a, const PlateField& f) const {
  return extend_interior(a * restrict_interior(f, g_), g_);
}

PlateField Integrator::explicit_force(const PlateField& u, const PlateField& fvu,
                                      const PlateField& q) const {
  PlateField n = p_.loads.p0 - fvu - p_.U * dx1(u, g_) - q;
  zero_boundary(n, g_);
  return n;
}

void Integrator::refresh_current() {
  const PlateField& u = hist_->newest().u;
  q_cur_ = q_eval(*hist_, aero_);
  v_cur_ = vk_->airy_solve(u).v;
  fv_cur_ = vk_->fv(u, v_cur_);
  n_cur_ = explicit_force(u, fv_cur_, q_cur_);
}

void Integrator::initialize(const PlateField& u0, const PlateField& u1, double t0,
                            Prehistory mode) {
  if (!is_clamped(u0, g_)) throw GridError("u0 must be clamped");
  HistoryBuffer h(g_, dt_, aero_.t_star);
  h.fill_constant(t0, mode == Prehistory::Constant ? u0 : zeros(g_));
  if (mode == Prehistory::Zero) {
    // replace the newest snapshot by u0
    HistoryBuffer z(g_, dt_, aero_.t_star);
    for (int k = 0; k + 1 < h.size(); ++k) z.push(h.at(k).t, h.at(k).u);
    z.push(t0, u0);
    h = std::move(z);
  }
  initialize_from_history(std::move(h), u1);
}

void Integrator::initialize_from_history(HistoryBuffer h, const PlateField& u1) {
  if (!h.covers(aero_.t_star)) throw HistoryError("initial history shorter than t_star");
  if (!is_clamped(u1, g_)) throw GridError("u1 must vanish on the boundary");
  *hist_ = std::move(h);
  pi_hist_.clear();
  for (int k = 0; k < hist_->size(); ++k) {
    pi_hist_.push_back(vk_->pi_star(hist_->at(k).u));
  }
  state_ = {hist_->newest().t, hist_->newest().u, u1};
  refresh_current();
  has_prev_ = false;
  n_prev_ = zeros(g_);
  cnt_ = {};
  cnt_.estar0 = estar(state_, p_.alpha, pi_hist_.back(), g_);
}

void Integrator::restore(HistoryBuffer h, const PlateField& v, const PlateField& n_prev,
                         const IntegratorCounters& c, bool has_prev) {
  initialize_from_history(std::move(h), v);
  n_prev_ = n_prev;
  has_prev_ = has_prev;
  cnt_ = c;
}

PlateState Integrator::step() const {
  const PlateField& u = state_.u;
  const PlateField& v = state_.v;
  PlateState next;
  next.t = state_.t + dt_;
  const double idt = 1.0 / dt_;
  PlateField force;
  if (!has_prev_) {
    // bootstrap: an implicit Euler substep predicts u(t+dt), the explicit
    // force is then averaged between t and the prediction
    PlateField rhs = n_cur_ + apply(m_, (idt * idt) * u + idt * v) + apply(c_, idt * u);
    const PlateField u_pred = ie_->solve(rhs);
    HistoryBuffer h = *hist_;
    h.push(next.t, u_pred);
    const PlateField v_pred = vk_->airy_solve(u_pred).v;
    const PlateField n_pred = explicit_force(u_pred, vk_->fv(u_pred, v_pred), q_eval(h, aero_));
    force = 0.5 * (n_cur_ + n_pred);
  } else {
    force = 1.5 * n_cur_ - 0.5 * n_prev_;
  }
  PlateField rhs = force + apply(m_, (2.0 * idt * idt) * u + (2.0 * idt) * v) -
                   apply(k_, 0.5 * u) + apply(c_, idt * u);
  next.u = cn_->solve(rhs);
  next.v = (2.0 * idt) * (next.u - u) - v;
  zero_boundary(next.v, g_);
  return next;
}

PlateField Integrator::pde_residual(const PlateState& s, const PlateField& accel,
                                    const PlateField& q) const {
  return pde_residual(s, accel, q, vk_->fv(s.u));
}

PlateField Integrator::pde_residual(const PlateState& s, const PlateField& accel,
                                    const PlateField& q, const PlateField& fvu) const {
  const double a = p_.alpha;
  PlateField r = (accel - a * laplacian(accel, g_)) + biharmonic_clamped(s.u, g_) +
                 p_.k * (s.v - a * laplacian(s.v, g_)) + fvu - p_.loads.p0 + s.v +
                 p_.U * dx1(s.u, g_) + q;
  zero_boundary(r, g_);
  return r;
}

void Integrator::advance() {
  const PlateState old = state_;
  const PlateField q_old = q_cur_;
  PlateState next = step();
  if (!next.u.allFinite() || !next.v.allFinite())
    throw InstabilityError("non-finite state at t = " + std::to_string(next.t));

  hist_->push(next.t, next.u);
  n_prev_ = n_cur_;
  has_prev_ = true;
  state_ = next;
  refresh_current();
  pi_hist_.push_back(vk_->pi_star(next.u, v_cur_));
  while (static_cast<int>(pi_hist_.size()) > hist_->size()) pi_hist_.pop_front();

  // power balance at the step midpoint
  PlateState mid{old.t + 0.5 * dt_, 0.5 * (old.u + next.u), 0.5 * (old.v + next.v)};
  const PlateField accel = (1.0 / dt_) * (next.v - old.v);
  const PlateField r = pde_residual(mid, accel, 0.5 * (q_old + q_cur_));
  const double pw = dt_ * inner_l2(r, mid.v, g_);
  cnt_.last_power = pw;
  cnt_.power_signed += pw;
  cnt_.power_defect += std::abs(pw);
  const double vm = norm_l2alpha(mid.v, p_.alpha, g_);
  cnt_.diss_accum += p_.k * dt_ * vm * vm;
  ++cnt_.step;

  const double es = estar(state_, p_.alpha, pi_hist_.back(), g_);
  if (!std::isfinite(es) || es > blowup_ratio * (cnt_.estar0 + 1.0))
    throw InstabilityError("energy blow-up detected at t = " + std::to_string(state_.t) +
                           " (E_* = " + std::to_string(es) + ")");
}

}  // namespace pflutter
