#include "pflutter/vonkarman.hpp"

#include <stdexcept>

namespace pflutter {

LoadSet LoadSet::radial_beta(const GridSpec& g, double beta) {
  return {zeros(g), sample(g, [beta](double x, double y) { return -beta * (x * x + y * y); })};
}

void LoadSet::validate(const GridSpec& g) const {
  if (p0.size() != g.size() || F0.size() != g.size())
    throw GridError("load fields do not match the grid");
  if (!p0.allFinite() || !F0.allFinite()) throw GridError("load fields must be finite");
  const SecondDerivs d = second_derivatives(F0, g, false);
  if (!d.d11.allFinite() || !d.d12.allFinite() || !d.d22.allFinite())
    throw GridError("F0 second derivatives are not finite");
}

SecondDerivs auto_second_derivatives(const PlateField& f, const GridSpec& g) {
  return second_derivatives(f, g, is_clamped(f, g));
}

PlateField vk_bracket(const SecondDerivs& du, const SecondDerivs& dw, const GridSpec& g) {
  PlateField out(g.size());
  for (int k = 0; k < g.size(); ++k)
    out[k] = du.d11[k] * dw.d22[k] + du.d22[k] * dw.d11[k] - 2.0 * du.d12[k] * dw.d12[k];
  return out;
}

PlateField vk_bracket(const PlateField& u, const PlateField& w, const GridSpec& g) {
  if (u.size() != g.size() || w.size() != g.size()) throw GridError("grid mismatch");
  return vk_bracket(auto_second_derivatives(u, g), auto_second_derivatives(w, g), g);
}

VonKarman::VonKarman(const GridSpec& g, LoadSet loads)
    : g_(g),
      loads_(std::move(loads)),
      bih_(std::make_shared<SpdFieldSolver>(biharmonic_matrix(g), g, 1e-10)) {
  loads_.validate(g_);
  dF0_ = second_derivatives(loads_.F0, g_, false);
}

AirySolution VonKarman::airy_solve(const PlateField& u) const {
  if (!is_clamped(u, g_)) throw GridError("airy_solve expects a clamped field");
  PlateField rhs = -vk_bracket(u, u, g_);
  zero_boundary(rhs, g_);
  AirySolution s;
  s.v = bih_->solve(rhs, &s.residual_norm);
  return s;
}

namespace {

SecondDerivs add(const SecondDerivs& a, const SecondDerivs& b) {
  return {a.d11 + b.d11, a.d12 + b.d12, a.d22 + b.d22};
}

}  // namespace

PlateField VonKarman::fv(const PlateField& u) const { return fv(u, airy_solve(u).v); }

PlateField VonKarman::fv(const PlateField& u, const PlateField& v) const {
  const SecondDerivs du = second_derivatives(u, g_, true);
  const SecondDerivs dvf = add(second_derivatives(v, g_, true), dF0_);
  PlateField out = -vk_bracket(du, dvf, g_);
  zero_boundary(out, g_);
  return out;
}

PlateField VonKarman::fv_jacobian_apply(const PlateField& u, const PlateField& h) const {
  return fv_jacobian_apply(u, airy_solve(u).v, h);
}

PlateField VonKarman::fv_jacobian_apply(const PlateField& u, const PlateField& v,
                                        const PlateField& h) const {
  if (!is_clamped(h, g_)) throw GridError("fv_jacobian_apply expects a clamped direction");
  const SecondDerivs du = second_derivatives(u, g_, true);
  const SecondDerivs dh = second_derivatives(h, g_, true);
  PlateField rhs = -2.0 * vk_bracket(du, dh, g_);
  zero_boundary(rhs, g_);
  const PlateField dv = bih_->solve(rhs);
  const SecondDerivs dvf = add(second_derivatives(v, g_, true), dF0_);
  PlateField out = -vk_bracket(dh, dvf, g_) - vk_bracket(du, second_derivatives(dv, g_, true), g_);
  zero_boundary(out, g_);
  return out;
}

double VonKarman::potential_energy(const PlateField& u) const {
  return potential_energy(u, airy_solve(u).v);
}

double VonKarman::potential_energy(const PlateField& u, const PlateField& v) const {
  const double lv = seminorm_h2(v, g_);
  const PlateField uu = vk_bracket(u, u, g_);
  return 0.25 * lv * lv - 0.5 * inner_l2(uu, loads_.F0, g_) - inner_l2(loads_.p0, u, g_);
}

double VonKarman::pi_star(const PlateField& u) const { return pi_star(u, airy_solve(u).v); }

double VonKarman::pi_star(const PlateField& u, const PlateField& v) const {
  const double lu = seminorm_h2(u, g_), lv = seminorm_h2(v, g_);
  return 0.5 * (lu * lu + 0.5 * lv * lv);
}

AirySolution airy_solve(const PlateField& u, const GridSpec& g) {
  return VonKarman(g, LoadSet::zero(g)).airy_solve(u);
}

PlateField fv(const PlateField& u, const LoadSet& loads, const GridSpec& g) {
  return VonKarman(g, loads).fv(u);
}

}  // namespace pflutter
