#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "params.hpp"
#include "symbol.hpp"

namespace bgs {

// E(f) = 1/2 T_{m,v}(f) - N/(2N+2) ||f||_{2+2/N}^{2+2/N} - mu/(q+2) ||f||_{q+2}^{q+2}
struct EnergyBreakdown {
  double kinetic = 0.0;     // 1/2 T_{m,v}
  double power_crit = 0.0;  // N/(2N+2) ||.||_{2+2/N}^{2+2/N}
  double power_sub = 0.0;   // mu/(q+2) ||.||_{q+2}^{q+2}
  double total = 0.0;       // kinetic - power_crit - power_sub
};

namespace detail {

// |z|^e * z with the convention 0^e * 0 = 0 (e > 0); fast paths for the
// exponents that dominate the runs (2/N with N=2, and q = 1/2).
inline cd amp_pow_times(const cd& z, double e) {
  const double r = std::abs(z);
  if (r == 0.0) return cd(0.0, 0.0);
  double w;
  if (e == 1.0)
    w = r;
  else if (e == 0.5)
    w = std::sqrt(r);
  else
    w = std::pow(r, e);
  return w * z;
}

}  // namespace detail

inline EnergyBreakdown energy(const Field& f, const Params& p) {
  p.validate();
  if (f.grid().dim() != p.dim) throw std::invalid_argument("energy: dim mismatch");
  if (!all_finite(f)) throw std::invalid_argument("energy: non-finite field");
  const int n = p.dim;
  EnergyBreakdown e;
  e.kinetic = 0.5 * form_tmv(f, p.mass, p.velocity);
  e.power_crit = (n / (2.0 * n + 2.0)) * lp_pow(f, 2.0 + 2.0 / n);
  e.power_sub = p.mu == 0.0 ? 0.0 : (p.mu / (p.q_exp + 2.0)) * lp_pow(f, p.q_exp + 2.0);
  e.total = e.kinetic - e.power_crit - e.power_sub;
  return e;
}

// Unconstrained L^2 gradient of E (no multiplier term):
//   g = (sqrt(-Lap + m^2) + i v.grad) f - |f|^{2/N} f - mu |f|^q f
// so that Re<g, h> is the directional derivative of E at f along h.
inline Field energy_gradient(const Field& f, const Params& p) {
  p.validate();
  if (f.grid().dim() != p.dim) throw std::invalid_argument("energy_gradient: dim mismatch");
  Field af = apply_symbol(f, Symbol::relativistic(p.mass, p.velocity));
  std::vector<cd> g(af.values());
  const auto& v = f.values();
  const double ecrit = 2.0 / p.dim;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] -= detail::amp_pow_times(v[i], ecrit);
    if (p.mu != 0.0) g[i] -= p.mu * detail::amp_pow_times(v[i], p.q_exp);
  }
  return Field(f.grid(), std::move(g));
}

// Projection multiplier lambda = Re<grad E(f), f> / ||f||_2^2.  At a converged
// minimizer this is the multiplier of  A u = lambda u + |u|^{2/N}u + mu|u|^q u,
// i.e. the sign convention with lambda on the right-hand side.
inline double lagrange_multiplier(const Field& f, const Params& p) {
  p.validate();
  const double a = mass(f);
  if (!(a > 0.0)) throw std::invalid_argument("lagrange_multiplier: zero field");
  const int n = p.dim;
  const double t = form_tmv(f, p.mass, p.velocity);
  const double crit = lp_pow(f, 2.0 + 2.0 / n);
  const double sub = p.mu == 0.0 ? 0.0 : lp_pow(f, p.q_exp + 2.0);
  return (t - crit - p.mu * sub) / a;
}

// Relative residual of  (sqrt(-Lap+m^2) + i v.grad) f + lambda f = |f|^{2/N}f + mu|f|^q f,
// the convention with +lambda f on the left.  Pass the negated projection
// multiplier to test a solver state.
inline double el_residual(const Field& f, const Params& p, double lambda) {
  const double nf = lp_norm(f, 2.0);
  if (!(nf > 0.0)) throw std::invalid_argument("el_residual: zero field");
  Field g = energy_gradient(f, p);
  const auto& gv = g.values();
  const auto& fv = f.values();
  double s = 0.0;
  for (std::size_t i = 0; i < gv.size(); ++i) s += std::norm(gv[i] + lambda * fv[i]);
  return std::sqrt(s * f.grid().cell_volume()) / nf;
}

// Pohozaev residuals of the massless ground-state equation:
//   r1 = |T_v - N ||f||_2^2| / T_v
//   r2 = |T_v - N/(N+1) ||f||_{2+2/N}^{2+2/N}| / T_v
inline std::pair<double, double> pohozaev_residuals(const Field& f, const Vec& v) {
  const double a = mass(f);
  if (!(a > 0.0)) throw std::invalid_argument("pohozaev_residuals: zero field");
  const int n = f.grid().dim();
  const double t = form_tv(f, v);
  const double crit = lp_pow(f, 2.0 + 2.0 / n);
  const double r1 = std::abs(t - n * a) / t;
  const double r2 = std::abs(t - (static_cast<double>(n) / (n + 1.0)) * crit) / t;
  return {r1, r2};
}

}  // namespace bgs
