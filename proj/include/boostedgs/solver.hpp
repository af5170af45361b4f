#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "energy.hpp"
#include "params.hpp"

namespace bgs {

inline constexpr double kBigResidual = 1e300;

struct SolverOpts {
  int max_iters = 5000;
  double tol = 1e-9;           // relative residual target
  double dt = 0.5;             // flow step size
  double precond_shift = 1.0;  // c in (sqrt(-Lap+m^2) + i v.grad + c)^{-1}
  double stabilization_exp = 0.0;  // Petviashvili alpha; 0 = (p+1)/p
  unsigned long long seed = 12345;
  double jitter = 1e-2;         // relative noise on the initial Gaussian
  double boost_phase = 1.0;     // theta in the e^{i theta v.x} seed modulation
  double boundary_tol = 1e-8;   // box-fidelity threshold on tail mass / a
  double energy_floor = std::numeric_limits<double>::quiet_NaN();  // NaN = -1e6(1+m a)
  double sigma_frac = 0.125;    // Gaussian seed width as a fraction of L

  void validate() const {
    if (max_iters < 1) throw std::invalid_argument("SolverOpts: max_iters >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("SolverOpts: tol > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("SolverOpts: dt > 0");
    if (!(precond_shift > 0.0)) throw std::invalid_argument("SolverOpts: precond_shift > 0");
  }
};

struct TraceRow {
  int iter = 0;
  double energy = 0.0;
  double residual = 0.0;
  double multiplier = 0.0;
  double extra = 0.0;  // Petviashvili S factor / flow step size
};

enum class Verdict {
  converged,
  max_iters,
  unbounded_descent,  // energy fell below the configured floor, or grid-scale collapse
  step_failure,       // 30 consecutive halvings could not decrease the energy
  stagnation,
  diverged,       // Petviashvili S factor left [1e-8, 1e8]
  box_too_small,  // residual met but tail mass above the fidelity threshold
};

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::max_iters: return "max_iters";
    case Verdict::unbounded_descent: return "unbounded_descent";
    case Verdict::step_failure: return "step_failure";
    case Verdict::stagnation: return "stagnation";
    case Verdict::diverged: return "diverged";
    case Verdict::box_too_small: return "box_too_small";
  }
  return "unknown";
}

struct SolveResult {
  Field state;
  EnergyBreakdown energy;
  double multiplier = 0.0;  // projection convention (lambda on the RHS)
  double residual = 0.0;
  int iters = 0;
  bool converged = false;
  Verdict verdict = Verdict::max_iters;
  std::vector<TraceRow> trace;
  double boundary_mass_frac = 0.0;
  double ground_state_mass = 0.0;  // ||u||_2^2 at exit (a*_v for Petviashvili runs)
  bool collapse_detected = false;
};

// --- initial data -----------------------------------------------------------

inline Field gaussian_seed(const Grid& g, double target_mass, const Vec& v,
                           const SolverOpts& opts) {
  const double sigma = opts.sigma_frac * g.half_width();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double theta = opts.boost_phase;

  // even, low-pass real jitter: odd noise content excites the near-neutral
  // translation mode of the fixed-point iterations, and broadband noise trips
  // the resolution audits before the flow can damp it
  std::vector<double> noise(g.size(), 0.0);
  if (opts.jitter > 0.0) {
    std::vector<cd> raw(g.size());
    for (auto& z : raw) z = cd(gauss(rng), 0.0);
    std::vector<cd> spec = fft_forward(g, raw);
    const double kcut = 0.25 * g.dk() * (g.points() / 2);
    for_each_mode(g, [&](std::size_t i, const double* k) {
      for (int a = 0; a < g.dim(); ++a)
        if (std::abs(k[a]) > kcut) spec[i] = cd(0.0, 0.0);
    });
    std::vector<cd> smooth = fft_inverse(g, spec);
    const int m = g.points();
    int idx[3];
    for (std::size_t i = 0; i < noise.size(); ++i) {
      g.unravel(i, idx);
      std::size_t j = 0;
      for (int a = 0; a < g.dim(); ++a)
        j = j * static_cast<std::size_t>(m) + static_cast<std::size_t>((m - idx[a]) % m);
      noise[i] = 0.5 * (smooth[i].real() + smooth[j].real());
    }
    double peak = 0.0;
    for (double z : noise) peak = std::max(peak, std::abs(z));
    if (peak > 0.0)
      for (double& z : noise) z /= peak;
  }

  std::vector<cd> vals(g.size());
  for_each_point(g, [&](std::size_t i, const double* x) {
    double xx = 0.0, vx = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      xx += x[a] * x[a];
      vx += v[a] * x[a];
    }
    cd z = std::exp(cd(-xx / (2.0 * sigma * sigma), theta * vx));
    if (opts.jitter > 0.0) z *= 1.0 + opts.jitter * noise[i];
    vals[i] = z;
  });
  Field f(g, std::move(vals));
  const double m0 = mass(f);
  return scaled_copy(f, std::sqrt(target_mass / m0));
}

// exact periodic recentering + global rephasing, used to pin the neutral
// symmetry modes during iteration
inline Field recenter_and_rephase(const Field& f) {
  const Vec c = center_of_mass(f);
  double drift = 0.0;
  for (int a = 0; a < f.grid().dim(); ++a) drift = std::max(drift, std::abs(c[a]));
  Field out = f;
  if (drift > 1e-9 * f.grid().spacing()) {
    Vec s{-c[0], -c[1], -c[2]};
    out = shift_field(out, s);
  }
  cd sum(0.0, 0.0);
  for (const auto& z : out.values()) sum += z;
  if (std::abs(sum) > 0.0 && std::abs(std::arg(sum)) > 1e-14)
    out = scaled_copy(out, std::exp(cd(0.0, -std::arg(sum))));
  return out;
}

// recentre the |u|^2 center of mass onto the origin by whole grid cells
inline Field pin_to_origin(const Field& f) {
  const Vec c = center_of_mass(f);
  int cells[3] = {0, 0, 0};
  bool any = false;
  for (int a = 0; a < f.grid().dim(); ++a) {
    cells[a] = -static_cast<int>(std::lround(c[a] / f.grid().spacing()));
    if (cells[a] != 0) any = true;
  }
  return any ? cyclic_shift(f, cells) : f;
}

// --- Petviashvili fixed-point iteration -------------------------------------
//
// Solves (sqrt(-Lap) + i v.grad) u + u = |u|^p u by
//   u_{n+1} = S_n^alpha L^{-1}[|u_n|^p u_n],
//   S_n = <L u_n, u_n> / <|u_n|^p u_n, u_n>,  L = sqrt(-Lap) + i v.grad + 1,
// with the classical stabilization exponent alpha = (p+1)/p.
// The default exponent p = 2/N produces the boosted ground state Q_v and its
// mass a*_v; other exponents give the optimizers U_v of the subcritical
// Gagliardo-Nirenberg inequality.
inline SolveResult petviashvili_ground_state(const Grid& g, const Vec& v, const SolverOpts& opts,
                                             double p_exponent = 0.0) {
  opts.validate();
  if (!(vec_norm(v, g.dim()) < 1.0))
    throw std::invalid_argument("petviashvili: |v| must be < 1");
  const double p = p_exponent > 0.0 ? p_exponent : 2.0 / g.dim();
  const double alpha = opts.stabilization_exp > 0.0 ? opts.stabilization_exp : (p + 1.0) / p;
  const int dim = g.dim();

  Field u = gaussian_seed(g, 5.0 * dim, v, opts);
  SolveResult out{zero_field(g)};
  const double dkn = g.spectral_cell();
  const double tiny = 1e-300;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const auto& spec = u.spectrum();
    // numerator <L u, u> and the symbol per mode
    double num = 0.0;
    std::vector<cd> nl(u.values().size());
    const auto& uv = u.values();
    for (std::size_t i = 0; i < nl.size(); ++i) nl[i] = detail::amp_pow_times(uv[i], p);
    const double den = inner_real(Field(g, nl), u);  // = ||u||_{p+2}^{p+2}
    std::vector<cd> nl_spec = fft_forward(g, nl);

    double resid2 = 0.0;
    std::vector<cd> next(spec.size());
    for_each_mode(g, [&](std::size_t i, const double* k) {
      double kk = 0.0, vk = 0.0;
      for (int a = 0; a < dim; ++a) {
        kk += k[a] * k[a];
        vk += v[a] * k[a];
      }
      const double sym = std::sqrt(kk) - vk + 1.0;
      num += sym * std::norm(spec[i]);
      const cd r = sym * spec[i] - nl_spec[i];
      resid2 += std::norm(r);
      next[i] = nl_spec[i] / sym;
    });
    num *= dkn;
    const double a_now = mass(u);
    const double resid = std::sqrt(resid2 * dkn) / std::sqrt(a_now);

    if (!(den > tiny) || !std::isfinite(den) || !std::isfinite(num)) {
      out.verdict = Verdict::diverged;
      out.iters = iter;
      break;
    }
    const double s = num / den;
    out.trace.push_back({iter, 0.0, resid, 0.0, s});

    if (resid <= opts.tol) {
      out.converged = true;
      out.verdict = Verdict::converged;
      out.iters = iter;
      break;
    }
    if (!(s > 1e-8 && s < 1e8)) {
      out.verdict = Verdict::diverged;
      out.iters = iter;
      break;
    }
    const cd factor(std::pow(s, alpha), 0.0);
    for (auto& z : next) z *= factor;
    u = field_from_spectrum(g, std::move(next));
    if (iter % 10 == 9) u = recenter_and_rephase(u);
    out.iters = iter + 1;
  }

  u = pin_to_origin(u);
  out.state = u;
  out.ground_state_mass = mass(u);
  out.boundary_mass_frac = boundary_mass(u) / out.ground_state_mass;
  if (out.converged && out.boundary_mass_frac > opts.boundary_tol) {
    out.converged = false;
    out.verdict = Verdict::box_too_small;
  }
  // report the massless energy and the ground-state multiplier diagnostics
  Params pp;
  pp.dim = dim;
  pp.mass = 0.0;
  pp.velocity = v;
  pp.mu = 0.0;
  pp.q_exp = 1.0 / dim;  // unused (mu = 0)
  pp.target_mass = out.ground_state_mass;
  out.energy = energy(u, pp);
  if (p == 2.0 / dim) {
    out.multiplier = lagrange_multiplier(u, pp);
    out.residual = el_residual(u, pp, -out.multiplier);
  } else {
    out.residual = out.trace.empty() ? 0.0 : out.trace.back().residual;
  }
  for (auto& row : out.trace) {
    row.energy = out.energy.total;
    row.multiplier = out.multiplier;
  }
  return out;
}

// --- constrained minimization on the mass sphere -----------------------------
//
// Preconditioned projected gradient descent for e(a) = inf{E(u) : ||u||_2^2 = a}:
//   u <- renormalize( u - dt * (sqrt(-Lap+m^2) + i v.grad + c)^{-1} grad E(u) )
// with monotone energy descent enforced by step halving.  Exit on the
// projected residual ||grad - lambda u|| / ||u|| <= tol.
inline SolveResult constrained_minimize(const Grid& g, const Params& p,
                                        std::optional<Field> init, const SolverOpts& opts) {
  opts.validate();
  p.validate();
  if (g.dim() != p.dim) throw std::invalid_argument("constrained_minimize: dim mismatch");
  const double a = p.target_mass;
  const double floor = std::isnan(opts.energy_floor)
                           ? -1e6 * (1.0 + p.mass * a)
                           : opts.energy_floor;

  auto renormalize = [&](const Field& f) {
    return scaled_copy(f, std::sqrt(a / mass(f)));
  };

  Field u = zero_field(g);
  if (init.has_value()) {
    Field f = init->grid() == g ? *init : resample(*init, g);
    u = renormalize(f);
  } else {
    u = renormalize(gaussian_seed(g, a, p.velocity, opts));
  }

  const Symbol precond = Symbol::inv_shifted(p.mass, p.velocity, opts.precond_shift);
  SolveResult out{u};
  EnergyBreakdown eb = energy(u, p);
  double dt = opts.dt;
  const double dt_max = 10.0 * opts.dt;
  const double sqrt_a = std::sqrt(a);

  int iter = 0;
  int stall = 0;
  double best_res = kBigResidual;
  for (; iter < opts.max_iters; ++iter) {
    Field grad = energy_gradient(u, p);
    const double lam = inner_real(grad, u) / a;
    // projected gradient g - lambda u: residual and (preconditioned) step
    std::vector<cd> pg(grad.values());
    {
      const auto& uv = u.values();
      for (std::size_t i = 0; i < pg.size(); ++i) pg[i] -= lam * uv[i];
    }
    double res2 = 0.0;
    for (const auto& z : pg) res2 += std::norm(z);
    const double res = std::sqrt(res2 * g.cell_volume()) / sqrt_a;
    out.trace.push_back({iter, eb.total, res, lam, dt});
    out.multiplier = lam;
    out.residual = res;

    // blow-up regimes scale the gradient like |lambda|; keep the exit
    // criterion relative to that scale so ladders stay uniformly converged
    if (res <= opts.tol * std::max(1.0, std::abs(lam))) {
      out.converged = true;
      out.verdict = Verdict::converged;
      break;
    }
    if (eb.total < floor) {
      out.verdict = Verdict::unbounded_descent;
      break;
    }
    if (res < 0.99 * best_res) {
      best_res = res;
      stall = 0;
    } else if (++stall > 1000) {
      // distinguish grid-scale collapse (descent exhausted the resolution,
      // the discrete signature of unbounded descent) from plain stagnation
      if (spectral_tail_fraction(u) > 0.1) {
        out.verdict = Verdict::unbounded_descent;
        out.collapse_detected = true;
      } else {
        out.verdict = Verdict::stagnation;
      }
      break;
    }

    // preconditioning the projected gradient keeps a strict first-order
    // descent: dE/dt|_0 = -<g - lam u, P (g - lam u)> < 0 for positive P
    Field dir = apply_symbol(Field(g, std::move(pg)), precond);
    bool accepted = false;
    for (int halvings = 0; halvings <= 30; ++halvings) {
      std::vector<cd> tv(u.values());
      const auto& dv = dir.values();
      for (std::size_t i = 0; i < tv.size(); ++i) tv[i] -= dt * dv[i];
      Field u_try = renormalize(Field(g, std::move(tv)));
      EnergyBreakdown eb_try = energy(u_try, p);
      if (eb_try.total <= eb.total + 1e-12 * std::abs(eb.total)) {
        u = std::move(u_try);
        eb = eb_try;
        dt = std::min(dt * 1.2, dt_max);
        accepted = true;
        break;
      }
      dt *= 0.5;
    }
    if (!accepted) {
      out.verdict = Verdict::step_failure;
      break;
    }
    if (iter % 10 == 9) {
      u = recenter_and_rephase(u);
      u = renormalize(u);
    }
  }
  if (iter == opts.max_iters) out.verdict = Verdict::max_iters;

  u = pin_to_origin(u);
  out.state = u;
  out.iters = iter;
  out.energy = energy(u, p);
  out.ground_state_mass = mass(u);
  out.boundary_mass_frac = boundary_mass(u) / out.ground_state_mass;
  if (out.converged && out.boundary_mass_frac > opts.boundary_tol) {
    out.converged = false;
    out.verdict = Verdict::box_too_small;
  }
  return out;
}

// --- warm-started parameter sweeps -------------------------------------------

// Consecutive Params may differ in at most two scalar entries.
inline int params_scalar_diff(const Params& x, const Params& y) {
  int d = 0;
  if (x.mass != y.mass) ++d;
  if (x.mu != y.mu) ++d;
  if (x.q_exp != y.q_exp) ++d;
  if (x.target_mass != y.target_mass) ++d;
  for (int a = 0; a < 3; ++a)
    if (x.velocity[a] != y.velocity[a]) ++d;
  return d;
}

using GridProvider = std::function<Grid(std::size_t index, const Params& p)>;

// Each result is initialized from the previous converged state, resampled onto
// the point's grid and renormalized to the new mass.  Failures are recorded and
// the sweep continues.
inline std::vector<SolveResult> continuation_sweep(const Grid& g, const std::vector<Params>& path,
                                                   const SolverOpts& opts,
                                                   const GridProvider& grid_for = nullptr) {
  if (path.empty()) throw std::invalid_argument("continuation_sweep: empty path");
  for (std::size_t i = 1; i < path.size(); ++i)
    if (params_scalar_diff(path[i - 1], path[i]) > 2)
      throw std::invalid_argument("continuation_sweep: consecutive Params differ in > 2 entries");

  std::vector<SolveResult> results;
  std::optional<Field> warm;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const Grid gi = grid_for ? grid_for(i, path[i]) : g;
    std::optional<Field> init;
    if (warm.has_value()) init = warm;
    SolveResult r = constrained_minimize(gi, path[i], init, opts);
    if (r.converged) warm = r.state;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace bgs
