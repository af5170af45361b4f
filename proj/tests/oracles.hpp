#pragma once

// Test-side oracles, independent of the library implementations they check.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "boostedgs/field.hpp"

namespace oracle {

// plain golden-section minimizer on [lo, hi] after a coarse scan (log-spaced);
// written independently of bgs::golden_min_log
inline std::pair<double, double> golden_min(const std::function<double(double)>& f, double lo,
                                            double hi, int coarse = 600) {
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("golden_min: bad bracket");
  const double la = std::log(lo), lb = std::log(hi);
  double best_t = lo, best_v = f(lo);
  int best_i = 0;
  for (int i = 0; i <= coarse; ++i) {
    const double t = std::exp(la + (lb - la) * i / coarse);
    const double v = f(t);
    if (v < best_v) {
      best_v = v;
      best_t = t;
      best_i = i;
    }
  }
  double a = std::exp(la + (lb - la) * std::max(0, best_i - 1) / coarse);
  double b = std::exp(la + (lb - la) * std::min(coarse, best_i + 1) / coarse);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-9 * (1.0 + std::abs(a))) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  double t = 0.5 * (a + b);
  (void)best_t;

  // Function values localize an argmin only to ~sqrt(eps); polish with
  // Richardson-extrapolated parabolic vertex steps (bias ~ d^4, noise ~ eps/d).
  for (int round = 0; round < 3; ++round) {
    const double d = 1e-4 * t;
    auto vertex = [&](double dd) {
      const double fm = f(t - dd), f0 = f(t), fp = f(t + dd);
      const double denom = fp - 2.0 * f0 + fm;
      if (denom <= 0.0) return 0.0;
      return 0.5 * dd * (fm - fp) / denom;
    };
    const double v1 = vertex(d);
    const double v2 = vertex(0.5 * d);
    t += (4.0 * v2 - v1) / 3.0;
  }
  return {t, f(t)};
}

// real-space Riesz quadrature: c(N,1) * sum_{x,y} conj(f(x)) f(y) |x-y|^{1-N} h^{2N}
// with the exact kernel cell integral on the diagonal.  O(n^2); use small grids.
inline double riesz_double_sum(const bgs::Field& f) {
  const bgs::Grid& g = f.grid();
  const int n = g.dim();
  if (n < 2) throw std::invalid_argument("riesz_double_sum: N >= 2");
  // c(N,1) = Gamma((N-1)/2) / (2 pi^{(N+1)/2})
  const double c = n == 2 ? 1.0 / (2.0 * bgs::kPi)
                          : 1.0 / (2.0 * bgs::kPi * bgs::kPi);
  const double h = g.spacing();
  // exact integral of |r|^{1-N} over one cell centered at 0, in units of h^N:
  //   N=2: 4 ln(1+sqrt 2) * h ; N=3: C3 * h  (C3 = cube integral of 1/|s|^2)
  const double diag_cell = n == 2 ? 4.0 * std::log(1.0 + std::sqrt(2.0)) * h
                                  : 7.6740 * h;
  const auto& v = f.values();
  std::vector<double> xs(v.size() * 3);
  bgs::for_each_point(g, [&](std::size_t i, const double* x) {
    xs[3 * i] = x[0];
    xs[3 * i + 1] = x[1];
    xs[3 * i + 2] = x[2];
  });
  double acc = 0.0;
  const double cell = g.cell_volume();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == bgs::cd(0.0, 0.0)) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (j == i) continue;
      double rr = 0.0;
      for (int a = 0; a < n; ++a) {
        const double d = xs[3 * i + a] - xs[3 * j + a];
        rr += d * d;
      }
      // conj(f_i) f_j real part; kernel real
      const double re = v[i].real() * v[j].real() + v[i].imag() * v[j].imag();
      row += re * std::pow(rr, 0.5 * (1.0 - n));
    }
    acc += row * cell * cell;
    acc += std::norm(v[i]) * diag_cell * cell;  // diagonal cell, exact kernel integral
  }
  return c * acc;
}

}  // namespace oracle
