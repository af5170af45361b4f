#pragma once

#include <cmath>
#include <stdexcept>

#include "field.hpp"

namespace bgs {

// Fourier multipliers used throughout: the pseudo-relativistic operator, the
// drift from the moving frame, their shifted inverse (preconditioner), and
// the inverse square-root Laplacian (Riesz) with the k = 0 mode zeroed.
struct Symbol {
  enum class Kind { sqrt_lap, sqrt_lap_mass, drift, relativistic, inv_shifted, riesz_inv };

  Kind kind = Kind::sqrt_lap;
  double m = 0.0;
  Vec v{0.0, 0.0, 0.0};
  double c = 0.0;

  static Symbol sqrt_lap() { return Symbol{Kind::sqrt_lap, 0.0, {0, 0, 0}, 0.0}; }
  static Symbol sqrt_lap_mass(double m) { return Symbol{Kind::sqrt_lap_mass, m, {0, 0, 0}, 0.0}; }
  static Symbol drift(const Vec& v) { return Symbol{Kind::drift, 0.0, v, 0.0}; }
  static Symbol relativistic(double m, const Vec& v) {
    return Symbol{Kind::relativistic, m, v, 0.0};
  }
  static Symbol inv_shifted(double m, const Vec& v, double c) {
    return Symbol{Kind::inv_shifted, m, v, c};
  }
  static Symbol riesz_inv() { return Symbol{Kind::riesz_inv, 0.0, {0, 0, 0}, 0.0}; }

  void validate(int dim) const {
    switch (kind) {
      case Kind::sqrt_lap:
      case Kind::riesz_inv:
        return;
      case Kind::sqrt_lap_mass:
        if (!(m >= 0.0)) throw std::invalid_argument("Symbol: m must be >= 0");
        return;
      case Kind::drift:
        if (!(vec_norm(v, dim) < 1.0)) throw std::invalid_argument("Symbol: |v| must be < 1");
        return;
      case Kind::relativistic:
        if (!(m >= 0.0)) throw std::invalid_argument("Symbol: m must be >= 0");
        if (!(vec_norm(v, dim) < 1.0)) throw std::invalid_argument("Symbol: |v| must be < 1");
        return;
      case Kind::inv_shifted: {
        if (!(m >= 0.0)) throw std::invalid_argument("Symbol: m must be >= 0");
        const double vn = vec_norm(v, dim);
        if (!(vn < 1.0)) throw std::invalid_argument("Symbol: |v| must be < 1");
        // keeps sqrt(|k|^2+m^2) - v.k + c strictly positive
        if (!(c > -std::sqrt(1.0 - vn * vn) * m))
          throw std::invalid_argument("Symbol: inv_shifted needs c > -sqrt(1-|v|^2) m");
        return;
      }
    }
  }

  double operator()(const double* k, int dim) const {
    double kk = 0.0, vk = 0.0;
    for (int a = 0; a < dim; ++a) {
      kk += k[a] * k[a];
      vk += v[a] * k[a];
    }
    switch (kind) {
      case Kind::sqrt_lap:
        return std::sqrt(kk);
      case Kind::sqrt_lap_mass:
        return std::sqrt(kk + m * m);
      case Kind::drift:
        return -vk;
      case Kind::relativistic:
        return std::sqrt(kk + m * m) - vk;
      case Kind::inv_shifted:
        return 1.0 / (std::sqrt(kk + m * m) - vk + c);
      case Kind::riesz_inv:
        return kk > 0.0 ? 1.0 / std::sqrt(kk) : 0.0;
    }
    return 0.0;
  }
};

inline Field apply_symbol(const Field& f, const Symbol& s) {
  s.validate(f.grid().dim());
  if (!all_finite(f)) throw std::invalid_argument("apply_symbol: non-finite input");
  const auto& spec = f.spectrum();
  std::vector<cd> out(spec.size());
  const int dim = f.grid().dim();
  for_each_mode(f.grid(), [&](std::size_t i, const double* k) { out[i] = s(k, dim) * spec[i]; });
  return field_from_spectrum(f.grid(), std::move(out));
}

}  // namespace bgs
