#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"

namespace bgs {

using Vec = std::array<double, 3>;

inline double vec_norm(const Vec& v, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += v[a] * v[a];
  return std::sqrt(s);
}

// Complex scalar field sampled on a Grid, physical-space row-major storage.
// Immutable after construction; the spectral representation is computed on
// first use and cached (guarded by a global mutex so shared fields stay
// safe across threads).
class Field {
 public:
  Field(Grid g, std::vector<cd> values) : grid_(std::move(g)), vals_(std::move(values)) {
    if (vals_.size() != grid_.size())
      throw std::invalid_argument("Field: value count must equal M^N");
  }
  Field(Grid g, std::vector<cd> values, std::vector<cd> spectrum)
      : Field(std::move(g), std::move(values)) {
    if (spectrum.size() != grid_.size())
      throw std::invalid_argument("Field: spectrum size must equal M^N");
    spec_ = std::make_shared<const std::vector<cd>>(std::move(spectrum));
  }

  const Grid& grid() const { return grid_; }
  const std::vector<cd>& values() const { return vals_; }
  bool has_spectrum() const { return spec_ != nullptr; }

  const std::vector<cd>& spectrum() const {
    std::lock_guard<std::mutex> lock(spec_mutex());
    if (!spec_) spec_ = std::make_shared<const std::vector<cd>>(fft_forward(grid_, vals_));
    return *spec_;
  }

 private:
  static std::mutex& spec_mutex() {
    static std::mutex m;
    return m;
  }

  Grid grid_;
  std::vector<cd> vals_;
  mutable std::shared_ptr<const std::vector<cd>> spec_;
};

inline Field zero_field(const Grid& g) { return Field(g, std::vector<cd>(g.size())); }

template <class F>
inline Field make_field(const Grid& g, F&& fn) {
  std::vector<cd> v(g.size());
  for_each_point(g, [&](std::size_t i, const double* x) { v[i] = fn(x); });
  return Field(g, std::move(v));
}

inline Field field_from_spectrum(const Grid& g, std::vector<cd> spec) {
  std::vector<cd> vals = fft_inverse(g, spec);
  return Field(g, std::move(vals), std::move(spec));
}

inline bool all_finite(const Field& f) {
  for (const auto& z : f.values())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

// --- quadrature norms (physical side) ------------------------------------

// sum |f|^p * cellvol  (the p-th power of the L^p norm)
inline double lp_pow(const Field& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_pow: p must be >= 1");
  double s = 0.0;
  if (p == 2.0) {
    for (const auto& z : f.values()) s += std::norm(z);
  } else {
    for (const auto& z : f.values()) s += std::pow(std::abs(z), p);
  }
  return s * f.grid().cell_volume();
}

inline double lp_norm(const Field& f, double p) { return std::pow(lp_pow(f, p), 1.0 / p); }

// ||f||_2^2, the constraint mass
inline double mass(const Field& f) { return lp_pow(f, 2.0); }

inline double inner_real(const Field& a, const Field& b) {
  if (a.grid() != b.grid()) throw std::invalid_argument("inner_real: grid mismatch");
  double s = 0.0;
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i)
    s += av[i].real() * bv[i].real() + av[i].imag() * bv[i].imag();
  return s * a.grid().cell_volume();
}

// --- spectral forms --------------------------------------------------------

inline double spectral_mass(const Field& f) {
  double s = 0.0;
  for (const auto& z : f.spectrum()) s += std::norm(z);
  return s * f.grid().spectral_cell();
}

// ∫ |k| |u_hat|^2 dk, the homogeneous H^{1/2} seminorm squared
inline double hhalf_sq(const Field& f) {
  const auto& spec = f.spectrum();
  double s = 0.0;
  for_each_mode(f.grid(), [&](std::size_t i, const double* k) {
    double kk = 0.0;
    for (int a = 0; a < f.grid().dim(); ++a) kk += k[a] * k[a];
    s += std::sqrt(kk) * std::norm(spec[i]);
  });
  return s * f.grid().spectral_cell();
}

// T_v(f) = ∫ (|k| - v.k) |u_hat|^2 dk
inline double form_tv(const Field& f, const Vec& v) {
  const int dim = f.grid().dim();
  if (!(vec_norm(v, dim) < 1.0)) throw std::invalid_argument("form_tv: |v| must be < 1");
  const auto& spec = f.spectrum();
  double s = 0.0;
  for_each_mode(f.grid(), [&](std::size_t i, const double* k) {
    double kk = 0.0, vk = 0.0;
    for (int a = 0; a < dim; ++a) {
      kk += k[a] * k[a];
      vk += v[a] * k[a];
    }
    s += (std::sqrt(kk) - vk) * std::norm(spec[i]);
  });
  return s * f.grid().spectral_cell();
}

// T_{m,v}(f) = ∫ (sqrt(|k|^2 + m^2) - v.k) |u_hat|^2 dk
inline double form_tmv(const Field& f, double m, const Vec& v) {
  const int dim = f.grid().dim();
  if (!(vec_norm(v, dim) < 1.0)) throw std::invalid_argument("form_tmv: |v| must be < 1");
  if (!(m >= 0.0)) throw std::invalid_argument("form_tmv: m must be >= 0");
  const auto& spec = f.spectrum();
  const double m2 = m * m;
  double s = 0.0;
  for_each_mode(f.grid(), [&](std::size_t i, const double* k) {
    double kk = 0.0, vk = 0.0;
    for (int a = 0; a < dim; ++a) {
      kk += k[a] * k[a];
      vk += v[a] * k[a];
    }
    s += (std::sqrt(kk + m2) - vk) * std::norm(spec[i]);
  });
  return s * f.grid().spectral_cell();
}

// ∫ |u_hat|^2 / |k| dk with the k = 0 mode dropped from the lattice sum.
// The 1/|k| kink at the origin makes the bare midpoint sum O(dk)-inaccurate
// whenever u_hat(0) != 0, so the singular part is subtracted against an
// analytically integrated Gaussian screen of width 4 dk.  N = 1 (smoke mode)
// keeps the bare sum.
inline double spectral_integral_I(const Field& f) {
  const int dim = f.grid().dim();
  const auto& spec = f.spectrum();
  const double dk = f.grid().dk();
  if (dim == 1) {
    double s = 0.0;
    for_each_mode(f.grid(), [&](std::size_t i, const double* k) {
      if (k[0] != 0.0) s += std::norm(spec[i]) / std::abs(k[0]);
    });
    return s * dk;
  }
  const double f0 = std::norm(spec[0]);  // |u_hat(0)|^2 (flat index 0 is k = 0)
  const double w = 4.0 * dk;
  double s = 0.0;
  for_each_mode(f.grid(), [&](std::size_t i, const double* k) {
    double kk = 0.0;
    for (int a = 0; a < dim; ++a) kk += k[a] * k[a];
    if (kk == 0.0) return;
    s += (std::norm(spec[i]) - f0 * std::exp(-0.5 * kk / (w * w))) / std::sqrt(kk);
  });
  s *= f.grid().spectral_cell();
  const double pi32 = std::pow(kPi, 1.5);
  const double screen = dim == 2 ? std::sqrt(2.0) * pi32 * w : 2.0 * std::sqrt(2.0) * pi32 * w;
  return s + f0 * screen;
}

// momentum-type form ∫ conj(f) (i d/dx1) f dx = -∫ k_1 |u_hat|^2 dk
inline double drift_form_x1(const Field& f) {
  const auto& spec = f.spectrum();
  double s = 0.0;
  for_each_mode(f.grid(), [&](std::size_t i, const double* k) { s += -k[0] * std::norm(spec[i]); });
  return s * f.grid().spectral_cell();
}

// mass in the outer region |x| > L/2 (euclidean radius)
inline double boundary_mass(const Field& f) {
  const double r2 = 0.25 * f.grid().half_width() * f.grid().half_width();
  const auto& v = f.values();
  double s = 0.0;
  for_each_point(f.grid(), [&](std::size_t i, const double* x) {
    double xx = 0.0;
    for (int a = 0; a < f.grid().dim(); ++a) xx += x[a] * x[a];
    if (xx > r2) s += std::norm(v[i]);
  });
  return s * f.grid().cell_volume();
}

inline Vec center_of_mass(const Field& f) {
  Vec c{0.0, 0.0, 0.0};
  double tot = 0.0;
  const auto& v = f.values();
  for_each_point(f.grid(), [&](std::size_t i, const double* x) {
    const double w = std::norm(v[i]);
    tot += w;
    for (int a = 0; a < f.grid().dim(); ++a) c[a] += w * x[a];
  });
  if (tot > 0.0)
    for (int a = 0; a < f.grid().dim(); ++a) c[a] /= tot;
  return c;
}

// rms radius about the |f|^2 center of mass
inline double rms_radius(const Field& f) {
  const Vec c = center_of_mass(f);
  double tot = 0.0, s = 0.0;
  const auto& v = f.values();
  for_each_point(f.grid(), [&](std::size_t i, const double* x) {
    const double w = std::norm(v[i]);
    tot += w;
    for (int a = 0; a < f.grid().dim(); ++a) s += w * (x[a] - c[a]) * (x[a] - c[a]);
  });
  return tot > 0.0 ? std::sqrt(s / tot) : 0.0;
}

// fraction of spectral mass in the outer half of the mode cube (resolution audit)
inline double spectral_tail_fraction(const Field& f) {
  const auto& spec = f.spectrum();
  const double kcut = 0.5 * f.grid().dk() * (f.grid().points() / 2);
  double tail = 0.0, tot = 0.0;
  for_each_mode(f.grid(), [&](std::size_t i, const double* k) {
    const double w = std::norm(spec[i]);
    tot += w;
    bool outer = false;
    for (int a = 0; a < f.grid().dim(); ++a)
      if (std::abs(k[a]) >= kcut) outer = true;
    if (outer) tail += w;
  });
  return tot > 0.0 ? tail / tot : 0.0;
}

// --- exact lattice operations ---------------------------------------------

inline Field scaled_copy(const Field& f, cd factor) {
  std::vector<cd> v(f.values());
  for (auto& z : v) z *= factor;
  if (f.has_spectrum()) {
    std::vector<cd> s(f.spectrum());
    for (auto& z : s) z *= factor;
    return Field(f.grid(), std::move(v), std::move(s));
  }
  return Field(f.grid(), std::move(v));
}

// w = lambda1 * u(lambda2 x) realized exactly by reinterpreting the samples on
// a box of half width L / lambda2 (lambda2 > 0).
inline Field reinterpret_rescaled(const Field& f, double lambda1, double lambda2) {
  if (!(lambda2 > 0.0)) throw std::invalid_argument("reinterpret_rescaled: lambda2 > 0");
  Grid g = Grid::make(f.grid().dim(), f.grid().half_width() / lambda2, f.grid().points(),
                      f.grid().dim() == 1);
  std::vector<cd> v(f.values());
  for (auto& z : v) z *= lambda1;
  return Field(std::move(g), std::move(v));
}

// circular shift by whole cells; cells[a] >= 0 shifts content toward +x_a
inline Field cyclic_shift(const Field& f, const int cells[3]) {
  const int m = f.grid().points();
  const auto& src = f.values();
  std::vector<cd> dst(src.size());
  int idx[3] = {0, 0, 0};
  const int dim = f.grid().dim();
  for (std::size_t i = 0; i < src.size(); ++i) {
    f.grid().unravel(i, idx);
    std::size_t j = 0;
    for (int a = 0; a < dim; ++a) {
      int t = idx[a] + cells[a];
      t %= m;
      if (t < 0) t += m;
      j = j * static_cast<std::size_t>(m) + static_cast<std::size_t>(t);
    }
    dst[j] = src[i];
  }
  return Field(f.grid(), std::move(dst));
}

// exact periodic translation u(x - s) via spectral phase
inline Field shift_field(const Field& f, const Vec& s) {
  const auto& spec = f.spectrum();
  std::vector<cd> out(spec.size());
  for_each_mode(f.grid(), [&](std::size_t i, const double* k) {
    double ks = 0.0;
    for (int a = 0; a < f.grid().dim(); ++a) ks += k[a] * s[a];
    out[i] = spec[i] * std::exp(cd(0.0, -ks));
  });
  return field_from_spectrum(f.grid(), std::move(out));
}

// --- resampling onto another grid ------------------------------------------

namespace detail {

// periodic Catmull-Rom weights
inline void catmull_rom(double t, double w[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
  w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
  w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}

// spectral zero-padding by an integer factor (trigonometric upsampling)
inline Field upsample(const Field& f, int factor) {
  const Grid& g = f.grid();
  Grid fine = Grid::make(g.dim(), g.half_width(), g.points() * factor, g.dim() == 1);
  const auto& spec = f.spectrum();
  std::vector<cd> fs(fine.size(), cd(0.0, 0.0));
  const int m = g.points();
  const int mf = fine.points();
  int idx[3] = {0, 0, 0};
  for (std::size_t i = 0; i < spec.size(); ++i) {
    g.unravel(i, idx);
    std::size_t j = 0;
    for (int a = 0; a < g.dim(); ++a) {
      const int ki = idx[a] <= m / 2 - 1 ? idx[a] : idx[a] - m;  // signed index
      const int fi = ki >= 0 ? ki : ki + mf;
      j = j * static_cast<std::size_t>(mf) + static_cast<std::size_t>(fi);
    }
    fs[j] = spec[i];
  }
  return field_from_spectrum(fine, std::move(fs));
}

}  // namespace detail

// Samples the band-limited interpolant of f at the points of `target`
// (periodic continuation outside the source box).  Spectral x4 upsampling
// followed by separable Catmull-Rom interpolation.
inline Field resample(const Field& f, const Grid& target) {
  if (target.dim() != f.grid().dim()) throw std::invalid_argument("resample: dim mismatch");
  if (target == f.grid()) return f;
  const Field fine = detail::upsample(f, 4);
  const Grid& gf = fine.grid();
  const int mf = gf.points();
  const double hf = gf.spacing();
  const double lf = gf.half_width();
  const auto& src = fine.values();
  const int dim = target.dim();

  std::vector<cd> out(target.size());
  for_each_point(target, [&](std::size_t i, const double* x) {
    // locate the base cell per axis
    int base[3] = {0, 0, 0};
    double wts[3][4];
    for (int a = 0; a < dim; ++a) {
      double t = (x[a] + lf) / hf;
      double fl = std::floor(t);
      double frac = t - fl;
      int j = static_cast<int>(fl) % mf;
      if (j < 0) j += mf;
      base[a] = j;
      detail::catmull_rom(frac, wts[a]);
    }
    cd acc(0.0, 0.0);
    if (dim == 1) {
      for (int d0 = -1; d0 <= 2; ++d0) {
        int j0 = (base[0] + d0 + mf) % mf;
        acc += wts[0][d0 + 1] * src[static_cast<std::size_t>(j0)];
      }
    } else if (dim == 2) {
      for (int d0 = -1; d0 <= 2; ++d0) {
        const int j0 = (base[0] + d0 + mf) % mf;
        cd row(0.0, 0.0);
        const std::size_t off = static_cast<std::size_t>(j0) * mf;
        for (int d1 = -1; d1 <= 2; ++d1) {
          const int j1 = (base[1] + d1 + mf) % mf;
          row += wts[1][d1 + 1] * src[off + static_cast<std::size_t>(j1)];
        }
        acc += wts[0][d0 + 1] * row;
      }
    } else {
      for (int d0 = -1; d0 <= 2; ++d0) {
        const int j0 = (base[0] + d0 + mf) % mf;
        cd plane(0.0, 0.0);
        for (int d1 = -1; d1 <= 2; ++d1) {
          const int j1 = (base[1] + d1 + mf) % mf;
          cd row(0.0, 0.0);
          const std::size_t off =
              (static_cast<std::size_t>(j0) * mf + static_cast<std::size_t>(j1)) * mf;
          for (int d2 = -1; d2 <= 2; ++d2) {
            const int j2 = (base[2] + d2 + mf) % mf;
            row += wts[2][d2 + 1] * src[off + static_cast<std::size_t>(j2)];
          }
          plane += wts[1][d1 + 1] * row;
        }
        acc += wts[0][d0 + 1] * plane;
      }
    }
    out[i] = acc;
  });
  return Field(target, std::move(out));
}

// f rescaled as  scale^{N/2} f(scale * x)  sampled on `target`
inline Field sample_rescaled(const Field& f, double scale, const Grid& target) {
  if (!(scale > 0.0)) throw std::invalid_argument("sample_rescaled: scale > 0");
  // reinterpret onto the scaled box, then resample
  const double amp = std::pow(scale, 0.5 * f.grid().dim());
  Field scaled = reinterpret_rescaled(f, amp, scale);
  return resample(scaled, target);
}

}  // namespace bgs
