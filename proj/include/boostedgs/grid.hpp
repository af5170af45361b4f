#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bgs {

inline constexpr double kPi = 3.14159265358979323846;

// Periodic uniform grid on [-L, L)^N, N in {1,2,3}, with M points per axis.
// M must be a power of two (>= 8).  Wavenumbers per axis are
// (pi/L) * {-M/2, ..., M/2-1}, stored in FFT order (0..M/2-1, -M/2..-1).
// N = 1 is a smoke-test mode and must be requested explicitly.
class Grid {
 public:
  static Grid make(int dim, double half_width, int points, bool smoke = false) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("Grid: dim must be in {1,2,3}");
    if (dim == 1 && !smoke) throw std::invalid_argument("Grid: dim=1 allowed only in smoke mode");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw std::invalid_argument("Grid: half_width must be positive");
    if (points < 8 || (points & (points - 1)) != 0)
      throw std::invalid_argument("Grid: points_per_dim must be a power of two >= 8");
    return Grid(dim, half_width, points);
  }

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int points() const { return points_; }

  std::size_t size() const {
    std::size_t n = 1;
    for (int a = 0; a < dim_; ++a) n *= static_cast<std::size_t>(points_);
    return n;
  }

  double spacing() const { return 2.0 * half_width_ / points_; }
  double dk() const { return kPi / half_width_; }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing();
    return v;
  }
  double spectral_cell() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= dk();
    return v;
  }

  // physical coordinate of axis index j in 0..M-1
  double x_of(int j) const { return -half_width_ + j * spacing(); }
  // wavenumber of raw (FFT-order) spectral index j in 0..M-1
  double k_of(int j) const { return wavenumbers_[static_cast<std::size_t>(j)]; }

  const std::vector<double>& wavenumbers() const { return wavenumbers_; }

  void unravel(std::size_t flat, int idx[3]) const {
    const auto m = static_cast<std::size_t>(points_);
    for (int a = dim_ - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % m);
      flat /= m;
    }
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && points_ == o.points_ && half_width_ == o.half_width_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

  std::string describe() const {
    return "N" + std::to_string(dim_) + " L=" + std::to_string(half_width_) +
           " M=" + std::to_string(points_);
  }

 private:
  Grid(int dim, double half_width, int points)
      : dim_(dim), half_width_(half_width), points_(points) {
    wavenumbers_.resize(static_cast<std::size_t>(points_));
    const double step = dk();
    for (int j = 0; j < points_; ++j)
      wavenumbers_[static_cast<std::size_t>(j)] = step * (j <= points_ / 2 - 1 ? j : j - points_);
  }

  int dim_;
  double half_width_;
  int points_;
  std::vector<double> wavenumbers_;
};

// fn(flat_index, k[3]); unused components of k are zero.
template <class F>
inline void for_each_mode(const Grid& g, F&& fn) {
  const int m = g.points();
  double k[3] = {0.0, 0.0, 0.0};
  if (g.dim() == 1) {
    for (int j = 0; j < m; ++j) {
      k[0] = g.k_of(j);
      fn(static_cast<std::size_t>(j), k);
    }
  } else if (g.dim() == 2) {
    std::size_t flat = 0;
    for (int j0 = 0; j0 < m; ++j0) {
      k[0] = g.k_of(j0);
      for (int j1 = 0; j1 < m; ++j1, ++flat) {
        k[1] = g.k_of(j1);
        fn(flat, k);
      }
    }
  } else {
    std::size_t flat = 0;
    for (int j0 = 0; j0 < m; ++j0) {
      k[0] = g.k_of(j0);
      for (int j1 = 0; j1 < m; ++j1) {
        k[1] = g.k_of(j1);
        for (int j2 = 0; j2 < m; ++j2, ++flat) {
          k[2] = g.k_of(j2);
          fn(flat, k);
        }
      }
    }
  }
}

// fn(flat_index, x[3]); unused components of x are zero.
template <class F>
inline void for_each_point(const Grid& g, F&& fn) {
  const int m = g.points();
  double x[3] = {0.0, 0.0, 0.0};
  if (g.dim() == 1) {
    for (int j = 0; j < m; ++j) {
      x[0] = g.x_of(j);
      fn(static_cast<std::size_t>(j), x);
    }
  } else if (g.dim() == 2) {
    std::size_t flat = 0;
    for (int j0 = 0; j0 < m; ++j0) {
      x[0] = g.x_of(j0);
      for (int j1 = 0; j1 < m; ++j1, ++flat) {
        x[1] = g.x_of(j1);
        fn(flat, x);
      }
    }
  } else {
    std::size_t flat = 0;
    for (int j0 = 0; j0 < m; ++j0) {
      x[0] = g.x_of(j0);
      for (int j1 = 0; j1 < m; ++j1) {
        x[1] = g.x_of(j1);
        for (int j2 = 0; j2 < m; ++j2, ++flat) {
          x[2] = g.x_of(j2);
          fn(flat, x);
        }
      }
    }
  }
}

}  // namespace bgs
