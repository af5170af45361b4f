#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "grid.hpp"

namespace bgs {

using cd = std::complex<double>;

// Discrete transform convention (unitary continuum normalization):
//   u_hat(k) = (2pi)^{-N/2} * integral u(x) e^{-i k x} dx
// realized as
//   u_hat(k_j) = (h^N / (2pi)^{N/2}) * (-1)^{sum of raw indices} * DFT(u)_j
// so that Parseval holds exactly: sum |u|^2 h^N = sum |u_hat|^2 dk^N.
// The (-1)^j phase accounts for the box offset x_0 = -L.

namespace detail {

struct FftPlans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

inline std::mutex& fft_mutex() {
  static std::mutex m;
  return m;
}

inline const FftPlans& plans_for(const Grid& g) {
  static std::map<std::pair<int, int>, FftPlans> cache;
  std::lock_guard<std::mutex> lock(fft_mutex());
  auto key = std::make_pair(g.dim(), g.points());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::vector<cd> a(g.size()), b(g.size());
  int n[3] = {g.points(), g.points(), g.points()};
  FftPlans p;
  p.fwd = fftw_plan_dft(g.dim(), n, reinterpret_cast<fftw_complex*>(a.data()),
                        reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                        FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft(g.dim(), n, reinterpret_cast<fftw_complex*>(a.data()),
                        reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
                        FFTW_ESTIMATE | FFTW_UNALIGNED);
  auto res = cache.emplace(key, p);
  return res.first->second;
}

// parity of the sum of per-axis indices of a flat row-major index
inline int index_parity(const Grid& g, std::size_t flat) {
  const auto m = static_cast<std::size_t>(g.points());
  int s = 0;
  for (int a = 0; a < g.dim(); ++a) {
    s += static_cast<int>(flat % m);
    flat /= m;
  }
  return s & 1;
}

inline void apply_checkerboard(const Grid& g, std::vector<cd>& v, double scale) {
  const int m = g.points();
  const std::size_t n = v.size();
  if (g.dim() == 1) {
    for (std::size_t j = 0; j < n; ++j) v[j] *= (j & 1) ? -scale : scale;
    return;
  }
  if (g.dim() == 2) {
    std::size_t flat = 0;
    for (int j0 = 0; j0 < m; ++j0)
      for (int j1 = 0; j1 < m; ++j1, ++flat) v[flat] *= ((j0 + j1) & 1) ? -scale : scale;
    return;
  }
  std::size_t flat = 0;
  for (int j0 = 0; j0 < m; ++j0)
    for (int j1 = 0; j1 < m; ++j1)
      for (int j2 = 0; j2 < m; ++j2, ++flat) v[flat] *= ((j0 + j1 + j2) & 1) ? -scale : scale;
}

}  // namespace detail

inline std::vector<cd> fft_forward(const Grid& g, const std::vector<cd>& phys) {
  const auto& plans = detail::plans_for(g);
  std::vector<cd> in(phys);
  std::vector<cd> out(g.size());
  fftw_execute_dft(plans.fwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale =
      std::pow(g.spacing(), g.dim()) / std::pow(2.0 * kPi, 0.5 * g.dim());
  detail::apply_checkerboard(g, out, scale);
  return out;
}

inline std::vector<cd> fft_inverse(const Grid& g, const std::vector<cd>& spec) {
  const auto& plans = detail::plans_for(g);
  std::vector<cd> in(spec);
  detail::apply_checkerboard(g, in, 1.0);
  std::vector<cd> out(g.size());
  fftw_execute_dft(plans.bwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = std::pow(g.dk(), g.dim()) / std::pow(2.0 * kPi, 0.5 * g.dim());
  for (auto& z : out) z *= scale;
  return out;
}

}  // namespace bgs
