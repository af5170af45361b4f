#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "boostedgs/boostedgs.hpp"

using namespace bgs;

namespace {

Field random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cd> v(g.size());
  for (auto& z : v) z = cd(gauss(rng), gauss(rng));
  return Field(g, std::move(v));
}

Field gaussian_bump(const Grid& g, double sigma, double amp = 1.0) {
  return make_field(g, [&](const double* x) {
    double xx = 0.0;
    for (int a = 0; a < g.dim(); ++a) xx += x[a] * x[a];
    return cd(amp * std::exp(-xx / (2.0 * sigma * sigma)), 0.0);
  });
}

}  // namespace

TEST_CASE("grid invariants") {
  Grid g = Grid::make(2, 32.0, 256);
  REQUIRE(g.size() == 256u * 256u);
  REQUIRE(g.cell_volume() == Catch::Approx(std::pow(0.25, 2)));
  // wavenumber table: M entries, symmetric up to the unpaired Nyquist mode
  const auto& k = g.wavenumbers();
  REQUIRE(k.size() == 256u);
  for (int j = 1; j < 128; ++j) REQUIRE(k[size_t(j)] == Catch::Approx(-k[size_t(256 - j)]));
  REQUIRE(k[128] == Catch::Approx(-128.0 * g.dk()));

  REQUIRE_THROWS_AS(Grid::make(1, 8.0, 32), std::invalid_argument);
  REQUIRE_NOTHROW(Grid::make(1, 8.0, 32, /*smoke=*/true));
  REQUIRE_THROWS_AS(Grid::make(2, 8.0, 48), std::invalid_argument);
  REQUIRE_THROWS_AS(Grid::make(2, 8.0, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(Grid::make(2, -1.0, 32), std::invalid_argument);
}

TEST_CASE("Parseval round-trip on random fields") {
  for (int dim = 1; dim <= 3; ++dim) {
    Grid g = Grid::make(dim, 5.0, dim == 3 ? 16 : 64, dim == 1);
    for (unsigned s = 0; s < 5; ++s) {
      Field f = random_field(g, 100 + s);
      const auto spec = fft_forward(g, f.values());
      const auto back = fft_inverse(g, spec);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < back.size(); ++i) {
        num += std::norm(back[i] - f.values()[i]);
        den += std::norm(f.values()[i]);
      }
      REQUIRE(std::sqrt(num / den) < 1e-12);
      REQUIRE(std::abs(spectral_mass(f) - mass(f)) / mass(f) < 1e-12);
    }
  }
}

TEST_CASE("transform matches the analytic Gaussian") {
  // u = exp(-|x|^2 / (2 sigma^2))  =>  u_hat(k) = sigma^N exp(-sigma^2 |k|^2 / 2)
  Grid g = Grid::make(2, 16.0, 128);
  const double sigma = 1.3;
  Field f = gaussian_bump(g, sigma);
  const auto& spec = f.spectrum();
  double worst = 0.0;
  for_each_mode(g, [&](std::size_t i, const double* k) {
    const double kk = k[0] * k[0] + k[1] * k[1];
    if (kk > 36.0) return;  // compare only well-resolved modes
    const double expect = sigma * sigma * std::exp(-0.5 * sigma * sigma * kk);
    worst = std::max(worst, std::abs(spec[i].real() - expect) + std::abs(spec[i].imag()));
  });
  REQUIRE(worst < 1e-10);
}

TEST_CASE("apply_symbol on single modes") {
  Grid g = Grid::make(2, kPi, 64);
  Field mode = make_field(g, [](const double* x) { return std::exp(cd(0.0, x[0])); });

  SECTION("sqrt_lap eigenmode") {
    Field out = apply_symbol(mode, Symbol::sqrt_lap());
    double worst = 0.0;
    for (std::size_t i = 0; i < out.values().size(); ++i)
      worst = std::max(worst, std::abs(out.values()[i] - mode.values()[i]));
    REQUIRE(worst < 1e-12);
  }

  SECTION("drift kills constants") {
    Field cst = make_field(g, [](const double*) { return cd(1.0, 0.0); });
    Field out = apply_symbol(cst, Symbol::drift(Vec{0.5, 0.0, 0.0}));
    for (const auto& z : out.values()) REQUIRE(std::abs(z) < 1e-13);
  }

  SECTION("relativistic multiplier arithmetic") {
    Field out = apply_symbol(mode, Symbol::relativistic(std::sqrt(3.0), Vec{0.5, 0.0, 0.0}));
    // sqrt(1 + 3) - 0.5 = 1.5
    double worst = 0.0;
    for (std::size_t i = 0; i < out.values().size(); ++i)
      worst = std::max(worst, std::abs(out.values()[i] - 1.5 * mode.values()[i]));
    REQUIRE(worst < 1e-12);
  }

  SECTION("inv_shifted rejects inadmissible shift") {
    REQUIRE_THROWS_AS(apply_symbol(mode, Symbol::inv_shifted(1.0, Vec{0.0, 0.0, 0.0}, -2.0)),
                      std::invalid_argument);
  }

  SECTION("non-finite input rejected") {
    auto vals = mode.values();
    vals[7] = cd(std::numeric_limits<double>::quiet_NaN(), 0.0);
    REQUIRE_THROWS_AS(apply_symbol(Field(g, vals), Symbol::sqrt_lap()), std::invalid_argument);
  }
}

TEST_CASE("apply_symbol is linear and translation equivariant") {
  Grid g = Grid::make(2, 6.0, 32);
  Field f1 = random_field(g, 7);
  Field f2 = random_field(g, 8);
  Symbol s = Symbol::relativistic(0.7, Vec{0.2, -0.1, 0.0});

  SECTION("linearity") {
    std::vector<cd> sum(g.size());
    for (std::size_t i = 0; i < sum.size(); ++i)
      sum[i] = 2.0 * f1.values()[i] + cd(0.0, 1.5) * f2.values()[i];
    Field lhs = apply_symbol(Field(g, sum), s);
    Field a1 = apply_symbol(f1, s);
    Field a2 = apply_symbol(f2, s);
    double worst = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i)
      worst = std::max(worst,
                       std::abs(lhs.values()[i] - 2.0 * a1.values()[i] - cd(0.0, 1.5) * a2.values()[i]));
    REQUIRE(worst < 1e-10);
  }

  SECTION("commutes with grid shifts") {
    int cells[3] = {5, -3, 0};
    Field a = cyclic_shift(apply_symbol(f1, s), cells);
    Field b = apply_symbol(cyclic_shift(f1, cells), s);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
      worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    REQUIRE(worst < 1e-10);
  }
}

TEST_CASE("lp_norm quadrature examples") {
  Grid g = Grid::make(2, kPi, 64);
  REQUIRE(lp_norm(zero_field(g), 2.0) == 0.0);
  Field two = make_field(g, [](const double*) { return cd(2.0, 0.0); });
  REQUIRE(lp_norm(two, 2.0) == Catch::Approx(4.0 * kPi).epsilon(1e-12));
  Field mode = make_field(g, [](const double* x) { return std::exp(cd(0.0, x[0])); });
  REQUIRE(lp_norm(mode, 4.0) == Catch::Approx(std::pow(4.0 * kPi * kPi, 0.25)).epsilon(1e-12));
  // p = 2 agrees with the spectral Parseval norm
  Field f = random_field(g, 3);
  REQUIRE(std::abs(lp_pow(f, 2.0) - spectral_mass(f)) / lp_pow(f, 2.0) < 1e-12);
}

TEST_CASE("quadratic form examples and bounds") {
  Grid g = Grid::make(2, kPi, 64);
  Field mode = make_field(g, [](const double* x) { return std::exp(cd(0.0, x[0])); });
  const double fourpi2 = 4.0 * kPi * kPi;

  REQUIRE(form_tv(mode, Vec{0.5, 0.0, 0.0}) == Catch::Approx(0.5 * fourpi2).epsilon(1e-12));
  REQUIRE(form_tv(mode, Vec{0.0, 0.0, 0.0}) == Catch::Approx(fourpi2).epsilon(1e-12));
  REQUIRE(form_tv(zero_field(g), Vec{0.3, 0.0, 0.0}) == 0.0);
  REQUIRE_THROWS_AS(form_tv(mode, Vec{1.0, 0.0, 0.0}), std::invalid_argument);

  REQUIRE(form_tmv(mode, std::sqrt(3.0), Vec{0.5, 0.0, 0.0}) ==
          Catch::Approx(1.5 * fourpi2).epsilon(1e-12));
  Field cst = make_field(g, [](const double*) { return cd(0.7, 0.0); });
  REQUIRE(form_tmv(cst, 2.0, Vec{0.4, 0.2, 0.0}) ==
          Catch::Approx(2.0 * mass(cst)).epsilon(1e-12));

  SECTION("sandwich (1-|v|) H <= T_v <= (1+|v|) H for random fields") {
    for (unsigned s = 0; s < 20; ++s) {
      Field f = random_field(g, 40 + s);
      const Vec v{0.35, -0.2, 0.0};
      const double vn = vec_norm(v, 2);
      const double tv = form_tv(f, v);
      const double hh = hhalf_sq(f);
      REQUIRE(tv >= (1.0 - vn) * hh - 1e-12 * hh);
      REQUIRE(tv <= (1.0 + vn) * hh + 1e-12 * hh);
    }
  }

  SECTION("T_{m,v} reduces to T_v at m = 0 and dominates the rest mass") {
    for (unsigned s = 0; s < 1000; ++s) {
      Grid gs = Grid::make(2, 4.0, 16);
      Field f = random_field(gs, 1000 + s);
      const Vec v{0.3, 0.1, 0.0};
      REQUIRE(form_tmv(f, 0.0, v) == Catch::Approx(form_tv(f, v)).epsilon(1e-13));
      const double m = 0.5 + (s % 7) * 0.25;
      const double lower = std::sqrt(1.0 - vec_norm(v, 2) * vec_norm(v, 2)) * m * mass(f);
      REQUIRE(form_tmv(f, m, v) - lower >= -1e-12 * mass(f));
    }
  }
}

TEST_CASE("spectral Riesz integral") {
  Grid g = Grid::make(2, kPi, 64);
  Field mode = make_field(g, [](const double* x) { return std::exp(cd(0.0, 2.0 * x[0])); });
  REQUIRE(spectral_integral_I(mode) == Catch::Approx(2.0 * kPi * kPi).epsilon(1e-12));
  REQUIRE(spectral_integral_I(zero_field(g)) == 0.0);

  // analytic value for a Gaussian: I = pi^{3/2} sigma^3 in 2-D
  Grid g2 = Grid::make(2, 16.0, 128);
  const double sigma = 1.1;
  Field f = gaussian_bump(g2, sigma);
  const double expect = std::pow(kPi, 1.5) * std::pow(sigma, 3.0);
  REQUIRE(spectral_integral_I(f) == Catch::Approx(expect).epsilon(5e-4));
}

TEST_CASE("scaling law under exact power-of-two box rescale") {
  Grid g = Grid::make(2, 8.0, 64);
  Field f = gaussian_bump(g, 1.0);
  const Vec v{0.25, 0.0, 0.0};
  const double t0 = form_tv(f, v);
  const double lam1 = 1.7, lam2 = 2.0;
  Field w = reinterpret_rescaled(f, lam1, lam2);
  const double expect = lam1 * lam1 / std::pow(lam2, g.dim() - 1) * t0;
  REQUIRE(form_tv(w, v) == Catch::Approx(expect).epsilon(1e-10));
  // T_{m,v}(w) = (lam1^2 / lam2^{N-1}) T_{m/lam2, v}(f)
  const double tm = form_tmv(w, 0.8, v);
  const double tm_expect =
      lam1 * lam1 / std::pow(lam2, g.dim() - 1) * form_tmv(f, 0.8 / lam2, v);
  REQUIRE(tm == Catch::Approx(tm_expect).epsilon(1e-10));
}

TEST_CASE("field dump round-trip and corruption detection") {
  Grid g = Grid::make(2, 4.0, 16);
  Field f = random_field(g, 99);
  const std::string path = "test_dump_field.bin";
  dump_field(f, path);
  Field back = load_field(path);
  REQUIRE(back.grid() == g);
  for (std::size_t i = 0; i < f.values().size(); ++i)
    REQUIRE(back.values()[i] == f.values()[i]);

  // truncate and expect a load failure
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "short";
  }
  REQUIRE_THROWS_AS(load_field(path), std::runtime_error);
  std::remove(path.c_str());
  std::remove((path + ".json").c_str());
}

TEST_CASE("resample reproduces smooth fields on finer grids") {
  Grid g = Grid::make(2, 8.0, 64);
  Field f = gaussian_bump(g, 1.2);
  Grid fine = Grid::make(2, 6.0, 128);
  Field r = resample(f, fine);
  double worst = 0.0;
  for_each_point(fine, [&](std::size_t i, const double* x) {
    const double xx = x[0] * x[0] + x[1] * x[1];
    worst = std::max(worst, std::abs(r.values()[i] - std::exp(-xx / (2.0 * 1.44))));
  });
  REQUIRE(worst < 1e-5);
}
