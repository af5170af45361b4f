#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "boostedgs/boostedgs.hpp"

using namespace bgs;

namespace {

Field random_bump(const Grid& g, unsigned seed, double width = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double cx = 0.4 * gauss(rng), cy = 0.4 * gauss(rng);
  const double amp_re = 1.0 + 0.3 * gauss(rng), amp_im = 0.3 * gauss(rng);
  const double kx = gauss(rng), ky = gauss(rng);
  return make_field(g, [&](const double* x) {
    const double dx = x[0] - cx, dy = g.dim() > 1 ? x[1] - cy : 0.0;
    const double env = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
    return cd(amp_re, amp_im) * env * std::exp(cd(0.0, kx * dx + ky * dy));
  });
}

Params base_params(int dim = 2) {
  Params p;
  p.dim = dim;
  p.mass = 0.8;
  p.velocity = Vec{0.2, -0.1, 0.0};
  p.mu = 0.7;
  p.q_exp = 0.5;
  p.target_mass = 1.0;
  return p;
}

}  // namespace

TEST_CASE("parameter validation") {
  Params p = base_params();
  REQUIRE_NOTHROW(p.validate());
  Params bad = p;
  bad.velocity = Vec{1.0, 0.0, 0.0};
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.q_exp = 1.0;  // 2/N for N=2
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.q_exp = 0.0;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.target_mass = 0.0;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.mass = -0.1;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("energy of simple fields") {
  Grid g = Grid::make(2, kPi, 64);

  SECTION("zero field") {
    Params p = base_params();
    EnergyBreakdown e = energy(zero_field(g), p);
    REQUIRE(e.kinetic == 0.0);
    REQUIRE(e.power_crit == 0.0);
    REQUIRE(e.power_sub == 0.0);
    REQUIRE(e.total == 0.0);
  }

  SECTION("single mode, m = 0, v = 0, mu = 0: E = 2 pi^2 / 3") {
    Params p;
    p.dim = 2;
    p.mass = 0.0;
    p.mu = 0.0;
    p.q_exp = 0.5;
    p.target_mass = 4.0 * kPi * kPi;
    Field mode = make_field(g, [](const double* x) { return std::exp(cd(0.0, x[0])); });
    EnergyBreakdown e = energy(mode, p);
    REQUIRE(e.total == Catch::Approx(2.0 * kPi * kPi / 3.0).epsilon(1e-12));
    REQUIRE(e.total == Catch::Approx(e.kinetic - e.power_crit - e.power_sub).epsilon(1e-15));
  }

  SECTION("phase invariance") {
    Params p = base_params();
    Field f = random_bump(g, 5);
    const double e0 = energy(f, p).total;
    for (double theta : {0.3, 1.7, -2.2}) {
      const double e1 = energy(scaled_copy(f, std::exp(cd(0.0, theta))), p).total;
      REQUIRE(std::abs(e1 - e0) <= 1e-12 * std::abs(e0));
    }
  }

  SECTION("sign structure: mu > 0 gives power_sub > 0 for nonzero fields") {
    Params p = base_params();
    Field f = random_bump(g, 11);
    REQUIRE(energy(f, p).power_sub > 0.0);
  }
}

TEST_CASE("gradient agrees with central finite differences") {
  Grid g = Grid::make(2, 8.0, 32);
  Params p = base_params();
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    Field f = random_bump(g, 1000 + rep);
    Field h = random_bump(g, 2000 + rep, 0.8);
    Field grad = energy_gradient(f, p);
    const double dir = inner_real(grad, h);
    const double eps = 1e-5;
    auto e_at = [&](double s) {
      std::vector<cd> v(f.values());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += s * h.values()[i];
      return energy(Field(g, std::move(v)), p).total;
    };
    const double fd = (e_at(eps) - e_at(-eps)) / (2.0 * eps);
    worst = std::max(worst, std::abs(fd - dir) / std::max(1.0, std::abs(dir)));
  }
  REQUIRE(worst <= 1e-5);
}

TEST_CASE("gradient on a zero field is zero") {
  Grid g = Grid::make(2, 4.0, 16);
  Field gz = energy_gradient(zero_field(g), base_params());
  for (const auto& z : gz.values()) REQUIRE(std::abs(z) == 0.0);
}

TEST_CASE("lagrange multiplier") {
  Grid g = Grid::make(2, kPi, 64);

  SECTION("plane wave with m = 0, v = 0, mu = 0 has lambda = 0") {
    Params p;
    p.dim = 2;
    p.mass = 0.0;
    p.mu = 0.0;
    p.q_exp = 0.5;
    p.target_mass = 4.0 * kPi * kPi;
    Field mode = make_field(g, [](const double* x) { return std::exp(cd(0.0, x[0])); });
    REQUIRE(std::abs(lagrange_multiplier(mode, p)) < 1e-12);
  }

  SECTION("amplitude homogeneity at mu = 0") {
    Params p = base_params();
    p.mu = 0.0;
    Field f = random_bump(g, 31);
    const double t = form_tmv(f, p.mass, p.velocity);
    const double crit = lp_pow(f, 3.0);
    const double a = mass(f);
    for (double c : {0.5, 2.0, 3.7}) {
      const double expect = (c * c * t - std::pow(c, 3.0) * crit) / (c * c * a);
      REQUIRE(lagrange_multiplier(scaled_copy(f, cd(c, 0.0)), p) ==
              Catch::Approx(expect).epsilon(1e-11));
    }
  }

  SECTION("zero field rejected") {
    REQUIRE_THROWS_AS(lagrange_multiplier(zero_field(g), base_params()), std::invalid_argument);
  }
}

TEST_CASE("Euler-Lagrange residual") {
  Grid g = Grid::make(2, 8.0, 32);
  Params p = base_params();
  Field f = random_bump(g, 77);

  SECTION("strictly positive off solutions") { REQUIRE(el_residual(f, p, 0.0) > 0.0); }

  SECTION("gauge invariance") {
    const double r0 = el_residual(f, p, 0.4);
    for (double theta : {0.9, -1.3}) {
      const double r1 = el_residual(scaled_copy(f, std::exp(cd(0.0, theta))), p, 0.4);
      REQUIRE(r1 == Catch::Approx(r0).epsilon(1e-10));
    }
  }

  SECTION("zero field rejected") {
    REQUIRE_THROWS_AS(el_residual(zero_field(g), p, 0.0), std::invalid_argument);
  }

  SECTION("consistent with the projection multiplier") {
    const double lam = lagrange_multiplier(f, p);
    Field grad = energy_gradient(f, p);
    double s = 0.0;
    for (std::size_t i = 0; i < grad.values().size(); ++i)
      s += std::norm(grad.values()[i] - lam * f.values()[i]);
    const double direct = std::sqrt(s * g.cell_volume()) / lp_norm(f, 2.0);
    REQUIRE(el_residual(f, p, -lam) == Catch::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("pohozaev residuals separate non-solutions") {
  Grid g = Grid::make(2, 8.0, 64);
  Field bump = make_field(g, [](const double* x) {
    return cd(std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0), 0.0);
  });
  auto [r1, r2] = pohozaev_residuals(bump, Vec{0.0, 0.0, 0.0});
  REQUIRE((r1 > 0.1 || r2 > 0.1));
  REQUIRE_THROWS_AS(pohozaev_residuals(zero_field(g), Vec{0, 0, 0}), std::invalid_argument);
}
