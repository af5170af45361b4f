#pragma once

#include <cmath>
#include <stdexcept>

#include "field.hpp"

namespace bgs {

// Physical parameter bundle: dimension N, particle mass m, frame velocity v,
// subcritical coupling mu with exponent q, and the constraint mass a.
struct Params {
  int dim = 2;
  double mass = 0.0;        // m >= 0
  Vec velocity{0, 0, 0};    // |v| < 1
  double mu = 0.0;
  double q_exp = 0.5;       // 0 < q < 2/N
  double target_mass = 1.0; // a > 0

  double speed() const { return vec_norm(velocity, dim); }

  void validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("Params: dim must be in {1,2,3}");
    if (!(mass >= 0.0) || !std::isfinite(mass))
      throw std::invalid_argument("Params: mass must be >= 0");
    if (!(speed() < 1.0)) throw std::invalid_argument("Params: |v| must be < 1");
    if (!(q_exp > 0.0 && q_exp < 2.0 / dim))
      throw std::invalid_argument("Params: q must satisfy 0 < q < 2/N");
    if (!(target_mass > 0.0) || !std::isfinite(target_mass))
      throw std::invalid_argument("Params: target mass must be positive");
    if (!std::isfinite(mu)) throw std::invalid_argument("Params: mu must be finite");
  }
};

}  // namespace bgs
