#pragma once

#include <random>

#include "spinorbit/dynamics.hpp"

namespace testutil {

using spinorbit::PoincareStated;
using Vec3d = spinorbit::Vec3<double>;

inline std::mt19937_64 make_rng(unsigned seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3d random_vec3(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return Vec3d(uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi));
}

inline PoincareStated random_state(std::mt19937_64& rng) {
  PoincareStated x;
  x.p0 = uniform(rng, 0.5, 2.0);
  x.p = random_vec3(rng);
  x.l = random_vec3(rng);
  x.j = random_vec3(rng);
  return x;
}

}  // namespace testutil
