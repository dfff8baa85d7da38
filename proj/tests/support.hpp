#pragma once

#include <cstdint>
#include <random>

#include "ricci/geometry.hpp"
#include "spectral_backend.hpp"

namespace ricci::testing {

// Mean-zero band-limited random field, coefficients decaying like
// (1 + |k|^2)^-2, then scaled to unit sup norm.
inline ScalarField random_field(const SurfacePtr& s, std::uint64_t seed, int band = 0) {
  std::mt19937_64 rng(seed);
  const int b = band > 0 ? band : s->backend().max_band_limit();
  auto v = s->backend().random_band_limited(rng, b);
  ScalarField f(s, std::move(v));
  const double sup = sup_norm(f);
  return sup > 0 ? f * (1.0 / sup) : f;
}

}  // namespace ricci::testing
