#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ricci::detail {

// Spectral machinery behind a BackgroundSurface. A "mode" is one storage slot
// of the backend's spectral representation: a complex half-spectrum entry on
// the torus, a real harmonic coefficient on the sphere. Multipliers are real
// and indexed by mode.
class SpectralBackend {
 public:
  virtual ~SpectralBackend() = default;

  virtual std::size_t num_nodes() const = 0;
  virtual std::size_t num_modes() const = 0;

  // Laplacian eigenvalue of each mode.
  virtual std::span<const double> eigenvalues() const = 0;
  // 1 for modes inside the dealiased space, 0 otherwise.
  virtual std::span<const double> resolved_mask() const = 0;
  // eigenvalues() * resolved_mask(), the Laplacian used by the flow.
  virtual std::span<const double> resolved_eigenvalues() const = 0;

  // out = synthesize(mult * analyze(in)); in and out may alias.
  virtual void apply_multiplier(std::span<const double> in,
                                std::span<const double> mult,
                                std::span<double> out) const = 0;

  // out1 = synthesize(mult1 * c), out2 = synthesize(mult2 * c) with
  // c = analyze(in), sharing one analysis. Outputs must not alias in.
  virtual void apply_multiplier_pair(std::span<const double> in,
                                     std::span<const double> mult1,
                                     std::span<double> out1,
                                     std::span<const double> mult2,
                                     std::span<double> out2) const = 0;

  // Pointwise <grad f, grad h>.
  virtual void grad_dot(std::span<const double> f, std::span<const double> h,
                        std::span<double> out) const = 0;

  // Gaussian coefficients with amplitude (1 + |k|^2)^(-2) on modes
  // 0 < |k| <= band_limit, drawn in a resolution-independent order.
  virtual std::vector<double> random_band_limited(std::mt19937_64& rng,
                                                  int band_limit) const = 0;

  // Largest band limit accepted by random_band_limited.
  virtual int max_band_limit() const = 0;

  virtual std::vector<double> resample_to(std::span<const double> in,
                                          const SpectralBackend& target) const = 0;
};

}  // namespace ricci::detail
