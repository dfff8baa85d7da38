#pragma once

#include <complex>
#include <vector>

#include "fftw_support.hpp"
#include "spectral_backend.hpp"

namespace ricci::detail {

// Fourier pseudo-spectral backend on the periodic unit square. Node (i, j)
// sits at (x, y) = (i/N, j/N) with flat index i*N + j. Modes are the entries
// of the FFTW r2c half spectrum, shape N x (N/2 + 1).
class TorusBackend final : public SpectralBackend {
 public:
  explicit TorusBackend(int n);

  int n() const { return n_; }
  int cutoff() const { return cutoff_; }

  std::size_t num_nodes() const override { return static_cast<std::size_t>(n_) * n_; }
  std::size_t num_modes() const override { return static_cast<std::size_t>(n_) * half_; }
  std::span<const double> eigenvalues() const override { return eigen_; }
  std::span<const double> resolved_mask() const override { return mask_; }
  std::span<const double> resolved_eigenvalues() const override { return resolved_eigen_; }

  void apply_multiplier(std::span<const double> in, std::span<const double> mult,
                        std::span<double> out) const override;
  void apply_multiplier_pair(std::span<const double> in, std::span<const double> mult1,
                             std::span<double> out1, std::span<const double> mult2,
                             std::span<double> out2) const override;
  void grad_dot(std::span<const double> f, std::span<const double> h,
                std::span<double> out) const override;
  std::vector<double> random_band_limited(std::mt19937_64& rng,
                                          int band_limit) const override;
  int max_band_limit() const override { return cutoff_; }
  std::vector<double> resample_to(std::span<const double> in,
                                  const SpectralBackend& target) const override;

  // Signed wavenumber of half-spectrum row a (first axis).
  int wavenumber(int a) const { return a <= n_ / 2 ? a : a - n_; }

  // Normalized Fourier coefficients c_k with f(x) = sum_k c_k e^{2 pi i k.x}.
  std::vector<std::complex<double>> spectrum(std::span<const double> in) const;
  // Inverse of spectrum(); the half spectrum must be Hermitian-consistent.
  std::vector<double> from_spectrum(std::vector<std::complex<double>> coeffs) const;

 private:
  void gradient(std::span<const double> f, std::span<double> fx,
                std::span<double> fy) const;

  int n_;
  int half_;
  int cutoff_;
  std::vector<double> eigen_;
  std::vector<double> mask_;
  std::vector<double> resolved_eigen_;
  Plan forward_;
  Plan backward_;
};

}  // namespace ricci::detail
