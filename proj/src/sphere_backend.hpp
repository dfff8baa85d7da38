#pragma once

#include <memory>
#include <vector>

#include "fftw_support.hpp"
#include "spectral_backend.hpp"

namespace ricci::detail {

// Real spherical harmonics on the sphere of area 1, orthonormal for the
// normalized measure. Coefficient index l*(l+1) + m for m in [-l, l];
// m < 0 selects sin(|m| phi). Grid: L+1 Gauss-Legendre colatitudes (north
// to south) times 2(L+1) longitudes, flat index j*nlon + k.
//
// Transforms are direct associated-Legendre sums per order m, O(L^3).
class SphereBackend final : public SpectralBackend {
 public:
  // fine_grid = true builds the 2L companion used for exact pointwise
  // products in grad_dot.
  SphereBackend(int lmax, bool fine_grid = true);
  ~SphereBackend() override;

  int lmax() const { return lmax_; }
  int nlat() const { return nlat_; }
  int nlon() const { return nlon_; }
  std::span<const double> cos_colatitude() const { return x_; }
  std::span<const double> gauss_weights() const { return gw_; }

  std::size_t num_nodes() const override { return static_cast<std::size_t>(nlat_) * nlon_; }
  std::size_t num_modes() const override { return coeff_count(lmax_); }
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
  int max_band_limit() const override { return lmax_ / 3; }
  std::vector<double> resample_to(std::span<const double> in,
                                  const SpectralBackend& target) const override;

  static std::size_t coeff_count(int degree) {
    return static_cast<std::size_t>(degree + 1) * (degree + 1);
  }
  static std::size_t coeff_index(int l, int m) {
    return static_cast<std::size_t>(l * (l + 1) + m);
  }

  // Quadrature projection onto degree <= lmax.
  std::vector<double> analyze(std::span<const double> grid) const;
  // Evaluates a coefficient vector of any degree <= table_degree() at the
  // grid nodes.
  std::vector<double> synthesize(std::span<const double> coeffs) const;

  int table_degree() const { return table_degree_; }

  // Normalized associated Legendre value at latitude j, 0 <= m <= l.
  double plm(int j, int l, int m) const {
    return plm_[static_cast<std::size_t>(j) * plm_stride_ + plm_offset(l, m)];
  }

 private:
  std::size_t plm_offset(int l, int m) const {
    // Order-major packing: block m holds degrees m..table_degree.
    const std::size_t before =
        static_cast<std::size_t>(m) * (table_degree_ + 1) -
        static_cast<std::size_t>(m) * (m - 1) / 2;
    return before + static_cast<std::size_t>(l - m);
  }

  int lmax_;
  int nlat_;
  int nlon_;
  int table_degree_;
  std::size_t plm_stride_;
  std::vector<double> x_;
  std::vector<double> gw_;
  std::vector<double> plm_;
  std::vector<double> eigen_;
  std::vector<double> mask_;
  std::vector<double> resolved_eigen_;
  Plan forward_;
  Plan backward_;
  std::unique_ptr<SphereBackend> fine_;
};

// Fills the orthonormal (w.r.t. dx/2 on [-1,1]) associated Legendre values
// Pbar_lm(x) for 0 <= m <= l <= degree, order-major packed as in
// SphereBackend.
void normalized_legendre(int degree, double x, std::span<double> out);

}  // namespace ricci::detail
