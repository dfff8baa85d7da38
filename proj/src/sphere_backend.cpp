#include "sphere_backend.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ricci::detail {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

std::size_t packed_size(int degree) {
  return static_cast<std::size_t>(degree + 1) * (degree + 2) / 2;
}

}  // namespace

void normalized_legendre(int degree, double x, std::span<double> out) {
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  auto at = [&](int l, int m) -> double& {
    const std::size_t before = static_cast<std::size_t>(m) * (degree + 1) -
                               static_cast<std::size_t>(m) * (m - 1) / 2;
    return out[before + static_cast<std::size_t>(l - m)];
  };
  double pmm = 1.0;
  for (int m = 0; m <= degree; ++m) {
    if (m > 0) pmm *= s * std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    at(m, m) = pmm;
    if (m + 1 <= degree) at(m + 1, m) = std::sqrt(2.0 * m + 3.0) * x * pmm;
    for (int l = m + 2; l <= degree; ++l) {
      const double l2 = static_cast<double>(l) * l;
      const double m2 = static_cast<double>(m) * m;
      const double a = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
      const double lm1 = static_cast<double>(l - 1);
      const double b = std::sqrt((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0));
      at(l, m) = a * (x * at(l - 1, m) - b * at(l - 2, m));
    }
  }
}

namespace {

// GSL tabulates only a few orders exactly; for the others its nodes and
// weights carry errors near 1e-11. Two Newton steps on P_n restore full
// precision, and the weight follows from P_n'.
std::pair<double, double> polish_gauss_node(int n, double x) {
  double dp = 1.0;
  for (int iter = 0; iter < 3; ++iter) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    x -= p1 / dp;
  }
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {x, 2.0 / ((1.0 - x * x) * dp * dp)};
}

}  // namespace

SphereBackend::SphereBackend(int lmax, bool fine_grid)
    : lmax_(lmax),
      nlat_(lmax + 1),
      nlon_(2 * (lmax + 1)),
      table_degree_(fine_grid ? 2 * lmax : lmax),
      plm_stride_(packed_size(table_degree_)) {
  gsl_integration_glfixed_table* table =
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(nlat_));
  if (table == nullptr) throw std::runtime_error("Gauss-Legendre table allocation failed");
  std::vector<std::pair<double, double>> nodes(nlat_);
  for (int j = 0; j < nlat_; ++j) {
    double xi = 0.0, wi = 0.0;
    gsl_integration_glfixed_point(-1.0, 1.0, static_cast<std::size_t>(j), &xi, &wi, table);
    nodes[j] = polish_gauss_node(nlat_, xi);
  }
  gsl_integration_glfixed_table_free(table);
  // North to south: colatitude increasing.
  std::sort(nodes.begin(), nodes.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  x_.resize(nlat_);
  gw_.resize(nlat_);
  for (int j = 0; j < nlat_; ++j) {
    x_[j] = nodes[j].first;
    gw_[j] = nodes[j].second;
  }

  plm_.resize(plm_stride_ * nlat_);
  for (int j = 0; j < nlat_; ++j) {
    normalized_legendre(table_degree_, x_[j],
                        std::span<double>(plm_).subspan(j * plm_stride_, plm_stride_));
  }

  eigen_.resize(num_modes());
  mask_.assign(num_modes(), 1.0);
  for (int l = 0; l <= lmax_; ++l) {
    for (int m = -l; m <= l; ++m) {
      // -l(l+1)/r^2 with r^2 = 1/(4 pi).
      eigen_[coeff_index(l, m)] = -kFourPi * l * (l + 1.0);
    }
  }
  resolved_eigen_ = eigen_;

  const int nh = nlon_ / 2 + 1;
  auto real = alloc_real(num_nodes());
  auto spec = alloc_complex(static_cast<std::size_t>(nlat_) * nh);
  {
    std::lock_guard lock(fftw_planner_mutex());
    int n[] = {nlon_};
    forward_.reset(fftw_plan_many_dft_r2c(1, n, nlat_, real.get(), nullptr, 1, nlon_,
                                          as_fftw(spec.get()), nullptr, 1, nh,
                                          FFTW_ESTIMATE));
    backward_.reset(fftw_plan_many_dft_c2r(1, n, nlat_, as_fftw(spec.get()), nullptr,
                                           1, nh, real.get(), nullptr, 1, nlon_,
                                           FFTW_ESTIMATE));
  }
  if (!forward_ || !backward_) throw std::runtime_error("FFTW plan creation failed");

  if (fine_grid) fine_ = std::make_unique<SphereBackend>(2 * lmax_, false);
}

SphereBackend::~SphereBackend() = default;

std::vector<double> SphereBackend::analyze(std::span<const double> grid) const {
  const int nh = nlon_ / 2 + 1;
  auto real = alloc_real(num_nodes());
  auto spec = alloc_complex(static_cast<std::size_t>(nlat_) * nh);
  std::copy(grid.begin(), grid.end(), real.get());
  fftw_execute_dft_r2c(forward_.get(), real.get(), as_fftw(spec.get()));

  std::vector<double> coeffs(num_modes(), 0.0);
  const double root2 = std::numbers::sqrt2;
  for (int j = 0; j < nlat_; ++j) {
    // Weight g_j / 2 for the latitude, 1/nlon for the longitude mean.
    const double w = 0.5 * gw_[j] / nlon_;
    const std::complex<double>* row = spec.get() + static_cast<std::size_t>(j) * nh;
    for (int m = 0; m <= lmax_; ++m) {
      const double cos_sum = row[m].real();
      const double sin_sum = -row[m].imag();
      const double norm = (m == 0) ? 1.0 : root2;
      for (int l = m; l <= lmax_; ++l) {
        const double p = w * norm * plm(j, l, m);
        coeffs[coeff_index(l, m)] += p * cos_sum;
        if (m > 0) coeffs[coeff_index(l, -m)] += p * sin_sum;
      }
    }
  }
  return coeffs;
}

std::vector<double> SphereBackend::synthesize(std::span<const double> coeffs) const {
  const int degree = static_cast<int>(std::lround(std::sqrt(static_cast<double>(coeffs.size())))) - 1;
  if (coeff_count(degree) != coeffs.size() || degree > table_degree_) {
    throw std::invalid_argument("sphere synthesis: unsupported coefficient vector");
  }
  const double root2 = std::numbers::sqrt2;
  std::vector<double> grid(num_nodes(), 0.0);
  std::vector<double> sc(degree + 1), ss(degree + 1);

  if (degree < nlon_ / 2) {
    const int nh = nlon_ / 2 + 1;
    auto spec = alloc_complex(static_cast<std::size_t>(nlat_) * nh);
    auto real = alloc_real(num_nodes());
    for (int j = 0; j < nlat_; ++j) {
      std::complex<double>* row = spec.get() + static_cast<std::size_t>(j) * nh;
      std::fill(row, row + nh, std::complex<double>(0.0, 0.0));
      for (int m = 0; m <= degree; ++m) {
        double c = 0.0, s = 0.0;
        for (int l = m; l <= degree; ++l) {
          const double p = plm(j, l, m);
          c += coeffs[coeff_index(l, m)] * p;
          if (m > 0) s += coeffs[coeff_index(l, -m)] * p;
        }
        if (m == 0) {
          row[0] = c;
        } else {
          row[m] = std::complex<double>(0.5 * root2 * c, -0.5 * root2 * s);
        }
      }
    }
    fftw_execute_dft_c2r(backward_.get(), as_fftw(spec.get()), real.get());
    std::copy(real.get(), real.get() + num_nodes(), grid.begin());
    return grid;
  }

  // Orders beyond the longitudinal Nyquist limit: direct evaluation.
  std::vector<double> cos_table(nlon_), sin_table(nlon_);
  for (int k = 0; k < nlon_; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / nlon_;
    cos_table[k] = std::cos(phi);
    sin_table[k] = std::sin(phi);
  }
  for (int j = 0; j < nlat_; ++j) {
    for (int m = 0; m <= degree; ++m) {
      double c = 0.0, s = 0.0;
      for (int l = m; l <= degree; ++l) {
        const double p = plm(j, l, m);
        c += coeffs[coeff_index(l, m)] * p;
        if (m > 0) s += coeffs[coeff_index(l, -m)] * p;
      }
      sc[m] = (m == 0) ? c : root2 * c;
      ss[m] = root2 * s;
    }
    double* row = grid.data() + static_cast<std::size_t>(j) * nlon_;
    for (int k = 0; k < nlon_; ++k) {
      double v = sc[0];
      for (int m = 1; m <= degree; ++m) {
        const int idx = static_cast<int>((static_cast<long long>(m) * k) % nlon_);
        v += sc[m] * cos_table[idx] + ss[m] * sin_table[idx];
      }
      row[k] = v;
    }
  }
  return grid;
}

void SphereBackend::apply_multiplier(std::span<const double> in,
                                     std::span<const double> mult,
                                     std::span<double> out) const {
  auto coeffs = analyze(in);
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= mult[i];
  const auto grid = synthesize(coeffs);
  std::copy(grid.begin(), grid.end(), out.begin());
}

void SphereBackend::apply_multiplier_pair(std::span<const double> in,
                                          std::span<const double> mult1,
                                          std::span<double> out1,
                                          std::span<const double> mult2,
                                          std::span<double> out2) const {
  const auto coeffs = analyze(in);
  std::vector<double> scaled(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) scaled[i] = coeffs[i] * mult1[i];
  auto grid = synthesize(scaled);
  std::copy(grid.begin(), grid.end(), out1.begin());
  for (std::size_t i = 0; i < coeffs.size(); ++i) scaled[i] = coeffs[i] * mult2[i];
  grid = synthesize(scaled);
  std::copy(grid.begin(), grid.end(), out2.begin());
}

void SphereBackend::grad_dot(std::span<const double> f, std::span<const double> h,
                             std::span<double> out) const {
  if (!fine_) throw std::logic_error("grad_dot requires the fine companion grid");
  // <grad f, grad h> = (Delta(f h) - f Delta h - h Delta f) / 2, with the
  // product formed exactly on the 2L grid.
  const auto cf = analyze(f);
  const auto ch = analyze(h);
  const std::size_t nfine_modes = fine_->num_modes();

  auto padded = [&](const std::vector<double>& c, bool with_laplacian) {
    std::vector<double> p(nfine_modes, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) p[i] = with_laplacian ? c[i] * eigen_[i] : c[i];
    return p;
  };
  const auto f_fine = fine_->synthesize(padded(cf, false));
  const auto h_fine = fine_->synthesize(padded(ch, false));
  std::vector<double> prod(f_fine.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = f_fine[i] * h_fine[i];
  auto cprod = fine_->analyze(prod);
  const auto fine_eigen = fine_->eigenvalues();
  for (std::size_t i = 0; i < cprod.size(); ++i) cprod[i] *= fine_eigen[i];
  // Degree 2L series evaluated at the base nodes.
  const auto lap_prod = synthesize(cprod);

  std::vector<double> lf(cf), lh(ch);
  for (std::size_t i = 0; i < lf.size(); ++i) {
    lf[i] *= eigen_[i];
    lh[i] *= eigen_[i];
  }
  const auto fb = synthesize(cf);
  const auto hb = synthesize(ch);
  const auto lfb = synthesize(lf);
  const auto lhb = synthesize(lh);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * (lap_prod[i] - fb[i] * lhb[i] - hb[i] * lfb[i]);
  }
}

std::vector<double> SphereBackend::random_band_limited(std::mt19937_64& rng,
                                                       int band_limit) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> coeffs(num_modes(), 0.0);
  for (int l = 1; l <= band_limit; ++l) {
    const double k2 = l * (l + 1.0);
    const double amp = 1.0 / ((1.0 + k2) * (1.0 + k2));
    for (int m = -l; m <= l; ++m) coeffs[coeff_index(l, m)] = amp * normal(rng);
  }
  return synthesize(coeffs);
}

std::vector<double> SphereBackend::resample_to(std::span<const double> in,
                                               const SpectralBackend& target) const {
  const auto* dst = dynamic_cast<const SphereBackend*>(&target);
  if (dst == nullptr) {
    throw std::invalid_argument("resample: target surface is not a sphere");
  }
  const auto c = analyze(in);
  std::vector<double> out(dst->num_modes(), 0.0);
  const std::size_t keep = std::min(c.size(), out.size());
  std::copy(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(keep), out.begin());
  return dst->synthesize(out);
}

}  // namespace ricci::detail
