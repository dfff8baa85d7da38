#include "torus_backend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ricci::detail {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Scratch {
  FftwBuffer<double> real;
  FftwBuffer<std::complex<double>> spec;
  FftwBuffer<std::complex<double>> spec2;
  std::size_t real_size = 0;
  std::size_t spec_size = 0;

  void reserve(std::size_t nreal, std::size_t nspec) {
    if (nreal > real_size) {
      real = alloc_real(nreal);
      real_size = nreal;
    }
    if (nspec > spec_size) {
      spec = alloc_complex(nspec);
      spec2 = alloc_complex(nspec);
      spec_size = nspec;
    }
  }
};

Scratch& thread_scratch() {
  thread_local Scratch scratch;
  return scratch;
}

}  // namespace

TorusBackend::TorusBackend(int n) : n_(n), half_(n / 2 + 1), cutoff_(n / 3) {
  const std::size_t modes = num_modes();
  eigen_.resize(modes);
  mask_.resize(modes);
  for (int a = 0; a < n_; ++a) {
    const int kx = wavenumber(a);
    for (int b = 0; b < half_; ++b) {
      const std::size_t m = static_cast<std::size_t>(a) * half_ + b;
      const double k2 = static_cast<double>(kx) * kx + static_cast<double>(b) * b;
      eigen_[m] = -kTwoPi * kTwoPi * k2;
      // Disc |k| <= N/3: inside the square 2/3-rule box, so quadratic
      // products of resolved fields still do not alias back into it.
      mask_[m] = (k2 <= static_cast<double>(cutoff_) * cutoff_) ? 1.0 : 0.0;
      resolved_eigen_.push_back(eigen_[m] * mask_[m]);
    }
  }

  auto real = alloc_real(num_nodes());
  auto spec = alloc_complex(modes);
  std::lock_guard lock(fftw_planner_mutex());
  // FFTW_ESTIMATE keeps the plan, and therefore the rounding, identical
  // across processes.
  forward_.reset(fftw_plan_dft_r2c_2d(n_, n_, real.get(), as_fftw(spec.get()),
                                      FFTW_ESTIMATE));
  backward_.reset(fftw_plan_dft_c2r_2d(n_, n_, as_fftw(spec.get()), real.get(),
                                       FFTW_ESTIMATE));
  if (!forward_ || !backward_) {
    throw std::runtime_error("FFTW plan creation failed");
  }
}

void TorusBackend::apply_multiplier(std::span<const double> in,
                                    std::span<const double> mult,
                                    std::span<double> out) const {
  const std::size_t nodes = num_nodes();
  const std::size_t modes = num_modes();
  Scratch& s = thread_scratch();
  s.reserve(nodes, modes);
  std::copy(in.begin(), in.end(), s.real.get());
  fftw_execute_dft_r2c(forward_.get(), s.real.get(), as_fftw(s.spec.get()));
  const double scale = 1.0 / static_cast<double>(nodes);
  for (std::size_t m = 0; m < modes; ++m) {
    s.spec[m] *= mult[m] * scale;
  }
  fftw_execute_dft_c2r(backward_.get(), as_fftw(s.spec.get()), s.real.get());
  std::copy(s.real.get(), s.real.get() + nodes, out.begin());
}

void TorusBackend::apply_multiplier_pair(std::span<const double> in,
                                         std::span<const double> mult1,
                                         std::span<double> out1,
                                         std::span<const double> mult2,
                                         std::span<double> out2) const {
  const std::size_t nodes = num_nodes();
  const std::size_t modes = num_modes();
  Scratch& s = thread_scratch();
  s.reserve(nodes, modes);
  std::copy(in.begin(), in.end(), s.real.get());
  fftw_execute_dft_r2c(forward_.get(), s.real.get(), as_fftw(s.spec.get()));
  const double scale = 1.0 / static_cast<double>(nodes);
  for (std::size_t m = 0; m < modes; ++m) {
    s.spec2[m] = s.spec[m] * (mult2[m] * scale);
    s.spec[m] *= mult1[m] * scale;
  }
  // c2r destroys its input, so each synthesis consumes its own buffer. The
  // plans assume FFTW-aligned arrays, hence the staging through s.real.
  fftw_execute_dft_c2r(backward_.get(), as_fftw(s.spec.get()), s.real.get());
  std::copy(s.real.get(), s.real.get() + nodes, out1.begin());
  fftw_execute_dft_c2r(backward_.get(), as_fftw(s.spec2.get()), s.real.get());
  std::copy(s.real.get(), s.real.get() + nodes, out2.begin());
}

std::vector<std::complex<double>> TorusBackend::spectrum(
    std::span<const double> in) const {
  const std::size_t nodes = num_nodes();
  auto real = alloc_real(nodes);
  auto spec = alloc_complex(num_modes());
  std::copy(in.begin(), in.end(), real.get());
  fftw_execute_dft_r2c(forward_.get(), real.get(), as_fftw(spec.get()));
  const double scale = 1.0 / static_cast<double>(nodes);
  std::vector<std::complex<double>> out(spec.get(), spec.get() + num_modes());
  for (auto& c : out) c *= scale;
  return out;
}

std::vector<double> TorusBackend::from_spectrum(
    std::vector<std::complex<double>> coeffs) const {
  auto real = alloc_real(num_nodes());
  auto spec = alloc_complex(num_modes());
  std::copy(coeffs.begin(), coeffs.end(), spec.get());
  fftw_execute_dft_c2r(backward_.get(), as_fftw(spec.get()), real.get());
  return std::vector<double>(real.get(), real.get() + num_nodes());
}

void TorusBackend::gradient(std::span<const double> f, std::span<double> fx,
                            std::span<double> fy) const {
  const auto c = spectrum(f);
  std::vector<std::complex<double>> cx(c.size()), cy(c.size());
  const std::complex<double> i2pi(0.0, kTwoPi);
  for (int a = 0; a < n_; ++a) {
    const int kx = wavenumber(a);
    for (int b = 0; b < half_; ++b) {
      const std::size_t m = static_cast<std::size_t>(a) * half_ + b;
      // Odd derivatives of the Nyquist modes are not representable.
      const bool nyq_x = (n_ % 2 == 0) && (a == n_ / 2);
      const bool nyq_y = (n_ % 2 == 0) && (b == n_ / 2);
      cx[m] = nyq_x ? 0.0 : i2pi * static_cast<double>(kx) * c[m];
      cy[m] = nyq_y ? 0.0 : i2pi * static_cast<double>(b) * c[m];
    }
  }
  const auto gx = from_spectrum(std::move(cx));
  const auto gy = from_spectrum(std::move(cy));
  std::copy(gx.begin(), gx.end(), fx.begin());
  std::copy(gy.begin(), gy.end(), fy.begin());
}

void TorusBackend::grad_dot(std::span<const double> f, std::span<const double> h,
                            std::span<double> out) const {
  const std::size_t nodes = num_nodes();
  std::vector<double> fx(nodes), fy(nodes);
  gradient(f, fx, fy);
  if (f.data() == h.data()) {
    for (std::size_t i = 0; i < nodes; ++i) out[i] = fx[i] * fx[i] + fy[i] * fy[i];
    return;
  }
  std::vector<double> hx(nodes), hy(nodes);
  gradient(h, hx, hy);
  for (std::size_t i = 0; i < nodes; ++i) out[i] = fx[i] * hx[i] + fy[i] * hy[i];
}

std::vector<double> TorusBackend::random_band_limited(std::mt19937_64& rng,
                                                      int band_limit) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::complex<double>> coeffs(num_modes(), 0.0);
  auto slot = [&](int kx, int ky) -> std::complex<double>& {
    const int a = kx >= 0 ? kx : kx + n_;
    return coeffs[static_cast<std::size_t>(a) * half_ + ky];
  };
  const int b2 = band_limit * band_limit;
  // Canonical order over the upper half plane so that the same seed gives
  // the same continuous field at every resolution.
  for (int ky = 0; ky <= band_limit; ++ky) {
    for (int kx = -band_limit; kx <= band_limit; ++kx) {
      if (ky == 0 && kx <= 0) continue;
      const int k2 = kx * kx + ky * ky;
      if (k2 > b2) continue;
      const double amp = 1.0 / ((1.0 + k2) * (1.0 + k2));
      const double re = normal(rng);
      const double im = normal(rng);
      const std::complex<double> c(amp * re, amp * im);
      slot(kx, ky) = c;
      if (ky == 0) slot(-kx, 0) = std::conj(c);
    }
  }
  return from_spectrum(std::move(coeffs));
}

std::vector<double> TorusBackend::resample_to(std::span<const double> in,
                                              const SpectralBackend& target) const {
  const auto* dst = dynamic_cast<const TorusBackend*>(&target);
  if (dst == nullptr) {
    throw std::invalid_argument("resample: target surface is not a torus");
  }
  const auto src = spectrum(in);
  // Keep |k| strictly below both Nyquist limits.
  const int keep = (std::min(n_, dst->n_) - 1) / 2;
  std::vector<std::complex<double>> out(dst->num_modes(), 0.0);
  for (int kx = -keep; kx <= keep; ++kx) {
    const int a_src = kx >= 0 ? kx : kx + n_;
    const int a_dst = kx >= 0 ? kx : kx + dst->n_;
    for (int ky = 0; ky <= keep; ++ky) {
      out[static_cast<std::size_t>(a_dst) * dst->half_ + ky] =
          src[static_cast<std::size_t>(a_src) * half_ + ky];
    }
  }
  return dst->from_spectrum(std::move(out));
}

}  // namespace ricci::detail
