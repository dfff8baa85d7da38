#include "ricci/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sphere_backend.hpp"
#include "torus_backend.hpp"

namespace ricci {

namespace detail {
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

std::string to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::FlatTorus:
      return "torus";
    case SurfaceKind::RoundSphere:
      return "sphere";
  }
  throw std::invalid_argument("unsupported surface kind");
}

SurfaceKind surface_kind_from_string(const std::string& name) {
  if (name == "torus" || name == "flat_torus") return SurfaceKind::FlatTorus;
  if (name == "sphere" || name == "round_sphere") return SurfaceKind::RoundSphere;
  throw std::invalid_argument("unsupported surface kind '" + name +
                              "' (expected torus or sphere)");
}

std::shared_ptr<const BackgroundSurface> BackgroundSurface::build(SurfaceKind kind,
                                                                  int resolution) {
  return std::shared_ptr<const BackgroundSurface>(new BackgroundSurface(kind, resolution));
}

BackgroundSurface::BackgroundSurface(SurfaceKind kind, int resolution)
    : kind_(kind), resolution_(resolution), kbar_(0.0) {
  switch (kind) {
    case SurfaceKind::FlatTorus: {
      if (resolution < kMinTorusResolution) {
        throw std::invalid_argument("torus resolution must be >= 8, got " +
                                    std::to_string(resolution));
      }
      const int n = resolution;
      const std::size_t nodes = static_cast<std::size_t>(n) * n;
      weights_.assign(nodes, 1.0 / static_cast<double>(nodes));
      coord1_.resize(nodes);
      coord2_.resize(nodes);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          coord1_[static_cast<std::size_t>(i) * n + j] = static_cast<double>(i) / n;
          coord2_[static_cast<std::size_t>(i) * n + j] = static_cast<double>(j) / n;
        }
      }
      kbar_ = 0.0;
      backend_ = std::make_unique<detail::TorusBackend>(n);
      break;
    }
    case SurfaceKind::RoundSphere: {
      if (resolution < kMinSphereResolution || resolution > kMaxSphereResolution) {
        throw std::invalid_argument("sphere degree cutoff must lie in [7, 64], got " +
                                    std::to_string(resolution));
      }
      auto sphere = std::make_unique<detail::SphereBackend>(resolution);
      const int nlat = sphere->nlat();
      const int nlon = sphere->nlon();
      const auto x = sphere->cos_colatitude();
      const auto gw = sphere->gauss_weights();
      weights_.resize(sphere->num_nodes());
      coord1_.resize(sphere->num_nodes());
      coord2_.resize(sphere->num_nodes());
      for (int j = 0; j < nlat; ++j) {
        for (int k = 0; k < nlon; ++k) {
          const std::size_t idx = static_cast<std::size_t>(j) * nlon + k;
          weights_[idx] = 0.5 * gw[j] / nlon;
          coord1_[idx] = std::acos(x[j]);
          coord2_[idx] = 2.0 * std::numbers::pi * k / nlon;
        }
      }
      // Gauss-Bonnet with unit area: K * 1 = 2 pi chi = 4 pi.
      kbar_ = 4.0 * std::numbers::pi;
      backend_ = std::move(sphere);
      break;
    }
    default:
      throw std::invalid_argument("unsupported surface kind");
  }
}

BackgroundSurface::~BackgroundSurface() = default;

int BackgroundSurface::euler_characteristic() const {
  return kind_ == SurfaceKind::FlatTorus ? 0 : 2;
}

int BackgroundSurface::resolved_cutoff() const {
  return kind_ == SurfaceKind::FlatTorus ? resolution_ / 3 : resolution_;
}

double BackgroundSurface::lambda_max() const {
  const double k = resolved_cutoff();
  if (kind_ == SurfaceKind::FlatTorus) {
    const double two_pi = 2.0 * std::numbers::pi;
    return two_pi * two_pi * k * k;
  }
  return 4.0 * std::numbers::pi * k * (k + 1.0);
}

std::string BackgroundSurface::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << ":" << resolution_;
  return os.str();
}

// ---------------------------------------------------------------------------
// ScalarField

namespace {

void require_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::domain_error("scalar field value is not finite");
  }
}

}  // namespace

ScalarField::ScalarField(SurfacePtr surface)
    : surface_(std::move(surface)) {
  if (!surface_) throw std::invalid_argument("scalar field needs a surface");
  values_.assign(surface_->num_nodes(), 0.0);
}

ScalarField::ScalarField(SurfacePtr surface, std::vector<double> values)
    : surface_(std::move(surface)), values_(std::move(values)) {
  if (!surface_) throw std::invalid_argument("scalar field needs a surface");
  if (values_.size() != surface_->num_nodes()) {
    throw std::invalid_argument("scalar field has " + std::to_string(values_.size()) +
                                " values, surface " + surface_->describe() + " has " +
                                std::to_string(surface_->num_nodes()) + " nodes");
  }
  require_finite(values_);
}

ScalarField ScalarField::constant(SurfacePtr surface, double c) {
  const std::size_t n = surface->num_nodes();
  return ScalarField(std::move(surface), std::vector<double>(n, c));
}

ScalarField ScalarField::from_function(SurfacePtr surface,
                                       const std::function<double(double, double)>& fn) {
  const auto c1 = surface->coord1();
  const auto c2 = surface->coord2();
  std::vector<double> v(surface->num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(c1[i], c2[i]);
  return ScalarField(std::move(surface), std::move(v));
}

ScalarField ScalarField::map(const std::function<double(double)>& fn) const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), fn);
  return ScalarField(surface_, std::move(v));
}

bool ScalarField::same_surface(const ScalarField& other) const {
  return surface_->same_grid(*other.surface_);
}

void require_same_surface(const ScalarField& a, const ScalarField& b) {
  if (!a.same_surface(b)) {
    throw std::invalid_argument("fields live on different surfaces (" +
                                a.surface().describe() + " vs " +
                                b.surface().describe() + ")");
  }
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_surface(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  require_finite(values_);
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_surface(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  require_finite(values_);
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& other) {
  require_same_surface(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= other.values_[i];
  require_finite(values_);
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  require_finite(values_);
  return *this;
}

ScalarField& ScalarField::operator+=(double s) {
  for (double& v : values_) v += s;
  require_finite(values_);
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }
ScalarField operator+(ScalarField a, double s) { return a += s; }
ScalarField operator-(ScalarField a, double s) { return a += -s; }

// ---------------------------------------------------------------------------
// Operators and norms

ScalarField laplacian(const ScalarField& f) {
  const auto& backend = f.surface().backend();
  std::vector<double> out(f.size());
  backend.apply_multiplier(f.values(), backend.eigenvalues(), out);
  return ScalarField(f.surface_ptr(), std::move(out));
}

ScalarField grad_dot(const ScalarField& f, const ScalarField& h) {
  require_same_surface(f, h);
  std::vector<double> out(f.size());
  f.surface().backend().grad_dot(f.values(), h.values(), out);
  return ScalarField(f.surface_ptr(), std::move(out));
}

ScalarField grad_norm_sq(const ScalarField& f) { return grad_dot(f, f); }

double integrate(const ScalarField& f) {
  const auto w = f.surface().weights();
  const auto v = f.values();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i];
  return s;
}

double inner(const ScalarField& f, const ScalarField& h) {
  require_same_surface(f, h);
  const auto w = f.surface().weights();
  const auto a = f.values();
  const auto b = h.values();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

double lp_norm(const ScalarField& f, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("lp_norm requires finite p >= 1");
  }
  const auto w = f.surface().weights();
  const auto v = f.values();
  const double scale = sup_norm(f);
  if (scale == 0.0) return 0.0;
  // Scaling by the sup norm keeps |f|^p representable for large p.
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::pow(std::abs(v[i]) / scale, p);
  return scale * std::pow(s, 1.0 / p);
}

double h1_norm(const ScalarField& f) {
  const double l2 = inner(f, f);
  const double grad = integrate(grad_norm_sq(f));
  return std::sqrt(l2 + grad);
}

double sup_norm(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

ScalarField project_resolved(const ScalarField& f) {
  const auto& backend = f.surface().backend();
  std::vector<double> out(f.size());
  backend.apply_multiplier(f.values(), backend.resolved_mask(), out);
  return ScalarField(f.surface_ptr(), std::move(out));
}

ScalarField resample(const ScalarField& f, const SurfacePtr& target) {
  if (f.surface().kind() != target->kind()) {
    throw std::invalid_argument("resample: surfaces of different kinds");
  }
  if (f.surface().same_grid(*target)) return ScalarField(target, std::vector<double>(f.values().begin(), f.values().end()));
  return ScalarField(target, f.surface().backend().resample_to(f.values(), target->backend()));
}

}  // namespace ricci
