#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ricci {

enum class SurfaceKind : std::int64_t { FlatTorus = 0, RoundSphere = 1 };

std::string to_string(SurfaceKind kind);
SurfaceKind surface_kind_from_string(const std::string& name);

namespace detail {
class SpectralBackend;
}

/// Constant-curvature background metric of unit area together with its
/// quadrature rule and spectral Laplace-Beltrami operator.
///
/// FlatTorus: unit square with periodic identifications, N x N uniform grid.
/// RoundSphere: radius r with 4 pi r^2 = 1, harmonic cutoff L,
/// (L+1) Gauss-Legendre latitudes x 2(L+1) equispaced longitudes.
///
/// Immutable after construction; share it through SurfacePtr.
class BackgroundSurface {
 public:
  static constexpr int kMinTorusResolution = 8;
  static constexpr int kMinSphereResolution = 7;
  static constexpr int kMaxSphereResolution = 64;

  static std::shared_ptr<const BackgroundSurface> build(SurfaceKind kind,
                                                        int resolution);

  SurfaceKind kind() const { return kind_; }
  int resolution() const { return resolution_; }
  /// Gauss curvature of the background, 2 pi chi for unit area.
  double kbar() const { return kbar_; }
  int euler_characteristic() const;

  std::size_t num_nodes() const { return weights_.size(); }
  /// Quadrature weights; they sum to the background area, 1.
  std::span<const double> weights() const { return weights_; }

  /// Node coordinates. Torus: (x, y) in [0,1)^2. Sphere: (theta, phi) with
  /// theta the colatitude.
  std::span<const double> coord1() const { return coord1_; }
  std::span<const double> coord2() const { return coord2_; }

  /// Largest spectral index kept by the dealiased flow: floor(N/3) on the
  /// torus (radius of the disc |k| <= N/3), L on the sphere.
  int resolved_cutoff() const;
  /// Largest |eigenvalue| of the Laplacian on the resolved space.
  double lambda_max() const;

  bool same_grid(const BackgroundSurface& other) const {
    return this == &other ||
           (kind_ == other.kind_ && resolution_ == other.resolution_);
  }

  std::string describe() const;

  const detail::SpectralBackend& backend() const { return *backend_; }

  ~BackgroundSurface();
  BackgroundSurface(const BackgroundSurface&) = delete;
  BackgroundSurface& operator=(const BackgroundSurface&) = delete;

 private:
  BackgroundSurface(SurfaceKind kind, int resolution);

  SurfaceKind kind_;
  int resolution_;
  double kbar_;
  std::vector<double> weights_;
  std::vector<double> coord1_;
  std::vector<double> coord2_;
  std::unique_ptr<detail::SpectralBackend> backend_;
};

using SurfacePtr = std::shared_ptr<const BackgroundSurface>;

inline SurfacePtr build_surface(SurfaceKind kind, int resolution) {
  return BackgroundSurface::build(kind, resolution);
}

/// Real function sampled at the nodes of one surface. Values are always
/// finite; construction from non-finite data throws std::domain_error.
class ScalarField {
 public:
  explicit ScalarField(SurfacePtr surface);
  ScalarField(SurfacePtr surface, std::vector<double> values);

  static ScalarField constant(SurfacePtr surface, double c);
  /// Samples fn(coord1, coord2) at every node.
  static ScalarField from_function(
      SurfacePtr surface, const std::function<double(double, double)>& fn);

  const BackgroundSurface& surface() const { return *surface_; }
  const SurfacePtr& surface_ptr() const { return surface_; }

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Moves the storage out; the field is left empty.
  std::vector<double> take_values() && { return std::move(values_); }

  ScalarField map(const std::function<double(double)>& fn) const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(const ScalarField& other);
  ScalarField& operator*=(double s);
  ScalarField& operator+=(double s);

  bool same_surface(const ScalarField& other) const;

 private:
  SurfacePtr surface_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator*(ScalarField a, double s);
ScalarField operator+(ScalarField a, double s);
ScalarField operator-(ScalarField a, double s);

/// Throws std::invalid_argument unless both fields live on the same grid.
void require_same_surface(const ScalarField& a, const ScalarField& b);

ScalarField laplacian(const ScalarField& f);
/// Pointwise |grad f|^2 with respect to the background metric.
ScalarField grad_norm_sq(const ScalarField& f);
/// Pointwise <grad f, grad h>.
ScalarField grad_dot(const ScalarField& f, const ScalarField& h);

double integrate(const ScalarField& f);
/// Quadrature L^2 inner product.
double inner(const ScalarField& f, const ScalarField& h);

double lp_norm(const ScalarField& f, double p);
double h1_norm(const ScalarField& f);
double sup_norm(const ScalarField& f);

/// Orthogonal projection onto the resolved (dealiased) spectral space.
ScalarField project_resolved(const ScalarField& f);

/// Spectral truncation / zero padding onto another surface of the same kind.
ScalarField resample(const ScalarField& f, const SurfacePtr& target);

}  // namespace ricci
