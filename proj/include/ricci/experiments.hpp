#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ricci/diagnostics.hpp"
#include "ricci/estimates.hpp"
#include "ricci/flow.hpp"
#include "ricci/geometry.hpp"

namespace ricci {

struct ExperimentSpec {
  std::string name = "experiment";
  SurfaceKind surface = SurfaceKind::FlatTorus;
  int resolution = 64;
  std::uint64_t seed = 42;
  double initial_amplitude = 0.3;
  /// 0 selects the largest band limit the surface accepts.
  int band_limit = 0;
  std::vector<double> dt_levels{1e-3};
  double t_end = 1.0;
  /// Output directory; nothing is written when empty.
  std::string outputs;
  bool plots = false;

  /// Uniqueness: contraction horizons, evaluated on the finest dt pair.
  std::vector<double> horizons{0.4, 0.2, 0.1, 0.05};
  /// Uniqueness: 0 pairs RK4 against IMEX1 on the same grid; a positive value
  /// pairs RK4 runs on this resolution against the reference grid instead.
  int candidate_resolution = 0;
  /// Uniqueness: candidate integrator when pairing integrators.
  Integrator candidate = Integrator::IMEX1;
  double sobolev_constant = 1.0;

  /// Inequalities.
  int samples = 1000;
  int trajectories = 20;
  std::vector<int> resolutions{64, 128};
  std::vector<double> moments{1, 2, 4, 8};
  bool constant_samples = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Documented defaults of each recipe: "uniqueness", "convergence",
/// "manufactured", "inequalities" or "simulate".
ExperimentSpec default_spec(const std::string& experiment);

/// "key = value" lines for every field.
void write_spec_kv(std::ostream& os, const ExperimentSpec& spec);

/// Raised when a run inside an experiment trips the blow-up guard. Partial
/// outputs have been written by the time it propagates.
class ExperimentAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;
  std::size_t points = 0;
  /// "ok", or why no fit was made ("already constant", "exact",
  /// "insufficient data"), or "non-decay" for a decay fit with slope >= 0.
  std::string status = "ok";
};

/// Least squares line y = intercept + slope x with Pearson correlation.
FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Gaussian spectral coefficients decaying like (1 + |k|^2)^-2 up to
/// band_limit, scaled to sup norm amplitude, then shifted to unit volume.
/// band_limit 0 means the largest admissible value.
ScalarField random_initial_data(const SurfacePtr& surface, std::uint64_t seed, int band_limit,
                                double amplitude);

/// Number of worker threads: RICCI_THREADS if set and positive, otherwise the
/// hardware concurrency.
int thread_budget();

struct UniquenessLevel {
  double dt = 0.0;
  /// max over stored times of sup |u - v|.
  double discrepancy = 0.0;
  double psi_max = 0.0;
  double wminus_sup = 0.0;
  bool psi_bound_satisfied = false;
};

struct UniquenessResult {
  std::vector<UniquenessLevel> levels;
  /// log discrepancy against log dt.
  FitResult fit;
  std::vector<EstimateReport> ladder;
};

UniquenessResult uniqueness_experiment(const ExperimentSpec& spec);

struct ConvergenceResult {
  std::vector<DiagnosticsRecord> records;
  /// log curv_dev_linf against t on [t_end / 2, t_end].
  FitResult fit;
};

ConvergenceResult convergence_to_constant_curvature(const ExperimentSpec& spec);

struct ManufacturedLevel {
  double dt = 0.0;
  /// sup |u(t_end) - u*(t_end)|.
  double error = 0.0;
};

struct ManufacturedResult {
  std::vector<ManufacturedLevel> rk4;
  std::vector<ManufacturedLevel> imex1;
  FitResult rk4_fit;
  FitResult imex1_fit;
};

/// u*(t) = a e^{-t} phi with a = initial_amplitude and phi = sin(2 pi x) on
/// the torus, cos(theta) on the sphere.
ScalarField manufactured_solution(const SurfacePtr& surface, double amplitude, double t);
ManufacturedResult manufactured_convergence(const ExperimentSpec& spec);

struct InequalityResolution {
  int resolution = 0;
  std::size_t samples = 0;
  double gn_max = 0.0;
  double gn_min = 0.0;
  double tm_max = 0.0;
  /// max over samples of exp_moment(+-f, p), per entry of spec.moments.
  std::vector<double> moment_max;
  std::size_t nonfinite_moments = 0;
};

struct InequalitySummary {
  std::vector<InequalityResolution> per_resolution;
  /// |gn_max(first) - gn_max(last)| / max of the two.
  double gn_spread = 0.0;
  std::size_t trajectories = 0;
  double spacetime_max = 0.0;
  /// Empirical constant for EstimateConstants::sobolev.
  double sobolev_constant = 0.0;
};

InequalitySummary inequality_campaign(const ExperimentSpec& spec);

}  // namespace ricci
