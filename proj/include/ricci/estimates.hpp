#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ricci/flow.hpp"
#include "ricci/geometry.hpp"

namespace ricci {

/// Pointwise min(f, 0).
ScalarField negative_part(const ScalarField& f);

/// F(xi) = int_0^xi eta e^{-2 eta} d eta = (1 - e^{-2 xi} (2 xi + 1)) / 4.
double F_of(double xi);

/// psi = int F(w_-).
double psi_of(const ScalarField& w);

/// Sobolev constant used to instantiate the unnamed constants of the
/// contraction estimate: ||f||^2_{L4L4} <= C_S (||f||^2_{LinfL2} +
/// ||grad f||^2_{L2L2}) for T <= 1.
struct EstimateConstants {
  double sobolev = 1.0;
};

struct AbcIntegrals {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
};

struct DeltaFactors {
  double delta_A = 0.0;
  double delta_B = 0.0;
  double delta_C = 0.0;
};

struct EstimateReport {
  double T = 0.0;
  double psi_max = 0.0;
  double psi_T = 0.0;
  /// ||grad w_-||^2_{L2L2}.
  double grad_wminus_l2sq = 0.0;
  /// int_0^T int e^{-2u} |grad w_-|^2.
  double grad_wminus_weighted = 0.0;
  /// ||w_-||^2_{LinfL2}.
  double wminus_linf_l2sq = 0.0;
  /// max over stored t <= T of sup |w_-|.
  double wminus_sup = 0.0;
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double delta_A = 0.0;
  double delta_B = 0.0;
  double delta_C = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double delta = 0.0;
  bool contraction_satisfied = false;
  double sobolev_constant = 0.0;
  /// psi(T) + 1/2 int int e^{-2u} |grad w_-|^2, bounded by A + B + C.
  double hg_lhs = 0.0;
  double hg_rhs = 0.0;
  /// Discrete defect of the exact energy identity behind the bound; used as
  /// additive slack since quadrature can break the inequality slightly.
  double hg_slack = 0.0;
  bool hg_satisfied = false;
  /// psi_max <= s^2 e^{2s} / 2 with s = wminus_sup, which follows from
  /// F(xi) <= xi^2 e^{2|xi|} / 2 for xi <= 0.
  bool psi_bound_satisfied = false;
};

/// A(T), B(T), C(T) for w = u - v. T must be a stored time of both runs.
AbcIntegrals abc_integrals(const Trajectory& u, const Trajectory& v, double T);

DeltaFactors delta_factors(const Trajectory& u, const Trajectory& v, double T,
                           const EstimateConstants& constants = {});

EstimateReport contraction_report(const Trajectory& u, const Trajectory& v, double T,
                                  const EstimateConstants& constants = {});

/// Reports for several horizons sharing one pass over the stored states.
std::vector<EstimateReport> contraction_ladder(const Trajectory& u, const Trajectory& v,
                                               const std::vector<double>& horizons,
                                               const EstimateConstants& constants = {});

/// ||f||^4_{L4} / (||f||^2_{L2} ||f||^2_{H1}). Rejects the zero field.
double gn_ratio(const ScalarField& f);

/// log(int e^{f - mean f}) / max(||grad f||^2_{L2}, 1e-12). Rejects the zero
/// field.
double tm_ratio(const ScalarField& f);

/// (int e^{p f})^{1/p} for p >= 1. Throws std::overflow_error if p sup f
/// exceeds the double exponent range.
double exp_moment(const ScalarField& f, double p);

/// ||f||^2_{L4L4} / (||f||^2_{LinfL2} + ||grad f||^2_{L2L2}) for a sampled
/// space-time field over stored times.
double spacetime_sobolev_ratio(const std::vector<double>& times,
                               const std::vector<ScalarField>& states);

/// Flat "key = value" text, one line per field, 17 significant digits.
void write_report_kv(std::ostream& os, const EstimateReport& r);
std::string report_csv_header();
std::string report_csv_row(const EstimateReport& r);

}  // namespace ricci
