#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ricci/flow.hpp"
#include "ricci/geometry.hpp"

namespace ricci {

struct DiagnosticsRecord {
  double t = 0.0;
  double volume = 0.0;
  double energy = 0.0;
  double dissipation_cum = 0.0;
  double energy_residual = 0.0;
  double curv_dev_linf = 0.0;
  double curv_dev_l2 = 0.0;
  double rg = 0.0;
};

/// Area of the conformal metric, int e^{2u}.
double volume(const ScalarField& u);

/// 1/2 int (|grad u|^2 + 2 kbar u).
double liouville_energy(const ScalarField& u, double kbar);
inline double liouville_energy(const ScalarField& u) {
  return liouville_energy(u, u.surface().kbar());
}

/// K_g = e^{-2u} (kbar - Delta u) for g = e^{2u} gbar.
ScalarField gauss_curvature(const ScalarField& u);

/// int K_g dmu_g - 2 pi chi. The conformal factors cancel inside the
/// integral, so this is a pure quadrature check.
double gauss_bonnet_check(const ScalarField& u);

struct CurvatureDeviation {
  double linf = 0.0;
  /// Measured in dmu_g = e^{2u} dmu_gbar.
  double l2 = 0.0;
};

CurvatureDeviation curvature_deviation(const ScalarField& u);

/// Mean curvature term r_g = 2 (vol_gbar / vol_g) kbar.
double mean_curvature_rg(const ScalarField& u);

/// int e^{2u} |du/dt|^2 with du/dt taken from the stored derivative.
double dissipation_rate(const ScalarField& u, const ScalarField& dudt);

/// Composite trapezoid rule over (possibly non-uniform) abscissae; entry k of
/// the result is the integral from t[0] to t[k].
std::vector<double> cumulative_trapezoid(const std::vector<double>& t,
                                         const std::vector<double>& y);

/// E(u(t_k)) - E(u_0) + int_0^{t_k} int e^{2u} |du/dt|^2, one entry per stored
/// time that has a stored derivative.
std::vector<double> energy_identity_residual(const Trajectory& traj);

/// Full per-time diagnostics of a trajectory.
std::vector<DiagnosticsRecord> diagnose(const Trajectory& traj);

/// True when energy(t_{k+1}) <= energy(t_k) + slack for every k.
bool energy_nonincreasing(const std::vector<DiagnosticsRecord>& records,
                          double slack = 1e-10);

/// Space-time test function phi(t, x) = b(t) psi(x) with the polynomial bump
/// b(t) = 16 t^2 (T - t)^2 / T^4, which peaks at 1 and vanishes with its first
/// derivative at t = 0 and t = T.
struct BumpTestFunction {
  ScalarField spatial;
  double t_end;

  BumpTestFunction(ScalarField psi, double t_end);
  double bump(double t) const;
  double bump_rate(double t) const;
};

struct WeakFormSides {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const;
};

/// Both sides of the weak formulation tested against phi over the stored
/// times of traj (trapezoid in time, quadrature in space):
///   lhs = int int dv/dt e^{2v} phi, evaluated after integrating by parts in
///         time as -1/2 int int (e^{2v} - 1) dphi/dt, since phi vanishes at
///         both ends;
///   rhs = -int int (<grad v, grad phi> - kbar (e^{2v} - 1) phi).
/// phi.t_end must coincide with the final stored time.
WeakFormSides weak_form_sides(const Trajectory& traj, const BumpTestFunction& phi);

/// |lhs - rhs| of weak_form_sides.
double weak_form_residual(const Trajectory& traj, const BumpTestFunction& phi);

/// Same pairing with the stored derivative used directly in the left-hand
/// side, int int (dv/dt) e^{2v} phi. Both sides then agree at every stored
/// time up to projection roundoff, so this variant measures spatial
/// consistency only.
WeakFormSides weak_form_sides_direct(const Trajectory& traj, const BumpTestFunction& phi);

inline const char* kDiagnosticsHeader =
    "t,volume,energy,dissipation_cum,energy_residual,curv_dev_linf,curv_dev_l2,rg";

/// One row per record, 17 significant digits, LF line endings.
void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records);
void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& records);

/// Formats a double with 17 significant digits.
std::string format_g17(double x);

}  // namespace ricci
