#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ricci/geometry.hpp"

namespace ricci {

/// Largest |u| accepted by the right-hand side; e^{2u} overflows near 355.
inline constexpr double kBlowUpBound = 50.0;

/// Raised when the conformal factor leaves the range |u| <= kBlowUpBound.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double sup, double t);
  double sup() const { return sup_; }
  double time() const { return time_; }

 private:
  double sup_;
  double time_;
};

enum class Integrator { RK4, IMEX1 };

std::string to_string(Integrator integrator);
Integrator integrator_from_string(const std::string& name);

/// Whether each step is followed by normalize_volume. Auto renormalizes on
/// positively curved backgrounds, where the volume mode of the discrete flow
/// grows like e^{2 Kbar t}.
enum class VolumeControl { Auto, Off, Renormalize };

std::string to_string(VolumeControl control);
VolumeControl volume_control_from_string(const std::string& name);

/// Additive source term f(t, x) for manufactured solutions.
using Forcing = std::function<ScalarField(double t)>;

struct FlowConfig {
  Integrator integrator = Integrator::RK4;
  double dt = 1e-3;
  double t_end = 1.0;
  double cfl_safety = 1.0;
  Forcing forcing;
  int store_every = 1;
  VolumeControl volume = VolumeControl::Auto;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool renormalizes(const BackgroundSurface& surface) const;
};

/// Conformal Ricci flow velocity e^{-2u} Delta u + kbar (1 - e^{-2u}),
/// formed pointwise and projected onto the resolved spectral space.
/// Throws BlowUpError when sup|u| exceeds kBlowUpBound.
ScalarField eval_rhs(const ScalarField& u, double kbar);
inline ScalarField eval_rhs(const ScalarField& u) { return eval_rhs(u, u.surface().kbar()); }

/// Explicit stability limit cfl_safety * 2 / (max e^{-2u} * lambda_max).
double cfl_step_limit(const ScalarField& u, double cfl_safety);

/// One classical Runge-Kutta step from time t. The caller is responsible for
/// dt respecting cfl_step_limit.
ScalarField step_rk4(const ScalarField& u, double dt, double kbar,
                     const Forcing& forcing = {}, double t = 0.0);

/// One semi-implicit step with the diffusion coefficient frozen at its nodal
/// minimum m: (I - dt m Delta) u+ = u + dt (rhs(u) + f(t) - m Delta u).
ScalarField step_imex1(const ScalarField& u, double dt, double kbar,
                       const Forcing& forcing = {}, double t = 0.0);

/// u - log(int e^{2u}) / 2, so that the conformal metric has unit area.
ScalarField normalize_volume(const ScalarField& u);

enum class RunStatus { Completed, BlowUp };

/// Stored states of one run. rhs_values holds the time derivative
/// (eval_rhs plus forcing) at each stored state; after a blow-up abort the
/// last stored state may lack it.
struct Trajectory {
  SurfacePtr surface;
  std::vector<double> times;
  std::vector<ScalarField> states;
  std::vector<ScalarField> rhs_values;
  RunStatus status = RunStatus::Completed;
  std::string message;
  std::size_t substeps = 0;
  Integrator integrator = Integrator::RK4;
  double dt = 0.0;

  std::size_t size() const { return times.size(); }
  bool completed() const { return status == RunStatus::Completed; }
  /// Index of the stored time equal to t (within 1e-9 * max(1, t)).
  std::optional<std::size_t> index_of(double t) const;
};

/// Integrates from u0 over [0, cfg.t_end] in nominal steps of cfg.dt. RK4
/// subdivides each nominal step evenly so every substep obeys the CFL limit.
/// A blow-up ends the run early with status BlowUp and the states stored so
/// far.
Trajectory evolve(const ScalarField& u0, const FlowConfig& cfg);

/// Continues a run from its last stored state for another t_extra.
Trajectory restart(const Trajectory& traj, FlowConfig cfg, double t_extra);

}  // namespace ricci
