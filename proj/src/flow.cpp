#include "ricci/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kernels.hpp"
#include "spectral_backend.hpp"

namespace ricci {

namespace {

// Substeps per nominal step beyond which the run is treated as blown up.
constexpr double kMaxSubsteps = 1e6;

std::string blow_up_message(double sup, double t) {
  std::ostringstream os;
  os << "blow-up guard tripped: sup|u| = " << sup << " exceeds " << kBlowUpBound;
  if (std::isfinite(t)) os << " at t = " << t;
  return os.str();
}

double sup_abs(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    s = std::max(s, std::abs(x));
  }
  return s;
}

void check_guard(std::span<const double> u, double t) {
  const double s = sup_abs(u);
  if (!(s <= kBlowUpBound)) throw BlowUpError(s, t);
}

// Buffers for one trajectory. The RK4 stages carry (u, Delta u) together so
// that each stage costs one analysis and two syntheses: the stage velocity k
// is resolved, hence Delta(u + c k) = Delta u + c Delta k exactly.
struct Workspace {
  explicit Workspace(std::size_t n)
      : e(n), g(n), us(n), ls(n), acc_u(n), acc_l(n), k(n), dk(n) {}
  std::vector<double> e, g, us, ls, acc_u, acc_l, k, dk;
};

// k = P(e^{-2u} lap + kbar (1 - e^{-2u}) + f), dk = Delta k.
void stage_velocity(const detail::SpectralBackend& be, std::span<const double> u,
                    std::span<const double> lap, double kbar,
                    const ScalarField* forcing, Workspace& ws, double t) {
  check_guard(u, t);
  const std::size_t n = u.size();
  detail::exp_scaled(u, -2.0, ws.e);
  for (std::size_t i = 0; i < n; ++i) {
    ws.g[i] = ws.e[i] * lap[i] + kbar * (1.0 - ws.e[i]);
  }
  if (forcing != nullptr) {
    const auto f = forcing->values();
    for (std::size_t i = 0; i < n; ++i) ws.g[i] += f[i];
  }
  be.apply_multiplier_pair(ws.g, be.resolved_mask(), ws.k, be.resolved_eigenvalues(),
                           ws.dk);
}

// One classical RK4 step on the pair (u, lap) in place.
void rk4_substep(const detail::SpectralBackend& be, std::vector<double>& u,
                 std::vector<double>& lap, double h, double kbar,
                 const Forcing& forcing, double t, Workspace& ws) {
  const std::size_t n = u.size();
  std::optional<ScalarField> f0, fh, f1;
  if (forcing) {
    f0.emplace(forcing(t));
    fh.emplace(forcing(t + 0.5 * h));
    f1.emplace(forcing(t + h));
  }
  const ScalarField* f0p = f0 ? &*f0 : nullptr;
  const ScalarField* fhp = fh ? &*fh : nullptr;
  const ScalarField* f1p = f1 ? &*f1 : nullptr;

  stage_velocity(be, u, lap, kbar, f0p, ws, t);
  for (std::size_t i = 0; i < n; ++i) {
    ws.acc_u[i] = ws.k[i];
    ws.acc_l[i] = ws.dk[i];
    ws.us[i] = u[i] + 0.5 * h * ws.k[i];
    ws.ls[i] = lap[i] + 0.5 * h * ws.dk[i];
  }
  stage_velocity(be, ws.us, ws.ls, kbar, fhp, ws, t + 0.5 * h);
  for (std::size_t i = 0; i < n; ++i) {
    ws.acc_u[i] += 2.0 * ws.k[i];
    ws.acc_l[i] += 2.0 * ws.dk[i];
    ws.us[i] = u[i] + 0.5 * h * ws.k[i];
    ws.ls[i] = lap[i] + 0.5 * h * ws.dk[i];
  }
  stage_velocity(be, ws.us, ws.ls, kbar, fhp, ws, t + 0.5 * h);
  for (std::size_t i = 0; i < n; ++i) {
    ws.acc_u[i] += 2.0 * ws.k[i];
    ws.acc_l[i] += 2.0 * ws.dk[i];
    ws.us[i] = u[i] + h * ws.k[i];
    ws.ls[i] = lap[i] + h * ws.dk[i];
  }
  stage_velocity(be, ws.us, ws.ls, kbar, f1p, ws, t + h);
  const double w = h / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    u[i] += w * (ws.acc_u[i] + ws.k[i]);
    lap[i] += w * (ws.acc_l[i] + ws.dk[i]);
  }
}

std::vector<double> resolved_laplacian(const detail::SpectralBackend& be,
                                       std::span<const double> u) {
  std::vector<double> lap(u.size());
  be.apply_multiplier(u, be.resolved_eigenvalues(), lap);
  return lap;
}

double min_value(std::span<const double> v) {
  return *std::min_element(v.begin(), v.end());
}

// Shift s with int e^{2(u - s)} = 1, computed as a log-sum-exp.
double volume_shift(const ScalarField& u) {
  const auto v = u.values();
  const auto w = u.surface().weights();
  double top = -std::numeric_limits<double>::infinity();
  for (double x : v) top = std::max(top, 2.0 * x);
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += w[i] * std::exp(2.0 * v[i] - top);
  return 0.5 * (top + std::log(sum));
}

}  // namespace

BlowUpError::BlowUpError(double sup, double t)
    : std::runtime_error(blow_up_message(sup, t)), sup_(sup), time_(t) {}

std::string to_string(Integrator integrator) {
  return integrator == Integrator::RK4 ? "rk4" : "imex1";
}

Integrator integrator_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "rk4") return Integrator::RK4;
  if (s == "imex1") return Integrator::IMEX1;
  throw std::invalid_argument("unknown integrator '" + name + "' (expected rk4 or imex1)");
}

std::string to_string(VolumeControl control) {
  switch (control) {
    case VolumeControl::Auto: return "auto";
    case VolumeControl::Off: return "off";
    case VolumeControl::Renormalize: return "on";
  }
  return "auto";
}

VolumeControl volume_control_from_string(const std::string& name) {
  if (name == "auto") return VolumeControl::Auto;
  if (name == "off") return VolumeControl::Off;
  if (name == "on") return VolumeControl::Renormalize;
  throw std::invalid_argument("unknown volume control '" + name + "' (expected auto, on or off)");
}

void FlowConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("dt must satisfy dt > 0");
  }
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("t_end must satisfy t_end > 0");
  }
  if (dt > t_end) throw std::invalid_argument("dt must satisfy dt <= t_end");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) {
    throw std::invalid_argument("cfl_safety must lie in (0, 1]");
  }
  if (store_every < 1) throw std::invalid_argument("store_every must be >= 1");
}

bool FlowConfig::renormalizes(const BackgroundSurface& surface) const {
  switch (volume) {
    case VolumeControl::Renormalize: return true;
    case VolumeControl::Off: return false;
    case VolumeControl::Auto: return surface.kbar() > 0.0;
  }
  return false;
}

ScalarField eval_rhs(const ScalarField& u, double kbar) {
  const auto v = u.values();
  check_guard(v, std::numeric_limits<double>::quiet_NaN());
  const auto& be = u.surface().backend();
  const std::size_t n = v.size();
  std::vector<double> lap(n), e(n), out(n);
  be.apply_multiplier(v, be.resolved_eigenvalues(), lap);
  detail::exp_scaled(v, -2.0, e);
  for (std::size_t i = 0; i < n; ++i) out[i] = e[i] * lap[i] + kbar * (1.0 - e[i]);
  be.apply_multiplier(out, be.resolved_mask(), out);
  return ScalarField(u.surface_ptr(), std::move(out));
}

double cfl_step_limit(const ScalarField& u, double cfl_safety) {
  const double coeff_max = std::exp(-2.0 * min_value(u.values()));
  return cfl_safety * 2.0 / (coeff_max * u.surface().lambda_max());
}

ScalarField step_rk4(const ScalarField& u, double dt, double kbar, const Forcing& forcing,
                     double t) {
  const auto& be = u.surface().backend();
  std::vector<double> v(u.values().begin(), u.values().end());
  auto lap = resolved_laplacian(be, v);
  Workspace ws(v.size());
  rk4_substep(be, v, lap, dt, kbar, forcing, t, ws);
  check_guard(v, t + dt);
  return ScalarField(u.surface_ptr(), std::move(v));
}

ScalarField step_imex1(const ScalarField& u, double dt, double kbar, const Forcing& forcing,
                       double t) {
  const auto& be = u.surface().backend();
  ScalarField rhs = eval_rhs(u, kbar);
  if (forcing) rhs += project_resolved(forcing(t));
  const auto vals = u.values();
  const double m = std::exp(-2.0 * *std::max_element(vals.begin(), vals.end()));
  // (I - dt m Delta) u+ = u + dt (rhs - m Delta u) reduces to
  // u+ = u + (I - dt m Delta)^{-1} dt rhs, which leaves unresolved grid
  // content of u untouched.
  const auto eig = be.resolved_eigenvalues();
  std::vector<double> mult(eig.size());
  for (std::size_t i = 0; i < eig.size(); ++i) mult[i] = dt / (1.0 - dt * m * eig[i]);
  std::vector<double> inc(u.size());
  be.apply_multiplier(rhs.values(), mult, inc);
  std::vector<double> out(u.values().begin(), u.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += inc[i];
  check_guard(out, t + dt);
  return ScalarField(u.surface_ptr(), std::move(out));
}

ScalarField normalize_volume(const ScalarField& u) { return u - volume_shift(u); }

std::optional<std::size_t> Trajectory::index_of(double t) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= tol) return i;
  }
  return std::nullopt;
}

Trajectory evolve(const ScalarField& u0, const FlowConfig& cfg) {
  cfg.validate();
  const auto& surface = u0.surface();
  const auto& be = surface.backend();
  const double kbar = surface.kbar();
  const bool renormalize = cfg.renormalizes(surface);

  Trajectory traj;
  traj.surface = u0.surface_ptr();
  traj.integrator = cfg.integrator;
  traj.dt = cfg.dt;

  auto rhs_with_forcing = [&](const ScalarField& u, double t) {
    ScalarField r = eval_rhs(u, kbar);
    if (cfg.forcing) r += project_resolved(cfg.forcing(t));
    return r;
  };
  auto abort = [&](const BlowUpError& err) {
    traj.status = RunStatus::BlowUp;
    traj.message = err.what();
    return traj;
  };

  if (renormalize) {
    double vol = 0.0;
    const auto w = surface.weights();
    for (std::size_t i = 0; i < u0.size(); ++i) vol += w[i] * std::exp(2.0 * u0[i]);
    if (!(std::abs(vol - 1.0) <= 1e-10)) {
      std::ostringstream os;
      os << "evolve: initial data must have unit volume when volume control is "
            "active (got "
         << vol << ")";
      throw std::invalid_argument(os.str());
    }
  }

  traj.times.push_back(0.0);
  traj.states.push_back(u0);
  try {
    traj.rhs_values.push_back(rhs_with_forcing(u0, 0.0));
  } catch (const BlowUpError& err) {
    return abort(err);
  }

  // Nominal steps k*dt; a shorter last step lands exactly on t_end.
  const double ratio = cfg.t_end / cfg.dt;
  auto steps = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
  steps = std::max<std::size_t>(steps, 1);

  std::vector<double> u(u0.values().begin(), u0.values().end());
  Workspace ws(u.size());
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t0 = static_cast<double>(k - 1) * cfg.dt;
    const double t1 = (k == steps) ? cfg.t_end : static_cast<double>(k) * cfg.dt;
    const double h = t1 - t0;
    try {
      if (cfg.integrator == Integrator::RK4) {
        const double coeff_max = std::exp(-2.0 * min_value(u));
        const double h_cfl = cfg.cfl_safety * 2.0 / (coeff_max * surface.lambda_max());
        const double want = std::max(1.0, std::ceil(h / h_cfl));
        if (want > kMaxSubsteps) {
          traj.status = RunStatus::BlowUp;
          std::ostringstream os;
          os << "stability limit collapsed at t = " << t0 << ": " << want
             << " substeps required for one step";
          traj.message = os.str();
          return traj;
        }
        const auto nsub = static_cast<std::size_t>(want);
        const double sub = h / static_cast<double>(nsub);
        auto lap = resolved_laplacian(be, u);
        for (std::size_t s = 0; s < nsub; ++s) {
          rk4_substep(be, u, lap, sub, kbar, cfg.forcing, t0 + static_cast<double>(s) * sub,
                      ws);
        }
        traj.substeps += nsub;
      } else {
        ScalarField cur(traj.surface, u);
        u = std::move(step_imex1(cur, h, kbar, cfg.forcing, t0)).take_values();
        traj.substeps += 1;
      }
      check_guard(u, t1);
    } catch (const BlowUpError& err) {
      return abort(err);
    }

    if (renormalize) {
      ScalarField cur(traj.surface, std::move(u));
      const double shift = volume_shift(cur);
      u = std::move(cur).take_values();
      for (double& x : u) x -= shift;
    }

    if (k % static_cast<std::size_t>(cfg.store_every) == 0 || k == steps) {
      traj.times.push_back(t1);
      traj.states.emplace_back(traj.surface, u);
      try {
        traj.rhs_values.push_back(rhs_with_forcing(traj.states.back(), t1));
      } catch (const BlowUpError& err) {
        return abort(err);
      }
    }
  }
  return traj;
}

Trajectory restart(const Trajectory& traj, FlowConfig cfg, double t_extra) {
  if (traj.states.empty()) throw std::invalid_argument("restart: empty trajectory");
  const double t_start = traj.times.back();
  cfg.t_end = t_extra;
  Forcing original = cfg.forcing;
  if (original) {
    cfg.forcing = [original, t_start](double t) { return original(t_start + t); };
  }
  Trajectory out = evolve(traj.states.back(), cfg);
  for (double& t : out.times) t += t_start;
  return out;
}

}  // namespace ricci
