#include "ricci/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace ricci {

double volume(const ScalarField& u) {
  const auto v = u.values();
  const auto w = u.surface().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::exp(2.0 * v[i]);
  return s;
}

double liouville_energy(const ScalarField& u, double kbar) {
  return 0.5 * integrate(grad_norm_sq(u)) + kbar * integrate(u);
}

ScalarField gauss_curvature(const ScalarField& u) {
  const double kbar = u.surface().kbar();
  const auto lap = laplacian(u);
  std::vector<double> k(u.size());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::exp(-2.0 * u[i]) * (kbar - lap[i]);
  return ScalarField(u.surface_ptr(), std::move(k));
}

double gauss_bonnet_check(const ScalarField& u) {
  const auto k = gauss_curvature(u);
  const auto w = u.surface().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) s += w[i] * k[i] * std::exp(2.0 * u[i]);
  const double two_pi_chi = 2.0 * std::numbers::pi * u.surface().euler_characteristic();
  return s - two_pi_chi;
}

CurvatureDeviation curvature_deviation(const ScalarField& u) {
  const double kbar = u.surface().kbar();
  const auto k = gauss_curvature(u);
  const auto w = u.surface().weights();
  CurvatureDeviation d;
  double l2 = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double dev = k[i] - kbar;
    d.linf = std::max(d.linf, std::abs(dev));
    l2 += w[i] * dev * dev * std::exp(2.0 * u[i]);
  }
  d.l2 = std::sqrt(l2);
  return d;
}

double mean_curvature_rg(const ScalarField& u) {
  // vol_gbar = 1 by construction.
  return 2.0 * u.surface().kbar() / volume(u);
}

double dissipation_rate(const ScalarField& u, const ScalarField& dudt) {
  require_same_surface(u, dudt);
  const auto w = u.surface().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    s += w[i] * std::exp(2.0 * u[i]) * dudt[i] * dudt[i];
  }
  return s;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& t,
                                         const std::vector<double>& y) {
  if (t.size() != y.size()) throw std::invalid_argument("cumulative_trapezoid: size mismatch");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) {
    out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
  }
  return out;
}

namespace {

std::size_t usable_states(const Trajectory& traj) {
  return std::min(traj.states.size(), traj.rhs_values.size());
}

}  // namespace

std::vector<double> energy_identity_residual(const Trajectory& traj) {
  const std::size_t n = usable_states(traj);
  std::vector<double> t(traj.times.begin(), traj.times.begin() + n);
  std::vector<double> energy(n), rate(n);
  for (std::size_t k = 0; k < n; ++k) {
    energy[k] = liouville_energy(traj.states[k]);
    rate[k] = dissipation_rate(traj.states[k], traj.rhs_values[k]);
  }
  const auto cum = cumulative_trapezoid(t, rate);
  std::vector<double> res(n);
  for (std::size_t k = 0; k < n; ++k) res[k] = energy[k] - energy[0] + cum[k];
  return res;
}

std::vector<DiagnosticsRecord> diagnose(const Trajectory& traj) {
  const std::size_t n = usable_states(traj);
  std::vector<DiagnosticsRecord> out(n);
  std::vector<double> t(traj.times.begin(), traj.times.begin() + n);
  std::vector<double> rate(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& u = traj.states[k];
    auto& r = out[k];
    r.t = traj.times[k];
    r.volume = volume(u);
    r.energy = liouville_energy(u);
    const auto dev = curvature_deviation(u);
    r.curv_dev_linf = dev.linf;
    r.curv_dev_l2 = dev.l2;
    r.rg = 2.0 * u.surface().kbar() / r.volume;
    rate[k] = dissipation_rate(u, traj.rhs_values[k]);
  }
  const auto cum = cumulative_trapezoid(t, rate);
  for (std::size_t k = 0; k < n; ++k) {
    out[k].dissipation_cum = cum[k];
    out[k].energy_residual = out[k].energy - out[0].energy + cum[k];
  }
  return out;
}

bool energy_nonincreasing(const std::vector<DiagnosticsRecord>& records, double slack) {
  for (std::size_t k = 1; k < records.size(); ++k) {
    if (records[k].energy > records[k - 1].energy + slack) return false;
  }
  return true;
}

BumpTestFunction::BumpTestFunction(ScalarField psi, double t_end)
    : spatial(std::move(psi)), t_end(t_end) {
  if (!(t_end > 0.0)) throw std::invalid_argument("test function support must have t_end > 0");
}

double BumpTestFunction::bump(double t) const {
  if (t <= 0.0 || t >= t_end) return 0.0;
  const double s = t * (t_end - t);
  return 16.0 * s * s / std::pow(t_end, 4);
}

double BumpTestFunction::bump_rate(double t) const {
  if (t <= 0.0 || t >= t_end) return 0.0;
  // d/dt [t^2 (T - t)^2] = 2 t (T - t) (T - 2 t).
  return 16.0 * 2.0 * t * (t_end - t) * (t_end - 2.0 * t) / std::pow(t_end, 4);
}

double WeakFormSides::residual() const { return std::abs(lhs - rhs); }

namespace {

void check_support(const Trajectory& traj, const BumpTestFunction& phi) {
  if (traj.size() < 2) throw std::invalid_argument("weak form: need at least two stored times");
  if (!traj.surface->same_grid(phi.spatial.surface())) {
    throw std::invalid_argument("weak form: test function lives on another surface");
  }
  const double t_last = traj.times[usable_states(traj) - 1];
  if (std::abs(t_last - phi.t_end) > 1e-9 * std::max(1.0, phi.t_end)) {
    throw std::invalid_argument("weak form: test function support must end at the final stored time");
  }
}

// Per stored time: int <grad v, grad psi>, int (e^{2v} - 1) psi and
// int dv/dt e^{2v} psi.
struct SpatialPairings {
  std::vector<double> grad, vol, direct;
};

SpatialPairings spatial_pairings(const Trajectory& traj, const ScalarField& psi,
                                 bool with_direct) {
  const std::size_t n = usable_states(traj);
  const auto w = psi.surface().weights();
  SpatialPairings p;
  p.grad.resize(n);
  p.vol.resize(n);
  if (with_direct) p.direct.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& v = traj.states[k];
    p.grad[k] = integrate(grad_dot(v, psi));
    double sv = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double e2v = std::exp(2.0 * v[i]);
      sv += w[i] * std::expm1(2.0 * v[i]) * psi[i];
      if (with_direct) sd += w[i] * traj.rhs_values[k][i] * e2v * psi[i];
    }
    p.vol[k] = sv;
    if (with_direct) p.direct[k] = sd;
  }
  return p;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  const auto c = cumulative_trapezoid(t, y);
  return c.empty() ? 0.0 : c.back();
}

}  // namespace

WeakFormSides weak_form_sides(const Trajectory& traj, const BumpTestFunction& phi) {
  check_support(traj, phi);
  const std::size_t n = usable_states(traj);
  const double kbar = traj.surface->kbar();
  const auto p = spatial_pairings(traj, phi.spatial, false);
  std::vector<double> t(traj.times.begin(), traj.times.begin() + n);
  std::vector<double> lhs(n), rhs(n);
  for (std::size_t k = 0; k < n; ++k) {
    lhs[k] = -0.5 * p.vol[k] * phi.bump_rate(t[k]);
    rhs[k] = -(p.grad[k] - kbar * p.vol[k]) * phi.bump(t[k]);
  }
  return {trapezoid(t, lhs), trapezoid(t, rhs)};
}

double weak_form_residual(const Trajectory& traj, const BumpTestFunction& phi) {
  return weak_form_sides(traj, phi).residual();
}

WeakFormSides weak_form_sides_direct(const Trajectory& traj, const BumpTestFunction& phi) {
  check_support(traj, phi);
  const std::size_t n = usable_states(traj);
  const double kbar = traj.surface->kbar();
  const auto p = spatial_pairings(traj, phi.spatial, true);
  std::vector<double> t(traj.times.begin(), traj.times.begin() + n);
  std::vector<double> lhs(n), rhs(n);
  for (std::size_t k = 0; k < n; ++k) {
    lhs[k] = p.direct[k] * phi.bump(t[k]);
    rhs[k] = -(p.grad[k] - kbar * p.vol[k]) * phi.bump(t[k]);
  }
  return {trapezoid(t, lhs), trapezoid(t, rhs)};
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records) {
  os << kDiagnosticsHeader << '\n';
  for (const auto& r : records) {
    os << format_g17(r.t) << ',' << format_g17(r.volume) << ',' << format_g17(r.energy) << ','
       << format_g17(r.dissipation_cum) << ',' << format_g17(r.energy_residual) << ','
       << format_g17(r.curv_dev_linf) << ',' << format_g17(r.curv_dev_l2) << ','
       << format_g17(r.rg) << '\n';
  }
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_diagnostics_csv(os, records);
}

}  // namespace ricci
