// Acceptance report: one PASS/FAIL line per criterion.
//
//   acceptance            run all twelve criteria, exit 0 once all have run
//   acceptance 3 7        run a subset
//   acceptance --strict   exit 1 if any criterion fails

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ricci/cli.hpp"
#include "ricci/diagnostics.hpp"
#include "ricci/estimates.hpp"
#include "ricci/experiments.hpp"
#include "ricci/flow.hpp"
#include "spectral_backend.hpp"

using namespace ricci;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

FlowConfig flow(Integrator integ, double dt, double t_end) {
  FlowConfig c;
  c.integrator = integ;
  c.dt = dt;
  c.t_end = t_end;
  return c;
}

Outcome fixed_point() {
  Stopwatch sw;
  auto s = build_surface(SurfaceKind::FlatTorus, 64);
  auto traj = evolve(ScalarField(s), flow(Integrator::RK4, 1e-3, 1.0));
  const double secs = sw.seconds();
  double worst = 0.0;
  for (const auto& u : traj.states) worst = std::max(worst, sup_norm(u));
  return {traj.completed() && worst <= 1e-12 && secs < 5.0,
          "max_t sup|u| = " + sci(worst) + ", runtime " + fmt("%.2f s", secs)};
}

// Criteria 2 and 3 share the N = 128 runs at dt in {4e-3, 2e-3, 1e-3}.
struct LadderRun {
  double dt = 0.0;
  double seconds = 0.0;
  double max_volume_drift = 0.0;
  double final_energy_residual = 0.0;
  bool energy_nonincreasing = false;
  bool completed = false;
};

const std::vector<LadderRun>& torus128_ladder() {
  static std::vector<LadderRun> runs = [] {
    std::vector<LadderRun> out;
    auto s = build_surface(SurfaceKind::FlatTorus, 128);
    const auto u0 = random_initial_data(s, 42, 0, 0.3);
    for (double dt : {4e-3, 2e-3, 1e-3}) {
      Stopwatch sw;
      auto traj = evolve(u0, flow(Integrator::RK4, dt, 1.0));
      LadderRun r;
      r.dt = dt;
      r.seconds = sw.seconds();
      r.completed = traj.completed();
      const auto rec = diagnose(traj);
      for (const auto& d : rec) r.max_volume_drift = std::max(r.max_volume_drift, std::abs(d.volume - 1.0));
      r.final_energy_residual = rec.back().energy_residual;
      r.energy_nonincreasing = energy_nonincreasing(rec, 1e-10);
      out.push_back(r);
    }
    return out;
  }();
  return runs;
}

Outcome volume_conservation() {
  const auto& runs = torus128_ladder();
  const auto& fine = runs.back();
  const double ratio = runs.front().max_volume_drift / fine.max_volume_drift;
  const bool ok = fine.completed && fine.max_volume_drift <= 1e-6 && ratio >= 8.0 && fine.seconds < 60.0;
  return {ok, "drift(dt=1e-3) = " + sci(fine.max_volume_drift) + ", drift(4e-3)/drift(1e-3) = " +
                  fmt("%.3f", ratio) + " (need >= 8), runtime " + fmt("%.1f s", fine.seconds)};
}

Outcome energy_identity() {
  const auto& runs = torus128_ladder();
  bool mono = true;
  std::vector<double> x, y;
  for (const auto& r : runs) {
    mono = mono && r.energy_nonincreasing;
    x.push_back(std::log(r.dt));
    y.push_back(std::log(std::abs(r.final_energy_residual)));
  }
  const auto fit = linear_fit(x, y);
  std::string d = "nonincreasing = " + std::string(mono ? "yes" : "no") + ", |residual(t_end)| =";
  for (const auto& r : runs) d += " " + sci(std::abs(r.final_energy_residual));
  d += ", order " + fmt("%.3f", fit.slope);
  return {mono && fit.slope >= 2.0, d};
}

Outcome gauss_bonnet() {
  auto s = build_surface(SurfaceKind::RoundSphere, 31);
  auto traj = evolve(random_initial_data(s, 42, 0, 0.3), flow(Integrator::RK4, 1e-3, 0.2));
  double worst = 0.0;
  for (const auto& u : traj.states) worst = std::max(worst, std::abs(gauss_bonnet_check(u)));
  return {traj.completed() && worst <= 1e-9,
          std::to_string(traj.states.size()) + " stored states, max |int K dmu - 4 pi| = " + sci(worst)};
}

Outcome exponential_convergence() {
  std::string d;
  bool ok = true;
  for (auto kind : {SurfaceKind::RoundSphere, SurfaceKind::FlatTorus}) {
    auto spec = default_spec("convergence");
    spec.surface = kind;
    spec.resolution = kind == SurfaceKind::RoundSphere ? 31 : 64;
    spec.initial_amplitude = kind == SurfaceKind::RoundSphere ? 0.1 : 0.3;
    Stopwatch sw;
    const auto r = convergence_to_constant_curvature(spec);
    const double secs = sw.seconds();
    const bool pass = r.fit.status == "ok" && r.fit.slope < 0.0 && r.fit.correlation <= -0.99 && secs < 120.0;
    ok = ok && pass;
    double floor = r.records.back().curv_dev_linf;
    d += (d.empty() ? "" : "; ") + to_string(kind) + ": slope " + fmt("%.4g", r.fit.slope) +
         ", correlation " + fmt("%.3f", r.fit.correlation) + ", sup|K - Kbar|(t_end) = " + sci(floor) +
         ", " + fmt("%.1f s", secs);
  }
  return {ok, d};
}

Outcome manufactured_orders() {
  const auto r = manufactured_convergence(default_spec("manufactured"));
  const bool ok = std::abs(r.rk4_fit.slope - 4.0) <= 0.3 && std::abs(r.imex1_fit.slope - 1.0) <= 0.2;
  return {ok, "RK4 slope " + fmt("%.3f", r.rk4_fit.slope) + ", IMEX1 slope " + fmt("%.3f", r.imex1_fit.slope)};
}

// Residual of the weak formulation for 20 random test functions. For each
// one, C is fitted on the reference run (dt = 1e-3) and the bound
// res <= C dt^2 is then checked at dt = 2e-3 and 4e-3. The residual carries
// an O(dt^3) term of either sign, so the fitted C gets a 10% allowance.
Outcome weak_form() {
  auto s = build_surface(SurfaceKind::FlatTorus, 64);
  const auto u0 = random_initial_data(s, 42, 0, 0.3);
  const std::vector<double> dts{1e-3, 2e-3, 4e-3};
  const double T = 0.5;
  std::vector<BumpTestFunction> phis;
  for (std::uint64_t j = 0; j < 20; ++j) {
    std::mt19937_64 rng(1000 + j);
    ScalarField psi(s, s->backend().random_band_limited(rng, 8));
    phis.emplace_back(psi * (1.0 / sup_norm(psi)), T);
  }
  std::vector<std::vector<double>> res(dts.size());
  for (std::size_t l = 0; l < dts.size(); ++l) {
    auto traj = evolve(u0, flow(Integrator::RK4, dts[l], T));
    for (const auto& phi : phis) res[l].push_back(weak_form_residual(traj, phi));
  }
  std::size_t violations = 0;
  double worst_ratio = 0.0, cmax = 0.0;
  for (std::size_t j = 0; j < phis.size(); ++j) {
    const double c = res[0][j] / (dts[0] * dts[0]);
    cmax = std::max(cmax, c);
    for (std::size_t l = 1; l < dts.size(); ++l) {
      const double ratio = res[l][j] / (c * dts[l] * dts[l]);
      worst_ratio = std::max(worst_ratio, ratio);
      if (ratio > 1.1) ++violations;
    }
  }
  return {violations == 0, "max fitted C = " + sci(cmax) + ", max res/(C dt^2) at dt = 2e-3, 4e-3: " +
                               fmt("%.4f", worst_ratio) + ", violations " + std::to_string(violations) +
                               " of 40 (allowance 1.1)"};
}

// Default uniqueness pair, shared by criteria 8 and 9.
const UniquenessResult& uniqueness() {
  static const UniquenessResult r = uniqueness_experiment(default_spec("uniqueness"));
  return r;
}

Outcome uniqueness_surrogate() {
  const auto& r = uniqueness();
  bool psi_ok = true;
  bool decreasing = true;
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    psi_ok = psi_ok && r.levels[i].psi_bound_satisfied;
    if (i > 0) decreasing = decreasing && r.levels[i].discrepancy < r.levels[i - 1].discrepancy;
  }
  const bool ok = decreasing && std::abs(r.fit.slope - 1.0) <= 0.3 && psi_ok;
  std::string d = "sup|u - v| =";
  for (const auto& lv : r.levels) d += " " + sci(lv.discrepancy);
  d += ", slope " + fmt("%.3f", r.fit.slope) + ", psi bound " + (psi_ok ? "holds" : "violated");
  return {ok, d};
}

Outcome contraction_ladder_check() {
  const auto& r = uniqueness();
  const auto& L = r.ladder;
  bool ok = L.size() == 4;
  for (std::size_t i = 1; ok && i < L.size(); ++i) {
    ok = L[i].delta < L[i - 1].delta && L[i].delta_A < L[i - 1].delta_A &&
         L[i].delta_B < L[i - 1].delta_B && L[i].delta_C < L[i - 1].delta_C;
  }
  ok = ok && L.back().contraction_satisfied;
  std::string d = "delta(T) for T =";
  for (const auto& rep : L) d += " " + fmt("%g", rep.T) + ":" + fmt("%.6f", rep.delta);
  return {ok, d};
}

Outcome truncation_properties() {
  std::size_t neg = 0, below = 0, exp_viol = 0;
  for (int i = 0; i < 10000; ++i) {
    const double xi = -10.0 + 20.0 * i / 9999.0;
    const double f = F_of(xi);
    if (!(f >= 0.0)) ++neg;
    if (xi <= 0.0 && !(f >= 0.5 * xi * xi)) ++below;
  }
  auto s = build_surface(SurfaceKind::FlatTorus, 64);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto w = negative_part(random_initial_data(s, seed, 0, 3.0));
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double a = std::abs(w[i]);
      if (std::abs(-std::expm1(-2.0 * w[i])) > 2.0 * a * std::exp(2.0 * a)) ++exp_viol;
    }
  }
  return {neg == 0 && below == 0 && exp_viol == 0,
          "F < 0: " + std::to_string(neg) + ", F < xi^2/2: " + std::to_string(below) +
              ", exp bound: " + std::to_string(exp_viol) + " violations"};
}

Outcome inequality_campaign_check() {
  const auto r = inequality_campaign(default_spec("inequalities"));
  bool finite = true;
  std::size_t nonfinite = 0;
  std::string d;
  for (const auto& p : r.per_resolution) {
    finite = finite && std::isfinite(p.gn_max) && std::isfinite(p.tm_max);
    nonfinite += p.nonfinite_moments;
    d += "N=" + std::to_string(p.resolution) + ": gn_max " + fmt("%.5f", p.gn_max) + ", tm_max " +
         fmt("%.5f", p.tm_max) + "; ";
  }
  d += "spread " + sci(r.gn_spread) + ", nonfinite moments " + std::to_string(nonfinite);
  return {finite && r.gn_spread <= 0.25 && nonfinite == 0, d};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism_and_restart() {
  // Same spec twice through the command-line entry point.
  const auto base = fs::temp_directory_path() / "ricci_acceptance_determinism";
  fs::remove_all(base);
  std::size_t compared = 0, differing = 0;
  for (const char* command : {"simulate", "uniqueness"}) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      dirs.push_back(base / (std::string(command) + std::to_string(rep)));
      auto cfg = parse_config(std::string("command = ") + command +
                                  "\nsurface.resolution = 32\nflow.t_end = 0.1\n",
                              {"output.dir=" + dirs.back().string()});
      std::ostringstream log, err;
      if (run(cfg, log, err) != kExitSuccess) return {false, std::string(command) + " failed: " + err.str()};
    }
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      if (e.path().extension() != ".csv") continue;
      ++compared;
      if (slurp(e.path()) != slurp(dirs[1] / e.path().filename())) ++differing;
    }
  }
  fs::remove_all(base);

  auto s = build_surface(SurfaceKind::FlatTorus, 64);
  const auto u0 = random_initial_data(s, 42, 0, 0.3);
  const double T = 0.25;
  const auto single = evolve(u0, flow(Integrator::RK4, 1e-3, 2 * T));
  const auto first = evolve(u0, flow(Integrator::RK4, 1e-3, T));
  const auto second = restart(first, flow(Integrator::RK4, 1e-3, T), T);
  double worst = 0.0;
  std::size_t matched = 0;
  for (std::size_t k = 0; k < second.times.size(); ++k) {
    const auto idx = single.index_of(second.times[k]);
    if (!idx) continue;
    ++matched;
    worst = std::max(worst, sup_norm(second.states[k] - single.states[*idx]));
  }
  const bool ok = compared > 0 && differing == 0 && matched == second.times.size() && worst <= 1e-9;
  return {ok, std::to_string(compared) + " CSV files compared, " + std::to_string(differing) +
                  " differ; restart vs single run max diff " + sci(worst) + " over " +
                  std::to_string(matched) + " matched times"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"fixed point", fixed_point},
      {"volume conservation", volume_conservation},
      {"energy identity", energy_identity},
      {"Gauss-Bonnet", gauss_bonnet},
      {"exponential convergence", exponential_convergence},
      {"manufactured-solution orders", manufactured_orders},
      {"weak-form residual", weak_form},
      {"uniqueness surrogate", uniqueness_surrogate},
      {"contraction ladder", contraction_ladder_check},
      {"truncation-function properties", truncation_properties},
      {"inequality campaign", inequality_campaign_check},
      {"determinism and restart", determinism_and_restart},
  };
  bool strict = false;
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      strict = true;
    } else {
      selected.insert(std::atoi(argv[i]));
    }
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << "criterion " << id << " (" << criteria[i].first
              << "): " << o.detail << std::endl;
  }
  std::cout << "acceptance: " << failures << " failing criteria" << std::endl;
  return strict && failures > 0 ? 1 : 0;
}
