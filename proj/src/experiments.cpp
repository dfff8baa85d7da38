#include "ricci/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <gsl/gsl_fit.h>
#include <gsl/gsl_statistics_double.h>

#include "parallel.hpp"
#include "ricci/io.hpp"
#include "ricci/plot.hpp"
#include "spectral_backend.hpp"

namespace ricci {

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_g17(v[i]);
  return s;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument(field + ": " + what);
}

}  // namespace

void ExperimentSpec::validate() const {
  require(!name.empty(), "experiment.name", "must not be empty");
  if (surface == SurfaceKind::FlatTorus) {
    require(resolution >= BackgroundSurface::kMinTorusResolution, "surface.resolution",
            "torus needs N >= " + std::to_string(BackgroundSurface::kMinTorusResolution));
  } else {
    require(resolution >= BackgroundSurface::kMinSphereResolution &&
                resolution <= BackgroundSurface::kMaxSphereResolution,
            "surface.resolution",
            "sphere needs " + std::to_string(BackgroundSurface::kMinSphereResolution) +
                " <= L <= " + std::to_string(BackgroundSurface::kMaxSphereResolution));
  }
  require(std::isfinite(initial_amplitude) && initial_amplitude >= 0.0, "init.amplitude",
          "must be finite and >= 0");
  require(band_limit >= 0, "init.band_limit", "must be >= 0");
  require(!dt_levels.empty(), "experiment.dt_levels", "needs at least one entry");
  for (double dt : dt_levels) {
    require(std::isfinite(dt) && dt > 0.0, "experiment.dt_levels", "every dt must be > 0");
  }
  require(std::isfinite(t_end) && t_end > 0.0, "flow.t_end", "must be > 0");
  for (double h : horizons) require(h > 0.0, "experiment.horizons", "every horizon must be > 0");
  require(candidate_resolution >= 0, "experiment.candidate_resolution", "must be >= 0");
  require(std::isfinite(sobolev_constant) && sobolev_constant > 0.0,
          "experiment.sobolev_constant", "must be > 0");
  require(samples >= 1, "experiment.samples", "must be >= 1");
  require(trajectories >= 0, "experiment.trajectories", "must be >= 0");
  require(!resolutions.empty(), "experiment.resolutions", "needs at least one entry");
  for (double p : moments) require(p >= 1.0, "experiment.moments", "every p must be >= 1");
}

ExperimentSpec default_spec(const std::string& experiment) {
  ExperimentSpec s;
  s.name = experiment;
  if (experiment == "uniqueness") {
    // Small enough that the default pair sits in the contraction regime at
    // T = 0.05 with the unit Sobolev constant.
    s.initial_amplitude = 0.02;
    s.dt_levels = {4e-3, 2e-3, 1e-3};
    s.t_end = 0.5;
  } else if (experiment == "convergence") {
    s.t_end = 3.0;
  } else if (experiment == "manufactured") {
    // Every level stays below the explicit stability limit at N = 16, so RK4
    // takes exactly the nominal steps.
    s.resolution = 16;
    s.initial_amplitude = 0.1;
    s.dt_levels = {1.6e-3, 8e-4, 4e-4};
    s.t_end = 0.5;
  } else if (experiment == "inequalities") {
    s.initial_amplitude = 0.5;
    s.t_end = 0.05;
  } else if (experiment != "simulate") {
    throw std::invalid_argument("unknown experiment '" + experiment + "'");
  }
  return s;
}

void write_spec_kv(std::ostream& os, const ExperimentSpec& s) {
  os << "experiment.name = " << s.name << '\n'
     << "surface.kind = " << to_string(s.surface) << '\n'
     << "surface.resolution = " << s.resolution << '\n'
     << "init.seed = " << s.seed << '\n'
     << "init.amplitude = " << format_g17(s.initial_amplitude) << '\n'
     << "init.band_limit = " << s.band_limit << '\n'
     << "experiment.dt_levels = " << join(s.dt_levels) << '\n'
     << "flow.t_end = " << format_g17(s.t_end) << '\n'
     << "output.dir = " << s.outputs << '\n'
     << "output.plots = " << (s.plots ? "true" : "false") << '\n'
     << "experiment.horizons = " << join(s.horizons) << '\n'
     << "experiment.candidate_resolution = " << s.candidate_resolution << '\n'
     << "experiment.candidate = " << to_string(s.candidate) << '\n'
     << "experiment.sobolev_constant = " << format_g17(s.sobolev_constant) << '\n'
     << "experiment.samples = " << s.samples << '\n'
     << "experiment.trajectories = " << s.trajectories << '\n'
     << "experiment.resolutions = " << join(s.resolutions) << '\n'
     << "experiment.moments = " << join(s.moments) << '\n'
     << "experiment.constant_samples = " << (s.constant_samples ? "true" : "false") << '\n';
}

FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
  FitResult f;
  f.points = x.size();
  if (x.size() < 2) {
    f.status = "insufficient data";
    return f;
  }
  double c0, c1, cov00, cov01, cov11, sumsq;
  gsl_fit_linear(x.data(), 1, y.data(), 1, x.size(), &c0, &c1, &cov00, &cov01, &cov11, &sumsq);
  f.intercept = c0;
  f.slope = c1;
  const double r = gsl_stats_correlation(x.data(), 1, y.data(), 1, x.size());
  f.correlation = std::isfinite(r) ? std::clamp(r, -1.0, 1.0) : 0.0;
  return f;
}

ScalarField random_initial_data(const SurfacePtr& surface, std::uint64_t seed, int band_limit,
                                double amplitude) {
  const int bmax = surface->backend().max_band_limit();
  if (band_limit < 0 || band_limit > bmax) {
    throw std::invalid_argument("band_limit " + std::to_string(band_limit) +
                                " exceeds the dealiasing headroom " + std::to_string(bmax) +
                                " of " + surface->describe());
  }
  if (amplitude == 0.0) return ScalarField(surface);
  std::mt19937_64 rng(seed);
  ScalarField f(surface, surface->backend().random_band_limited(rng, band_limit ? band_limit : bmax));
  const double sup = sup_norm(f);
  if (sup > 0.0) f *= amplitude / sup;
  return normalize_volume(f);
}

int thread_budget() {
  if (const char* env = std::getenv("RICCI_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

namespace fs = std::filesystem;

struct Outputs {
  explicit Outputs(const ExperimentSpec& spec) : dir(spec.outputs), plots(spec.plots) {
    if (!dir.empty()) {
      fs::create_directories(dir);
      auto os = open("spec.txt");
      write_spec_kv(os, spec);
    }
  }
  bool enabled() const { return !dir.empty(); }
  std::ofstream open(const std::string& file) const {
    std::ofstream os(fs::path(dir) / file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + (fs::path(dir) / file).string());
    return os;
  }
  void diagnostics(const std::string& file, const Trajectory& traj) const {
    if (!enabled()) return;
    auto os = open(file);
    write_diagnostics_csv(os, diagnose(traj));
  }
  void plot(const std::string& file, const LinePlot& p) const {
    if (enabled() && plots) write_svg((fs::path(dir) / file).string(), p);
  }
  std::string dir;
  bool plots;
};

void write_fit_row(std::ostream& os, const std::string& label, const FitResult& f) {
  os << label << ',' << format_g17(f.slope) << ',' << format_g17(f.intercept) << ','
     << format_g17(f.correlation) << ',' << f.points << ',' << f.status << '\n';
}

constexpr const char* kFitHeader = "label,slope,intercept,correlation,points,status";

std::string level_tag(std::size_t i) { return std::to_string(i); }

// Checks every run of an experiment and aborts on the first blow-up, after
// its partial diagnostics have been written.
void abort_on_blow_up(const Outputs& out, const std::vector<std::pair<std::string, const Trajectory*>>& runs) {
  for (const auto& [label, traj] : runs) {
    if (traj->completed()) continue;
    if (out.enabled()) {
      out.diagnostics("diagnostics_" + label + ".csv", *traj);
      auto note = out.open("ABORTED.txt");
      note << label << ": " << traj->message << '\n';
    }
    throw ExperimentAborted(label + ": " + traj->message);
  }
}

FlowConfig flow_config(Integrator integ, double dt, double t_end) {
  FlowConfig c;
  c.integrator = integ;
  c.dt = dt;
  c.t_end = t_end;
  return c;
}

// Candidate run brought onto the reference grid; derivatives are resampled
// with the states so that the pair integrals see consistent data.
Trajectory onto_grid(const Trajectory& v, const SurfacePtr& surface) {
  Trajectory r = v;
  r.surface = surface;
  for (auto& s : r.states) s = resample(s, surface);
  for (auto& s : r.rhs_values) s = resample(s, surface);
  return r;
}

double max_discrepancy(const Trajectory& u, const Trajectory& v) {
  double d = 0.0;
  const std::size_t n = std::min(u.states.size(), v.states.size());
  for (std::size_t k = 0; k < n; ++k) d = std::max(d, sup_norm(u.states[k] - v.states[k]));
  return d;
}

}  // namespace

UniquenessResult uniqueness_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const Outputs out(spec);
  const auto surface = build_surface(spec.surface, spec.resolution);
  const auto u0 = random_initial_data(surface, spec.seed, spec.band_limit, spec.initial_amplitude);
  const auto finest = static_cast<std::size_t>(
      std::min_element(spec.dt_levels.begin(), spec.dt_levels.end()) - spec.dt_levels.begin());
  SurfacePtr cand_surface = surface;
  if (spec.candidate_resolution > 0) cand_surface = build_surface(spec.surface, spec.candidate_resolution);

  std::vector<double> ladder_h;
  for (double h : spec.horizons) {
    if (h <= spec.t_end * (1.0 + 1e-12)) ladder_h.push_back(h);
  }

  UniquenessResult res;
  res.levels.resize(spec.dt_levels.size());
  const EstimateConstants constants{spec.sobolev_constant};
  detail::parallel_for(spec.dt_levels.size(), thread_budget(), [&](std::size_t i) {
    const double dt = spec.dt_levels[i];
    const auto u = evolve(u0, flow_config(Integrator::RK4, dt, spec.t_end));
    Trajectory v;
    if (spec.candidate_resolution > 0) {
      v = onto_grid(evolve(resample(u0, cand_surface), flow_config(Integrator::RK4, dt, spec.t_end)),
                    surface);
    } else {
      v = evolve(u0, flow_config(spec.candidate, dt, spec.t_end));
    }
    abort_on_blow_up(out, {{"reference_" + level_tag(i), &u}, {"candidate_" + level_tag(i), &v}});
    out.diagnostics("diagnostics_reference_" + level_tag(i) + ".csv", u);
    out.diagnostics("diagnostics_candidate_" + level_tag(i) + ".csv", v);
    auto& lv = res.levels[i];
    lv.dt = dt;
    lv.discrepancy = max_discrepancy(u, v);
    const auto r = contraction_report(u, v, u.times.back(), constants);
    lv.psi_max = r.psi_max;
    lv.wminus_sup = r.wminus_sup;
    lv.psi_bound_satisfied = r.psi_bound_satisfied;
    if (i == finest && !ladder_h.empty()) res.ladder = contraction_ladder(u, v, ladder_h, constants);
  });

  std::vector<double> x, y;
  bool all_zero = true;
  for (const auto& lv : res.levels) {
    if (lv.discrepancy > 0.0) {
      all_zero = false;
      x.push_back(std::log(lv.dt));
      y.push_back(std::log(lv.discrepancy));
    }
  }
  res.fit = linear_fit(x, y);
  if (all_zero) res.fit.status = "exact";

  if (out.enabled()) {
    auto summary = out.open("summary.csv");
    summary << report_csv_header() << '\n';
    for (const auto& r : res.ladder) summary << report_csv_row(r) << '\n';
    auto reports = out.open("reports.txt");
    for (const auto& r : res.ladder) {
      write_report_kv(reports, r);
      reports << '\n';
    }
    auto levels = out.open("levels.csv");
    levels << "dt,discrepancy,psi_max,wminus_sup,psi_bound_satisfied\n";
    for (const auto& lv : res.levels) {
      levels << format_g17(lv.dt) << ',' << format_g17(lv.discrepancy) << ','
             << format_g17(lv.psi_max) << ',' << format_g17(lv.wminus_sup) << ','
             << (lv.psi_bound_satisfied ? 1 : 0) << '\n';
    }
    auto fits = out.open("fits.csv");
    fits << kFitHeader << '\n';
    write_fit_row(fits, "discrepancy_vs_dt", res.fit);
  }
  LinePlot dp{"contraction factor", "T", "delta(T)", {}, {}, false};
  for (auto it = res.ladder.rbegin(); it != res.ladder.rend(); ++it) {
    dp.x.push_back(it->T);
    dp.y.push_back(it->delta);
  }
  out.plot("delta_vs_T.svg", dp);
  LinePlot lp{"RK4 vs candidate discrepancy", "log10 dt", "max_t sup|u - v|", {}, {}, true};
  for (const auto& lv : res.levels) {
    lp.x.push_back(std::log10(lv.dt));
    lp.y.push_back(lv.discrepancy);
  }
  out.plot("discrepancy_vs_dt.svg", lp);
  return res;
}

ConvergenceResult convergence_to_constant_curvature(const ExperimentSpec& spec) {
  spec.validate();
  const Outputs out(spec);
  const auto surface = build_surface(spec.surface, spec.resolution);
  const auto u0 = random_initial_data(surface, spec.seed, spec.band_limit, spec.initial_amplitude);
  auto cfg = flow_config(Integrator::RK4, *std::min_element(spec.dt_levels.begin(), spec.dt_levels.end()),
                         spec.t_end);
  // About 400 stored states regardless of dt.
  const double steps = std::ceil(spec.t_end / cfg.dt - 1e-9);
  cfg.store_every = std::max(1, static_cast<int>(std::ceil(steps / 400.0)));
  const auto traj = evolve(u0, cfg);
  abort_on_blow_up(out, {{"run", &traj}});

  ConvergenceResult res;
  res.records = diagnose(traj);
  const double scale = std::max(1.0, std::abs(surface->kbar()));
  if (res.records.front().curv_dev_linf <= 1e-10 * scale) {
    res.fit.status = "already constant";
  } else {
    std::vector<double> x, y;
    for (const auto& r : res.records) {
      if (r.t >= 0.5 * spec.t_end * (1.0 - 1e-12) && r.curv_dev_linf > 0.0) {
        x.push_back(r.t);
        y.push_back(std::log(r.curv_dev_linf));
      }
    }
    res.fit = linear_fit(x, y);
    if (res.fit.status == "ok" && res.fit.slope >= 0.0) res.fit.status = "non-decay";
  }

  if (out.enabled()) {
    auto d = out.open("diagnostics.csv");
    write_diagnostics_csv(d, res.records);
    auto s = out.open("summary.csv");
    s << kFitHeader << '\n';
    write_fit_row(s, "log_curv_dev_linf_vs_t", res.fit);
    auto meta = out.open("trajectory.json");
    std::ostringstream text;
    write_spec_kv(text, spec);
    write_trajectory_metadata(meta, traj, {{"spec", text.str()}});
  }
  LinePlot ep{"Liouville energy", "t", "E(u)", {}, {}, false};
  LinePlot cp{"curvature deviation", "t", "sup |K - Kbar|", {}, {}, true};
  for (const auto& r : res.records) {
    ep.x.push_back(r.t);
    ep.y.push_back(r.energy);
    cp.x.push_back(r.t);
    cp.y.push_back(r.curv_dev_linf);
  }
  out.plot("energy.svg", ep);
  out.plot("curvature_deviation.svg", cp);
  return res;
}

ScalarField manufactured_solution(const SurfacePtr& surface, double amplitude, double t) {
  const double a = amplitude * std::exp(-t);
  if (surface->kind() == SurfaceKind::FlatTorus) {
    return ScalarField::from_function(
        surface, [a](double x, double) { return a * std::sin(2.0 * std::numbers::pi * x); });
  }
  return ScalarField::from_function(surface, [a](double theta, double) { return a * std::cos(theta); });
}

ManufacturedResult manufactured_convergence(const ExperimentSpec& spec) {
  spec.validate();
  const Outputs out(spec);
  const auto surface = build_surface(spec.surface, spec.resolution);
  const double kbar = surface->kbar();
  const double amp = spec.initial_amplitude;
  const auto phi = manufactured_solution(surface, 1.0, 0.0);
  const auto lap_phi = laplacian(phi);

  // f = du*/dt - e^{-2u*} Delta u* - kbar (1 - e^{-2u*}) with u* = a(t) phi.
  Forcing forcing;
  if (amp != 0.0) {
    forcing = [phi, lap_phi, amp, kbar](double t) {
      const double a = amp * std::exp(-t);
      std::vector<double> f(phi.size());
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double em1 = std::expm1(-2.0 * a * phi[i]);
        f[i] = -a * phi[i] - (1.0 + em1) * a * lap_phi[i] + kbar * em1;
      }
      return ScalarField(phi.surface_ptr(), std::move(f));
    };
  }
  const auto u0 = manufactured_solution(surface, amp, 0.0);
  const auto exact = manufactured_solution(surface, amp, spec.t_end);

  const std::size_t nl = spec.dt_levels.size();
  ManufacturedResult res;
  res.rk4.resize(nl);
  res.imex1.resize(nl);
  std::vector<Trajectory> failed(2 * nl);
  detail::parallel_for(2 * nl, thread_budget(), [&](std::size_t j) {
    const std::size_t i = j % nl;
    const Integrator integ = j < nl ? Integrator::RK4 : Integrator::IMEX1;
    auto cfg = flow_config(integ, spec.dt_levels[i], spec.t_end);
    cfg.forcing = forcing;
    cfg.volume = VolumeControl::Off;
    cfg.store_every = std::numeric_limits<int>::max();
    auto traj = evolve(u0, cfg);
    auto& lv = j < nl ? res.rk4[i] : res.imex1[i];
    lv.dt = spec.dt_levels[i];
    if (!traj.completed()) {
      failed[j] = std::move(traj);
      return;
    }
    lv.error = sup_norm(traj.states.back() - exact);
  });
  for (std::size_t j = 0; j < failed.size(); ++j) {
    if (!failed[j].surface) continue;
    abort_on_blow_up(out, {{(j < nl ? "rk4_" : "imex1_") + level_tag(j % nl), &failed[j]}});
  }

  auto fit = [](const std::vector<ManufacturedLevel>& levels) {
    std::vector<double> x, y;
    for (const auto& lv : levels) {
      if (lv.error > 0.0) {
        x.push_back(std::log(lv.dt));
        y.push_back(std::log(lv.error));
      }
    }
    auto f = linear_fit(x, y);
    if (x.empty()) f.status = "exact";
    return f;
  };
  res.rk4_fit = fit(res.rk4);
  res.imex1_fit = fit(res.imex1);

  if (out.enabled()) {
    auto s = out.open("summary.csv");
    s << "integrator,dt,error\n";
    for (const auto& lv : res.rk4) s << "rk4," << format_g17(lv.dt) << ',' << format_g17(lv.error) << '\n';
    for (const auto& lv : res.imex1) s << "imex1," << format_g17(lv.dt) << ',' << format_g17(lv.error) << '\n';
    auto f = out.open("fits.csv");
    f << kFitHeader << '\n';
    write_fit_row(f, "rk4", res.rk4_fit);
    write_fit_row(f, "imex1", res.imex1_fit);
  }
  for (const auto* levels : {&res.rk4, &res.imex1}) {
    const bool rk4 = levels == &res.rk4;
    LinePlot p{std::string(rk4 ? "RK4" : "IMEX1") + " manufactured error", "log10 dt",
               "sup |u - u*|", {}, {}, true};
    for (const auto& lv : *levels) {
      p.x.push_back(std::log10(lv.dt));
      p.y.push_back(lv.error);
    }
    out.plot(rk4 ? "error_rk4.svg" : "error_imex1.svg", p);
  }
  return res;
}

namespace {

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Sample i of the campaign. The draw order does not depend on the
// resolution, so every resolution sees the same continuous field.
ScalarField campaign_field(const SurfacePtr& surface, const ExperimentSpec& spec, std::size_t i,
                           int band_max) {
  auto rng = sample_rng(spec.seed, 1, i);
  std::uniform_int_distribution<int> band(1, band_max);
  std::uniform_real_distribution<double> amp(0.1, 4.0), offset(-1.0, 1.0);
  const int b = band(rng);
  const double a = amp(rng);
  const double c = offset(rng);
  if (spec.constant_samples) return ScalarField::constant(surface, c >= 0.0 ? a : -a);
  ScalarField f(surface, surface->backend().random_band_limited(rng, b));
  const double sup = sup_norm(f);
  if (sup > 0.0) f *= a / sup;
  return f + c;
}

}  // namespace

InequalitySummary inequality_campaign(const ExperimentSpec& spec) {
  spec.validate();
  const Outputs out(spec);
  InequalitySummary res;
  std::vector<SurfacePtr> surfaces;
  int band_max = std::numeric_limits<int>::max();
  for (int n : spec.resolutions) {
    surfaces.push_back(build_surface(spec.surface, n));
    band_max = std::min(band_max, surfaces.back()->backend().max_band_limit());
  }
  if (spec.band_limit > 0) band_max = std::min(band_max, spec.band_limit);
  band_max = std::max(band_max, 1);

  const std::size_t np = spec.moments.size();
  LinePlot gp{"Gagliardo-Nirenberg ratio", "sample", "gn_ratio", {}, {}, false};
  const auto ns = static_cast<std::size_t>(spec.samples);
  for (std::size_t r = 0; r < surfaces.size(); ++r) {
    // Per sample: gn, tm, then max(+f, -f) moment per p (NaN when it overflows).
    std::vector<std::vector<double>> rows(ns);
    detail::parallel_for(ns, thread_budget(), [&](std::size_t i) {
      const auto f = campaign_field(surfaces[r], spec, i, band_max);
      auto& row = rows[i];
      row.push_back(gn_ratio(f));
      row.push_back(tm_ratio(f));
      const auto minus_f = f * -1.0;
      for (double p : spec.moments) {
        try {
          row.push_back(std::max(exp_moment(f, p), exp_moment(minus_f, p)));
        } catch (const std::overflow_error&) {
          row.push_back(std::numeric_limits<double>::quiet_NaN());
        }
      }
    });
    InequalityResolution s;
    s.resolution = spec.resolutions[r];
    s.samples = ns;
    s.gn_min = std::numeric_limits<double>::infinity();
    s.moment_max.assign(np, 0.0);
    for (const auto& row : rows) {
      s.gn_max = std::max(s.gn_max, row[0]);
      s.gn_min = std::min(s.gn_min, row[0]);
      s.tm_max = std::max(s.tm_max, row[1]);
      for (std::size_t p = 0; p < np; ++p) {
        if (std::isfinite(row[2 + p])) {
          s.moment_max[p] = std::max(s.moment_max[p], row[2 + p]);
        } else {
          ++s.nonfinite_moments;
        }
      }
    }
    res.per_resolution.push_back(s);
    if (r == 0) {
      for (std::size_t i = 0; i < ns; ++i) {
        gp.x.push_back(static_cast<double>(i));
        gp.y.push_back(rows[i][0]);
      }
    }
    if (out.enabled()) {
      auto os = out.open("samples_" + std::to_string(s.resolution) + ".csv");
      os << "index,gn_ratio,tm_ratio";
      for (double p : spec.moments) os << ",exp_moment_p" << format_g17(p);
      os << '\n';
      for (std::size_t i = 0; i < ns; ++i) {
        os << i;
        for (double v : rows[i]) os << ',' << format_g17(v);
        os << '\n';
      }
    }
  }
  const double g0 = res.per_resolution.front().gn_max, g1 = res.per_resolution.back().gn_max;
  res.gn_spread = std::abs(g0 - g1) / std::max({g0, g1, std::numeric_limits<double>::min()});

  // Space-time form on short flow trajectories on the configured surface.
  const auto surface = build_surface(spec.surface, spec.resolution);
  const auto nt = static_cast<std::size_t>(spec.trajectories);
  std::vector<double> ratios(nt);
  std::vector<Trajectory> failed(nt);
  const double dt = *std::min_element(spec.dt_levels.begin(), spec.dt_levels.end());
  detail::parallel_for(nt, thread_budget(), [&](std::size_t i) {
    auto rng = sample_rng(spec.seed, 2, i);
    std::uniform_real_distribution<double> amp(0.1, 1.0);
    const double a = spec.initial_amplitude * amp(rng);
    const auto u0 = random_initial_data(surface, rng(), spec.band_limit, a);
    auto traj = evolve(u0, flow_config(Integrator::RK4, dt, spec.t_end));
    if (!traj.completed()) {
      failed[i] = std::move(traj);
      return;
    }
    ratios[i] = spacetime_sobolev_ratio(traj.times, traj.states);
  });
  for (std::size_t i = 0; i < nt; ++i) {
    if (failed[i].surface) abort_on_blow_up(out, {{"trajectory_" + level_tag(i), &failed[i]}});
  }
  res.trajectories = nt;
  for (double r : ratios) res.spacetime_max = std::max(res.spacetime_max, r);
  res.sobolev_constant = res.spacetime_max;

  if (out.enabled()) {
    auto s = out.open("summary.csv");
    s << "resolution,samples,gn_max,gn_min,tm_max";
    for (double p : spec.moments) s << ",exp_moment_max_p" << format_g17(p);
    s << ",nonfinite_moments\n";
    for (const auto& r : res.per_resolution) {
      s << r.resolution << ',' << r.samples << ',' << format_g17(r.gn_max) << ','
        << format_g17(r.gn_min) << ',' << format_g17(r.tm_max);
      for (double m : r.moment_max) s << ',' << format_g17(m);
      s << ',' << r.nonfinite_moments << '\n';
    }
    auto st = out.open("spacetime.csv");
    st << "trajectory,ratio\n";
    for (std::size_t i = 0; i < nt; ++i) st << i << ',' << format_g17(ratios[i]) << '\n';
    auto c = out.open("constants.txt");
    c << "gn_spread = " << format_g17(res.gn_spread) << '\n'
      << "spacetime_max = " << format_g17(res.spacetime_max) << '\n'
      << "sobolev_constant = " << format_g17(res.sobolev_constant) << '\n';
  }
  out.plot("gn_ratio.svg", gp);
  return res;
}

}  // namespace ricci
