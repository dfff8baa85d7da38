#include "ricci/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ricci/diagnostics.hpp"

namespace ricci {

ScalarField negative_part(const ScalarField& f) {
  return f.map([](double x) { return std::min(x, 0.0); });
}

double F_of(double xi) {
  if (std::abs(xi) < 0.5) {
    // Taylor series of int_0^xi eta e^{-2 eta}: sum_n (-2)^n xi^{n+2} / (n! (n+2)).
    // For xi <= 0 every term is nonnegative, so the sum never drops below
    // its leading term xi^2 / 2.
    double term = 1.0;  // (-2 xi)^n / n!
    double sum = 0.0;
    for (int n = 0; n < 40; ++n) {
      const double contrib = term / (n + 2.0);
      sum += contrib;
      if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
      term *= -2.0 * xi / (n + 1.0);
    }
    return sum * xi * xi;
  }
  return 0.25 * (1.0 - std::exp(-2.0 * xi) * (2.0 * xi + 1.0));
}

double psi_of(const ScalarField& w) {
  const auto wt = w.surface().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += wt[i] * F_of(std::min(w[i], 0.0));
  return s;
}

namespace {

// Spatial integrals of one stored time slice of a pair.
struct Slice {
  double a = 0.0;       // 2 int e^{-2u} |grad u|^2 w_-^2
  double b = 0.0;       // int |w_- (1 - e^{-2 w_-})|
  double c = 0.0;       // int |w_- (e^{-2 w_-} - 1) u_t|
  double g = 0.0;       // int |grad w_-|^2
  double gw = 0.0;      // int e^{-2u} |grad w_-|^2
  double l2sq = 0.0;    // int w_-^2
  double psi = 0.0;     // int F(w_-)
  double sup = 0.0;     // sup |w_-|
  double gu4 = 0.0;     // int |grad u|^4
  double e4 = 0.0;      // int e^{4 |w_-|}
  double e8 = 0.0;      // int e^{8 |w_-|}
  double ut4sq = 0.0;   // ||u_t||^2_{L4} = (int u_t^4)^{1/2}
  double max_e2u = 0.0;
  double min_e2u = 0.0;
  double ab_rhs = 0.0;  // signed right-hand side of the truncated energy identity
};

Slice slice(const ScalarField& u, const ScalarField& v, const ScalarField& ut, double kbar) {
  const ScalarField w = u - v;
  const auto gu2 = grad_norm_sq(u);
  const auto gw2 = grad_norm_sq(w);
  const auto guw = grad_dot(u, w);
  const auto wt = u.surface().weights();
  Slice s;
  s.max_e2u = 0.0;
  s.min_e2u = std::numeric_limits<double>::infinity();
  double ut4 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double wm = std::min(w[i], 0.0);
    // Stampacchia: grad w_- = 1_{w < 0} grad w.
    const double ind = w[i] < 0.0 ? 1.0 : 0.0;
    const double e2u = std::exp(-2.0 * u[i]);
    const double em1 = std::expm1(-2.0 * wm);  // e^{-2 w_-} - 1
    const double q = wt[i];
    s.a += q * 2.0 * e2u * gu2[i] * wm * wm;
    s.b += q * std::abs(wm * em1);
    s.c += q * std::abs(wm * em1 * ut[i]);
    s.g += q * ind * gw2[i];
    s.gw += q * e2u * ind * gw2[i];
    s.l2sq += q * wm * wm;
    s.psi += q * F_of(wm);
    s.sup = std::max(s.sup, -wm);
    s.gu4 += q * gu2[i] * gu2[i];
    s.e4 += q * std::exp(-4.0 * wm);
    s.e8 += q * std::exp(-8.0 * wm);
    ut4 += q * std::pow(ut[i], 4);
    s.max_e2u = std::max(s.max_e2u, e2u);
    s.min_e2u = std::min(s.min_e2u, e2u);
    s.ab_rhs += q * (2.0 * e2u * ind * guw[i] * wm - kbar * wm * em1 + wm * em1 * ut[i]);
  }
  s.ut4sq = std::sqrt(ut4);
  return s;
}

void check_pair(const Trajectory& u, const Trajectory& v) {
  if (!u.surface || !v.surface || !u.surface->same_grid(*v.surface)) {
    throw std::invalid_argument("estimates: trajectories live on different grids");
  }
  const std::size_t n = std::min(u.rhs_values.size(), u.states.size());
  if (v.states.size() < n || u.times.size() < n) {
    throw std::invalid_argument("estimates: trajectories have different stored times");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(u.times[k] - v.times[k]) > 1e-9 * std::max(1.0, u.times[k])) {
      throw std::invalid_argument("estimates: trajectories have different stored times");
    }
  }
}

std::size_t horizon_index(const Trajectory& u, double T) {
  const auto idx = u.index_of(T);
  const std::size_t usable = std::min(u.rhs_values.size(), u.states.size());
  if (!idx || *idx >= usable) {
    std::ostringstream os;
    os << "estimates: T = " << T << " is not a stored time of the reference run";
    throw std::invalid_argument(os.str());
  }
  if (*idx == 0) throw std::invalid_argument("estimates: T must be positive");
  return *idx;
}

class PairIntegrals {
 public:
  PairIntegrals(const Trajectory& u, const Trajectory& v, std::size_t last)
      : kbar_(u.surface->kbar()) {
    check_pair(u, v);
    t_.assign(u.times.begin(), u.times.begin() + static_cast<std::ptrdiff_t>(last + 1));
    slices_.reserve(last + 1);
    for (std::size_t k = 0; k <= last; ++k) {
      slices_.push_back(slice(u.states[k], v.states[k], u.rhs_values[k], kbar_));
    }
    auto cum = [&](auto member) {
      std::vector<double> y(slices_.size());
      for (std::size_t k = 0; k < y.size(); ++k) y[k] = slices_[k].*member;
      return cumulative_trapezoid(t_, y);
    };
    a_ = cum(&Slice::a);
    b_ = cum(&Slice::b);
    c_ = cum(&Slice::c);
    g_ = cum(&Slice::g);
    gw_ = cum(&Slice::gw);
    gu4_ = cum(&Slice::gu4);
    e4_ = cum(&Slice::e4);
    ut4_ = cum(&Slice::ut4sq);
    ab_ = cum(&Slice::ab_rhs);
  }

  AbcIntegrals abc(std::size_t k) const {
    return {a_[k], std::abs(kbar_) * b_[k], c_[k]};
  }

  DeltaFactors deltas(std::size_t k, double cs) const {
    double max_e2u = 0.0, max_e8 = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      max_e2u = std::max(max_e2u, slices_[j].max_e2u);
      max_e8 = std::max(max_e8, slices_[j].e8);
    }
    DeltaFactors d;
    d.delta_A = 2.0 * max_e2u * cs * std::sqrt(gu4_[k]);
    d.delta_B = 2.0 * cs * std::sqrt(e4_[k]);
    // ||e^{|w_-|}||^2_{L8} = (int e^{8|w_-|})^{1/4}.
    d.delta_C = 2.0 * cs * std::pow(max_e8, 0.25) * std::sqrt(ut4_[k]);
    return d;
  }

  EstimateReport report(std::size_t k, double cs) const {
    EstimateReport r;
    r.T = t_[k];
    r.sobolev_constant = cs;
    const auto abc_k = abc(k);
    r.A = abc_k.A;
    r.B = abc_k.B;
    r.C = abc_k.C;
    const auto d = deltas(k, cs);
    r.delta_A = d.delta_A;
    r.delta_B = d.delta_B;
    r.delta_C = d.delta_C;
    double c1 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= k; ++j) {
      const auto& s = slices_[j];
      r.psi_max = std::max(r.psi_max, s.psi);
      r.wminus_linf_l2sq = std::max(r.wminus_linf_l2sq, s.l2sq);
      r.wminus_sup = std::max(r.wminus_sup, s.sup);
      c1 = std::min(c1, s.min_e2u);
    }
    r.psi_T = slices_[k].psi;
    r.grad_wminus_l2sq = g_[k];
    r.grad_wminus_weighted = gw_[k];
    r.C1 = c1;
    r.C2 = 2.0 / std::min(1.0, c1);
    r.delta = 2.0 * r.C2 * (r.delta_A + std::abs(kbar_) * r.delta_B + r.delta_C);
    r.contraction_satisfied = r.delta < 1.0;

    const double psi0 = slices_[0].psi;
    r.hg_lhs = r.psi_T - psi0 + 0.5 * r.grad_wminus_weighted;
    r.hg_rhs = r.A + r.B + r.C;
    r.hg_slack = std::abs(r.psi_T - psi0 + r.grad_wminus_weighted - ab_[k]);
    r.hg_satisfied = r.hg_lhs <= r.hg_rhs + r.hg_slack;
    const double s = r.wminus_sup;
    r.psi_bound_satisfied = r.psi_max <= 0.5 * s * s * std::exp(2.0 * s) * (1.0 + 1e-12);
    return r;
  }

 private:
  double kbar_;
  std::vector<double> t_;
  std::vector<Slice> slices_;
  std::vector<double> a_, b_, c_, g_, gw_, gu4_, e4_, ut4_, ab_;
};

}  // namespace

AbcIntegrals abc_integrals(const Trajectory& u, const Trajectory& v, double T) {
  const std::size_t k = horizon_index(u, T);
  return PairIntegrals(u, v, k).abc(k);
}

DeltaFactors delta_factors(const Trajectory& u, const Trajectory& v, double T,
                           const EstimateConstants& constants) {
  const std::size_t k = horizon_index(u, T);
  return PairIntegrals(u, v, k).deltas(k, constants.sobolev);
}

EstimateReport contraction_report(const Trajectory& u, const Trajectory& v, double T,
                                  const EstimateConstants& constants) {
  const std::size_t k = horizon_index(u, T);
  return PairIntegrals(u, v, k).report(k, constants.sobolev);
}

std::vector<EstimateReport> contraction_ladder(const Trajectory& u, const Trajectory& v,
                                               const std::vector<double>& horizons,
                                               const EstimateConstants& constants) {
  if (horizons.empty()) return {};
  std::vector<std::size_t> idx;
  for (double T : horizons) idx.push_back(horizon_index(u, T));
  const PairIntegrals pair(u, v, *std::max_element(idx.begin(), idx.end()));
  std::vector<EstimateReport> out;
  for (std::size_t k : idx) out.push_back(pair.report(k, constants.sobolev));
  return out;
}

double gn_ratio(const ScalarField& f) {
  const double l2sq = inner(f, f);
  if (!(l2sq > 0.0)) throw std::invalid_argument("gn_ratio: zero field");
  const auto w = f.surface().weights();
  double l4 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) l4 += w[i] * std::pow(f[i], 4);
  const double h1sq = l2sq + integrate(grad_norm_sq(f));
  return l4 / (l2sq * h1sq);
}

double tm_ratio(const ScalarField& f) {
  if (!(sup_norm(f) > 0.0)) throw std::invalid_argument("tm_ratio: zero field");
  const auto w = f.surface().weights();
  // Center twice so the first-order part integrates to zero, then sum only
  // e^d - 1 - d. Constant fields then give exactly zero up to roundoff in d.
  auto d = f - integrate(f);
  d += -integrate(d);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * (std::expm1(d[i]) - d[i]);
  const double grad = integrate(grad_norm_sq(f));
  return std::log1p(s) / std::max(grad, 1e-12);
}

double exp_moment(const ScalarField& f, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("exp_moment: need finite p >= 1");
  const auto v = f.values();
  const double top = p * *std::max_element(v.begin(), v.end());
  if (top > 700.0) throw std::overflow_error("exp_moment: e^{p f} overflows");
  const auto w = f.surface().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::exp(p * v[i] - top);
  return std::exp((top + std::log(s)) / p);
}

double spacetime_sobolev_ratio(const std::vector<double>& times,
                               const std::vector<ScalarField>& states) {
  if (times.size() != states.size() || states.empty()) {
    throw std::invalid_argument("spacetime_sobolev_ratio: size mismatch");
  }
  std::vector<double> l4(states.size()), grad(states.size());
  double linf_l2sq = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& f = states[k];
    const auto w = f.surface().weights();
    double s4 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s4 += w[i] * std::pow(f[i], 4);
    l4[k] = s4;
    grad[k] = integrate(grad_norm_sq(f));
    linf_l2sq = std::max(linf_l2sq, inner(f, f));
  }
  const double l4l4sq = std::sqrt(cumulative_trapezoid(times, l4).back());
  const double denom = linf_l2sq + cumulative_trapezoid(times, grad).back();
  if (!(denom > 0.0)) throw std::invalid_argument("spacetime_sobolev_ratio: zero field");
  return l4l4sq / denom;
}

namespace {

struct Field {
  const char* name;
  double EstimateReport::*value;
};

constexpr Field kNumericFields[] = {
    {"T", &EstimateReport::T},
    {"psi_max", &EstimateReport::psi_max},
    {"psi_T", &EstimateReport::psi_T},
    {"grad_wminus_l2sq", &EstimateReport::grad_wminus_l2sq},
    {"grad_wminus_weighted", &EstimateReport::grad_wminus_weighted},
    {"wminus_linf_l2sq", &EstimateReport::wminus_linf_l2sq},
    {"wminus_sup", &EstimateReport::wminus_sup},
    {"A", &EstimateReport::A},
    {"B", &EstimateReport::B},
    {"C", &EstimateReport::C},
    {"delta_A", &EstimateReport::delta_A},
    {"delta_B", &EstimateReport::delta_B},
    {"delta_C", &EstimateReport::delta_C},
    {"C1", &EstimateReport::C1},
    {"C2", &EstimateReport::C2},
    {"delta", &EstimateReport::delta},
    {"sobolev_constant", &EstimateReport::sobolev_constant},
    {"hg_lhs", &EstimateReport::hg_lhs},
    {"hg_rhs", &EstimateReport::hg_rhs},
    {"hg_slack", &EstimateReport::hg_slack},
};

}  // namespace

void write_report_kv(std::ostream& os, const EstimateReport& r) {
  for (const auto& f : kNumericFields) os << f.name << " = " << format_g17(r.*f.value) << '\n';
  os << "contraction_satisfied = " << (r.contraction_satisfied ? "true" : "false") << '\n';
  os << "hg_satisfied = " << (r.hg_satisfied ? "true" : "false") << '\n';
  os << "psi_bound_satisfied = " << (r.psi_bound_satisfied ? "true" : "false") << '\n';
}

std::string report_csv_header() {
  std::string h;
  for (const auto& f : kNumericFields) {
    h += f.name;
    h += ',';
  }
  h += "contraction_satisfied,hg_satisfied,psi_bound_satisfied";
  return h;
}

std::string report_csv_row(const EstimateReport& r) {
  std::string row;
  for (const auto& f : kNumericFields) {
    row += format_g17(r.*f.value);
    row += ',';
  }
  row += r.contraction_satisfied ? "1," : "0,";
  row += r.hg_satisfied ? "1," : "0,";
  row += r.psi_bound_satisfied ? "1" : "0";
  return row;
}

}  // namespace ricci
