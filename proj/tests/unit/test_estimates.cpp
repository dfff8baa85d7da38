#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ricci/estimates.hpp"
#include "support.hpp"

using namespace ricci;
using ricci::testing::random_field;

namespace {

SurfacePtr torus(int n = 32) { return build_surface(SurfaceKind::FlatTorus, n); }
SurfacePtr sphere(int l = 15) { return build_surface(SurfaceKind::RoundSphere, l); }

Trajectory run(const ScalarField& u0, Integrator integ, double dt, double t_end) {
  FlowConfig cfg;
  cfg.integrator = integ;
  cfg.dt = dt;
  cfg.t_end = t_end;
  return evolve(u0, cfg);
}

Trajectory shifted(const Trajectory& u, double c) {
  Trajectory v = u;
  for (auto& s : v.states) s += c;
  return v;
}

}  // namespace

TEST(NegativePart, Examples) {
  auto s = torus();
  EXPECT_EQ(sup_norm(negative_part(ScalarField::constant(s, 2.0))), 0.0);
  auto m1 = ScalarField::constant(s, -1.0);
  EXPECT_EQ(sup_norm(negative_part(m1) - m1), 0.0);
  auto f = random_field(s, 3);
  auto n = negative_part(f);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(n[i], std::min(f[i], 0.0));
}

TEST(FOf, Examples) {
  EXPECT_EQ(F_of(0.0), 0.0);
  EXPECT_NEAR(F_of(1.0), 0.25 * (1 - 3 * std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(F_of(1.0), 0.1484985, 1e-6);
  EXPECT_NEAR(F_of(-1.0), 0.25 * (1 + std::exp(2.0)), 1e-14);
  EXPECT_NEAR(F_of(-1.0), 2.097264, 1e-6);
  // Series and closed form agree across the switch point.
  for (double xi : {-0.49999, 0.49999, -0.3, 0.2}) {
    EXPECT_NEAR(F_of(xi), 0.25 * (1 - std::exp(-2 * xi) * (2 * xi + 1)), 1e-15);
  }
  // Midpoint quadrature of the defining integral.
  for (double xi : {-2.0, -0.7, 0.4, 3.0}) {
    const int n = 200000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double eta = xi * (i + 0.5) / n;
      s += eta * std::exp(-2 * eta);
    }
    EXPECT_NEAR(F_of(xi), s * xi / n, 1e-8 * std::max(1.0, std::abs(F_of(xi))));
  }
}

TEST(FOf, TinyArgumentsKeepLowerBound) {
  for (double xi = -1e-3; xi < 0; xi += 1.37e-6) EXPECT_GE(F_of(xi), 0.5 * xi * xi);
  for (double xi : {-1e-12, -1e-160}) EXPECT_GE(F_of(xi), 0.5 * xi * xi);
}

TEST(PsiOf, Examples) {
  auto s = torus();
  EXPECT_EQ(psi_of(ScalarField::constant(s, 0.3)), 0.0);
  EXPECT_NEAR(psi_of(ScalarField::constant(s, -1.0)), 0.25 * (1 + std::exp(2.0)), 1e-13);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto w = random_field(s, seed) * 2.0;
    const double half_l2 = 0.5 * std::pow(lp_norm(negative_part(w), 2.0), 2);
    EXPECT_GE(psi_of(w), half_l2);
  }
}

TEST(AbcIntegrals, IdenticalTrajectoriesGiveZero) {
  auto s = torus();
  auto u = run(normalize_volume(random_field(s, 1) * 0.3), Integrator::RK4, 1e-2, 0.1);
  auto abc = abc_integrals(u, u, 0.1);
  EXPECT_EQ(abc.A, 0.0);
  EXPECT_EQ(abc.B, 0.0);
  EXPECT_EQ(abc.C, 0.0);
  auto r = contraction_report(u, u, 0.1);
  EXPECT_EQ(r.psi_max, 0.0);
  EXPECT_TRUE(r.hg_satisfied);
  EXPECT_TRUE(r.psi_bound_satisfied);
}

TEST(AbcIntegrals, ConstantShiftClosedForm) {
  auto s = sphere();
  auto u = run(normalize_volume(random_field(s, 2) * 0.1), Integrator::RK4, 1e-2, 0.1);
  auto v = shifted(u, 1.0);
  auto abc = abc_integrals(u, v, 0.1);
  EXPECT_NEAR(abc.B, 4 * std::numbers::pi * (std::exp(2.0) - 1.0) * 0.1, 1e-12);
  EXPECT_GE(abc.A, 0.0);
  EXPECT_GE(abc.C, 0.0);
}

TEST(AbcIntegrals, RejectsMismatches) {
  auto s = torus();
  auto u0 = normalize_volume(random_field(s, 1) * 0.3);
  auto u = run(u0, Integrator::RK4, 1e-2, 0.1);
  auto other = run(resample(u0, torus(16)), Integrator::RK4, 1e-2, 0.1);
  EXPECT_THROW(abc_integrals(u, other, 0.1), std::invalid_argument);
  auto coarse = run(u0, Integrator::RK4, 2e-2, 0.1);
  EXPECT_THROW(abc_integrals(u, coarse, 0.1), std::invalid_argument);
  EXPECT_THROW(abc_integrals(u, u, 0.055), std::invalid_argument);
}

TEST(AbcIntegrals, PairConvergesWithDt) {
  auto s = torus();
  auto u0 = normalize_volume(random_field(s, 5) * 0.3);
  double prev = 1e9;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    auto u = run(u0, Integrator::RK4, dt, 0.1);
    auto v = run(u0, Integrator::IMEX1, dt, 0.1);
    auto abc = abc_integrals(u, v, 0.1);
    EXPECT_TRUE(std::isfinite(abc.A) && std::isfinite(abc.B) && std::isfinite(abc.C));
    const double total = abc.A + abc.B + abc.C;
    EXPECT_LT(total, prev);
    prev = total;
  }
}

TEST(DeltaFactors, Examples) {
  auto s = torus();
  FlowConfig cfg;
  cfg.t_end = 0.1;
  cfg.dt = 1e-2;
  auto zero = evolve(ScalarField(s), cfg);
  EstimateConstants k{1.3};
  auto d0 = delta_factors(zero, zero, 0.1, k);
  EXPECT_EQ(d0.delta_A, 0.0);
  // w_- = 0: delta_B = 2 C_S sqrt(T).
  EXPECT_NEAR(d0.delta_B, 2 * 1.3 * std::sqrt(0.1), 1e-14);

  auto u0 = normalize_volume(random_field(s, 6) * 0.3);
  auto u = run(u0, Integrator::RK4, 1e-2, 0.4);
  auto v = run(u0, Integrator::IMEX1, 1e-2, 0.4);
  DeltaFactors prev{1e9, 1e9, 1e9};
  for (double T : {0.4, 0.2, 0.1, 0.05}) {
    auto d = delta_factors(u, v, T, k);
    EXPECT_LT(d.delta_A, prev.delta_A);
    EXPECT_LT(d.delta_B, prev.delta_B);
    EXPECT_LT(d.delta_C, prev.delta_C);
    prev = d;
  }
}

TEST(ContractionReport, InvariantsAndSerialization) {
  auto s = torus();
  auto u0 = normalize_volume(random_field(s, 7) * 0.02);
  auto u = run(u0, Integrator::RK4, 1e-3, 0.05);
  auto v = run(u0, Integrator::IMEX1, 1e-3, 0.05);
  auto r = contraction_report(u, v, 0.05);
  EXPECT_GE(r.A, 0.0);
  EXPECT_GE(r.B, 0.0);
  EXPECT_GE(r.C, 0.0);
  EXPECT_GE(r.psi_max, 0.0);
  EXPECT_GE(r.grad_wminus_l2sq, 0.0);
  EXPECT_EQ(r.delta, 2 * r.C2 * (r.delta_A + 0.0 * r.delta_B + r.delta_C));
  EXPECT_EQ(r.C2, 2.0 / std::min(1.0, r.C1));
  EXPECT_TRUE(r.hg_satisfied) << r.hg_lhs << " " << r.hg_rhs << " " << r.hg_slack;
  EXPECT_TRUE(r.psi_bound_satisfied);
  EXPECT_TRUE(r.contraction_satisfied) << r.delta;

  std::ostringstream kv;
  write_report_kv(kv, r);
  EXPECT_NE(kv.str().find("delta = "), std::string::npos);
  EXPECT_NE(kv.str().find("contraction_satisfied = true"), std::string::npos);
  const auto header = report_csv_header();
  const auto row = report_csv_row(r);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
}

TEST(ContractionLadder, MatchesSingleReports) {
  auto s = torus();
  auto u0 = normalize_volume(random_field(s, 8) * 0.1);
  auto u = run(u0, Integrator::RK4, 1e-2, 0.4);
  auto v = run(u0, Integrator::IMEX1, 1e-2, 0.4);
  auto ladder = contraction_ladder(u, v, {0.4, 0.2, 0.1});
  ASSERT_EQ(ladder.size(), 3u);
  auto single = contraction_report(u, v, 0.2);
  EXPECT_EQ(ladder[1].delta, single.delta);
  EXPECT_EQ(ladder[1].A, single.A);
  EXPECT_GT(ladder[0].delta, ladder[1].delta);
  EXPECT_GT(ladder[1].delta, ladder[2].delta);
}

TEST(Inequalities, ConstantsAndRejections) {
  auto s = torus();
  EXPECT_NEAR(gn_ratio(ScalarField::constant(s, -2.5)), 1.0, 1e-13);
  EXPECT_NEAR(tm_ratio(ScalarField::constant(s, 0.7)), 0.0, 1e-12);
  EXPECT_THROW(gn_ratio(ScalarField(s)), std::invalid_argument);
  EXPECT_THROW(tm_ratio(ScalarField(s)), std::invalid_argument);
  for (double p : {1.0, 2.0, 4.0, 8.0}) EXPECT_NEAR(exp_moment(ScalarField(s), p), 1.0, 1e-15);
  EXPECT_NEAR(exp_moment(ScalarField::constant(s, 1.0), 2.0), std::exp(1.0), 1e-14);
  EXPECT_THROW(exp_moment(ScalarField(s), 0.5), std::invalid_argument);
  EXPECT_THROW(exp_moment(ScalarField::constant(s, 100.0), 8.0), std::overflow_error);
}

TEST(Inequalities, ExpMomentMatchesQuadrature) {
  auto s = torus(64);
  auto f = ScalarField::from_function(s, [](double x, double) { return std::sin(2 * std::numbers::pi * x); });
  // Mean of e^{4 sin} over a period is I_0(4).
  const double i0_4 = 11.301921952136330;
  EXPECT_NEAR(exp_moment(f, 4.0), std::pow(i0_4, 0.25), 1e-12);
}

TEST(Inequalities, RandomFieldsBounded) {
  for (auto s : {torus(32), sphere(15)}) {
    double gn_max = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto f = random_field(s, seed) + (static_cast<double>(seed % 7) - 3.0) * 0.1;
      const double g = gn_ratio(f);
      EXPECT_TRUE(std::isfinite(g));
      gn_max = std::max(gn_max, g);
      const double t = tm_ratio(f);
      EXPECT_TRUE(std::isfinite(t));
      EXPECT_GE(t, 0.0);  // Jensen: int e^{f - mean} >= 1.
    }
    EXPECT_GT(gn_max, 0.0);
    EXPECT_LE(gn_max, 1.0 + 1e-12) << s->describe();
  }
}

TEST(Inequalities, ExpBoundOnRandomFields) {
  auto s = torus();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto w = negative_part(random_field(s, seed) * 3.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double a = std::abs(w[i]);
      EXPECT_LE(std::abs(1 - std::exp(-2 * w[i])), 2 * a * std::exp(2 * a));
    }
  }
}

TEST(Inequalities, SpacetimeSobolevRatioFinite) {
  auto s = torus();
  auto u = run(normalize_volume(random_field(s, 9) * 0.3), Integrator::RK4, 1e-2, 0.5);
  const double r = spacetime_sobolev_ratio(u.times, u.states);
  EXPECT_TRUE(std::isfinite(r));
  EXPECT_GT(r, 0.0);
}
