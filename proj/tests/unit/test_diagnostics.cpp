#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ricci/diagnostics.hpp"
#include "support.hpp"

using namespace ricci;
using ricci::testing::random_field;

namespace {

constexpr double kPi = std::numbers::pi;

SurfacePtr torus(int n = 64) { return build_surface(SurfaceKind::FlatTorus, n); }
SurfacePtr sphere(int l = 31) { return build_surface(SurfaceKind::RoundSphere, l); }

ScalarField sin2pix(const SurfacePtr& s, double a) {
  return ScalarField::from_function(s, [a](double x, double) { return a * std::sin(2 * kPi * x); });
}

Trajectory short_run(const SurfacePtr& s, double amp, double dt, double t_end, std::uint64_t seed = 21) {
  FlowConfig cfg;
  cfg.dt = dt;
  cfg.t_end = t_end;
  return evolve(normalize_volume(random_field(s, seed) * amp), cfg);
}

}  // namespace

TEST(Volume, Examples) {
  auto s = torus();
  EXPECT_EQ(volume(ScalarField(s)), 1.0);
  EXPECT_NEAR(volume(ScalarField::constant(s, 0.5 * std::log(2.0))), 2.0, 1e-14);
  EXPECT_NEAR(volume(normalize_volume(sin2pix(s, 1.0))), 1.0, 1e-12);
}

TEST(LiouvilleEnergy, Examples) {
  EXPECT_EQ(liouville_energy(ScalarField(torus())), 0.0);
  EXPECT_NEAR(liouville_energy(sin2pix(torus(), 1.0)), kPi * kPi, 1e-10);
  EXPECT_NEAR(liouville_energy(ScalarField::constant(sphere(), 0.3)), 4 * kPi * 0.3, 1e-12);
}

TEST(GaussCurvature, Examples) {
  auto sp = sphere();
  auto k0 = gauss_curvature(ScalarField(sp));
  for (std::size_t i = 0; i < k0.size(); ++i) EXPECT_NEAR(k0[i], 4 * kPi, 1e-12);
  auto kc = gauss_curvature(ScalarField::constant(sp, 0.2));
  for (std::size_t i = 0; i < kc.size(); ++i) EXPECT_NEAR(kc[i], std::exp(-0.4) * 4 * kPi, 1e-9);
  auto s = torus();
  auto k = gauss_curvature(sin2pix(s, 0.1));
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double sn = std::sin(2 * kPi * s->coord1()[i]);
    EXPECT_NEAR(k[i], std::exp(-0.2 * sn) * 0.4 * kPi * kPi * sn, 1e-9);
  }
}

TEST(GaussBonnet, Examples) {
  EXPECT_NEAR(gauss_bonnet_check(random_field(torus(), 4)), 0.0, 1e-12);
  EXPECT_NEAR(gauss_bonnet_check(ScalarField(sphere())), 0.0, 1e-12);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_NEAR(gauss_bonnet_check(random_field(sphere(), seed) * 0.5), 0.0, 1e-10);
  }
}

TEST(CurvatureDeviationTest, Examples) {
  auto z = curvature_deviation(ScalarField(torus()));
  EXPECT_EQ(z.linf, 0.0);
  EXPECT_EQ(z.l2, 0.0);
  auto c = curvature_deviation(ScalarField::constant(sphere(), -0.1));
  EXPECT_NEAR(c.linf, std::abs(std::exp(0.2) - 1.0) * 4 * kPi, 1e-9);
  // Unit background area; dmu_g = e^{-0.2} dmu_gbar.
  EXPECT_NEAR(c.l2, c.linf * std::exp(-0.1), 1e-9);
  auto s = torus();
  auto u = sin2pix(s, 0.1);
  auto d = curvature_deviation(u);
  double linf = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double sn = std::sin(2 * kPi * s->coord1()[i]);
    const double kk = std::exp(-0.2 * sn) * 0.4 * kPi * kPi * sn;
    linf = std::max(linf, std::abs(kk));
    l2 += s->weights()[i] * kk * kk * std::exp(0.2 * sn);
  }
  EXPECT_NEAR(d.linf, linf, 1e-9);
  EXPECT_NEAR(d.l2, std::sqrt(l2), 1e-9);
}

TEST(EnergyIdentity, ZeroData) {
  FlowConfig cfg;
  cfg.t_end = 0.1;
  auto traj = evolve(ScalarField(torus(32)), cfg);
  for (double r : energy_identity_residual(traj)) EXPECT_LE(std::abs(r), 1e-13);
}

TEST(EnergyIdentity, ResidualShrinksUnderHalving) {
  auto s = torus(32);
  auto a = short_run(s, 0.3, 4e-3, 0.2);
  auto b = short_run(s, 0.3, 2e-3, 0.2);
  const double ra = std::abs(energy_identity_residual(a).back());
  const double rb = std::abs(energy_identity_residual(b).back());
  EXPECT_GE(ra / rb, 3.0) << ra << " " << rb;
  auto recs = diagnose(b);
  EXPECT_TRUE(energy_nonincreasing(recs));
  for (std::size_t k = 1; k < recs.size(); ++k) {
    EXPECT_GE(recs[k].dissipation_cum, recs[k - 1].dissipation_cum);
  }
}

TEST(Diagnose, RecordsConsistent) {
  auto s = sphere(15);
  auto traj = short_run(s, 0.2, 5e-3, 0.05);
  auto recs = diagnose(traj);
  ASSERT_EQ(recs.size(), traj.size());
  const auto res = energy_identity_residual(traj);
  for (std::size_t k = 0; k < recs.size(); ++k) {
    EXPECT_NEAR(recs[k].volume, 1.0, 1e-12);
    EXPECT_NEAR(recs[k].rg, 8 * kPi, 1e-10);
    EXPECT_EQ(recs[k].energy_residual, res[k]);
    EXPECT_LE(std::abs(gauss_bonnet_check(traj.states[k])), 1e-10);
  }
}

TEST(DiagnosticsCsv, Format) {
  std::vector<DiagnosticsRecord> recs(2);
  recs[1].t = 0.1;
  recs[1].volume = 1.0 / 3.0;
  std::ostringstream os;
  write_diagnostics_csv(os, recs);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), kDiagnosticsHeader);
  EXPECT_NE(text.find("0.10000000000000001,0.33333333333333331,"), std::string::npos);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(WeakForm, TrivialCases) {
  auto s = torus(32);
  FlowConfig cfg;
  cfg.t_end = 0.1;
  cfg.dt = 1e-2;
  auto zero = evolve(ScalarField(s), cfg);
  EXPECT_LE(weak_form_residual(zero, BumpTestFunction(random_field(s, 1), 0.1)), 1e-12);
  auto run = short_run(s, 0.3, 1e-2, 0.1);
  EXPECT_EQ(weak_form_residual(run, BumpTestFunction(ScalarField(s), 0.1)), 0.0);
  EXPECT_THROW(weak_form_residual(run, BumpTestFunction(ScalarField(s), 0.2)), std::invalid_argument);
}

TEST(WeakForm, BumpShape) {
  BumpTestFunction phi(ScalarField(torus(8)), 2.0);
  EXPECT_EQ(phi.bump(0.0), 0.0);
  EXPECT_EQ(phi.bump(2.0), 0.0);
  EXPECT_NEAR(phi.bump(1.0), 1.0, 1e-15);
  EXPECT_NEAR(phi.bump_rate(1.0), 0.0, 1e-15);
  const double h = 1e-6;
  EXPECT_NEAR(phi.bump_rate(0.3), (phi.bump(0.3 + h) - phi.bump(0.3 - h)) / (2 * h), 1e-8);
}

TEST(WeakForm, ResidualScalesLikeDtSquared) {
  auto s = torus(32);
  auto a = short_run(s, 0.3, 4e-3, 0.2);
  auto b = short_run(s, 0.3, 2e-3, 0.2);
  BumpTestFunction phi(random_field(s, 99), 0.2);
  const double ra = weak_form_residual(a, phi), rb = weak_form_residual(b, phi);
  EXPECT_NEAR(std::log2(ra / rb), 2.0, 0.3) << ra << " " << rb;
  // The direct pairing closes at roundoff level.
  EXPECT_LE(weak_form_sides_direct(b, phi).residual(), 1e-10);
}
