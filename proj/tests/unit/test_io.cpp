#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "ricci/io.hpp"
#include "ricci/plot.hpp"
#include "support.hpp"

using namespace ricci;
using ricci::testing::random_field;

TEST(FieldBinary, RoundTripIsBitExact) {
  for (auto kind : {SurfaceKind::FlatTorus, SurfaceKind::RoundSphere}) {
    auto s = build_surface(kind, kind == SurfaceKind::FlatTorus ? 24 : 11);
    auto f = random_field(s, 9) * 1.2345;
    std::stringstream buf;
    write_field_binary(buf, f);
    EXPECT_EQ(buf.str().size(), 16 + 8 * f.size());
    auto g = read_field_binary(buf);
    EXPECT_EQ(g.surface().kind(), kind);
    EXPECT_EQ(g.surface().resolution(), s->resolution());
    ASSERT_EQ(g.size(), f.size());
    EXPECT_EQ(std::memcmp(g.values().data(), f.values().data(), 8 * f.size()), 0);
  }
}

TEST(FieldBinary, RejectsTruncatedInput) {
  auto s = build_surface(SurfaceKind::FlatTorus, 8);
  std::stringstream buf;
  write_field_binary(buf, ScalarField::constant(s, 1.0));
  auto bytes = buf.str();
  std::stringstream cut(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_field_binary(cut), std::runtime_error);
  std::stringstream header_only(bytes.substr(0, 10));
  EXPECT_THROW(read_field_binary(header_only), std::runtime_error);
}

TEST(FieldCsv, RoundTripAtFullPrecision) {
  auto s = build_surface(SurfaceKind::RoundSphere, 9);
  auto f = random_field(s, 4);
  std::stringstream buf;
  write_field_csv(buf, f);
  EXPECT_EQ(buf.str().rfind("node,value\n", 0), 0u);
  auto g = read_field_csv(buf, s);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(g[i], f[i]);
  std::stringstream bad("node,value\n0,1\n");
  EXPECT_THROW(read_field_csv(bad, s), std::runtime_error);
}

TEST(TrajectoryIo, BinaryStackAndMetadata) {
  auto s = build_surface(SurfaceKind::FlatTorus, 16);
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 0.05;
  auto traj = evolve(normalize_volume(random_field(s, 2) * 0.2), cfg);
  std::stringstream buf;
  write_trajectory_binary(buf, traj);
  auto back = read_trajectory_binary(buf);
  ASSERT_EQ(back.times.size(), traj.times.size());
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    EXPECT_EQ(back.times[k], traj.times[k]);
    EXPECT_EQ(sup_norm(back.states[k] - traj.states[k]), 0.0);
    EXPECT_LT(sup_norm(back.rhs_values[k] - traj.rhs_values[k]), 1e-12);
  }

  std::stringstream csv;
  write_trajectory_csv(csv, traj);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 256);

  std::stringstream meta;
  write_trajectory_metadata(meta, traj, {{"flow.dt", "0.01"}});
  const auto text = meta.str();
  EXPECT_NE(text.find("\"run_id\""), std::string::npos);
  EXPECT_NE(text.find("\"torus\""), std::string::npos);
  EXPECT_NE(text.find("\"flow.dt\""), std::string::npos);
  EXPECT_EQ(run_id(traj, "a"), run_id(traj, "a"));
  EXPECT_NE(run_id(traj, "a"), run_id(traj, "b"));
  EXPECT_EQ(run_id(traj, "a").size(), 16u);
}

TEST(Svg, RendersAxesAndDropsNonpositiveOnLogScale) {
  LinePlot p{"title <x>", "t", "y", {0, 1, 2, 3}, {1, 0, 1e-3, 1e-6}, true};
  const auto svg = render_svg(p);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("title &lt;x&gt;"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("(log scale)"), std::string::npos);
  LinePlot empty{"e", "x", "y", {}, {}, false};
  EXPECT_EQ(render_svg(empty).find("<polyline"), std::string::npos);
  LinePlot bad{"b", "x", "y", {1}, {}, false};
  EXPECT_THROW(render_svg(bad), std::invalid_argument);
}
