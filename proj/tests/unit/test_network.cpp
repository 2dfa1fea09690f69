#include "dedem/config/scenario.hpp"
#include "dedem/nn/batch.hpp"
#include "dedem/nn/network.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace dedem;

namespace {

config::Scenario center_crack() { return config::load_scenario(DEDEM_SCENARIO_DIR "/center_crack.toml"); }

}  // namespace

TEST(NetConfig, ParameterCount) {
  nn::NetConfig cfg;
  cfg.input_dim = 4;
  EXPECT_EQ(cfg.component_param_count(), 3901u);
  EXPECT_EQ(cfg.param_count(), 7802u);
  cfg.width = 15;
  EXPECT_EQ(cfg.component_param_count(), 15u * 4 + 15 + 2 * 2 * (225 + 15) + 15 + 1);
  cfg.width = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(NetConfig, LayoutTilesTheVector) {
  nn::NetConfig cfg{3, 7, 2};
  std::size_t next = 0;
  for (const auto& s : nn::param_layout(cfg)) {
    EXPECT_EQ(s.offset, next);
    next += s.size();
  }
  EXPECT_EQ(next, cfg.param_count());
}

TEST(Init, DeterministicAndGlorot) {
  nn::NetConfig cfg{4, 30, 2};
  const auto a = nn::init_params(cfg, 42);
  const auto b = nn::init_params(cfg, 42);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, nn::init_params(cfg, 43));
  for (const auto& s : nn::param_layout(cfg)) {
    const auto seg = a.segment(static_cast<Eigen::Index>(s.offset), static_cast<Eigen::Index>(s.size()));
    if (s.role == 'b') {
      EXPECT_EQ(seg.cwiseAbs().maxCoeff(), 0.0);
    } else {
      EXPECT_LE(seg.cwiseAbs().maxCoeff(), std::sqrt(6.0 / (s.rows + s.cols)));
    }
  }
}

TEST(Forward, ZeroAndHeadOnly) {
  nn::NetConfig cfg{2, 5, 1};
  nn::ParamVector p = nn::ParamVector::Zero(static_cast<Eigen::Index>(cfg.param_count()));
  const std::vector<double> x = {0.3, 0.4};
  auto u = nn::forward(std::span<const double>(p.data(), p.size()), cfg, x);
  EXPECT_EQ(u[0], 0.0);
  EXPECT_EQ(u[1], 0.0);
  const auto off = nn::component_offsets(cfg, 1);
  p[static_cast<Eigen::Index>(off.head_b)] = 2.5;
  u = nn::forward(std::span<const double>(p.data(), p.size()), cfg, x);
  EXPECT_EQ(u[0], 0.0);
  EXPECT_EQ(u[1], 2.5);
}

TEST(HardConstraint, Factors) {
  const config::Scenario sc = center_crack();
  const auto uhat = ad::SpatialDual{ad::AdScalar(3.0), ad::AdScalar(1.0), ad::AdScalar(2.0)};
  const auto u = nn::apply_hard_constraint(uhat, sc.constraints[0], {0.0, 0.4});
  EXPECT_EQ(u.v.value(), 0.0);
  EXPECT_DOUBLE_EQ(u.dx1.value(), 3.0);  // A' uhat with A = x1
  config::ConstraintPair id;
  const auto same = nn::apply_hard_constraint(uhat, id, {0.7, 0.1});
  EXPECT_DOUBLE_EQ(same.v.value(), 3.0);
  EXPECT_DOUBLE_EQ(same.dx2.value(), 2.0);
}

TEST(Displacement, BatchMatchesTape) {
  const config::Scenario sc = center_crack();
  const nn::TrialSpace space = nn::make_trial_space(sc);
  const nn::ParamVector p = nn::init_params(space.config, 9);
  const std::vector<Vec2> pts = {Vec2(0.3, 0.01), Vec2(0.3, -0.01), Vec2(0.6, 0.2), Vec2(0.05, -0.9)};
  const nn::FieldValues f = nn::evaluate_field(p, space, nn::prepare_inputs(space, pts));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ad::Recording rec;
    const auto vars = rec.variables(std::span<const double>(p.data(), p.size()));
    const auto u = nn::displacement(vars, space, pts[i]);
    const auto k = static_cast<Eigen::Index>(i);
    for (int c = 0; c < 2; ++c) {
      EXPECT_NEAR(u[c].v.value(), f.u(c, k), 1e-15 + 1e-12 * std::abs(f.u(c, k)));
      EXPECT_NEAR(u[c].dx1.value(), f.du1(c, k), 1e-15 + 1e-12 * std::abs(f.du1(c, k)));
      EXPECT_NEAR(u[c].dx2.value(), f.du2(c, k), 1e-15 + 1e-12 * std::abs(f.du2(c, k)));
    }
  }
}

TEST(Displacement, ZeroParamsGiveB) {
  config::Scenario sc = center_crack();
  sc.constraints[1].b = config::Expression::parse("1e-3 * x1");
  const nn::TrialSpace space = nn::make_trial_space(sc);
  const nn::ParamVector p = nn::ParamVector::Zero(static_cast<Eigen::Index>(space.config.param_count()));
  const std::vector<Vec2> pts = {Vec2(0.4, 0.3)};
  const auto f = nn::evaluate_field(p, space, nn::prepare_inputs(space, pts));
  EXPECT_EQ(f.u(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(f.u(1, 0), 4e-4);
  EXPECT_DOUBLE_EQ(f.du1(1, 0), 1e-3);
}

TEST(Displacement, SideOverridesPickFaces) {
  const config::Scenario sc = center_crack();
  const nn::TrialSpace space = nn::make_trial_space(sc);
  const nn::ParamVector p = nn::init_params(space.config, 2);
  const std::vector<Vec2> on = {Vec2(0.3, 0.0), Vec2(0.3, 0.0)};
  const std::vector<std::vector<double>> sides = {{1.0}, {-1.0}};
  const auto f = nn::evaluate_field(p, space, nn::prepare_inputs(space, on, sides));
  const std::vector<Vec2> off = {Vec2(0.3, 1e-12), Vec2(0.3, -1e-12)};
  const auto g = nn::evaluate_field(p, space, nn::prepare_inputs(space, off));
  EXPECT_NEAR((f.u - g.u).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_GT(std::abs(f.u(1, 0) - f.u(1, 1)), 0.0);
}

TEST(Snapshot, RoundTripAndMismatch) {
  const config::Scenario sc = center_crack();
  const nn::TrialSpace space = nn::make_trial_space(sc);
  const nn::ParamVector p = nn::init_params(space.config, 5);
  const auto path = std::filesystem::temp_directory_path() / "dedem_snapshot_test.json";
  nn::save_snapshot({space.config, 5, space.output_scale, 1.0, p}, path);
  const nn::ParamSnapshot s = nn::load_snapshot(path);
  EXPECT_EQ(s.params, p);
  EXPECT_EQ(s.seed, 5u);
  EXPECT_EQ(nn::warm_start(s, space.config), p);
  nn::NetConfig other = space.config;
  other.width = 20;
  EXPECT_THROW(nn::warm_start(s, other), Error);
  std::filesystem::remove(path);
}

TEST(Workers, EnvironmentCap) {
  ::setenv("DEDEM_THREADS", "1", 1);
  EXPECT_EQ(nn::worker_count(), 1);
  ::setenv("DEDEM_THREADS", "zero", 1);
  EXPECT_THROW(nn::worker_count(), Error);
  ::unsetenv("DEDEM_THREADS");
  EXPECT_GE(nn::worker_count(), 1);
}
