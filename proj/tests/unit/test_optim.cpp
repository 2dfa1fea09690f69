#include "dedem/config/scenario.hpp"
#include "dedem/optim/adam.hpp"
#include "dedem/optim/gradcheck.hpp"
#include "dedem/optim/solve.hpp"
#include "dedem/fracture/sif.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dedem;
using namespace dedem::optim;

TEST(Schedule, Defaults) {
  const TrainConfig cfg;
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 0), 0.02);
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 4999), 0.02);
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 5000), 0.01);
  EXPECT_DOUBLE_EQ(lr_at_epoch(cfg, 12000), 0.005);
}

TEST(Adam, ZeroGradientLeavesParams) {
  Eigen::VectorXd p(3);
  p << 1, 2, 3;
  const Eigen::VectorXd before = p;
  AdamState st;
  EXPECT_TRUE(adam_step(p, Eigen::VectorXd::Zero(3), st, 0.1, TrainConfig{}));
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepHasMagnitudeLr) {
  for (double g : {1e-6, 0.3, 250.0}) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
    AdamState st;
    adam_step(p, Eigen::VectorXd::Constant(1, g), st, 0.02, TrainConfig{});
    EXPECT_NEAR(p[0], -0.02, 0.02 * 1e-2);
  }
}

TEST(Adam, NonFiniteGradientSkipsStep) {
  Eigen::VectorXd p = Eigen::VectorXd::Ones(2);
  AdamState st;
  Eigen::VectorXd g(2);
  g << 1.0, std::nan("");
  EXPECT_FALSE(adam_step(p, g, st, 0.1, TrainConfig{}));
  EXPECT_EQ(p, Eigen::VectorXd::Ones(2));
  EXPECT_EQ(st.step, 0);
}

TEST(Train, ScalarQuadraticConverges) {
  TrainConfig cfg;
  cfg.lr0 = 0.05;
  cfg.max_epochs = 3000;
  cfg.patience = 3000;
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.resize(1);
    g[0] = 2.0 * (x[0] - 1.5);
    return (x[0] - 1.5) * (x[0] - 1.5);
  };
  const TrainReport r = train(f, Eigen::VectorXd::Zero(1), cfg);
  EXPECT_NEAR(r.best_params[0], 1.5, 1e-3);
  for (std::size_t e = 1; e < 30; ++e) EXPECT_LT(r.loss[e], r.loss[e - 1]);
}

TEST(Train, ZeroEpochsReturnsInit) {
  TrainConfig cfg;
  cfg.max_epochs = 0;
  Eigen::VectorXd init(2);
  init << 0.3, -0.1;
  int calls = 0;
  const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    ++calls;
    g = x;
    return x.squaredNorm();
  };
  const TrainReport r = train(f, init, cfg);
  EXPECT_EQ(r.best_params, init);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(r.epochs_run(), 0);
}

TEST(Train, EarlyStopFiresAtPatience) {
  TrainConfig cfg;
  cfg.max_epochs = 100;
  cfg.patience = 7;
  // Improves for 10 epochs, then flat.
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = Eigen::VectorXd::Zero(1);
    g[0] = -1.0;
    return -std::min(x[0], 0.1);
  };
  const TrainReport r = train(f, Eigen::VectorXd::Zero(1), cfg);
  EXPECT_TRUE(r.early_stopped);
  EXPECT_EQ(r.epochs_run(), r.best_epoch + cfg.patience + 1);
}

TEST(Train, NonFiniteLossThrows) {
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.patience = 5;
  const Objective f = [](const Eigen::VectorXd&, Eigen::VectorXd& g) {
    g = Eigen::VectorXd::Zero(1);
    return std::nan("");
  };
  EXPECT_THROW(train(f, Eigen::VectorXd::Zero(1), cfg), EvaluationError);
}

TEST(Train, CallbackStops) {
  TrainConfig cfg;
  cfg.max_epochs = 100;
  cfg.patience = 100;
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2 * x;
    return x.squaredNorm();
  };
  const TrainReport r = train(f, Eigen::VectorXd::Ones(1), cfg, [](int e, double) { return e < 4; });
  EXPECT_EQ(r.epochs_run(), 5);
}

TEST(Train, BestLossMonotoneInEpochBudget) {
  config::Scenario sc = config::load_scenario(DEDEM_SCENARIO_DIR "/gradcheck_toy.toml");
  double prev = 0.0;
  for (int n : {1, 5, 20, 60}) {
    sc.train.max_epochs = n;
    sc.train.patience = n;
    const Solution s = solve(sc);
    if (n > 1) EXPECT_LE(s.report.best_loss, prev);
    prev = s.report.best_loss;
    for (double l : s.report.loss) EXPECT_TRUE(std::isfinite(l));
  }
}

TEST(Train, DeterministicRepeat) {
  config::Scenario sc = config::load_scenario(DEDEM_SCENARIO_DIR "/gradcheck_toy.toml");
  sc.train.max_epochs = 50;
  sc.train.patience = 50;
  sc.train.deterministic = true;
  const Solution a = solve(sc);
  const Solution b = solve(sc);
  EXPECT_EQ(a.report.loss, b.report.loss);
  EXPECT_EQ(a.report.best_params, b.report.best_params);
}

TEST(Train, PatchTestConverges) {
  const config::Scenario sc = config::load_scenario(DEDEM_SCENARIO_DIR "/patch_test.toml");
  const Solution s = solve(sc);
  const auto pts = elastic::lattice_points(sc.domain, 11, 11);
  const config::FieldTable got = elastic::field_snapshot(s.report.best_params, sc, s.space, pts);
  config::FieldTable ref;
  ref.names = {"u1", "u2"};
  ref.points = pts;
  ref.values.resize(static_cast<Eigen::Index>(pts.size()), 2);
  const double e = 1e5, nu = 0.3, sig = 10.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ref.values.row(static_cast<Eigen::Index>(i)) << -nu * (1 + nu) * sig / e * pts[i].x(),
        sig * (1 - nu * nu) / e * pts[i].y();
  }
  for (double r : fracture::rrmse(got, ref)) EXPECT_LE(r, 1e-3);
}

TEST(GradCheck, ToyNetwork) {
  const config::Scenario sc = config::load_scenario(DEDEM_SCENARIO_DIR "/gradcheck_toy.toml");
  const nn::TrialSpace space = nn::make_trial_space(sc);
  ASSERT_EQ(space.config.param_count(), 50u);
  const quad::QuadGrid grid = quad::build_scenario_grid(sc);
  const elastic::EnergyModel model(sc, grid, space);
  const GradCheckReport r = check_gradient(model, nn::init_params(space.config, sc.seed), 50, 1);
  EXPECT_EQ(r.entries.size(), 50u);
  EXPECT_LE(r.max_rel_error, 1e-5);
  EXPECT_LE(r.max_tape_rel_error, 1e-12);
}
