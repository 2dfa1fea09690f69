#include "dedem/quadrature/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dedem;
using namespace dedem::quad;

namespace {

const Rect kUnit{0.0, 1.0, 0.0, 1.0};

double integrate_fn(const QuadGrid& g, double (*f)(const Vec2&)) {
  std::vector<double> s;
  for (const auto& n : g.nodes) s.push_back(f(n.x));
  return integrate(s, g);
}

}  // namespace

TEST(UniformGrid, SmallestGrid) {
  const QuadGrid g = build_uniform_grid(2, 2, kUnit);
  ASSERT_EQ(g.nodes.size(), 4u);
  for (const auto& n : g.nodes) EXPECT_DOUBLE_EQ(n.weight, 0.25);
  EXPECT_DOUBLE_EQ(g.total_weight(), 1.0);
}

TEST(UniformGrid, ThreeByThreeWeights) {
  const QuadGrid g = build_uniform_grid(3, 3, kUnit);
  const double expected[9] = {1.0 / 16, 1.0 / 8, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 8, 1.0 / 16};
  for (int i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(g.nodes[i].weight, expected[i]);
}

TEST(UniformGrid, ExactOnLinears) {
  for (int n : {2, 3, 7, 40}) {
    const QuadGrid g = build_uniform_grid(n, n + 3, kUnit);
    EXPECT_NEAR(integrate_fn(g, [](const Vec2& x) { return x.x(); }), 0.5, 1e-15);
    EXPECT_NEAR(integrate_fn(g, [](const Vec2& x) { return x.x() + x.y(); }), 1.0, 1e-15);
    EXPECT_NEAR(integrate_fn(g, [](const Vec2&) { return 3.5; }), 3.5, 1e-13);
  }
}

TEST(UniformGrid, CompositeTrapezoidOnQuadratic) {
  const QuadGrid g = build_uniform_grid(101, 2, kUnit);
  // Composite trapezoid of x^2 with h = 0.01: 1/3 + h^2/6.
  EXPECT_NEAR(integrate_fn(g, [](const Vec2& x) { return x.x() * x.x(); }), 1.0 / 3.0 + 1e-4 / 6.0, 1e-14);
}

TEST(UniformGrid, SecondOrderConvergence) {
  std::vector<double> err;
  for (int n : {11, 21, 41}) {
    const QuadGrid g = build_uniform_grid(n, n, kUnit);
    err.push_back(std::abs(integrate_fn(g, [](const Vec2& x) { return x.x() * x.x() * x.y() * x.y(); }) - 1.0 / 9.0));
  }
  EXPECT_NEAR(err[0] / err[1], 4.0, 0.05);
  EXPECT_NEAR(err[1] / err[2], 4.0, 0.05);
}

TEST(UniformGrid, Errors) {
  EXPECT_THROW(build_uniform_grid(1, 5, kUnit), Error);
  EXPECT_THROW(build_uniform_grid(5, 5, Rect{0, 0, 0, 1}), Error);
  const QuadGrid g = build_uniform_grid(3, 3, kUnit);
  EXPECT_THROW(integrate(std::vector<double>(8, 1.0), g), Error);
}

TEST(Refinement, NoTipsLeavesGrid) {
  const QuadGrid g = build_uniform_grid(11, 11, kUnit);
  const QuadGrid r = refine_near_tips(g, {}, config::RefinementSpec{0.1, 4});
  EXPECT_EQ(r.nodes.size(), g.nodes.size());
}

TEST(Refinement, ConservesWeightAndAddsNodesOnlyNearTip) {
  const QuadGrid g = build_uniform_grid(21, 21, kUnit);
  const std::vector<Vec2> tips = {Vec2(0.5, 0.5)};
  const config::RefinementSpec spec{0.1, 4};
  const QuadGrid r = refine_near_tips(g, tips, spec);
  EXPECT_GT(r.nodes.size(), g.nodes.size());
  EXPECT_NEAR(r.total_weight(), 1.0, 1e-12);
  EXPECT_NEAR(integrate_fn(r, [](const Vec2& x) { return x.x() + 2 * x.y(); }), 1.5, 1e-12);
  const double h = 1.0 / 20.0;
  for (const auto& n : r.nodes) {
    const double fx = n.x.x() / h, fy = n.x.y() / h;
    const bool coarse = std::abs(fx - std::round(fx)) < 1e-9 && std::abs(fy - std::round(fy)) < 1e-9;
    if (!coarse) EXPECT_LE((n.x - tips[0]).norm(), spec.radius + std::sqrt(2.0) * h);
  }
  EXPECT_THROW(refine_near_tips(r, tips, spec), Error);
}

TEST(Relabel, SplitsOnCrackNodes) {
  const QuadGrid g = build_uniform_grid(11, 11, Rect{0.0, 1.0, -0.5, 0.5});
  const std::vector<geometry::CrackPath> cracks = {
      geometry::CrackPath("c", {Vec2(0.0, 0.0), Vec2(0.5, 0.0)}, false, true)};
  const QuadGrid r = crack_aware_relabel(g, cracks, {});
  EXPECT_NEAR(r.total_weight(), g.total_weight(), 1e-12);
  // Nodes at x = 0, 0.1, ..., 0.5 on y = 0 are split.
  EXPECT_EQ(r.nodes.size(), g.nodes.size() + 6);
  const double eps = 1e-8 * g.domain.diagonal();
  int split = 0;
  for (const auto& n : r.nodes) {
    ASSERT_EQ(n.sides.size(), 1u);
    EXPECT_NE(n.sides[0], 0);
    const auto sd = geometry::sdf_polyline(n.x, cracks[0]);
    EXPECT_GT(std::abs(sd.value), 0.0);
    EXPECT_EQ(n.sides[0], sd.value > 0 ? 1 : -1);
    if (std::abs(std::abs(n.x.y()) - eps) < 1e-20 && n.x.x() <= 0.5 + 1e-12) ++split;
  }
  EXPECT_EQ(split, 12);
}

TEST(Relabel, InterfacesSplitWithoutLabels) {
  const QuadGrid g = build_uniform_grid(5, 5, kUnit);
  const std::vector<geometry::InterfaceShape> ifs = {geometry::InterfaceShape::line({0.0, 0.5}, {0.0, 1.0})};
  const QuadGrid r = crack_aware_relabel(g, {}, ifs);
  EXPECT_EQ(r.nodes.size(), 30u);
  EXPECT_NEAR(r.total_weight(), 1.0, 1e-12);
}

TEST(LineRules, EdgesAndCrackFaces) {
  QuadGrid g = build_uniform_grid(5, 9, Rect{0.0, 2.0, 0.0, 1.0});
  attach_edge_rules(g);
  for (auto e : {config::Edge::Bottom, config::Edge::Top}) {
    double len = 0.0;
    for (const auto& n : g.edge(e)->nodes) len += n.weight;
    EXPECT_NEAR(len, 2.0, 1e-15);
  }
  double left = 0.0;
  for (const auto& n : g.edge(config::Edge::Left)->nodes) {
    left += n.weight;
    EXPECT_EQ(g.nodes[n.node].x, n.x);
  }
  EXPECT_NEAR(left, 1.0, 1e-15);

  const std::vector<geometry::CrackPath> cracks = {
      geometry::CrackPath("k", {Vec2(0.1, 0.1), Vec2(0.9, 0.5), Vec2(1.5, 0.2)}, true, true)};
  attach_crack_face_rules(g, cracks);
  ASSERT_EQ(g.crack_faces.size(), 1u);
  double len = 0.0;
  for (const auto& n : g.crack_faces[0].nodes) len += n.weight;
  EXPECT_NEAR(len, cracks[0].length(), 1e-12);
}

TEST(ScenarioGrid, CenterCrack) {
  const config::Scenario sc = config::load_scenario(DEDEM_SCENARIO_DIR "/center_crack.toml");
  const QuadGrid g = build_scenario_grid(sc);
  EXPECT_TRUE(g.refined);
  EXPECT_TRUE(g.relabeled);
  EXPECT_NEAR(g.total_weight(), sc.domain.area(), 1e-12 * sc.domain.area());
}
