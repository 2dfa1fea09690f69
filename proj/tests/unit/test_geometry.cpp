#include "dedem/geometry/crack.hpp"
#include "dedem/geometry/embedding.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dedem;
using namespace dedem::geometry;

namespace {

CrackPath half_plate_crack() { return CrackPath("c", {Vec2(0.0, 0.0), Vec2(0.5, 0.0)}, false, true); }

}  // namespace

TEST(Sdf, HandGeometry) {
  const CrackPath c = half_plate_crack();
  const auto a = sdf_polyline({0.3, 0.2}, c);
  EXPECT_NEAR(a.value, 0.2, 1e-15);
  EXPECT_NEAR(a.gradient.x(), 0.0, 1e-15);
  EXPECT_NEAR(a.gradient.y(), 1.0, 1e-15);

  EXPECT_EQ(sdf_polyline({0.3, 0.0}, c).value, 0.0);
  EXPECT_NEAR(sdf_polyline({0.8, 0.1}, c).value, std::sqrt(0.3 * 0.3 + 0.1 * 0.1), 1e-15);
  EXPECT_NEAR(sdf_polyline({0.3, -0.2}, c).value, -0.2, 1e-15);
}

TEST(Sdf, TipTangential) {
  const CrackPath c = half_plate_crack();
  EXPECT_NEAR(tip_tangential_sdf({0.3, 0.1}, c, TipEnd::End).value, 0.2, 1e-15);
  EXPECT_NEAR(tip_tangential_sdf({0.5, 0.7}, c, TipEnd::End).value, 0.0, 1e-15);
  EXPECT_NEAR(tip_tangential_sdf({0.8, 0.0}, c, TipEnd::End).value, -0.3, 1e-15);
  EXPECT_THROW(tip_tangential_sdf({0.3, 0.1}, c, TipEnd::Start), Error);
}

TEST(Sdf, GradientMatchesFiniteDifferenceOnKinkedPath) {
  const CrackPath c("k", {Vec2(0.1, 0.1), Vec2(0.5, 0.3), Vec2(0.7, 0.0)}, true, true);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec2 x(u(rng), u(rng));
    const auto s = sdf_polyline(x, c);
    if (std::abs(s.value) < 1e-3) continue;
    const double h = 1e-7;
    const Vec2 fd((sdf_polyline(x + Vec2(h, 0), c).value - sdf_polyline(x - Vec2(h, 0), c).value) / (2 * h),
                  (sdf_polyline(x + Vec2(0, h), c).value - sdf_polyline(x - Vec2(0, h), c).value) / (2 * h));
    // Skip points near the medial axis where the nearest segment switches.
    if ((fd - s.gradient).norm() > 1e-3) continue;
    EXPECT_NEAR(std::abs(s.value), (x - s.closest).norm(), 1e-12);
    EXPECT_NEAR((fd - s.gradient).norm(), 0.0, 1e-6);
  }
}

TEST(StrongEmbedding, HalfPlateValues) {
  const CrackPath c = half_plate_crack();
  EXPECT_NEAR(strong_embedding({0.3, 1e-9}, c).value, 0.04, 1e-14);
  EXPECT_NEAR(strong_embedding({0.3, -1e-9}, c).value, -0.04, 1e-14);
  const auto ahead = strong_embedding({0.7, 0.3}, c);
  EXPECT_EQ(ahead.value, 0.0);
  EXPECT_EQ(ahead.gradient.norm(), 0.0);
  for (double y : {-0.4, -1e-3, 0.0, 0.2}) {
    const auto t = strong_embedding({0.5, y}, c);
    EXPECT_EQ(t.value, 0.0);
    EXPECT_EQ(t.gradient.norm(), 0.0);
  }
  // On the crack the sign convention gives the negative face.
  EXPECT_NEAR(strong_embedding({0.3, 0.0}, c).value, -0.04, 1e-15);
  EXPECT_NEAR(strong_embedding({0.3, 0.0}, c, 1.0).value, 0.04, 1e-15);
}

TEST(StrongEmbedding, JumpAcrossInteriorCrack) {
  const CrackPath c("i", {Vec2(0.2, 0.3), Vec2(0.5, 0.5), Vec2(0.8, 0.4)}, true, true);
  const double eps = 1e-8;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 50; ++i) {
    const std::size_t seg = i % 2;
    const Vec2 a = c.vertices()[seg], b = c.vertices()[seg + 1];
    const Vec2 x0 = a + u(rng) * (b - a);
    const Vec2 n = c.segment_normal(seg);
    const double jump = strong_embedding(x0 + eps * n, c).value - strong_embedding(x0 - eps * n, c).value;
    const double p1 = tip_tangential_sdf(x0, c, TipEnd::Start).value;
    const double p2 = tip_tangential_sdf(x0, c, TipEnd::End).value;
    const double expected = 2.0 * std::pow(std::max(p1 * p2, 0.0), 2);
    EXPECT_NEAR(jump, expected, 1e-8 * expected);
  }
}

TEST(StrongEmbedding, GradientMatchesFiniteDifference) {
  const CrackPath c("i", {Vec2(0.2, 0.3), Vec2(0.8, 0.4)}, true, true);
  for (const Vec2 x : {Vec2(0.4, 0.6), Vec2(0.5, 0.1), Vec2(0.7, 0.5), Vec2(0.9, 0.2)}) {
    const auto e = strong_embedding(x, c);
    const double h = 1e-7;
    for (int k = 0; k < 2; ++k) {
      Vec2 d = Vec2::Zero();
      d[k] = h;
      const double fd = (strong_embedding(x + d, c).value - strong_embedding(x - d, c).value) / (2 * h);
      EXPECT_NEAR(e.gradient[k], fd, 1e-7);
    }
  }
}

TEST(WeakEmbedding, Values) {
  const auto line = InterfaceShape::line({0.0, 0.0}, {0.0, 1.0});
  const auto a = weak_embedding({0.4, -0.3}, line);
  EXPECT_NEAR(a.value, 0.3, 1e-15);
  EXPECT_NEAR(a.gradient.y(), -1.0, 1e-15);
  const auto circle = InterfaceShape::circle({0.5, 0.5}, 0.25);
  EXPECT_NEAR(weak_embedding({0.5, 0.9}, circle).value, 0.15, 1e-15);
  EXPECT_EQ(weak_embedding({0.75, 0.5}, circle).value, 0.0);
}

TEST(WeakEmbedding, OneLipschitz) {
  const auto circle = InterfaceShape::circle({0.5, 0.5}, 0.25);
  const auto line = InterfaceShape::line({0.2, 0.1}, Vec2(1.0, 2.0).normalized());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    const Vec2 x(u(rng), u(rng)), y(u(rng), u(rng));
    const double d = (x - y).norm();
    EXPECT_LE(std::abs(weak_embedding(x, circle).value - weak_embedding(y, circle).value), d * (1 + 1e-12));
    EXPECT_LE(std::abs(weak_embedding(x, line).value - weak_embedding(y, line).value), d * (1 + 1e-12));
  }
}

TEST(EmbedInputs, NoSpecsIsIdentity) {
  const auto e = embed_inputs({0.3, 0.7}, {});
  ASSERT_EQ(e.values.size(), 2);
  EXPECT_EQ(e.values, Eigen::Vector2d(0.3, 0.7));
  EXPECT_EQ(e.jacobian, (Eigen::Matrix<double, Eigen::Dynamic, 2>(Eigen::Matrix2d::Identity())));
}

TEST(EmbedInputs, CrackAndInterface) {
  const std::vector<EmbeddingSpec> specs = {{"c", half_plate_crack()},
                                            {"i", InterfaceShape::line({0.0, 0.0}, {0.0, 1.0})}};
  const auto e = embed_inputs({0.3, 0.1}, specs);
  ASSERT_EQ(e.values.size(), 4);
  EXPECT_NEAR(e.values[0], 0.3, 1e-15);
  EXPECT_NEAR(e.values[1], 0.1, 1e-15);
  EXPECT_NEAR(e.values[2], 0.04, 1e-15);
  EXPECT_NEAR(e.values[3], 0.1, 1e-15);
  // d/dx1 relu(0.5 - x1)^2 = -2 * 0.2 on the upper side; d|x2|/dx2 = 1.
  EXPECT_NEAR(e.jacobian(2, 0), -0.4, 1e-15);
  EXPECT_NEAR(e.jacobian(2, 1), 0.0, 1e-15);
  EXPECT_NEAR(e.jacobian(3, 1), 1.0, 1e-15);

  const std::vector<double> minus = {-1.0, 0.0};
  EXPECT_NEAR(embed_inputs({0.3, 0.1}, specs, 2.0, minus).values[2], -0.08, 1e-15);
}

TEST(CrackPath, ExtensionKeepsLengthBookkeeping) {
  CrackPath c = half_plate_crack();
  const double l0 = c.length();
  for (int k = 1; k <= 3; ++k) {
    const Vec2 tip = c.endpoint(TipEnd::End);
    const double ang = -0.3 * k;
    c = c.extended(TipEnd::End, tip + 0.15 * Vec2(std::cos(ang), std::sin(ang)));
    EXPECT_NEAR(c.length(), l0 + 0.15 * k, 1e-12);
    EXPECT_TRUE(c.is_tip(TipEnd::End));
    EXPECT_FALSE(c.is_tip(TipEnd::Start));
  }
  EXPECT_THROW(CrackPath("bad", {Vec2(0, 0)}, true, true), Error);
}
