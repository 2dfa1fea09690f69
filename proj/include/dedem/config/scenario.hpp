#pragma once

#include "dedem/common.hpp"
#include "dedem/config/expression.hpp"
#include "dedem/elasticity/material.hpp"
#include "dedem/geometry/embedding.hpp"
#include "dedem/optim/train_config.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dedem::config {

/// Where a material applies. Half-plane regions cover n.(x - p) > 0; circle
/// regions cover |x - c| <= r. Points on a region boundary follow the
/// sgn(0) = -1 convention, i.e. they fall on the negative side.
struct RegionShape {
  enum class Kind { Whole, HalfPlane, Circle };
  Kind kind = Kind::Whole;
  Vec2 point = Vec2::Zero();
  Vec2 normal = Vec2(0.0, 1.0);
  double radius = 0.0;

  bool contains(const Vec2& x) const;
  /// Boundary curve of a non-whole region.
  std::optional<geometry::InterfaceShape> boundary() const;
};

struct MaterialRegion {
  std::string name;
  elastic::Material material;
  RegionShape shape;
};

struct NamedInterface {
  std::string id;
  geometry::InterfaceShape shape;
};

/// u = A * u_hat + B for one displacement component.
struct ConstraintPair {
  Expression a = Expression::constant(1.0);
  Expression b = Expression::constant(0.0);
};

enum class Edge { Bottom, Right, Top, Left };

std::string_view edge_name(Edge e);

/// Distributed load in MPa. Edge loads are tractions (t1, t2). Crack loads
/// are a pressure acting on both faces plus a net face load [[t_d]] = (t1, t2)
/// working through the mean face displacement.
struct TractionLoad {
  std::string target;
  std::optional<Edge> edge;
  Expression t1;
  Expression t2;
  Expression pressure;
};

struct RefinementSpec {
  /// Metres; 0 selects 0.1 * min(domain width, height).
  double radius = 0.0;
  int factor = 4;
};

struct GridSpec {
  int nx = 80;
  int ny = 100;
  RefinementSpec refinement;
};

struct NetworkSettings {
  int width = 30;
  int residual_blocks = 2;
  /// Multiplier applied to every embedding value before it enters the network.
  double embedding_scale = 1.0;
  /// When false, interfaces only select materials and are not fed to the
  /// network (plain energy method without weak-discontinuity embedding).
  bool embed_interfaces = true;
};

struct SifSettings {
  std::string crack_id;
  /// Extrapolation window as fractions of the crack length a; negative values
  /// select (0.3, 0.35) when a/b > 0.2 and (0.4, 0.8) otherwise.
  double window_lo = -1.0;
  double window_hi = -1.0;
  int samples = 12;
  /// Width b used in the a/b window rule; 0 means the domain width.
  double reference_width = 0.0;
};

struct PropagationSettings {
  int steps = 0;
  double step_length = 0.15;
  int max_epochs = 20000;
};

struct Scenario {
  std::string name;
  Rect domain;
  elastic::AnalysisMode mode = elastic::AnalysisMode::PlaneStrain;
  std::vector<MaterialRegion> regions;
  std::vector<geometry::CrackPath> cracks;
  std::vector<NamedInterface> interfaces;
  std::array<ConstraintPair, 2> constraints;
  std::vector<TractionLoad> tractions;
  std::array<Expression, 2> body_force;
  optim::TrainConfig train;
  NetworkSettings network;
  GridSpec grid;
  SifSettings sif;
  PropagationSettings propagation;
  std::uint64_t seed = 0;

  /// Strong specs for every crack, then weak specs for every interface when
  /// interfaces are embedded.
  std::vector<geometry::EmbeddingSpec> embedding_specs() const;

  /// Material of the last region containing x. Throws if none does.
  const elastic::Material& material_at(const Vec2& x) const;

  /// Interfaces plus boundaries of non-whole regions.
  std::vector<geometry::InterfaceShape> material_boundaries() const;

  const geometry::CrackPath* find_crack(std::string_view id) const;

  double refinement_radius() const;

  /// Re-checks every invariant; throws ScenarioError naming the field.
  void validate() const;
};

/// Parses scenario text. Syntax errors carry line/column, semantic errors
/// name the offending field.
Scenario parse_scenario(std::string_view text);

Scenario load_scenario(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace dedem::config
