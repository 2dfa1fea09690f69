#pragma once

#include "dedem/config/scenario.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dedem::quad {

/// Quadrature node with area weight (m^2) and one side label per crack:
/// +1 / -1 for the face the node belongs to, 0 when no crack is registered.
struct QuadNode {
  Vec2 x = Vec2::Zero();
  double weight = 0.0;
  std::vector<signed char> sides;
};

/// 1D trapezoid node on a boundary edge or crack face (weight in m).
struct LineNode {
  static constexpr std::size_t kNoNode = static_cast<std::size_t>(-1);
  Vec2 x = Vec2::Zero();
  double weight = 0.0;
  /// Index of the coinciding 2D node, if any.
  std::size_t node = kNoNode;
};

struct EdgeRule {
  config::Edge edge = config::Edge::Bottom;
  std::vector<LineNode> nodes;
};

/// Arc-length trapezoid nodes on a crack; `normal` is the left normal of the
/// segment carrying each node.
struct CrackFaceRule {
  std::string crack_id;
  std::vector<LineNode> nodes;
  std::vector<Vec2> normals;
};

struct QuadGrid {
  Rect domain;
  int nx = 0;
  int ny = 0;
  std::vector<QuadNode> nodes;
  /// Crack ids in the order of QuadNode::sides.
  std::vector<std::string> crack_ids;
  std::vector<EdgeRule> edges;
  std::vector<CrackFaceRule> crack_faces;
  bool refined = false;
  bool relabeled = false;

  double total_weight() const;
  const EdgeRule* edge(config::Edge e) const;
};

/// Tensor-product trapezoid nodes: corner weight h1 h2 / 4, edge h1 h2 / 2,
/// interior h1 h2.
QuadGrid build_uniform_grid(int nx, int ny, const Rect& rect);

/// Subdivides every cell whose centre lies within spec.radius of a tip into
/// factor x factor trapezoid sub-cells. Must run before relabeling.
QuadGrid refine_near_tips(const QuadGrid& grid, std::span<const Vec2> tips,
                          const config::RefinementSpec& spec);

/// Labels every node by the side of each crack and splits nodes lying on a
/// crack (within 1e-12 diag) into two half-weight replicas offset by
/// +-1e-8 diag along the crack normal. `interfaces` get the same splitting so
/// that each replica sees one material; they carry no label.
QuadGrid crack_aware_relabel(const QuadGrid& grid, std::span<const geometry::CrackPath> cracks,
                             std::span<const geometry::InterfaceShape> interfaces = {});

/// 1D trapezoid rules along each of the four edges, built from the nodes
/// lying on that edge.
void attach_edge_rules(QuadGrid& grid);

/// Crack-face rules with ceil(length / min(h1, h2)) + 1 nodes per crack.
void attach_crack_face_rules(QuadGrid& grid, std::span<const geometry::CrackPath> cracks);

/// build -> refine around every crack tip -> relabel -> edge and face rules.
QuadGrid build_scenario_grid(const config::Scenario& sc);

/// Sum of w_i f_i in node order.
double integrate(std::span<const double> samples, const QuadGrid& grid);

/// Dump as CSV: x1, x2, weight, side_<crack id>...
void write_grid_csv(const QuadGrid& grid, const std::filesystem::path& path);

/// Crack tips of all cracks, in crack order.
std::vector<Vec2> crack_tips(std::span<const geometry::CrackPath> cracks);

}  // namespace dedem::quad
