#pragma once

#include "dedem/ad/tape.hpp"
#include "dedem/config/scenario.hpp"
#include "dedem/geometry/embedding.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dedem::nn {

/// Architecture of one displacement-component network: tanh stem, residual
/// blocks of two tanh layers, linear scalar head. Both components share it.
struct NetConfig {
  int input_dim = 2;
  int width = 30;
  int residual_blocks = 2;
  static constexpr int kLayersPerBlock = 2;

  void validate() const;
  std::size_t component_param_count() const;
  std::size_t param_count() const { return 2 * component_param_count(); }

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

using ParamVector = Eigen::VectorXd;

/// One contiguous slice of the flat parameter vector. Weight matrices are
/// stored column-major (rows = outputs, cols = inputs).
struct LayerSlice {
  int component = 0;
  std::string layer;  // "stem", "block<k>.<l>", "head"
  char role = 'W';    // 'W' or 'b'
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

/// Slices in storage order; together they tile [0, param_count()).
std::vector<LayerSlice> param_layout(const NetConfig& cfg);

/// Offsets of the layers of one component inside the flat vector.
struct ComponentOffsets {
  std::size_t stem_w = 0, stem_b = 0;
  std::vector<std::array<std::size_t, 2>> block_w, block_b;  // [block][layer]
  std::size_t head_w = 0, head_b = 0;
};

ComponentOffsets component_offsets(const NetConfig& cfg, int component);

/// Glorot-uniform weights, zero biases; bit-reproducible from the seed.
ParamVector init_params(const NetConfig& cfg, std::uint64_t seed);

/// Plain forward pass of both component networks (outputs before scaling and
/// hard constraints).
std::array<double, 2> forward(std::span<const double> params, const NetConfig& cfg,
                              std::span<const double> x);

/// Same pass in SpatialDual arithmetic with recorded parameters.
std::array<ad::SpatialDual, 2> forward(std::span<const ad::AdScalar> params, const NetConfig& cfg,
                                       std::span<const ad::SpatialDual> x);

/// u = A u_hat + B with the product rule on the spatial channels.
ad::SpatialDual apply_hard_constraint(const ad::SpatialDual& u_hat,
                                      const config::ConstraintPair& pair, const Vec2& x);

/// Everything needed to turn parameters into a displacement field.
struct TrialSpace {
  NetConfig config;
  std::vector<geometry::EmbeddingSpec> specs;
  std::array<config::ConstraintPair, 2> constraints;
  double embedding_scale = 1.0;
  /// Metres per unit of network output.
  double output_scale = 1.0;
};

/// Trial space of a scenario. The output scale is the configured
/// displacement_scale, or load * extent / stiffness when that is 0.
TrialSpace make_trial_space(const config::Scenario& sc);

/// Characteristic displacement load * extent / E_min (m), falling back to the
/// largest |B| on the domain and finally 1e-6 * extent.
double auto_displacement_scale(const config::Scenario& sc);

/// Per-spec side overrides (see geometry::embed_inputs); empty = natural.
using Sides = std::span<const double>;

/// Full pipeline embed_inputs -> forward -> scale -> hard constraint, on the
/// tape. Returns (u1, u2) with their spatial channels.
std::array<ad::SpatialDual, 2> displacement(std::span<const ad::AdScalar> params,
                                            const TrialSpace& space, const Vec2& x,
                                            Sides sides = {});

/// Snapshot of trained parameters with the configuration they belong to.
struct ParamSnapshot {
  NetConfig config;
  std::uint64_t seed = 0;
  double output_scale = 1.0;
  double embedding_scale = 1.0;
  ParamVector params;
};

void save_snapshot(const ParamSnapshot& snap, const std::filesystem::path& path);
ParamSnapshot load_snapshot(const std::filesystem::path& path);

/// Parameters of `snap` for use as the initial point of a run with `expected`.
/// Throws on any architecture mismatch.
ParamVector warm_start(const ParamSnapshot& snap, const NetConfig& expected);

}  // namespace dedem::nn
