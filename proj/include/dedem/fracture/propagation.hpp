#pragma once

#include "dedem/config/scenario.hpp"
#include "dedem/fracture/sif.hpp"
#include "dedem/optim/solve.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dedem::fracture {

struct PropagationStep {
  int step = 0;
  Vec2 tip = Vec2::Zero();      // tip the step was analysed at
  double crack_length = 0.0;    // path length during the step
  double k1 = 0.0;
  double k2 = 0.0;
  double kink = 0.0;            // theta_c, rad
  double global_angle = 0.0;    // direction of the new segment, rad
  bool warm_started = false;
  SifResult sif;
  optim::TrainReport report;
  nn::ParamVector params;       // best parameters of this step
};

struct PropagationState {
  std::string crack_id;
  double step_length = 0.0;
  std::vector<geometry::CrackPath> history;  // history[k] is the geometry of step k
  std::vector<PropagationStep> steps;
  bool left_domain = false;
  geometry::CrackPath current() const { return history.back(); }
};

struct PropagationOptions {
  int steps = 0;
  double step_length = 0.15;
  /// Per-step epoch cap; 0 keeps the scenario's train.max_epochs.
  int max_epochs = 0;
  std::optional<nn::ParamVector> initial_params;
  /// Called after each finished step; return false to stop.
  std::function<bool(const PropagationStep&, const PropagationState&)> on_step;
  optim::EpochCallback on_epoch;
};

/// The crack driven by propagation: sif.crack when given, else the only
/// crack. It must have exactly one tip.
const geometry::CrackPath& active_crack(const config::Scenario& sc);

/// Copy of `sc` with the crack of the same id replaced.
config::Scenario with_crack(const config::Scenario& sc, const geometry::CrackPath& crack);

/// Quasi-static growth by the maximum circumferential stress criterion. Step 0
/// trains from scratch (or from initial_params); later steps restart from the
/// step-0 parameters, rebuilding embeddings and grid for the grown crack.
PropagationState propagate(const config::Scenario& sc, const PropagationOptions& opt);

/// CSV: step, a, K1, K2, R2_1, R2_2, window_lo, window_hi.
void write_sif_csv(const std::filesystem::path& path, const std::vector<int>& step,
                   const std::vector<double>& a, const std::vector<SifResult>& sifs);

/// CSV: step, tip_x, tip_y, theta_c (deg).
void write_path_csv(const PropagationState& state, const std::filesystem::path& path);

}  // namespace dedem::fracture
