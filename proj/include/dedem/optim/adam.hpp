#pragma once

#include "dedem/optim/train_config.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <functional>
#include <vector>

namespace dedem::optim {

/// lr0 * decay_factor^floor(epoch / decay_every).
double lr_at_epoch(const TrainConfig& cfg, int epoch);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
};

/// One bias-corrected Adam update. Returns false, leaving params and state
/// untouched, when the gradient has a non-finite entry.
bool adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state, double lr,
               const TrainConfig& cfg);

struct TrainReport {
  std::vector<double> loss;  // loss evaluated at the start of each epoch
  std::vector<double> lr;
  int best_epoch = -1;
  double best_loss = 0.0;
  Eigen::VectorXd best_params;
  double wall_seconds = 0.0;
  bool early_stopped = false;
  /// Epochs whose gradient was non-finite (step skipped).
  std::vector<int> flagged_epochs;

  int epochs_run() const { return static_cast<int>(loss.size()); }
  /// First epoch whose loss is <= target, or -1.
  int first_epoch_reaching(double target) const;
};

/// Loss and gradient at the given parameters.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;
/// Called after each epoch with (epoch, loss); return false to stop.
using EpochCallback = std::function<bool(int, double)>;

/// Full-batch Adam. Each epoch evaluates the objective, records it, updates
/// the best snapshot and then steps. Stops after max_epochs or once `patience`
/// epochs have passed without a relative improvement above improvement_tol.
TrainReport train(const Objective& objective, Eigen::VectorXd init, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// CSV: epoch, loss, lr.
void write_loss_history(const TrainReport& report, const std::filesystem::path& path);

}  // namespace dedem::optim
