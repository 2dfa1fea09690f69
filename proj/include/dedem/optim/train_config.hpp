#pragma once

namespace dedem::optim {

/// Adam schedule and stopping rule. Learning rate is
/// lr0 * decay_factor^floor(epoch / decay_every).
struct TrainConfig {
  double lr0 = 0.02;
  double decay_factor = 0.5;
  int decay_every = 5000;
  int patience = 1000;
  int max_epochs = 15000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Relative decrease of the best loss that counts as an improvement.
  double improvement_tol = 1e-12;
  bool deterministic = false;
  /// Network output unit in metres; 0 selects load * extent / stiffness.
  double displacement_scale = 0.0;

  void validate() const;
};

}  // namespace dedem::optim
