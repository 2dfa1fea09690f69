#include "dedem/optim/adam.hpp"

#include "dedem/common.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace dedem::optim {

void TrainConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ScenarioError(std::string("train.") + name, "must be positive");
    }
  };
  positive(lr0, "lr0");
  positive(decay_factor, "decay_factor");
  positive(decay_every, "decay_every");
  positive(patience, "patience");
  positive(adam_eps, "adam_eps");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ScenarioError("train.beta1", "must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ScenarioError("train.beta2", "must lie in [0, 1)");
  if (max_epochs < 0) throw ScenarioError("train.max_epochs", "must be non-negative");
  if (max_epochs > 0 && patience > max_epochs) {
    throw ScenarioError("train.patience", "must not exceed max_epochs");
  }
  if (!(improvement_tol >= 0.0)) throw ScenarioError("train.improvement_tol", "must be >= 0");
  if (!(displacement_scale >= 0.0) || !std::isfinite(displacement_scale)) {
    throw ScenarioError("train.displacement_scale", "must be >= 0 (0 = automatic)");
  }
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
  if (epoch < 0) throw Error("optimizer", "epoch must be non-negative");
  return cfg.lr0 * std::pow(cfg.decay_factor, epoch / cfg.decay_every);
}

bool adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state, double lr,
               const TrainConfig& cfg) {
  if (grad.size() != params.size()) throw Error("optimizer", "gradient length mismatch");
  if (!grad.allFinite()) return false;
  if (state.m.size() != params.size()) {
    state.m.setZero(params.size());
    state.v.setZero(params.size());
    state.step = 0;
  }
  ++state.step;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.adam_eps);
  return true;
}

int TrainReport::first_epoch_reaching(double target) const {
  for (std::size_t e = 0; e < loss.size(); ++e) {
    if (loss[e] <= target) return static_cast<int>(e);
  }
  return -1;
}

TrainReport train(const Objective& objective, Eigen::VectorXd init, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  TrainReport rep;
  rep.best_params = init;
  Eigen::VectorXd params = std::move(init);
  Eigen::VectorXd grad(params.size());
  if (cfg.max_epochs == 0) {
    rep.best_loss = objective(params, grad);
    return rep;
  }
  AdamState state;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double loss = objective(params, grad);
    if (!std::isfinite(loss)) {
      throw EvaluationError("optimizer", "non-finite loss at epoch " + std::to_string(epoch));
    }
    const double lr = lr_at_epoch(cfg, epoch);
    rep.loss.push_back(loss);
    rep.lr.push_back(lr);
    if (rep.best_epoch < 0 || rep.best_loss - loss > cfg.improvement_tol * std::abs(rep.best_loss)) {
      rep.best_epoch = epoch;
      rep.best_loss = loss;
      rep.best_params = params;
    }
    if (on_epoch && !on_epoch(epoch, loss)) break;
    if (epoch - rep.best_epoch >= cfg.patience) {
      rep.early_stopped = true;
      break;
    }
    if (!adam_step(params, grad, state, lr, cfg)) rep.flagged_epochs.push_back(epoch);
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

void write_loss_history(const TrainReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("optimizer", "cannot write '" + path.string() + "'");
  out << "epoch,loss,lr\n";
  char buf[96];
  for (std::size_t e = 0; e < report.loss.size(); ++e) {
    const int n = std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", e, report.loss[e], report.lr[e]);
    out.write(buf, n);
  }
  if (!out) throw Error("optimizer", "failed writing '" + path.string() + "'");
}

}  // namespace dedem::optim
