#include "dedem/optim/solve.hpp"

namespace dedem::optim {

Solution solve(const config::Scenario& sc, const std::optional<nn::ParamVector>& init,
               const EpochCallback& on_epoch) {
  Solution s;
  s.space = nn::make_trial_space(sc);
  s.grid = quad::build_scenario_grid(sc);
  const elastic::EnergyModel model(sc, s.grid, s.space);
  nn::ParamVector start = init ? *init : nn::init_params(s.space.config, sc.seed);
  if (static_cast<std::size_t>(start.size()) != s.space.config.param_count()) {
    throw Error("optimizer", "initial parameters do not match the network");
  }
  Objective f = [&model](const Eigen::VectorXd& p, Eigen::VectorXd& g) {
    return model.evaluate(p, &g);
  };
  s.report = train(f, std::move(start), sc.train, on_epoch);
  return s;
}

}  // namespace dedem::optim
