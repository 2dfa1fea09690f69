#pragma once

#include "dedem/config/scenario.hpp"
#include "dedem/elasticity/energy.hpp"
#include "dedem/nn/network.hpp"
#include "dedem/optim/adam.hpp"
#include "dedem/quadrature/grid.hpp"

#include <optional>

namespace dedem::optim {

struct Solution {
  nn::TrialSpace space;
  quad::QuadGrid grid;
  TrainReport report;
};

/// Trains the scenario's trial function by minimising the potential energy.
/// Starts from `init` when given (warm start), else from init_params(seed).
Solution solve(const config::Scenario& sc, const std::optional<nn::ParamVector>& init = {},
               const EpochCallback& on_epoch = {});

}  // namespace dedem::optim
