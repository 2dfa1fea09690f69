#pragma once

#include "dedem/elasticity/energy.hpp"

#include <cstdint>
#include <vector>

namespace dedem::optim {

struct GradCheckEntry {
  std::size_t index = 0;
  double analytic = 0.0;
  double finite_difference = 0.0;
  double tape = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;       // batched kernel vs central differences
  double max_tape_rel_error = 0.0;  // batched kernel vs tape
};

/// Compares the batched energy gradient with central differences of step
/// h * max(1, |theta_i|) and with the tape gradient on `count` coordinates
/// drawn without replacement from the seed (all of them when count >= n).
/// Relative errors use max(|a|, |b|, floor) with floor = 1e-6 * ||g||_inf so
/// that coordinates with a vanishing derivative do not divide by noise.
GradCheckReport check_gradient(const elastic::EnergyModel& model, const nn::ParamVector& params,
                               std::size_t count, std::uint64_t seed, double h = 1e-5);

}  // namespace dedem::optim
