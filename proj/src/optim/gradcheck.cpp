#include "dedem/optim/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dedem::optim {

GradCheckReport check_gradient(const elastic::EnergyModel& model, const nn::ParamVector& params,
                               std::size_t count, std::uint64_t seed, double h) {
  const auto n = static_cast<std::size_t>(params.size());
  Eigen::VectorXd g, gt;
  model.evaluate(params, &g);
  model.evaluate_tape(params, &gt);
  const double floor = 1e-6 * std::max(g.cwiseAbs().maxCoeff(), 1e-300);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (count < n) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
  }
  auto rel = [floor](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
  };
  GradCheckReport rep;
  for (std::size_t i : idx) {
    const auto k = static_cast<Eigen::Index>(i);
    const double step = h * std::max(1.0, std::abs(params[k]));
    nn::ParamVector p = params;
    p[k] = params[k] + step;
    const double fp = model.evaluate(p);
    p[k] = params[k] - step;
    const double fm = model.evaluate(p);
    GradCheckEntry e;
    e.index = i;
    e.analytic = g[k];
    e.finite_difference = (fp - fm) / (2.0 * step);
    e.tape = gt[k];
    e.rel_error = rel(e.analytic, e.finite_difference);
    rep.max_rel_error = std::max(rep.max_rel_error, e.rel_error);
    rep.max_tape_rel_error = std::max(rep.max_tape_rel_error, rel(e.analytic, e.tape));
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace dedem::optim
