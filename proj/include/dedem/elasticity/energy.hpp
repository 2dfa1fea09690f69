#pragma once

#include "dedem/ad/tape.hpp"
#include "dedem/config/field_table.hpp"
#include "dedem/config/scenario.hpp"
#include "dedem/nn/batch.hpp"
#include "dedem/nn/network.hpp"
#include "dedem/quadrature/grid.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace dedem::elastic {

/// Energy terms in J per metre of thickness.
struct EnergyBreakdown {
  double strain_energy = 0.0;
  double boundary_traction_work = 0.0;
  double crack_traction_work = 0.0;
  double body_work = 0.0;

  double total() const {
    return strain_energy - boundary_traction_work - crack_traction_work - body_work;
  }
};

/// Loss evaluation points. Grid nodes carry area weights, a material and the
/// edge/body loads falling on them; crack faces add extra points (one per
/// face and face node) carrying only loads. Every load is a vector l with
/// work contribution l . u (N/m per m of thickness after unit folding).
struct EnergyPoints {
  std::vector<Vec2> x;
  std::vector<std::vector<double>> sides;  // per embedding spec
  std::vector<double> area_weight;
  std::vector<int> material;  // index into `stiffness`, -1 for face points
  std::vector<Eigen::Matrix3d> stiffness;
  nn::Matrix2X load_boundary, load_crack, load_body;

  std::size_t size() const { return x.size(); }
};

EnergyPoints assemble_points(const config::Scenario& sc, const quad::QuadGrid& grid,
                             const nn::TrialSpace& space);

/// Potential energy with its exact parameter gradient through the batched
/// kernel. Points are processed in fixed blocks whose partial sums are added
/// in block order, so results do not depend on the worker count.
class EnergyModel {
 public:
  EnergyModel(const config::Scenario& sc, const quad::QuadGrid& grid, nn::TrialSpace space);

  /// Total energy; fills `grad` (resized) and `parts` when given.
  double evaluate(const nn::ParamVector& params, Eigen::VectorXd* grad = nullptr,
                  EnergyBreakdown* parts = nullptr) const;

  /// Same quantity assembled on the reverse-mode tape with one recording per
  /// block of points. Slow; used for verification.
  double evaluate_tape(const nn::ParamVector& params, Eigen::VectorXd* grad = nullptr,
                       EnergyBreakdown* parts = nullptr, std::size_t block = 64) const;

  const nn::TrialSpace& space() const { return space_; }
  const EnergyPoints& points() const { return pts_; }
  std::size_t param_count() const { return space_.config.param_count(); }

  static constexpr Eigen::Index kBlock = 256;

 private:
  struct BlockResult {
    EnergyBreakdown parts;
    Eigen::VectorXd grad;
  };
  void run_block(const nn::ParamVector& params, Eigen::Index b, nn::BatchKernel& kernel,
                 BlockResult& out, bool want_grad) const;

  nn::TrialSpace space_;
  EnergyPoints pts_;
  nn::PointInputs inputs_;
};

/// Loss on an existing recording: the tape form of the energy for the given
/// point range. `params` must be recorded on `rec`'s tape (or be constants).
struct TapeEnergy {
  ad::AdScalar loss;
  EnergyBreakdown breakdown;
};

TapeEnergy potential_energy(std::span<const ad::AdScalar> params, const EnergyPoints& pts,
                            const nn::TrialSpace& space, std::size_t begin, std::size_t end);

/// Whole-grid tape energy, for small problems.
TapeEnergy potential_energy(std::span<const ad::AdScalar> params, const config::Scenario& sc,
                            const quad::QuadGrid& grid);

/// Uniform nx x ny lattice over the rectangle.
std::vector<Vec2> lattice_points(const Rect& r, int nx, int ny);

/// u1, u2, s11, s22, s12 and the comparison stress svm at each point.
config::FieldTable field_snapshot(const nn::ParamVector& params, const config::Scenario& sc,
                                  const nn::TrialSpace& space, std::span<const Vec2> points);

}  // namespace dedem::elastic
