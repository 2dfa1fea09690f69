#pragma once

#include "dedem/nn/network.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace dedem::nn {

using Matrix2X = Eigen::Matrix<double, 2, Eigen::Dynamic>;

/// Point-wise constants of the trial function over a fixed point set:
/// embedded inputs with their two spatial derivative channels and the
/// hard-constraint factors. Built once per grid, reused every epoch.
struct PointInputs {
  Eigen::MatrixXd x;   // input_dim x N
  Eigen::MatrixXd x1;  // d x / d x1
  Eigen::MatrixXd x2;  // d x / d x2
  Matrix2X a, a1, a2;  // A_c and its gradient, one row per component
  Matrix2X b, b1, b2;  // B_c and its gradient

  Eigen::Index size() const { return x.cols(); }
};

/// `sides` holds one row of per-spec side overrides per point (may be empty).
PointInputs prepare_inputs(const TrialSpace& space, std::span<const Vec2> points,
                           std::span<const std::vector<double>> sides = {});

/// Displacements and their spatial gradients: du1.col(i) = d(u1, u2)/dx1.
struct FieldValues {
  Matrix2X u, du1, du2;
};

/// Batched forward-over-reverse kernel equivalent to `displacement` on the
/// tape, written against Eigen matrices. Each tanh layer carries the value
/// and both derivative channels side by side as [V | D1 | D2].
class BatchKernel {
 public:
  explicit BatchKernel(const TrialSpace& space);

  /// Forward pass over columns [begin, begin + n); caches activations.
  void forward(const ParamVector& p, const PointInputs& in, Eigen::Index begin, Eigen::Index n);

  const FieldValues& values() const { return out_; }

  /// Accumulates dL/dtheta into `grad` given adjoints of u and of its two
  /// spatial derivative channels for the last forward block.
  void backward(const ParamVector& p, const PointInputs& in, const Matrix2X& gu,
                const Matrix2X& g1, const Matrix2X& g2, Eigen::Ref<Eigen::VectorXd> grad);

 private:
  struct Layer {
    Eigen::MatrixXd z;  // pre-activation channels
    Eigen::MatrixXd h;  // activation channels
    Eigen::MatrixXd s;  // 1 - tanh^2 (value block only)
  };
  struct Component {
    ComponentOffsets off;
    std::vector<Layer> layers;      // stem, then block layers in order
    std::vector<Eigen::MatrixXd> y; // residual stream entering each block, plus final
    Eigen::RowVectorXd o;           // head output channels
  };

  void layer_forward(const ParamVector& p, std::size_t w, std::size_t b, int rows, int cols,
                     const Eigen::MatrixXd& xin, Layer& out) const;
  /// Returns the adjoint of the layer input (when wanted).
  void layer_backward(const ParamVector& p, std::size_t w, std::size_t b, int rows, int cols,
                      const Eigen::MatrixXd& xin, const Layer& l, Eigen::MatrixXd& hbar,
                      Eigen::Ref<Eigen::VectorXd> grad, Eigen::MatrixXd* xbar) const;

  NetConfig cfg_;
  double scale_;
  Eigen::Index begin_ = 0;
  Eigen::Index n_ = 0;
  Eigen::MatrixXd xin_;
  std::array<Component, 2> comp_;
  FieldValues out_;
};

/// Field over an arbitrary point set, evaluated in blocks.
FieldValues evaluate_field(const ParamVector& p, const TrialSpace& space, const PointInputs& in);

/// Number of worker threads: DEDEM_THREADS if set, else hardware concurrency.
int worker_count();

}  // namespace dedem::nn
