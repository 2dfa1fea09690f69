#include "dedem/nn/batch.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

namespace dedem::nn {

namespace {

constexpr Eigen::Index kFieldBlock = 256;

// tanh through the vectorised exp; saturates cleanly at +-1.
template <class Derived>
auto fast_tanh(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 - 2.0 / ((2.0 * x).exp() + 1.0);
}

}  // namespace

PointInputs prepare_inputs(const TrialSpace& space, std::span<const Vec2> points,
                           std::span<const std::vector<double>> sides) {
  if (!sides.empty() && sides.size() != points.size()) {
    throw Error("network", "side overrides must match the point count");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  const Eigen::Index d = space.config.input_dim;
  PointInputs in;
  in.x.resize(d, n);
  in.x1.resize(d, n);
  in.x2.resize(d, n);
  for (auto* m : {&in.a, &in.a1, &in.a2, &in.b, &in.b1, &in.b2}) m->resize(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2& x = points[static_cast<std::size_t>(i)];
    const geometry::EmbeddedInput e =
        sides.empty() || sides[static_cast<std::size_t>(i)].empty()
            ? geometry::embed_inputs(x, space.specs, space.embedding_scale)
            : geometry::embed_inputs(x, space.specs, space.embedding_scale,
                                     sides[static_cast<std::size_t>(i)]);
    if (e.values.size() != d) throw Error("network", "embedding count does not match input_dim");
    in.x.col(i) = e.values;
    in.x1.col(i) = e.jacobian.col(0);
    in.x2.col(i) = e.jacobian.col(1);
    for (int c = 0; c < 2; ++c) {
      const auto a = space.constraints[c].a.evaluate(x);
      const auto b = space.constraints[c].b.evaluate(x);
      in.a(c, i) = a.value;
      in.a1(c, i) = a.gradient.x();
      in.a2(c, i) = a.gradient.y();
      in.b(c, i) = b.value;
      in.b1(c, i) = b.gradient.x();
      in.b2(c, i) = b.gradient.y();
    }
  }
  return in;
}

BatchKernel::BatchKernel(const TrialSpace& space)
    : cfg_(space.config), scale_(space.output_scale) {
  cfg_.validate();
  for (int c = 0; c < 2; ++c) {
    comp_[c].off = component_offsets(cfg_, c);
    comp_[c].layers.resize(1 + NetConfig::kLayersPerBlock * static_cast<std::size_t>(cfg_.residual_blocks));
    comp_[c].y.resize(1 + static_cast<std::size_t>(cfg_.residual_blocks));
  }
}

void BatchKernel::layer_forward(const ParamVector& p, std::size_t w, std::size_t b, int rows,
                                int cols, const Eigen::MatrixXd& xin, Layer& out) const {
  const Eigen::Index n = n_;
  Eigen::Map<const Eigen::MatrixXd> W(p.data() + w, rows, cols);
  Eigen::Map<const Eigen::VectorXd> bias(p.data() + b, rows);
  out.z.resize(rows, 3 * n);
  out.z.noalias() = W * xin;
  out.z.leftCols(n).colwise() += bias;
  out.h.resize(rows, 3 * n);
  out.h.leftCols(n) = fast_tanh(out.z.leftCols(n).array()).matrix();
  out.s = (1.0 - out.h.leftCols(n).array().square()).matrix();
  out.h.middleCols(n, n) = (out.s.array() * out.z.middleCols(n, n).array()).matrix();
  out.h.rightCols(n) = (out.s.array() * out.z.rightCols(n).array()).matrix();
}

void BatchKernel::forward(const ParamVector& p, const PointInputs& in, Eigen::Index begin,
                          Eigen::Index n) {
  if (static_cast<std::size_t>(p.size()) != cfg_.param_count()) {
    throw Error("network", "parameter vector length does not match the network");
  }
  if (in.x.rows() != cfg_.input_dim) throw Error("network", "input rows do not match input_dim");
  begin_ = begin;
  n_ = n;
  xin_.resize(cfg_.input_dim, 3 * n);
  xin_ << in.x.middleCols(begin, n), in.x1.middleCols(begin, n), in.x2.middleCols(begin, n);
  out_.u.resize(2, n);
  out_.du1.resize(2, n);
  out_.du2.resize(2, n);
  for (int c = 0; c < 2; ++c) {
    Component& k = comp_[c];
    layer_forward(p, k.off.stem_w, k.off.stem_b, cfg_.width, cfg_.input_dim, xin_, k.layers[0]);
    k.y[0] = k.layers[0].h;
    for (int blk = 0; blk < cfg_.residual_blocks; ++blk) {
      Layer& l1 = k.layers[1 + 2 * blk];
      Layer& l2 = k.layers[2 + 2 * blk];
      layer_forward(p, k.off.block_w[blk][0], k.off.block_b[blk][0], cfg_.width, cfg_.width,
                    k.y[blk], l1);
      layer_forward(p, k.off.block_w[blk][1], k.off.block_b[blk][1], cfg_.width, cfg_.width, l1.h,
                    l2);
      k.y[blk + 1] = k.y[blk] + l2.h;
    }
    Eigen::Map<const Eigen::RowVectorXd> hw(p.data() + k.off.head_w, cfg_.width);
    k.o.noalias() = hw * k.y.back();
    k.o.leftCols(n).array() += p[static_cast<Eigen::Index>(k.off.head_b)];
    const auto ov = scale_ * k.o.leftCols(n).array();
    const auto o1 = scale_ * k.o.segment(n, n).array();
    const auto o2 = scale_ * k.o.segment(2 * n, n).array();
    const auto a = in.a.row(c).segment(begin, n).array();
    out_.u.row(c) = (a * ov + in.b.row(c).segment(begin, n).array()).matrix();
    out_.du1.row(c) = (in.a1.row(c).segment(begin, n).array() * ov + a * o1 +
                       in.b1.row(c).segment(begin, n).array()).matrix();
    out_.du2.row(c) = (in.a2.row(c).segment(begin, n).array() * ov + a * o2 +
                       in.b2.row(c).segment(begin, n).array()).matrix();
  }
}

void BatchKernel::layer_backward(const ParamVector& p, std::size_t w, std::size_t b, int rows,
                                 int cols, const Eigen::MatrixXd& xin, const Layer& l,
                                 Eigen::MatrixXd& hbar, Eigen::Ref<Eigen::VectorXd> grad,
                                 Eigen::MatrixXd* xbar) const {
  const Eigen::Index n = n_;
  // hbar becomes zbar in place.
  const Eigen::ArrayXXd sbar = l.z.middleCols(n, n).array() * hbar.middleCols(n, n).array() +
                               l.z.rightCols(n).array() * hbar.rightCols(n).array();
  hbar.middleCols(n, n).array() *= l.s.array();
  hbar.rightCols(n).array() *= l.s.array();
  hbar.leftCols(n).array() =
      l.s.array() * (hbar.leftCols(n).array() - 2.0 * l.h.leftCols(n).array() * sbar);
  Eigen::Map<Eigen::MatrixXd> gW(grad.data() + w, rows, cols);
  gW.noalias() += hbar * xin.transpose();
  Eigen::Map<Eigen::VectorXd>(grad.data() + b, rows) += hbar.leftCols(n).rowwise().sum();
  if (xbar) {
    Eigen::Map<const Eigen::MatrixXd> W(p.data() + w, rows, cols);
    xbar->noalias() = W.transpose() * hbar;
  }
}

void BatchKernel::backward(const ParamVector& p, const PointInputs& in, const Matrix2X& gu,
                           const Matrix2X& g1, const Matrix2X& g2,
                           Eigen::Ref<Eigen::VectorXd> grad) {
  const Eigen::Index n = n_;
  Eigen::RowVectorXd obar(3 * n);
  Eigen::MatrixXd ybar, hbar, xbar;
  for (int c = 0; c < 2; ++c) {
    Component& k = comp_[c];
    const auto a = in.a.row(c).segment(begin_, n).array();
    obar.leftCols(n) = (scale_ * (gu.row(c).array() * a +
                                  g1.row(c).array() * in.a1.row(c).segment(begin_, n).array() +
                                  g2.row(c).array() * in.a2.row(c).segment(begin_, n).array()))
                           .matrix();
    obar.segment(n, n) = (scale_ * g1.row(c).array() * a).matrix();
    obar.segment(2 * n, n) = (scale_ * g2.row(c).array() * a).matrix();

    Eigen::Map<const Eigen::VectorXd> hw(p.data() + k.off.head_w, cfg_.width);
    Eigen::Map<Eigen::VectorXd>(grad.data() + k.off.head_w, cfg_.width).noalias() +=
        k.y.back() * obar.transpose();
    grad[static_cast<Eigen::Index>(k.off.head_b)] += obar.leftCols(n).sum();
    ybar.noalias() = hw * obar;

    for (int blk = cfg_.residual_blocks - 1; blk >= 0; --blk) {
      const Layer& l1 = k.layers[1 + 2 * blk];
      const Layer& l2 = k.layers[2 + 2 * blk];
      hbar = ybar;
      layer_backward(p, k.off.block_w[blk][1], k.off.block_b[blk][1], cfg_.width, cfg_.width, l1.h,
                     l2, hbar, grad, &xbar);
      layer_backward(p, k.off.block_w[blk][0], k.off.block_b[blk][0], cfg_.width, cfg_.width,
                     k.y[blk], l1, xbar, grad, &hbar);
      ybar += hbar;
    }
    layer_backward(p, k.off.stem_w, k.off.stem_b, cfg_.width, cfg_.input_dim, xin_, k.layers[0],
                   ybar, grad, nullptr);
  }
}

FieldValues evaluate_field(const ParamVector& p, const TrialSpace& space, const PointInputs& in) {
  BatchKernel kernel(space);
  FieldValues f;
  const Eigen::Index n = in.size();
  f.u.resize(2, n);
  f.du1.resize(2, n);
  f.du2.resize(2, n);
  for (Eigen::Index b = 0; b < n; b += kFieldBlock) {
    const Eigen::Index m = std::min(kFieldBlock, n - b);
    kernel.forward(p, in, b, m);
    f.u.middleCols(b, m) = kernel.values().u;
    f.du1.middleCols(b, m) = kernel.values().du1;
    f.du2.middleCols(b, m) = kernel.values().du2;
  }
  return f;
}

int worker_count() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("DEDEM_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, cap);
    } catch (const std::exception&) {
      throw Error("network", std::string("DEDEM_THREADS must be a positive integer, got '") + env + "'");
    }
  }
  return n;
}

}  // namespace dedem::nn
