#include "dedem/elasticity/energy.hpp"

#include "dedem/elasticity/material.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace dedem::elastic {

namespace {

std::vector<double> spec_sides(const quad::QuadGrid& grid, const quad::QuadNode& n,
                               const std::vector<geometry::EmbeddingSpec>& specs) {
  std::vector<double> s(specs.size(), 0.0);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    if (!specs[k].is_strong()) continue;
    for (std::size_t c = 0; c < grid.crack_ids.size(); ++c) {
      if (grid.crack_ids[c] == specs[k].id && c < n.sides.size()) s[k] = n.sides[c];
    }
  }
  return s;
}

int region_index(const config::Scenario& sc, const Vec2& x) {
  for (int i = static_cast<int>(sc.regions.size()) - 1; i >= 0; --i) {
    if (sc.regions[static_cast<std::size_t>(i)].shape.contains(x)) return i;
  }
  std::ostringstream msg;
  msg << "no material region covers point (" << x.x() << ", " << x.y() << ")";
  throw ScenarioError("material", msg.str());
}

}  // namespace

EnergyPoints assemble_points(const config::Scenario& sc, const quad::QuadGrid& grid,
                             const nn::TrialSpace& space) {
  EnergyPoints p;
  for (const auto& r : sc.regions) p.stiffness.push_back(elastic_matrix(r.material));
  const std::size_t nodes = grid.nodes.size();
  std::size_t faces = 0;
  for (const auto& t : sc.tractions) {
    if (t.edge) continue;
    for (const auto& rule : grid.crack_faces) {
      if (rule.crack_id == t.target) faces += 2 * rule.nodes.size();
    }
  }
  const std::size_t total = nodes + faces;
  p.x.reserve(total);
  p.sides.reserve(total);
  p.load_boundary = nn::Matrix2X::Zero(2, static_cast<Eigen::Index>(total));
  p.load_crack = nn::Matrix2X::Zero(2, static_cast<Eigen::Index>(total));
  p.load_body = nn::Matrix2X::Zero(2, static_cast<Eigen::Index>(total));
  const bool has_body = !sc.body_force[0].is_constant() || !sc.body_force[1].is_constant() ||
                        sc.body_force[0].value(Vec2::Zero()) != 0.0 ||
                        sc.body_force[1].value(Vec2::Zero()) != 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    const quad::QuadNode& n = grid.nodes[i];
    p.x.push_back(n.x);
    p.sides.push_back(spec_sides(grid, n, space.specs));
    p.area_weight.push_back(n.weight);
    p.material.push_back(region_index(sc, n.x));
    if (has_body) {
      p.load_body(0, static_cast<Eigen::Index>(i)) = n.weight * sc.body_force[0].value(n.x);
      p.load_body(1, static_cast<Eigen::Index>(i)) = n.weight * sc.body_force[1].value(n.x);
    }
  }
  for (const auto& t : sc.tractions) {
    if (!t.edge) continue;
    const quad::EdgeRule* rule = grid.edge(*t.edge);
    if (!rule) throw Error("elasticity", "grid has no rule for edge " + std::string(config::edge_name(*t.edge)));
    for (const auto& ln : rule->nodes) {
      const auto i = static_cast<Eigen::Index>(ln.node);
      p.load_boundary(0, i) += ln.weight * t.t1.value(ln.x);
      p.load_boundary(1, i) += ln.weight * t.t2.value(ln.x);
    }
  }
  for (const auto& t : sc.tractions) {
    if (t.edge) continue;
    std::size_t spec = space.specs.size();
    for (std::size_t k = 0; k < space.specs.size(); ++k) {
      if (space.specs[k].id == t.target) spec = k;
    }
    for (const auto& rule : grid.crack_faces) {
      if (rule.crack_id != t.target) continue;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const auto& ln = rule.nodes[k];
        const double pr = t.pressure.value(ln.x);
        const Vec2 net(t.t1.value(ln.x), t.t2.value(ln.x));
        for (int s : {1, -1}) {
          const auto i = static_cast<Eigen::Index>(p.x.size());
          p.x.push_back(ln.x);
          std::vector<double> sides(space.specs.size(), 0.0);
          if (spec < sides.size()) sides[spec] = s;
          p.sides.push_back(std::move(sides));
          p.area_weight.push_back(0.0);
          p.material.push_back(-1);
          // Pressure works on the opening, the net face load on the mean
          // displacement of the two faces.
          p.load_crack.col(i) = ln.weight * (s * pr * rule.normals[k] + 0.5 * net);
        }
      }
    }
  }
  return p;
}

EnergyModel::EnergyModel(const config::Scenario& sc, const quad::QuadGrid& grid,
                         nn::TrialSpace space)
    : space_(std::move(space)), pts_(assemble_points(sc, grid, space_)) {
  inputs_ = nn::prepare_inputs(space_, pts_.x, pts_.sides);
}

void EnergyModel::run_block(const nn::ParamVector& params, Eigen::Index b, nn::BatchKernel& kernel,
                            BlockResult& out, bool want_grad) const {
  const Eigen::Index n = std::min(kBlock, inputs_.size() - b);
  kernel.forward(params, inputs_, b, n);
  const nn::FieldValues& f = kernel.values();
  nn::Matrix2X g1, g2, gu;
  if (want_grad) {
    g1.setZero(2, n);
    g2.setZero(2, n);
  }
  EnergyBreakdown e;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto i = static_cast<std::size_t>(b + j);
    const int m = pts_.material[i];
    if (m < 0 || pts_.area_weight[i] == 0.0) continue;
    const Strain eps(f.du1(0, j), f.du2(1, j), f.du2(0, j) + f.du1(1, j));
    const Stress sig = pts_.stiffness[static_cast<std::size_t>(m)] * eps;
    const double w = pts_.area_weight[i] * kEnergyUnit;
    const double dens = 0.5 * w * eps.dot(sig);
    if (!std::isfinite(dens)) {
      std::ostringstream msg;
      msg << "non-finite strain energy at node " << i << " (" << pts_.x[i].x() << ", "
          << pts_.x[i].y() << ")";
      throw EvaluationError("elasticity", msg.str());
    }
    e.strain_energy += dens;
    if (want_grad) {
      g1(0, j) = w * sig[0];
      g2(1, j) = w * sig[1];
      g2(0, j) = w * sig[2];
      g1(1, j) = w * sig[2];
    }
  }
  const auto lb = pts_.load_boundary.middleCols(b, n);
  const auto lc = pts_.load_crack.middleCols(b, n);
  const auto lf = pts_.load_body.middleCols(b, n);
  e.boundary_traction_work = kEnergyUnit * lb.cwiseProduct(f.u).sum();
  e.crack_traction_work = kEnergyUnit * lc.cwiseProduct(f.u).sum();
  e.body_work = kEnergyUnit * lf.cwiseProduct(f.u).sum();
  out.parts = e;
  if (want_grad) {
    gu = -kEnergyUnit * (lb + lc + lf);
    out.grad.setZero(static_cast<Eigen::Index>(param_count()));
    kernel.backward(params, inputs_, gu, g1, g2, out.grad);
  }
}

double EnergyModel::evaluate(const nn::ParamVector& params, Eigen::VectorXd* grad,
                             EnergyBreakdown* parts) const {
  const Eigen::Index n = inputs_.size();
  const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
  std::vector<BlockResult> results(static_cast<std::size_t>(blocks));
  const bool want_grad = grad != nullptr;
  const int workers = std::min<int>(nn::worker_count(), static_cast<int>(std::max<Eigen::Index>(blocks, 1)));
  auto work = [&](int w) {
    nn::BatchKernel kernel(space_);
    for (Eigen::Index k = w; k < blocks; k += workers) {
      run_block(params, k * kBlock, kernel, results[static_cast<std::size_t>(k)], want_grad);
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  EnergyBreakdown total;
  if (want_grad) grad->setZero(static_cast<Eigen::Index>(param_count()));
  for (const auto& r : results) {
    total.strain_energy += r.parts.strain_energy;
    total.boundary_traction_work += r.parts.boundary_traction_work;
    total.crack_traction_work += r.parts.crack_traction_work;
    total.body_work += r.parts.body_work;
    if (want_grad) *grad += r.grad;
  }
  if (parts) *parts = total;
  const double loss = total.total();
  if (!std::isfinite(loss)) throw EvaluationError("elasticity", "non-finite potential energy");
  return loss;
}

TapeEnergy potential_energy(std::span<const ad::AdScalar> params, const EnergyPoints& pts,
                            const nn::TrialSpace& space, std::size_t begin, std::size_t end) {
  std::vector<ad::AdScalar> strain, wb, wc, wf;
  EnergyBreakdown e;
  for (std::size_t i = begin; i < end; ++i) {
    const auto u = nn::displacement(params, space, pts.x[i], pts.sides[i]);
    const auto col = static_cast<Eigen::Index>(i);
    if (pts.material[i] >= 0 && pts.area_weight[i] != 0.0) {
      const Eigen::Matrix3d& c = pts.stiffness[static_cast<std::size_t>(pts.material[i])];
      const std::array<ad::AdScalar, 3> eps{u[0].dx1, u[1].dx2, u[0].dx2 + u[1].dx1};
      ad::AdScalar q(0.0);
      for (int r = 0; r < 3; ++r) {
        for (int k = 0; k < 3; ++k) {
          if (c(r, k) != 0.0) q += eps[r] * ad::AdScalar(c(r, k)) * eps[k];
        }
      }
      strain.push_back(q * ad::AdScalar(0.5 * pts.area_weight[i] * kEnergyUnit));
    }
    auto work = [&](const nn::Matrix2X& l, std::vector<ad::AdScalar>& dst) {
      if (l(0, col) != 0.0) dst.push_back(u[0].v * ad::AdScalar(kEnergyUnit * l(0, col)));
      if (l(1, col) != 0.0) dst.push_back(u[1].v * ad::AdScalar(kEnergyUnit * l(1, col)));
    };
    work(pts.load_boundary, wb);
    work(pts.load_crack, wc);
    work(pts.load_body, wf);
  }
  auto total = [](const std::vector<ad::AdScalar>& v) {
    ad::AdScalar s(0.0);
    for (const auto& a : v) s += a;
    return s;
  };
  const ad::AdScalar se = total(strain), b = total(wb), c = total(wc), f = total(wf);
  e.strain_energy = se.value();
  e.boundary_traction_work = b.value();
  e.crack_traction_work = c.value();
  e.body_work = f.value();
  return {se - b - c - f, e};
}

TapeEnergy potential_energy(std::span<const ad::AdScalar> params, const config::Scenario& sc,
                            const quad::QuadGrid& grid) {
  const nn::TrialSpace space = nn::make_trial_space(sc);
  const EnergyPoints pts = assemble_points(sc, grid, space);
  return potential_energy(params, pts, space, 0, pts.size());
}

double EnergyModel::evaluate_tape(const nn::ParamVector& params, Eigen::VectorXd* grad,
                                  EnergyBreakdown* parts, std::size_t block) const {
  EnergyBreakdown total;
  if (grad) grad->setZero(static_cast<Eigen::Index>(param_count()));
  const std::vector<double> theta(params.data(), params.data() + params.size());
  for (std::size_t b = 0; b < pts_.size(); b += block) {
    ad::Recording rec;
    const std::vector<ad::AdScalar> p = rec.variables(theta);
    const TapeEnergy t = potential_energy(p, pts_, space_, b, std::min(pts_.size(), b + block));
    total.strain_energy += t.breakdown.strain_energy;
    total.boundary_traction_work += t.breakdown.boundary_traction_work;
    total.crack_traction_work += t.breakdown.crack_traction_work;
    total.body_work += t.breakdown.body_work;
    if (grad) {
      const std::vector<double> g = rec.backward(t.loss);
      *grad += Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    }
  }
  if (parts) *parts = total;
  return total.total();
}

std::vector<Vec2> lattice_points(const Rect& r, int nx, int ny) {
  if (nx < 2 || ny < 2) throw Error("elasticity", "lattice needs at least 2 x 2 points");
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      pts.emplace_back(i + 1 == nx ? r.x_max : r.x_min + r.width() * i / (nx - 1.0),
                       j + 1 == ny ? r.y_max : r.y_min + r.height() * j / (ny - 1.0));
    }
  }
  return pts;
}

config::FieldTable field_snapshot(const nn::ParamVector& params, const config::Scenario& sc,
                                  const nn::TrialSpace& space, std::span<const Vec2> points) {
  const nn::PointInputs in = nn::prepare_inputs(space, points);
  const nn::FieldValues f = nn::evaluate_field(params, space, in);
  config::FieldTable t;
  t.names = {"u1", "u2", "s11", "s22", "s12", "svm"};
  t.points.assign(points.begin(), points.end());
  t.values.resize(static_cast<Eigen::Index>(points.size()), 6);
  std::vector<Eigen::Matrix3d> stiffness;
  for (const auto& r : sc.regions) stiffness.push_back(elastic_matrix(r.material));
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    const Strain eps(f.du1(0, j), f.du2(1, j), f.du2(0, j) + f.du1(1, j));
    const Stress sig = stiffness[static_cast<std::size_t>(region_index(sc, points[k]))] * eps;
    t.values.row(j) << f.u(0, j), f.u(1, j), sig[0], sig[1], sig[2], comparison_stress(sig);
  }
  return t;
}

}  // namespace dedem::elastic
