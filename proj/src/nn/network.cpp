#include "dedem/nn/network.hpp"

#include "dedem/elasticity/material.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace dedem::nn {

void NetConfig::validate() const {
  if (input_dim < 2) throw Error("network", "input_dim must be at least 2");
  if (width < 1) throw Error("network", "width must be at least 1");
  if (residual_blocks < 0) throw Error("network", "residual_blocks must be non-negative");
}

std::size_t NetConfig::component_param_count() const {
  const auto w = static_cast<std::size_t>(width);
  const auto in = static_cast<std::size_t>(input_dim);
  const auto blocks = static_cast<std::size_t>(residual_blocks);
  return w * in + w + kLayersPerBlock * blocks * (w * w + w) + w + 1;
}

ComponentOffsets component_offsets(const NetConfig& cfg, int component) {
  const auto w = static_cast<std::size_t>(cfg.width);
  ComponentOffsets o;
  std::size_t at = static_cast<std::size_t>(component) * cfg.component_param_count();
  o.stem_w = at;
  at += w * static_cast<std::size_t>(cfg.input_dim);
  o.stem_b = at;
  at += w;
  for (int k = 0; k < cfg.residual_blocks; ++k) {
    std::array<std::size_t, 2> ws{}, bs{};
    for (int l = 0; l < NetConfig::kLayersPerBlock; ++l) {
      ws[l] = at;
      at += w * w;
      bs[l] = at;
      at += w;
    }
    o.block_w.push_back(ws);
    o.block_b.push_back(bs);
  }
  o.head_w = at;
  at += w;
  o.head_b = at;
  return o;
}

std::vector<LayerSlice> param_layout(const NetConfig& cfg) {
  cfg.validate();
  std::vector<LayerSlice> out;
  for (int c = 0; c < 2; ++c) {
    const ComponentOffsets o = component_offsets(cfg, c);
    out.push_back({c, "stem", 'W', o.stem_w, cfg.width, cfg.input_dim});
    out.push_back({c, "stem", 'b', o.stem_b, cfg.width, 1});
    for (int k = 0; k < cfg.residual_blocks; ++k) {
      for (int l = 0; l < NetConfig::kLayersPerBlock; ++l) {
        const std::string name = "block" + std::to_string(k) + "." + std::to_string(l);
        out.push_back({c, name, 'W', o.block_w[k][l], cfg.width, cfg.width});
        out.push_back({c, name, 'b', o.block_b[k][l], cfg.width, 1});
      }
    }
    out.push_back({c, "head", 'W', o.head_w, 1, cfg.width});
    out.push_back({c, "head", 'b', o.head_b, 1, 1});
  }
  return out;
}

ParamVector init_params(const NetConfig& cfg, std::uint64_t seed) {
  ParamVector p = ParamVector::Zero(static_cast<Eigen::Index>(cfg.param_count()));
  std::mt19937_64 rng(seed);
  for (const LayerSlice& s : param_layout(cfg)) {
    if (s.role != 'W') continue;
    const double limit = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    // Explicit mapping of 53 random bits keeps the draw identical across
    // standard libraries.
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      p[static_cast<Eigen::Index>(s.offset + i)] = limit * (2.0 * u - 1.0);
    }
  }
  return p;
}

namespace {

// y = W x + b for one layer; W column-major at params[w], b at params[b].
std::vector<double> affine(std::span<const double> p, std::size_t w, std::size_t b, int rows,
                           int cols, std::span<const double> x) {
  std::vector<double> y(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    double acc = p[b + static_cast<std::size_t>(i)];
    for (int j = 0; j < cols; ++j) {
      acc += p[w + static_cast<std::size_t>(j) * static_cast<std::size_t>(rows) +
               static_cast<std::size_t>(i)] *
             x[static_cast<std::size_t>(j)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

ad::Recording* find_recording(std::span<const ad::AdScalar> p, std::span<const ad::SpatialDual> x) {
  for (const auto& a : p) {
    if (!a.is_constant()) return const_cast<ad::Recording*>(a.recording());
  }
  for (const auto& d : x) {
    for (const auto* a : {&d.v, &d.dx1, &d.dx2}) {
      if (!a->is_constant()) return const_cast<ad::Recording*>(a->recording());
    }
  }
  return nullptr;
}

std::vector<ad::SpatialDual> affine(std::span<const ad::AdScalar> p, std::size_t w, std::size_t b,
                                    int rows, int cols, std::span<const ad::SpatialDual> x) {
  ad::Recording* rec = find_recording(p, x);
  const auto n = static_cast<std::size_t>(cols);
  std::vector<ad::AdScalar> row(n), v(n), d1(n), d2(n);
  for (std::size_t j = 0; j < n; ++j) {
    v[j] = x[j].v;
    d1[j] = x[j].dx1;
    d2[j] = x[j].dx2;
  }
  std::vector<ad::SpatialDual> y(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = p[w + j * static_cast<std::size_t>(rows) + static_cast<std::size_t>(i)];
    }
    const ad::AdScalar& bias = p[b + static_cast<std::size_t>(i)];
    auto& out = y[static_cast<std::size_t>(i)];
    if (rec) {
      out.v = rec->dot(row, v) + bias;
      out.dx1 = rec->dot(row, d1);
      out.dx2 = rec->dot(row, d2);
    } else {
      double a = bias.value(), a1 = 0.0, a2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        a += row[j].value() * v[j].value();
        a1 += row[j].value() * d1[j].value();
        a2 += row[j].value() * d2[j].value();
      }
      out = {a, a1, a2};
    }
  }
  return y;
}

template <class P, class S>
std::array<S, 2> forward_impl(std::span<const P> params, const NetConfig& cfg,
                              std::span<const S> x) {
  if (x.size() != static_cast<std::size_t>(cfg.input_dim)) {
    throw Error("network", "input has " + std::to_string(x.size()) + " entries, expected " +
                               std::to_string(cfg.input_dim));
  }
  if (params.size() != cfg.param_count()) {
    throw Error("network", "parameter vector has " + std::to_string(params.size()) +
                               " entries, expected " + std::to_string(cfg.param_count()));
  }
  using std::tanh;
  using ad::tanh;
  std::array<S, 2> out;
  for (int c = 0; c < 2; ++c) {
    const ComponentOffsets o = component_offsets(cfg, c);
    std::vector<S> y = affine(params, o.stem_w, o.stem_b, cfg.width, cfg.input_dim, x);
    for (auto& v : y) v = tanh(v);
    for (int k = 0; k < cfg.residual_blocks; ++k) {
      std::vector<S> h = y;
      for (int l = 0; l < NetConfig::kLayersPerBlock; ++l) {
        h = affine(params, o.block_w[k][l], o.block_b[k][l], cfg.width, cfg.width,
                   std::span<const S>(h));
        for (auto& v : h) v = tanh(v);
      }
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] + h[i];
    }
    out[c] = affine(params, o.head_w, o.head_b, 1, cfg.width, std::span<const S>(y))[0];
  }
  return out;
}

}  // namespace

std::array<double, 2> forward(std::span<const double> params, const NetConfig& cfg,
                              std::span<const double> x) {
  return forward_impl(params, cfg, x);
}

std::array<ad::SpatialDual, 2> forward(std::span<const ad::AdScalar> params, const NetConfig& cfg,
                                       std::span<const ad::SpatialDual> x) {
  return forward_impl(params, cfg, x);
}

ad::SpatialDual apply_hard_constraint(const ad::SpatialDual& u_hat,
                                      const config::ConstraintPair& pair, const Vec2& x) {
  const auto a = pair.a.evaluate(x);
  const auto b = pair.b.evaluate(x);
  return {u_hat.v * a.value + b.value,
          u_hat.v * a.gradient.x() + u_hat.dx1 * a.value + b.gradient.x(),
          u_hat.v * a.gradient.y() + u_hat.dx2 * a.value + b.gradient.y()};
}

double auto_displacement_scale(const config::Scenario& sc) {
  const Rect& d = sc.domain;
  const double extent = std::max(d.width(), d.height());
  double e_min = std::numeric_limits<double>::infinity();
  for (const auto& r : sc.regions) e_min = std::min(e_min, r.material.effective_modulus_mpa());
  // Sample every load on a coarse lattice of the domain and its edges; loads
  // are usually constants, so this only needs to find the magnitude.
  double load = 0.0;
  double b_max = 0.0;
  constexpr int kSamples = 9;
  for (int i = 0; i < kSamples; ++i) {
    for (int j = 0; j < kSamples; ++j) {
      const Vec2 x(d.x_min + d.width() * i / (kSamples - 1.0),
                   d.y_min + d.height() * j / (kSamples - 1.0));
      for (const auto& t : sc.tractions) {
        load = std::max({load, std::abs(t.t1.value(x)), std::abs(t.t2.value(x)),
                         std::abs(t.pressure.value(x))});
      }
      for (const auto& b : sc.body_force) load = std::max(load, std::abs(b.value(x)) * extent);
      for (const auto& c : sc.constraints) b_max = std::max(b_max, std::abs(c.b.value(x)));
    }
  }
  double scale = std::isfinite(e_min) ? load * extent / e_min : 0.0;
  if (!(scale > 0.0)) scale = b_max;
  if (!(scale > 0.0)) scale = 1e-6 * extent;
  return scale;
}

TrialSpace make_trial_space(const config::Scenario& sc) {
  TrialSpace s;
  s.specs = sc.embedding_specs();
  s.config.input_dim = 2 + static_cast<int>(s.specs.size());
  s.config.width = sc.network.width;
  s.config.residual_blocks = sc.network.residual_blocks;
  s.config.validate();
  s.constraints = sc.constraints;
  s.embedding_scale = sc.network.embedding_scale;
  s.output_scale = sc.train.displacement_scale > 0.0 ? sc.train.displacement_scale
                                                     : auto_displacement_scale(sc);
  return s;
}

std::array<ad::SpatialDual, 2> displacement(std::span<const ad::AdScalar> params,
                                            const TrialSpace& space, const Vec2& x, Sides sides) {
  const geometry::EmbeddedInput in =
      sides.empty() ? geometry::embed_inputs(x, space.specs, space.embedding_scale)
                    : geometry::embed_inputs(x, space.specs, space.embedding_scale, sides);
  std::vector<ad::SpatialDual> xa(static_cast<std::size_t>(in.values.size()));
  for (Eigen::Index i = 0; i < in.values.size(); ++i) {
    xa[static_cast<std::size_t>(i)] = {in.values[i], in.jacobian(i, 0), in.jacobian(i, 1)};
  }
  const auto u_hat = forward(params, space.config, std::span<const ad::SpatialDual>(xa));
  const ad::AdScalar s(space.output_scale);
  return {apply_hard_constraint(u_hat[0] * s, space.constraints[0], x),
          apply_hard_constraint(u_hat[1] * s, space.constraints[1], x)};
}

void save_snapshot(const ParamSnapshot& snap, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "dedem-params";
  j["version"] = 1;
  j["config"] = {{"input_dim", snap.config.input_dim},
                 {"width", snap.config.width},
                 {"residual_blocks", snap.config.residual_blocks}};
  j["seed"] = snap.seed;
  j["output_scale"] = snap.output_scale;
  j["embedding_scale"] = snap.embedding_scale;
  j["params"] = std::vector<double>(snap.params.data(), snap.params.data() + snap.params.size());
  std::ofstream out(path);
  if (!out) throw Error("network", "cannot write snapshot '" + path.string() + "'");
  out << j.dump() << '\n';
  if (!out) throw Error("network", "failed writing snapshot '" + path.string() + "'");
}

ParamSnapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("network", "cannot open snapshot '" + path.string() + "'");
  ParamSnapshot s;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format") != "dedem-params") throw Error("network", "not a parameter snapshot");
    s.config.input_dim = j.at("config").at("input_dim").get<int>();
    s.config.width = j.at("config").at("width").get<int>();
    s.config.residual_blocks = j.at("config").at("residual_blocks").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.output_scale = j.at("output_scale").get<double>();
    s.embedding_scale = j.at("embedding_scale").get<double>();
    const auto v = j.at("params").get<std::vector<double>>();
    s.params = Eigen::Map<const ParamVector>(v.data(), static_cast<Eigen::Index>(v.size()));
  } catch (const nlohmann::json::exception& e) {
    throw Error("network", "malformed snapshot '" + path.string() + "': " + e.what());
  }
  s.config.validate();
  if (static_cast<std::size_t>(s.params.size()) != s.config.param_count()) {
    throw Error("network", "snapshot parameter count does not match its config");
  }
  return s;
}

ParamVector warm_start(const ParamSnapshot& snap, const NetConfig& expected) {
  if (!(snap.config == expected)) {
    throw Error("network", "warm start config mismatch: snapshot (input_dim " +
                               std::to_string(snap.config.input_dim) + ", width " +
                               std::to_string(snap.config.width) + ", blocks " +
                               std::to_string(snap.config.residual_blocks) +
                               ") vs scenario (input_dim " + std::to_string(expected.input_dim) +
                               ", width " + std::to_string(expected.width) + ", blocks " +
                               std::to_string(expected.residual_blocks) + ")");
  }
  if (static_cast<std::size_t>(snap.params.size()) != expected.param_count()) {
    throw Error("network", "warm start parameter count mismatch");
  }
  return snap.params;
}

}  // namespace dedem::nn
