#include "dedem/config/scenario.hpp"

#include "dedem/config/document.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dedem::config {

bool RegionShape::contains(const Vec2& x) const {
  switch (kind) {
    case Kind::Whole:
      return true;
    case Kind::HalfPlane:
      return sgn(normal.dot(x - point)) > 0.0;
    case Kind::Circle:
      return sgn((x - point).norm() - radius) < 0.0;
  }
  return false;
}

std::optional<geometry::InterfaceShape> RegionShape::boundary() const {
  switch (kind) {
    case Kind::HalfPlane:
      return geometry::InterfaceShape::line(point, normal);
    case Kind::Circle:
      return geometry::InterfaceShape::circle(point, radius);
    default:
      return std::nullopt;
  }
}

std::string_view edge_name(Edge e) {
  switch (e) {
    case Edge::Bottom: return "bottom";
    case Edge::Right: return "right";
    case Edge::Top: return "top";
    case Edge::Left: return "left";
  }
  return "";
}

std::vector<geometry::EmbeddingSpec> Scenario::embedding_specs() const {
  std::vector<geometry::EmbeddingSpec> specs;
  for (const auto& c : cracks) specs.push_back({c.id(), c});
  if (network.embed_interfaces) {
    for (const auto& i : interfaces) specs.push_back({i.id, i.shape});
  }
  return specs;
}

const elastic::Material& Scenario::material_at(const Vec2& x) const {
  for (auto it = regions.rbegin(); it != regions.rend(); ++it) {
    if (it->shape.contains(x)) return it->material;
  }
  throw ScenarioError("material", "no material region covers point (" + std::to_string(x.x()) +
                                      ", " + std::to_string(x.y()) + ")");
}

std::vector<geometry::InterfaceShape> Scenario::material_boundaries() const {
  std::vector<geometry::InterfaceShape> out;
  for (const auto& i : interfaces) out.push_back(i.shape);
  for (const auto& r : regions) {
    if (auto b = r.shape.boundary()) out.push_back(*b);
  }
  return out;
}

const geometry::CrackPath* Scenario::find_crack(std::string_view id) const {
  for (const auto& c : cracks) {
    if (c.id() == id) return &c;
  }
  return nullptr;
}

double Scenario::refinement_radius() const {
  if (grid.refinement.radius > 0.0) return grid.refinement.radius;
  return 0.1 * std::min(domain.width(), domain.height());
}

void Scenario::validate() const {
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0) || !std::isfinite(domain.area())) {
    throw ScenarioError("domain", "width and height must be strictly positive");
  }
  if (regions.empty()) throw ScenarioError("material", "at least one material is required");
  for (const auto& r : regions) {
    try {
      r.material.validate();
    } catch (const Error& e) {
      throw ScenarioError("material." + r.name, e.what());
    }
  }
  const double tol = 1e-12 * domain.diagonal();
  std::vector<Vec2> tips;
  std::set<std::string> ids;
  for (const auto& c : cracks) {
    if (!ids.insert(c.id()).second) throw ScenarioError("crack." + c.id(), "duplicate id");
    for (const auto& v : c.vertices()) {
      if (!domain.contains(v, tol)) {
        throw ScenarioError("crack." + c.id(), "crack outside domain");
      }
    }
    for (auto end : {geometry::TipEnd::Start, geometry::TipEnd::End}) {
      if (!c.is_tip(end)) continue;
      const Vec2 t = c.endpoint(end);
      for (const auto& other : tips) {
        if ((other - t).norm() <= tol) {
          throw ScenarioError("crack." + c.id(), "crack tips must be distinct points");
        }
      }
      tips.push_back(t);
    }
  }
  for (const auto& i : interfaces) {
    if (!ids.insert(i.id).second) throw ScenarioError("interface." + i.id, "duplicate id");
  }
  for (const auto& t : tractions) {
    if (!t.edge && find_crack(t.target) == nullptr) {
      throw ScenarioError("traction." + t.target,
                          "target must be an edge (top, bottom, left, right) or a crack id");
    }
  }
  if (grid.nx < 2 || grid.ny < 2) throw ScenarioError("grid", "nx and ny must be at least 2");
  if (grid.refinement.factor < 2) throw ScenarioError("grid.refine_factor", "must be >= 2");
  if (grid.refinement.radius < 0.0) throw ScenarioError("grid.refine_radius", "must be >= 0");
  if (network.width < 1) throw ScenarioError("network.width", "must be >= 1");
  if (network.residual_blocks < 0) throw ScenarioError("network.residual_blocks", "must be >= 0");
  if (!(network.embedding_scale > 0.0)) {
    throw ScenarioError("network.embedding_scale", "must be positive");
  }
  train.validate();
  if (sif.samples < 2) throw ScenarioError("sif.samples", "need at least 2 samples");
  if (!sif.crack_id.empty() && find_crack(sif.crack_id) == nullptr) {
    throw ScenarioError("sif.crack", "unknown crack '" + sif.crack_id + "'");
  }
  if (propagation.steps < 0) throw ScenarioError("propagation.steps", "must be >= 0");
  if (!(propagation.step_length > 0.0)) {
    throw ScenarioError("propagation.step_length", "must be positive");
  }
}

namespace {

class SectionReader {
 public:
  SectionReader(const Section& s, std::string field) : s_(s), field_(std::move(field)) {}

  ~SectionReader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& e : s_.entries) {
      if (!used_.contains(e.key)) {
        throw ScenarioError(field_ + "." + e.key, "unknown key");
      }
    }
  }

  const Value* get(const std::string& key) {
    used_.insert(key);
    return s_.find(key);
  }

  const Value& require(const std::string& key) {
    const Value* v = get(key);
    if (!v) throw ScenarioError(field_ + "." + key, "missing required key");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    const Value* v = get(key);
    return v ? as_number(*v, key) : fallback;
  }

  double number(const std::string& key) { return as_number(require(key), key); }

  int integer(const std::string& key, int fallback) {
    const Value* v = get(key);
    return v ? as_integer(*v, key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    const Value* v = get(key);
    if (!v) return fallback;
    if (!v->is_bool()) throw ScenarioError(field_ + "." + key, "expected true or false");
    return std::get<bool>(v->data);
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const Value* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ScenarioError(field_ + "." + key, "expected a quoted string");
    return std::get<std::string>(v->data);
  }

  Vec2 point(const std::string& key) { return as_point(require(key), field_ + "." + key); }

  Expression expression(const std::string& key, const Expression& fallback) {
    const Value* v = get(key);
    if (!v) return fallback;
    if (v->is_number()) return Expression::constant(std::get<double>(v->data));
    if (!v->is_string()) {
      throw ScenarioError(field_ + "." + key, "expected an expression string or number");
    }
    try {
      return Expression::parse(std::get<std::string>(v->data));
    } catch (const ParseError& e) {
      throw ScenarioError(field_ + "." + key, e.what());
    }
  }

  std::vector<Vec2> points(const std::string& key) {
    const Value& v = require(key);
    if (!v.is_array()) throw ScenarioError(field_ + "." + key, "expected an array of [x, y]");
    std::vector<Vec2> out;
    for (const auto& item : std::get<Value::Array>(v.data)) {
      out.push_back(as_point(item, field_ + "." + key));
    }
    return out;
  }

  std::pair<double, double> pair(const std::string& key, std::pair<double, double> fallback) {
    const Value* v = get(key);
    if (!v) return fallback;
    const Vec2 p = as_point(*v, field_ + "." + key);
    return {p.x(), p.y()};
  }

  const std::string& field() const { return field_; }

 private:
  double as_number(const Value& v, const std::string& key) const {
    if (!v.is_number()) throw ScenarioError(field_ + "." + key, "expected a number");
    const double d = std::get<double>(v.data);
    if (!std::isfinite(d)) throw ScenarioError(field_ + "." + key, "must be finite");
    return d;
  }

  int as_integer(const Value& v, const std::string& key) const {
    const double d = as_number(v, key);
    if (d != std::floor(d) || std::abs(d) > 2e9) {
      throw ScenarioError(field_ + "." + key, "expected an integer");
    }
    return static_cast<int>(d);
  }

  static Vec2 as_point(const Value& v, const std::string& field) {
    if (!v.is_array()) throw ScenarioError(field, "expected [x, y]");
    const auto& a = std::get<Value::Array>(v.data);
    if (a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
      throw ScenarioError(field, "expected [x, y]");
    }
    return Vec2(std::get<double>(a[0].data), std::get<double>(a[1].data));
  }

  const Section& s_;
  std::string field_;
  std::set<std::string> used_;
};

std::pair<std::string, std::string> split_section(const std::string& name) {
  const auto dot = name.find('.');
  if (dot == std::string::npos) return {name, ""};
  return {name.substr(0, dot), name.substr(dot + 1)};
}

std::optional<Edge> parse_edge(const std::string& s) {
  if (s == "bottom") return Edge::Bottom;
  if (s == "right") return Edge::Right;
  if (s == "top") return Edge::Top;
  if (s == "left") return Edge::Left;
  return std::nullopt;
}

void read_train(SectionReader& r, optim::TrainConfig& t) {
  t.lr0 = r.number("lr0", t.lr0);
  t.decay_factor = r.number("decay_factor", t.decay_factor);
  t.decay_every = r.integer("decay_every", t.decay_every);
  t.patience = r.integer("patience", t.patience);
  t.max_epochs = r.integer("max_epochs", t.max_epochs);
  t.beta1 = r.number("beta1", t.beta1);
  t.beta2 = r.number("beta2", t.beta2);
  t.adam_eps = r.number("adam_eps", t.adam_eps);
  t.improvement_tol = r.number("improvement_tol", t.improvement_tol);
  t.deterministic = r.boolean("deterministic", t.deterministic);
  t.displacement_scale = r.number("displacement_scale", t.displacement_scale);
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  const Document doc = parse_document(text);
  Scenario sc;

  {
    SectionReader top(doc.root, "scenario");
    sc.name = top.string("name", "scenario");
    const std::string mode = top.string("analysis_mode", "plane_strain");
    if (mode == "plane_strain") {
      sc.mode = elastic::AnalysisMode::PlaneStrain;
    } else if (mode == "plane_stress") {
      sc.mode = elastic::AnalysisMode::PlaneStress;
    } else {
      throw ScenarioError("scenario.analysis_mode", "expected \"plane_strain\" or \"plane_stress\"");
    }
    const double seed = top.number("seed", 0.0);
    if (seed < 0 || seed != std::floor(seed)) {
      throw ScenarioError("scenario.seed", "expected a non-negative integer");
    }
    sc.seed = static_cast<std::uint64_t>(seed);
  }

  if (doc.find("domain") == nullptr) throw ScenarioError("domain", "missing [domain] section");

  // Geometry-dependent sections need the domain first.
  for (const auto& s : doc.sections) {
    if (s.name != "domain") continue;
    SectionReader r(s, "domain");
    sc.domain.x_min = r.number("x_min");
    sc.domain.x_max = r.number("x_max");
    sc.domain.y_min = r.number("y_min");
    sc.domain.y_max = r.number("y_max");
  }
  if (!(sc.domain.width() > 0.0) || !(sc.domain.height() > 0.0)) {
    throw ScenarioError("domain", "width and height must be strictly positive");
  }
  const double tol = 1e-12 * sc.domain.diagonal();

  for (const auto& s : doc.sections) {
    const auto [kind, id] = split_section(s.name);
    if (kind == "domain") continue;
    SectionReader r(s, s.name);
    if (kind == "material") {
      if (id.empty()) throw ScenarioError(s.name, "material needs a name: [material.<name>]");
      MaterialRegion m;
      m.name = id;
      m.material.youngs_gpa = r.number("E");
      m.material.poisson = r.number("nu");
      m.material.mode = sc.mode;
      const std::string region = r.string("region", "whole");
      if (region == "whole") {
        m.shape.kind = RegionShape::Kind::Whole;
      } else if (region == "half_plane") {
        m.shape.kind = RegionShape::Kind::HalfPlane;
        m.shape.point = r.point("point");
        m.shape.normal = r.point("normal");
        if (!(m.shape.normal.norm() > 0.0)) throw ScenarioError(s.name + ".normal", "zero normal");
        m.shape.normal.normalize();
      } else if (region == "circle") {
        m.shape.kind = RegionShape::Kind::Circle;
        m.shape.point = r.point("center");
        m.shape.radius = r.number("radius");
        if (!(m.shape.radius > 0.0)) throw ScenarioError(s.name + ".radius", "must be positive");
      } else {
        throw ScenarioError(s.name + ".region", "expected \"whole\", \"half_plane\" or \"circle\"");
      }
      try {
        m.material.validate();
      } catch (const Error& e) {
        throw ScenarioError(s.name, e.what());
      }
      sc.regions.push_back(std::move(m));
    } else if (kind == "crack") {
      if (id.empty()) throw ScenarioError(s.name, "crack needs an id: [crack.<id>]");
      std::vector<Vec2> v = r.points("vertices");
      for (const auto& p : v) {
        if (!sc.domain.contains(p, tol)) throw ScenarioError(s.name, "crack outside domain");
      }
      if (v.size() < 2) throw ScenarioError(s.name + ".vertices", "need at least 2 vertices");
      const bool start_tip = !sc.domain.on_boundary(v.front(), tol);
      const bool end_tip = !sc.domain.on_boundary(v.back(), tol);
      try {
        sc.cracks.emplace_back(id, std::move(v), start_tip, end_tip);
      } catch (const Error& e) {
        throw ScenarioError(s.name, e.what());
      }
    } else if (kind == "interface") {
      if (id.empty()) throw ScenarioError(s.name, "interface needs an id: [interface.<id>]");
      const std::string shape = r.string("kind", "line");
      try {
        if (shape == "line") {
          Vec2 n = r.point("normal");
          if (!(n.norm() > 0.0)) throw ScenarioError(s.name + ".normal", "zero normal");
          sc.interfaces.push_back({id, geometry::InterfaceShape::line(r.point("point"), n.normalized())});
        } else if (shape == "circle") {
          sc.interfaces.push_back(
              {id, geometry::InterfaceShape::circle(r.point("center"), r.number("radius"))});
        } else {
          throw ScenarioError(s.name + ".kind", "expected \"line\" or \"circle\"");
        }
      } catch (const ScenarioError&) {
        throw;
      } catch (const Error& e) {
        throw ScenarioError(s.name, e.what());
      }
    } else if (kind == "constraint") {
      int comp = -1;
      if (id == "u1") comp = 0;
      if (id == "u2") comp = 1;
      if (comp < 0) throw ScenarioError(s.name, "expected [constraint.u1] or [constraint.u2]");
      sc.constraints[comp].a = r.expression("A", Expression::constant(1.0));
      sc.constraints[comp].b = r.expression("B", Expression::constant(0.0));
    } else if (kind == "traction") {
      if (id.empty()) throw ScenarioError(s.name, "traction needs a target: [traction.<edge>]");
      TractionLoad t;
      t.target = id;
      t.edge = parse_edge(id);
      t.t1 = r.expression("t1", Expression::constant(0.0));
      t.t2 = r.expression("t2", Expression::constant(0.0));
      if (!t.edge) t.pressure = r.expression("pressure", Expression::constant(0.0));
      sc.tractions.push_back(std::move(t));
    } else if (kind == "body_force" && id.empty()) {
      sc.body_force[0] = r.expression("b1", Expression::constant(0.0));
      sc.body_force[1] = r.expression("b2", Expression::constant(0.0));
    } else if (kind == "network" && id.empty()) {
      sc.network.width = r.integer("width", sc.network.width);
      sc.network.residual_blocks = r.integer("residual_blocks", sc.network.residual_blocks);
      sc.network.embedding_scale = r.number("embedding_scale", sc.network.embedding_scale);
      sc.network.embed_interfaces = r.boolean("embed_interfaces", sc.network.embed_interfaces);
    } else if (kind == "train" && id.empty()) {
      read_train(r, sc.train);
    } else if (kind == "grid" && id.empty()) {
      sc.grid.nx = r.integer("nx", sc.grid.nx);
      sc.grid.ny = r.integer("ny", sc.grid.ny);
      sc.grid.refinement.radius = r.number("refine_radius", sc.grid.refinement.radius);
      sc.grid.refinement.factor = r.integer("refine_factor", sc.grid.refinement.factor);
    } else if (kind == "sif" && id.empty()) {
      sc.sif.crack_id = r.string("crack", "");
      const auto w = r.pair("window", {-1.0, -1.0});
      sc.sif.window_lo = w.first;
      sc.sif.window_hi = w.second;
      sc.sif.samples = r.integer("samples", sc.sif.samples);
      sc.sif.reference_width = r.number("reference_width", sc.sif.reference_width);
    } else if (kind == "propagation" && id.empty()) {
      sc.propagation.steps = r.integer("steps", sc.propagation.steps);
      sc.propagation.step_length = r.number("step_length", sc.propagation.step_length);
      sc.propagation.max_epochs = r.integer("max_epochs", sc.propagation.max_epochs);
    } else {
      throw ScenarioError(s.name, "unknown section");
    }
  }

  sc.validate();
  return sc;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("config_io", "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text_file(path));
}

}  // namespace dedem::config
