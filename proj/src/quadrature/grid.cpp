#include "dedem/quadrature/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace dedem::quad {

double QuadGrid::total_weight() const {
  double s = 0.0;
  for (const auto& n : nodes) s += n.weight;
  return s;
}

const EdgeRule* QuadGrid::edge(config::Edge e) const {
  for (const auto& r : edges) {
    if (r.edge == e) return &r;
  }
  return nullptr;
}

namespace {

double lattice_coord(double lo, double extent, long index, long intervals) {
  if (index == intervals) return lo + extent;
  return lo + extent * static_cast<double>(index) / static_cast<double>(intervals);
}

void check_rect(int nx, int ny, const Rect& rect) {
  if (nx < 2 || ny < 2) throw Error("quadrature", "grid needs nx, ny >= 2");
  if (!(rect.width() > 0.0) || !(rect.height() > 0.0) || !std::isfinite(rect.area())) {
    throw Error("quadrature", "degenerate integration rectangle");
  }
}

}  // namespace

QuadGrid build_uniform_grid(int nx, int ny, const Rect& rect) {
  check_rect(nx, ny, rect);
  QuadGrid g;
  g.domain = rect;
  g.nx = nx;
  g.ny = ny;
  const double h1 = rect.width() / (nx - 1);
  const double h2 = rect.height() / (ny - 1);
  g.nodes.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j) {
    const double wy = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
    const double y = lattice_coord(rect.y_min, rect.height(), j, ny - 1);
    for (int i = 0; i < nx; ++i) {
      const double wx = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
      g.nodes.push_back({Vec2(lattice_coord(rect.x_min, rect.width(), i, nx - 1), y),
                         h1 * h2 * wx * wy, {}});
    }
  }
  return g;
}

QuadGrid refine_near_tips(const QuadGrid& grid, std::span<const Vec2> tips,
                          const config::RefinementSpec& spec) {
  if (grid.relabeled) throw Error("quadrature", "refine before relabeling the grid");
  if (grid.refined) throw Error("quadrature", "grid is already refined");
  if (spec.factor < 2) throw Error("quadrature", "refinement factor must be >= 2");
  if (!(spec.radius > 0.0)) throw Error("quadrature", "refinement radius must be positive");
  check_rect(grid.nx, grid.ny, grid.domain);
  const Rect& r = grid.domain;
  const long f = spec.factor;
  const long ix = static_cast<long>(grid.nx - 1) * f;
  const long iy = static_cast<long>(grid.ny - 1) * f;
  const double h1 = r.width() / (grid.nx - 1);
  const double h2 = r.height() / (grid.ny - 1);
  const double cell = h1 * h2;

  // Weights on the fine integer lattice keyed by (J, I) so that iteration
  // order is row-major like the uniform grid.
  std::map<std::pair<long, long>, double> w;
  bool any = false;
  for (int j = 0; j + 1 < grid.ny; ++j) {
    for (int i = 0; i + 1 < grid.nx; ++i) {
      const Vec2 c(r.x_min + (i + 0.5) * h1, r.y_min + (j + 0.5) * h2);
      const bool refine = std::any_of(tips.begin(), tips.end(), [&](const Vec2& t) {
        return (t - c).norm() <= spec.radius;
      });
      const long I = i * f;
      const long J = j * f;
      if (!refine) {
        for (long dj : {0L, f}) {
          for (long di : {0L, f}) w[{J + dj, I + di}] += cell / 4.0;
        }
        continue;
      }
      any = true;
      const double sub = cell / static_cast<double>(f * f) / 4.0;
      for (long b = 0; b < f; ++b) {
        for (long a = 0; a < f; ++a) {
          for (long dj : {0L, 1L}) {
            for (long di : {0L, 1L}) w[{J + b + dj, I + a + di}] += sub;
          }
        }
      }
    }
  }
  QuadGrid out = grid;
  out.refined = true;
  if (!any) return out;
  out.nodes.clear();
  out.nodes.reserve(w.size());
  for (const auto& [key, weight] : w) {
    out.nodes.push_back({Vec2(lattice_coord(r.x_min, r.width(), key.second, ix),
                              lattice_coord(r.y_min, r.height(), key.first, iy)),
                         weight, {}});
  }
  return out;
}

QuadGrid crack_aware_relabel(const QuadGrid& grid, std::span<const geometry::CrackPath> cracks,
                             std::span<const geometry::InterfaceShape> interfaces) {
  const double diag = grid.domain.diagonal();
  const double tol = 1e-12 * diag;
  const double eps = 1e-8 * diag;
  QuadGrid out = grid;
  out.relabeled = true;
  const std::size_t base = out.crack_ids.size();
  for (auto& n : out.nodes) n.sides.resize(base + cracks.size(), 0);
  for (std::size_t c = 0; c < cracks.size(); ++c) {
    out.crack_ids.push_back(cracks[c].id());
    std::vector<QuadNode> next;
    next.reserve(out.nodes.size() + out.nodes.size() / 8);
    for (const QuadNode& n : out.nodes) {
      const geometry::SignedDistance sd = geometry::sdf_polyline(n.x, cracks[c]);
      if (std::abs(sd.value) > tol) {
        QuadNode m = n;
        m.sides[base + c] = sd.value > 0.0 ? 1 : -1;
        next.push_back(std::move(m));
        continue;
      }
      const Vec2 normal = cracks[c].segment_normal(sd.segment);
      for (int s : {1, -1}) {
        QuadNode m = n;
        m.x = n.x + (s * eps) * normal;
        m.weight = 0.5 * n.weight;
        m.sides[base + c] = static_cast<signed char>(s);
        next.push_back(std::move(m));
      }
    }
    out.nodes = std::move(next);
  }
  for (const auto& shape : interfaces) {
    std::vector<QuadNode> next;
    next.reserve(out.nodes.size());
    for (const QuadNode& n : out.nodes) {
      const geometry::SignedDistance sd = shape.signed_distance(n.x);
      if (std::abs(sd.value) > tol) {
        next.push_back(n);
        continue;
      }
      const Vec2 normal = sd.gradient.norm() > 0.0 ? sd.gradient : Vec2(1.0, 0.0);
      for (int s : {1, -1}) {
        QuadNode m = n;
        m.x = n.x + (s * eps) * normal;
        m.weight = 0.5 * n.weight;
        next.push_back(std::move(m));
      }
    }
    out.nodes = std::move(next);
  }
  return out;
}

void attach_edge_rules(QuadGrid& grid) {
  const Rect& r = grid.domain;
  const double tol = 1e-12 * r.diagonal();
  grid.edges.clear();
  for (config::Edge e : {config::Edge::Bottom, config::Edge::Right, config::Edge::Top,
                         config::Edge::Left}) {
    const bool horizontal = e == config::Edge::Bottom || e == config::Edge::Top;
    std::vector<std::pair<Vec2, std::size_t>> pts;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
      const QuadNode& n = grid.nodes[i];
      const bool on = (e == config::Edge::Bottom && std::abs(n.x.y() - r.y_min) <= tol) ||
                      (e == config::Edge::Top && std::abs(n.x.y() - r.y_max) <= tol) ||
                      (e == config::Edge::Left && std::abs(n.x.x() - r.x_min) <= tol) ||
                      (e == config::Edge::Right && std::abs(n.x.x() - r.x_max) <= tol);
      if (on) pts.emplace_back(n.x, i);
    }
    auto t = [horizontal](const std::pair<Vec2, std::size_t>& p) {
      return horizontal ? p.first.x() : p.first.y();
    };
    std::stable_sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) { return t(a) < t(b); });
    EdgeRule rule;
    rule.edge = e;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double lo = k > 0 ? t(pts[k]) - t(pts[k - 1]) : 0.0;
      const double hi = k + 1 < pts.size() ? t(pts[k + 1]) - t(pts[k]) : 0.0;
      rule.nodes.push_back({pts[k].first, 0.5 * (lo + hi), pts[k].second});
    }
    grid.edges.push_back(std::move(rule));
  }
}

void attach_crack_face_rules(QuadGrid& grid, std::span<const geometry::CrackPath> cracks) {
  const double h = std::min(grid.domain.width() / (grid.nx - 1), grid.domain.height() / (grid.ny - 1));
  grid.crack_faces.clear();
  for (const auto& c : cracks) {
    const double len = c.length();
    const auto count = static_cast<std::size_t>(std::ceil(len / h)) + 1;
    const double step = len / static_cast<double>(count - 1);
    const auto& v = c.vertices();
    CrackFaceRule rule;
    rule.crack_id = c.id();
    std::size_t seg = 0;
    double seg_start = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double s = k + 1 == count ? len : step * static_cast<double>(k);
      while (seg + 1 < c.segment_count() && s > seg_start + (v[seg + 1] - v[seg]).norm()) {
        seg_start += (v[seg + 1] - v[seg]).norm();
        ++seg;
      }
      const double seg_len = (v[seg + 1] - v[seg]).norm();
      const double t = std::clamp((s - seg_start) / seg_len, 0.0, 1.0);
      const Vec2 x = k + 1 == count ? v.back() : Vec2(v[seg] + t * (v[seg + 1] - v[seg]));
      const double w = (k == 0 || k + 1 == count) ? 0.5 * step : step;
      rule.nodes.push_back({x, w, LineNode::kNoNode});
      rule.normals.push_back(c.segment_normal(seg));
    }
    grid.crack_faces.push_back(std::move(rule));
  }
}

std::vector<Vec2> crack_tips(std::span<const geometry::CrackPath> cracks) {
  std::vector<Vec2> tips;
  for (const auto& c : cracks) {
    for (auto end : {geometry::TipEnd::Start, geometry::TipEnd::End}) {
      if (c.is_tip(end)) tips.push_back(c.endpoint(end));
    }
  }
  return tips;
}

QuadGrid build_scenario_grid(const config::Scenario& sc) {
  QuadGrid g = build_uniform_grid(sc.grid.nx, sc.grid.ny, sc.domain);
  const std::vector<Vec2> tips = crack_tips(sc.cracks);
  if (!tips.empty()) {
    config::RefinementSpec spec = sc.grid.refinement;
    spec.radius = sc.refinement_radius();
    g = refine_near_tips(g, tips, spec);
  }
  const std::vector<geometry::InterfaceShape> boundaries = sc.material_boundaries();
  g = crack_aware_relabel(g, sc.cracks, boundaries);
  attach_edge_rules(g);
  attach_crack_face_rules(g, sc.cracks);
  return g;
}

double integrate(std::span<const double> samples, const QuadGrid& grid) {
  if (samples.size() != grid.nodes.size()) {
    throw Error("quadrature", "integrate: " + std::to_string(samples.size()) + " samples for " +
                                  std::to_string(grid.nodes.size()) + " nodes");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) s += grid.nodes[i].weight * samples[i];
  return s;
}

void write_grid_csv(const QuadGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("quadrature", "cannot write '" + path.string() + "'");
  out << "x1,x2,weight";
  for (const auto& id : grid.crack_ids) out << ",side_" << id;
  out << '\n';
  out.precision(17);
  for (const auto& n : grid.nodes) {
    out << n.x.x() << ',' << n.x.y() << ',' << n.weight;
    for (signed char s : n.sides) out << ',' << static_cast<int>(s);
    out << '\n';
  }
  if (!out) throw Error("quadrature", "failed writing '" + path.string() + "'");
}

}  // namespace dedem::quad
