#include "dedem/fracture/sif.hpp"

#include "dedem/nn/batch.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

namespace dedem::fracture {

using std::numbers::pi;

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("fracture_post", "fit: length mismatch");
  const auto n = static_cast<double>(x.size());
  if (std::set<double>(x.begin(), x.end()).size() < 2) {
    throw Error("fracture_post", "fit needs at least 2 distinct sample positions");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    ss_res += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

namespace {

struct FramePoint {
  Vec2 x;
  Vec2 e1;  // toward the tip
  Vec2 e2;
};

// Point at arc length r behind the tip, with the local frame of its segment.
FramePoint walk_back(const geometry::CrackPath& c, geometry::TipEnd tip, double r) {
  std::vector<Vec2> v = c.vertices();
  if (tip == geometry::TipEnd::Start) std::reverse(v.begin(), v.end());
  // v now runs toward the tip, which is v.back().
  double left = r;
  for (std::size_t k = v.size() - 1; k > 0; --k) {
    const Vec2 d = v[k] - v[k - 1];
    const double len = d.norm();
    const Vec2 e1 = d / len;
    if (left <= len || k == 1) {
      return {v[k] - left * e1, e1, Vec2(-e1.y(), e1.x())};
    }
    left -= len;
  }
  throw Error("fracture_post", "sample point lies beyond the crack");
}

std::size_t spec_index(const nn::TrialSpace& space, const std::string& id) {
  for (std::size_t k = 0; k < space.specs.size(); ++k) {
    if (space.specs[k].id == id && space.specs[k].is_strong()) return k;
  }
  throw Error("fracture_post", "crack '" + id + "' is not embedded in the trial space");
}

}  // namespace

geometry::TipEnd active_tip(const geometry::CrackPath& crack) {
  if (crack.is_tip(geometry::TipEnd::End)) return geometry::TipEnd::End;
  if (crack.is_tip(geometry::TipEnd::Start)) return geometry::TipEnd::Start;
  throw Error("fracture_post", "crack '" + crack.id() + "' has no tip");
}

double crack_measure(const geometry::CrackPath& crack) {
  return crack.tip_count() == 2 ? 0.5 * crack.length() : crack.length();
}

std::vector<CodSample> sample_cod(const nn::ParamVector& params, const nn::TrialSpace& space,
                                  const geometry::CrackPath& crack, geometry::TipEnd tip,
                                  double r_min, double r_max, int n) {
  if (!crack.is_tip(tip)) throw Error("fracture_post", "requested endpoint is not a crack tip");
  if (n < 2) throw Error("fracture_post", "need at least 2 COD samples");
  if (!(r_min > 0.0) || !(r_max > r_min)) {
    throw Error("fracture_post", "COD window must satisfy 0 < r_min < r_max");
  }
  if (r_max > crack.length()) throw Error("fracture_post", "COD window extends beyond the crack");
  const std::size_t k = spec_index(space, crack.id());
  // Face +1 of the local frame: the side its normal e2 points to.
  const double plus = tip == geometry::TipEnd::End ? 1.0 : -1.0;
  std::vector<Vec2> pts;
  std::vector<std::vector<double>> sides;
  std::vector<FramePoint> frames;
  for (int i = 0; i < n; ++i) {
    const double r = r_min + (r_max - r_min) * i / (n - 1.0);
    const FramePoint f = walk_back(crack, tip, r);
    frames.push_back(f);
    for (double s : {plus, -plus}) {
      pts.push_back(f.x);
      std::vector<double> side(space.specs.size(), 0.0);
      side[k] = s;
      sides.push_back(std::move(side));
    }
  }
  const nn::PointInputs in = nn::prepare_inputs(space, pts, sides);
  const nn::FieldValues f = nn::evaluate_field(params, space, in);
  std::vector<CodSample> out;
  for (int i = 0; i < n; ++i) {
    const Vec2 jump = f.u.col(2 * i) - f.u.col(2 * i + 1);
    out.push_back({r_min + (r_max - r_min) * i / (n - 1.0), frames[static_cast<std::size_t>(i)].e1.dot(jump),
                   frames[static_cast<std::size_t>(i)].e2.dot(jump)});
  }
  return out;
}

SifResult sif_homogeneous(std::span<const CodSample> samples, const elastic::Material& m) {
  if (samples.size() < 2) throw Error("fracture_post", "need at least 2 COD samples");
  const double mu = m.shear_modulus_mpa();
  const double kappa = m.kolosov();
  std::vector<double> r, k1, k2;
  for (const auto& s : samples) {
    if (!(s.r > 0.0)) throw Error("fracture_post", "COD sample with r <= 0");
    const double f = mu / (kappa + 1.0) * std::sqrt(2.0 * pi / s.r) * kSqrtMetreToMm;
    r.push_back(s.r);
    k1.push_back(f * s.delta2);
    k2.push_back(f * s.delta1);
  }
  SifResult out;
  out.fit1 = fit_line(r, k1);
  out.fit2 = fit_line(r, k2);
  out.k1 = out.fit1.intercept;
  out.k2 = out.fit2.intercept;
  return out;
}

BimaterialConstants dundurs(const elastic::Material& m1, const elastic::Material& m2) {
  m1.validate();
  m2.validate();
  BimaterialConstants c;
  c.mu1 = m1.shear_modulus_mpa() / 1000.0;
  c.mu2 = m2.shear_modulus_mpa() / 1000.0;
  c.kappa1 = m1.kolosov();
  c.kappa2 = m2.kolosov();
  c.beta = (c.mu1 * (c.kappa2 - 1.0) - c.mu2 * (c.kappa1 - 1.0)) /
           (c.mu1 * (c.kappa2 + 1.0) + c.mu2 * (c.kappa1 + 1.0));
  c.epsilon = std::log((1.0 - c.beta) / (1.0 + c.beta)) / (2.0 * pi);
  return c;
}

namespace {

double bimaterial_d(const BimaterialConstants& c, double r) {
  const double mu1 = 1000.0 * c.mu1;
  const double mu2 = 1000.0 * c.mu2;
  return 2.0 * mu1 * mu2 * std::cosh(pi * c.epsilon) /
         (mu1 * (1.0 + c.kappa2) + mu2 * (1.0 + c.kappa1)) * std::sqrt(2.0 * pi / r);
}

// K~ = D M (delta1, delta2); M is the appendix matrix acting on (delta1, delta2).
std::array<double, 2> bimaterial_k(const CodSample& s, const BimaterialConstants& c, double a) {
  const double d = bimaterial_d(c, s.r) * kSqrtMetreToMm;
  const double q = c.epsilon * std::log(s.r / a);
  const double e = c.epsilon;
  const double cq = std::cos(q), sq = std::sin(q);
  return {d * ((-2.0 * e * cq + sq) * s.delta1 + (cq + 2.0 * e * sq) * s.delta2),
          d * ((cq + 2.0 * e * sq) * s.delta1 + (2.0 * e * cq - sq) * s.delta2)};
}

}  // namespace

SifResult sif_bimaterial(std::span<const CodSample> samples, const BimaterialConstants& c,
                         double a) {
  if (samples.size() < 2) throw Error("fracture_post", "need at least 2 COD samples");
  if (!(a > 0.0)) throw Error("fracture_post", "crack length measure must be positive");
  std::vector<double> r, k1, k2;
  for (const auto& s : samples) {
    if (!(s.r > 0.0)) throw Error("fracture_post", "COD sample with r <= 0");
    const auto k = bimaterial_k(s, c, a);
    r.push_back(s.r);
    k1.push_back(k[0]);
    k2.push_back(k[1]);
  }
  SifResult out;
  out.fit1 = fit_line(r, k1);
  out.fit2 = fit_line(r, k2);
  out.k1 = out.fit1.intercept;
  out.k2 = out.fit2.intercept;
  return out;
}

CodSample bimaterial_cod(double k1, double k2, double r, const BimaterialConstants& c, double a) {
  const double d = bimaterial_d(c, r) * kSqrtMetreToMm;
  const double q = c.epsilon * std::log(r / a);
  const double e = c.epsilon;
  const double cq = std::cos(q), sq = std::sin(q);
  Eigen::Matrix2d m;
  m << -2.0 * e * cq + sq, cq + 2.0 * e * sq,
       cq + 2.0 * e * sq, 2.0 * e * cq - sq;
  const Eigen::Vector2d delta = (d * m).lu().solve(Eigen::Vector2d(k1, k2));
  return {r, delta[0], delta[1]};
}

CodSample homogeneous_cod(double k1, double k2, double r, const elastic::Material& m) {
  const double f = (m.kolosov() + 1.0) / m.shear_modulus_mpa() * std::sqrt(r / (2.0 * pi)) /
                   kSqrtMetreToMm;
  return {r, k2 * f, k1 * f};
}

double tada_k1(double sigma, double a, double b) {
  if (!(a > 0.0) || !(a < b)) throw Error("fracture_post", "tada_k1 requires 0 < a < b");
  const double ab = a / b;
  const double a_mm = 1000.0 * a;
  return sigma * std::sqrt(pi * a_mm) * (1.0 - 0.025 * ab * ab + 0.06 * std::pow(ab, 4)) *
         std::sqrt(1.0 / std::cos(pi * a / (2.0 * b)));
}

double hoop_stress(double k1, double k2, double theta) {
  return std::cos(theta / 2.0) * (k1 * (1.0 + std::cos(theta)) - 3.0 * k2 * std::sin(theta));
}

double kink_angle(double k1, double k2) {
  if (k1 == 0.0 && k2 == 0.0) throw Error("fracture_post", "kink angle undefined for K1 = K2 = 0");
  const double root = std::sqrt(k1 * k1 * k1 * k1 + 8.0 * k1 * k1 * k2 * k2);
  const double den = k1 * k1 + 9.0 * k2 * k2;
  const double scale = std::max(std::abs(k1), std::abs(k2));
  std::vector<double> cands;
  for (double sign : {1.0, -1.0}) {
    const double c = std::clamp((3.0 * k2 * k2 + sign * root) / den, -1.0, 1.0);
    const double t = std::acos(c);
    cands.push_back(t);
    cands.push_back(-t);
  }
  auto residual = [&](double t) {
    return std::abs(k1 * std::sin(t) + k2 * (3.0 * std::cos(t) - 1.0)) / scale;
  };
  double best = 0.0;
  double best_val = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (double t : cands) {
    if (residual(t) > 1e-8) continue;
    const double v = hoop_stress(k1, k2, t);
    if (!found || v > best_val || (v == best_val && std::abs(t) < std::abs(best))) {
      best = t;
      best_val = v;
      found = true;
    }
  }
  if (!found) {
    // Rounding pushed every root off the stationarity tolerance; fall back to
    // the most stationary candidate.
    best = *std::min_element(cands.begin(), cands.end(),
                             [&](double a, double b) { return residual(a) < residual(b); });
  }
  return best;
}

std::vector<double> point_weights(std::span<const Vec2> points) {
  std::vector<double> w(points.size(), 1.0);
  std::set<double> xs, ys;
  std::set<std::pair<double, double>> pairs;
  for (const auto& p : points) {
    xs.insert(p.x());
    ys.insert(p.y());
    pairs.insert({p.x(), p.y()});
  }
  if (xs.size() < 2 || ys.size() < 2 || pairs.size() != points.size() ||
      xs.size() * ys.size() != points.size()) {
    return w;
  }
  auto trapezoid = [](const std::set<double>& s) {
    const std::vector<double> v(s.begin(), s.end());
    std::map<double, double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double lo = k > 0 ? v[k] - v[k - 1] : 0.0;
      const double hi = k + 1 < v.size() ? v[k + 1] - v[k] : 0.0;
      out[v[k]] = 0.5 * (lo + hi);
    }
    return out;
  };
  const auto wx = trapezoid(xs);
  const auto wy = trapezoid(ys);
  for (std::size_t i = 0; i < points.size(); ++i) {
    w[i] = wx.at(points[i].x()) * wy.at(points[i].y());
  }
  return w;
}

std::vector<double> rrmse(const config::FieldTable& field, const config::FieldTable& reference,
                          std::span<const double> weights) {
  if (field.rows() != reference.rows() || weights.size() != field.rows()) {
    throw Error("fracture_post", "rrmse: point sets differ in size");
  }
  for (std::size_t i = 0; i < field.rows(); ++i) {
    if ((field.points[i] - reference.points[i]).cwiseAbs().maxCoeff() > 1e-9) {
      throw Error("fracture_post", "rrmse: point " + std::to_string(i) + " does not match the reference");
    }
  }
  std::vector<double> out;
  for (std::size_t c = 0; c < reference.names.size(); ++c) {
    const int fc = field.column(reference.names[c]);
    if (fc < 0) throw Error("fracture_post", "rrmse: field lacks column '" + reference.names[c] + "'");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < field.rows(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double ref = reference.values(row, static_cast<Eigen::Index>(c));
      const double d = field.values(row, fc) - ref;
      num += weights[i] * d * d;
      den += weights[i] * ref * ref;
    }
    out.push_back(den > 0.0 ? std::sqrt(num / den)
                            : (num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()));
  }
  return out;
}

std::vector<double> rrmse(const config::FieldTable& field, const config::FieldTable& reference) {
  const std::vector<double> w = point_weights(reference.points);
  return rrmse(field, reference, w);
}

TipSif extract_sif(const nn::ParamVector& params, const nn::TrialSpace& space,
                   const config::Scenario& sc, const geometry::CrackPath& crack) {
  TipSif t;
  t.tip = active_tip(crack);
  t.a = crack_measure(crack);
  double lo = sc.sif.window_lo;
  double hi = sc.sif.window_hi;
  if (lo < 0.0 || hi < 0.0) {
    const double b = sc.sif.reference_width > 0.0 ? sc.sif.reference_width : sc.domain.width();
    const bool long_crack = t.a / b > 0.2;
    lo = long_crack ? 0.3 : 0.4;
    hi = long_crack ? 0.35 : 0.8;
  }
  if (!(lo > 0.0 && hi > lo && hi < 1.0)) {
    throw Error("fracture_post", "SIF window must satisfy 0 < lo < hi < 1");
  }
  t.samples = sample_cod(params, space, crack, t.tip, lo * t.a, hi * t.a, sc.sif.samples);

  // Materials on the two faces, probed just off the middle of the window.
  const FramePoint mid = walk_back(crack, t.tip, 0.5 * (lo + hi) * t.a);
  const double probe = 1e-6 * sc.domain.diagonal();
  const elastic::Material& plus = sc.material_at(mid.x + probe * mid.e2);
  const elastic::Material& minus = sc.material_at(mid.x - probe * mid.e2);
  t.bimaterial = plus.youngs_gpa != minus.youngs_gpa || plus.poisson != minus.poisson;
  t.sif = t.bimaterial ? sif_bimaterial(t.samples, dundurs(plus, minus), t.a)
                       : sif_homogeneous(t.samples, plus);
  t.sif.window_lo = lo;
  t.sif.window_hi = hi;
  return t;
}

}  // namespace dedem::fracture
