#pragma once

#include "dedem/config/field_table.hpp"
#include "dedem/config/scenario.hpp"
#include "dedem/elasticity/material.hpp"
#include "dedem/nn/network.hpp"

#include <span>
#include <vector>

namespace dedem::fracture {

/// Crack-face jump at distance r (m) behind a tip, in the tip frame:
/// delta2 opening, delta1 sliding.
struct CodSample {
  double r = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
};

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 1.0;
};

/// Least squares y = intercept + slope * x. R^2 is 1 when y has no spread.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// K in MPa sqrt(mm); window as fractions of the crack length measure a.
struct SifResult {
  double k1 = 0.0;
  double k2 = 0.0;
  LinearFit fit1;
  LinearFit fit2;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

/// sqrt(1000): MPa sqrt(m) -> MPa sqrt(mm).
inline constexpr double kSqrtMetreToMm = 31.622776601683793;

/// n samples uniformly spaced in r over [r_min, r_max] behind the given tip.
/// Sample points walk back along the polyline; jumps are rotated into the
/// frame of the segment carrying each point, oriented toward the tip.
std::vector<CodSample> sample_cod(const nn::ParamVector& params, const nn::TrialSpace& space,
                                  const geometry::CrackPath& crack, geometry::TipEnd tip,
                                  double r_min, double r_max, int n);

/// Displacement extrapolation for a homogeneous tip:
/// K~(r) = mu / (kappa + 1) sqrt(2 pi / r) delta, fitted as K + c r.
SifResult sif_homogeneous(std::span<const CodSample> samples, const elastic::Material& m);

struct BimaterialConstants {
  double beta = 0.0;
  double epsilon = 0.0;  // oscillation index
  double mu1 = 0.0;      // GPa
  double mu2 = 0.0;      // GPa
  double kappa1 = 0.0;
  double kappa2 = 0.0;
};

/// Material 1 lies on the positive (opening) side of the crack.
BimaterialConstants dundurs(const elastic::Material& m1, const elastic::Material& m2);

/// Interface-crack extrapolation with Q = epsilon ln(r / a). `a` is the crack
/// length measure used to normalise r inside the logarithm.
SifResult sif_bimaterial(std::span<const CodSample> samples, const BimaterialConstants& c,
                         double a);

/// Leading-order COD of an interface crack for prescribed K (MPa sqrt(mm)),
/// the inverse of sif_bimaterial's pointwise map.
CodSample bimaterial_cod(double k1, double k2, double r, const BimaterialConstants& c, double a);

/// Leading-order homogeneous COD for prescribed K (MPa sqrt(mm)).
CodSample homogeneous_cod(double k1, double k2, double r, const elastic::Material& m);

/// Center crack of half-length a in a strip of half-width b (both m) under
/// remote stress sigma (MPa); result in MPa sqrt(mm).
double tada_k1(double sigma, double a, double b);

/// Maximum circumferential stress kink angle (rad).
double kink_angle(double k1, double k2);

/// sigma_theta up to the positive factor 1 / (2 sqrt(2 pi r)).
double hoop_stress(double k1, double k2, double theta);

/// Per-column weighted relative RMSE of `field` against `reference`, matched
/// by column name. Points must agree within 1e-9. Tensor-grid point sets use
/// trapezoid weights, other sets equal weights.
std::vector<double> rrmse(const config::FieldTable& field, const config::FieldTable& reference);
std::vector<double> rrmse(const config::FieldTable& field, const config::FieldTable& reference,
                          std::span<const double> weights);

/// Trapezoid weights if the points form a full tensor grid, else ones.
std::vector<double> point_weights(std::span<const Vec2> points);

/// SIF of one crack tip for a trained field, with the window chosen by the
/// scenario's [sif] settings (a/b rule by default). Uses the interface path
/// when the two crack faces see different materials.
struct TipSif {
  SifResult sif;
  geometry::TipEnd tip = geometry::TipEnd::End;
  double a = 0.0;
  bool bimaterial = false;
  std::vector<CodSample> samples;
};

TipSif extract_sif(const nn::ParamVector& params, const nn::TrialSpace& space,
                   const config::Scenario& sc, const geometry::CrackPath& crack);

/// Length measure a: full length for a crack with one tip, half length for an
/// interior crack.
double crack_measure(const geometry::CrackPath& crack);

/// The tip used for SIF extraction: the end tip if present, else the start.
geometry::TipEnd active_tip(const geometry::CrackPath& crack);

}  // namespace dedem::fracture
