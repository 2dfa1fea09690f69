#include "dedem/elasticity/material.hpp"

#include <cmath>
#include <string>

namespace dedem::elastic {

void Material::validate() const {
  if (!(youngs_gpa > 0.0) || !std::isfinite(youngs_gpa)) {
    throw Error("elasticity", "Young's modulus must be positive, got " + std::to_string(youngs_gpa));
  }
  if (!(poisson > -1.0 && poisson < 0.5)) {
    throw Error("elasticity",
                "Poisson's ratio must lie in (-1, 0.5), got " + std::to_string(poisson));
  }
}

Eigen::Matrix3d elastic_matrix(const Material& m) {
  m.validate();
  const double e = 1000.0 * m.youngs_gpa;
  const double nu = m.poisson;
  Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
  if (m.mode == AnalysisMode::PlaneStress) {
    const double f = e / (1.0 - nu * nu);
    c << f, f * nu, 0.0,
         f * nu, f, 0.0,
         0.0, 0.0, f * (1.0 - nu) / 2.0;
  } else {
    const double f = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
    c << f * (1.0 - nu), f * nu, 0.0,
         f * nu, f * (1.0 - nu), 0.0,
         0.0, 0.0, f * (1.0 - 2.0 * nu) / 2.0;
  }
  return c;
}

Strain strain_from_grad(const Eigen::Matrix2d& g) {
  return Strain(g(0, 0), g(1, 1), g(0, 1) + g(1, 0));
}

double strain_energy_density(const Strain& eps, const Material& m) {
  return 0.5 * eps.dot(elastic_matrix(m) * eps);
}

double comparison_stress(const Stress& s) {
  const double d = s[0] - s[1];
  return std::sqrt(d * d / 2.0 + 3.0 * s[2] * s[2]);
}

}  // namespace dedem::elastic
