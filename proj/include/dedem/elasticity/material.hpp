#pragma once

#include "dedem/common.hpp"

#include <Eigen/Core>

namespace dedem::elastic {

enum class AnalysisMode { PlaneStress, PlaneStrain };

/// Isotropic linear-elastic material. E in GPa.
struct Material {
  double youngs_gpa = 1.0;
  double poisson = 0.0;
  AnalysisMode mode = AnalysisMode::PlaneStrain;

  /// Throws unless E > 0 and -1 < nu < 0.5.
  void validate() const;

  /// Shear modulus in MPa.
  double shear_modulus_mpa() const { return 1000.0 * youngs_gpa / (2.0 * (1.0 + poisson)); }

  /// Kolosov constant: 3 - 4 nu (plane strain) or (3 - nu)/(1 + nu) (plane stress).
  double kolosov() const {
    return mode == AnalysisMode::PlaneStrain ? 3.0 - 4.0 * poisson
                                             : (3.0 - poisson) / (1.0 + poisson);
  }

  /// Modulus relating uniaxial stress to strain in the loading direction:
  /// E (plane stress) or E / (1 - nu^2) (plane strain), MPa.
  double effective_modulus_mpa() const {
    const double e = 1000.0 * youngs_gpa;
    return mode == AnalysisMode::PlaneStress ? e : e / (1.0 - poisson * poisson);
  }
};

/// Voigt strain (eps11, eps22, gamma12 = 2 eps12).
using Strain = Eigen::Vector3d;
/// Voigt stress (s11, s22, s12) in MPa.
using Stress = Eigen::Vector3d;

/// Plane stress or plane strain stiffness in MPa.
Eigen::Matrix3d elastic_matrix(const Material& m);

/// grad(i, j) = du_i / dx_j.
Strain strain_from_grad(const Eigen::Matrix2d& grad);

/// 1/2 eps^T C eps in MPa (= MJ/m^3).
double strain_energy_density(const Strain& eps, const Material& m);

/// Comparison stress sqrt((s11 - s22)^2 / 2 + 3 s12^2).
double comparison_stress(const Stress& s);

/// Energies are reported in J per metre of thickness; stresses are MPa and
/// lengths metres, so MPa m^2 is scaled by this factor.
inline constexpr double kEnergyUnit = 1.0e6;

}  // namespace dedem::elastic
