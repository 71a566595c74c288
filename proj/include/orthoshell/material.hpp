#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "orthoshell/kinematics.hpp"

namespace orthoshell {

class MaterialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How the in-plane stiffness tensor is assembled.
///  - Paper: C^{abcd} = K^{ab} H^{abcd}(a'), no summation on the K pair.
///  - Voigt: classical orthotropic plane-stress law in the orthonormal frame
///    of the aligned basis.
///  - Isotropic: E/(1 - nu^2) H^{abcd}(a) with E = E1, nu = nu1; needs no
///    aligned basis.
enum class ConstitutiveMode { Paper, Voigt, Isotropic };

std::string to_string(ConstitutiveMode mode);
ConstitutiveMode parse_constitutive_mode(const std::string& name);

struct Material {
  double h = 0;    // thickness
  double rho = 0;  // mass density
  double E1 = 0;   // modulus along the preferred direction
  double E2 = 0;   // modulus across it
  double nu1 = 0;
  double G12 = 0;
  Vec3 d = Vec3::UnitX();
  ConstitutiveMode mode = ConstitutiveMode::Voigt;

  /// Reciprocal ratio from E1 nu2 = E2 nu1.
  double nu2() const { return nu1 * E2 / E1; }
  /// Throws MaterialError if a modulus, h or rho is not positive, if
  /// nu1 nu2 >= 1, or if d is not a unit vector.
  void validate() const;
  /// True when the mode needs the aligned (transformed) reference basis.
  bool needs_alignment() const { return mode != ConstitutiveMode::Isotropic; }

  static Material isotropic(double E, double nu, double h, double rho = 1.0);
};

struct StiffnessCoefficients {
  double k11 = 0, k22 = 0, k12 = 0;
};

StiffnessCoefficients stiffness_coefficients(const Material& m);

/// Fourth-order surface tensor, index (a, b, c, d) -> a*8 + b*4 + c*2 + d.
struct Tensor4 {
  std::array<double, 16> v{};
  double& operator()(int a, int b, int c, int d) { return v[a * 8 + b * 4 + c * 2 + d]; }
  double operator()(int a, int b, int c, int d) const { return v[a * 8 + b * 4 + c * 2 + d]; }
  /// C:e for a symmetric 2x2 argument.
  Mat2 contract(const Mat2& e) const;
  /// e:C:e.
  double quadratic(const Mat2& e) const;
  Tensor4 major_symmetrized() const;
};

/// H^{abcd} = nu a^{ab} a^{cd} + (1 - nu)/2 (a^{ac} a^{bd} + a^{ad} a^{bc}).
Tensor4 elasticity_tensor(const Mat2& inverse_metric, double nu);

/// Literal resultant operator K^{ab} H^{abcd} (pair ab not summed). Not
/// major-symmetric when k11 != k22.
Tensor4 paper_tensor(const StiffnessCoefficients& k, const Tensor4& H);

/// Tensor C such that W = h/2 alpha:C:alpha + h^3/24 beta:C:beta and
/// n = h C alpha, m = h^3/12 C beta are the exact strain gradients of W.
/// `ref` is the reference geometry in the basis the strains use.
Tensor4 constitutive_tensor(const Material& m, const SurfaceGeometry& ref);

struct StressResultants {
  Mat2 membrane = Mat2::Zero();  // n^{ab}
  Mat2 bending = Mat2::Zero();   // m^{ab}
};

StressResultants stress_resultants(const StrainState& s, const Tensor4& C, double h);

/// Membrane and bending parts of the energy per unit reference area.
struct EnergyDensity {
  double membrane = 0;
  double bending = 0;
  double total() const { return membrane + bending; }
};

EnergyDensity energy_density(const StrainState& s, const Tensor4& C, double h);

}  // namespace orthoshell
