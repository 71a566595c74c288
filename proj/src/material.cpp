#include "orthoshell/material.hpp"

#include <cmath>

namespace orthoshell {

std::string to_string(ConstitutiveMode mode) {
  switch (mode) {
    case ConstitutiveMode::Paper:
      return "paper";
    case ConstitutiveMode::Voigt:
      return "voigt";
    case ConstitutiveMode::Isotropic:
      return "isotropic";
  }
  return "?";
}

ConstitutiveMode parse_constitutive_mode(const std::string& name) {
  if (name == "paper") return ConstitutiveMode::Paper;
  if (name == "voigt") return ConstitutiveMode::Voigt;
  if (name == "isotropic") return ConstitutiveMode::Isotropic;
  throw MaterialError("unknown constitutive mode '" + name + "' (expected paper, voigt or isotropic)");
}

void Material::validate() const {
  if (!(h > 0)) throw MaterialError("thickness h must be positive");
  if (!(rho > 0)) throw MaterialError("density rho must be positive");
  if (!(E1 > 0) || !(E2 > 0)) throw MaterialError("moduli E1 and E2 must be positive");
  if (!std::isfinite(nu1)) throw MaterialError("nu1 must be finite");
  if (!(nu1 * nu2() < 1)) throw MaterialError("nu1 * nu2 must be below 1");
  if (mode != ConstitutiveMode::Isotropic && !(G12 > 0)) throw MaterialError("shear modulus G12 must be positive");
  if (mode == ConstitutiveMode::Paper && !(nu1 < 1)) throw MaterialError("nu1 must be below 1");
  if (std::abs(d.norm() - 1.0) > 1e-12) throw MaterialError("preferred direction must be a unit vector");
}

Material Material::isotropic(double E, double nu, double h, double rho) {
  Material m;
  m.h = h;
  m.rho = rho;
  m.E1 = m.E2 = E;
  m.nu1 = nu;
  m.G12 = E / (2.0 * (1.0 + nu));
  m.mode = ConstitutiveMode::Isotropic;
  return m;
}

StiffnessCoefficients stiffness_coefficients(const Material& m) {
  const double nn = m.nu1 * m.nu2();
  if (nn >= 1.0) throw MaterialError("nu1 * nu2 must be below 1");
  return {m.E1 / (1.0 - nn), m.E2 / (1.0 - nn), m.G12 / (1.0 - m.nu1)};
}

Mat2 Tensor4::contract(const Mat2& e) const {
  Mat2 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double s = 0;
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) s += (*this)(a, b, c, d) * e(c, d);
      out(a, b) = s;
    }
  return out;
}

double Tensor4::quadratic(const Mat2& e) const { return (contract(e).array() * e.array()).sum(); }

Tensor4 Tensor4::major_symmetrized() const {
  Tensor4 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) out(a, b, c, d) = 0.5 * ((*this)(a, b, c, d) + (*this)(c, d, a, b));
  return out;
}

Tensor4 elasticity_tensor(const Mat2& g, double nu) {
  Tensor4 H;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          H(a, b, c, d) = nu * g(a, b) * g(c, d) + 0.5 * (1.0 - nu) * (g(a, c) * g(b, d) + g(a, d) * g(b, c));
  return H;
}

Tensor4 paper_tensor(const StiffnessCoefficients& k, const Tensor4& H) {
  const double kk[2][2] = {{k.k11, k.k12}, {k.k12, k.k22}};
  Tensor4 C;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) C(a, b, c, d) = kk[a][b] * H(a, b, c, d);
  return C;
}

Tensor4 constitutive_tensor(const Material& m, const SurfaceGeometry& ref) {
  switch (m.mode) {
    case ConstitutiveMode::Isotropic: {
      Tensor4 C = elasticity_tensor(ref.inverse_metric, m.nu1);
      const double f = m.E1 / (1.0 - m.nu1 * m.nu1);
      for (double& x : C.v) x *= f;
      return C;
    }
    case ConstitutiveMode::Paper: {
      const Tensor4 H = elasticity_tensor(ref.inverse_metric, m.nu1);
      return paper_tensor(stiffness_coefficients(m), H).major_symmetrized();
    }
    case ConstitutiveMode::Voigt: {
      const double l1 = ref.a1.norm(), l2 = ref.a2.norm();
      if (std::abs(ref.a1.dot(ref.a2)) > 1e-8 * l1 * l2)
        throw MaterialError("orthotropic constitutive law needs an orthogonal reference basis");
      const StiffnessCoefficients k = stiffness_coefficients(m);
      const double q12 = k.k22 * m.nu1;
      const double len[2] = {l1, l2};
      Tensor4 C;
      C(0, 0, 0, 0) = k.k11;
      C(1, 1, 1, 1) = k.k22;
      C(0, 0, 1, 1) = C(1, 1, 0, 0) = q12;
      C(0, 1, 0, 1) = C(0, 1, 1, 0) = C(1, 0, 0, 1) = C(1, 0, 1, 0) = m.G12;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) C(a, b, c, d) /= len[a] * len[b] * len[c] * len[d];
      return C;
    }
  }
  throw MaterialError("unknown constitutive mode");
}

StressResultants stress_resultants(const StrainState& s, const Tensor4& C, double h) {
  return {h * C.contract(s.membrane), (h * h * h / 12.0) * C.contract(s.bending)};
}

EnergyDensity energy_density(const StrainState& s, const Tensor4& C, double h) {
  return {0.5 * h * C.quadratic(s.membrane), 0.5 * (h * h * h / 12.0) * C.quadratic(s.bending)};
}

}  // namespace orthoshell
