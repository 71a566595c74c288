#include <doctest.h>

#include <random>

#include "orthoshell/bench.hpp"
#include "orthoshell/material.hpp"

using namespace orthoshell;

namespace {

SurfaceGeometry orthonormal_geometry(double l1 = 1, double l2 = 1) {
  SurfaceGeometry g;
  g.a1 = Vec3(l1, 0, 0);
  g.a2 = Vec3(0, l2, 0);
  g.a3 = Vec3::UnitZ();
  g.jacobian = l1 * l2;
  g.metric << l1 * l1, 0, 0, l2 * l2;
  g.inverse_metric = g.metric.inverse();
  g.curvature.setZero();
  return g;
}

Material ortho(ConstitutiveMode mode) {
  Material m;
  m.h = 0.1;
  m.rho = 1;
  m.E1 = 200;
  m.E2 = 50;
  m.nu1 = 0.3;
  m.G12 = 20;
  m.mode = mode;
  return m;
}

Mat2 sym(double a, double b, double c) { return (Mat2() << a, b, b, c).finished(); }

}  // namespace

TEST_CASE("stiffness coefficients") {
  const Material m = ortho(ConstitutiveMode::Voigt);
  CHECK(m.nu2() == doctest::Approx(0.075));
  const StiffnessCoefficients k = stiffness_coefficients(m);
  CHECK(k.k11 == doctest::Approx(200 / (1 - 0.0225)));
  CHECK(k.k22 == doctest::Approx(50 / (1 - 0.0225)));
  CHECK(k.k12 == doctest::Approx(20 / 0.7));
}

TEST_CASE("material validation") {
  Material m = ortho(ConstitutiveMode::Voigt);
  CHECK_NOTHROW(m.validate());
  Material bad = m;
  bad.h = 0;
  CHECK_THROWS_AS(bad.validate(), MaterialError);
  bad = m;
  bad.E2 = -1;
  CHECK_THROWS_AS(bad.validate(), MaterialError);
  bad = m;
  bad.nu1 = 2.5;  // nu1 nu2 = 1.5625
  CHECK_THROWS_AS(bad.validate(), MaterialError);
  bad = m;
  bad.G12 = 0;
  CHECK_THROWS_AS(bad.validate(), MaterialError);
  bad = m;
  bad.d = Vec3(1, 1, 0);
  CHECK_THROWS_AS(bad.validate(), MaterialError);
  bad = m;
  bad.rho = 0;
  CHECK_THROWS_AS(bad.validate(), MaterialError);
  CHECK_THROWS_AS(parse_constitutive_mode("classical"), MaterialError);
  for (auto mode : {ConstitutiveMode::Paper, ConstitutiveMode::Voigt, ConstitutiveMode::Isotropic})
    CHECK(parse_constitutive_mode(to_string(mode)) == mode);
}

TEST_CASE("elasticity tensor symmetries") {
  const Mat2 g = sym(2.0, 0.3, 0.7).inverse();
  const Tensor4 H = elasticity_tensor(g, 0.3);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          CHECK(H(a, b, c, d) == doctest::Approx(H(b, a, c, d)));
          CHECK(H(a, b, c, d) == doctest::Approx(H(c, d, a, b)));
          CHECK(H(a, b, c, d) == doctest::Approx(H(a, b, d, c)));
        }
}

TEST_CASE("Voigt mode equals the classical plane-stress law") {
  const Material m = ortho(ConstitutiveMode::Voigt);
  const Tensor4 C = constitutive_tensor(m, orthonormal_geometry());
  const double nn = 0.3 * 0.075;
  const double Q11 = 200 / (1 - nn), Q22 = 50 / (1 - nn), Q12 = 0.3 * 50 / (1 - nn), Q66 = 20;
  // W = 1/2 (Q11 e11^2 + 2 Q12 e11 e22 + Q22 e22^2 + Q66 gamma^2), gamma = 2 e12
  const Mat2 e = sym(0.01, -0.004, 0.02);
  const double W = 0.5 * (Q11 * e(0, 0) * e(0, 0) + 2 * Q12 * e(0, 0) * e(1, 1) + Q22 * e(1, 1) * e(1, 1) +
                          Q66 * 4 * e(0, 1) * e(0, 1));
  CHECK(0.5 * C.quadratic(e) == doctest::Approx(W).epsilon(1e-14));
  // non-unit but orthogonal basis: components scale with the lengths
  const Tensor4 C2 = constitutive_tensor(m, orthonormal_geometry(2, 0.5));
  CHECK(C2(0, 0, 0, 0) == doctest::Approx(Q11 / 16));
  CHECK(C2(1, 1, 1, 1) == doctest::Approx(Q22 * 16));
  CHECK(C2(0, 1, 0, 1) == doctest::Approx(Q66));
  SurfaceGeometry skew = orthonormal_geometry();
  skew.a2 = Vec3(0.5, 1, 0);
  CHECK_THROWS_AS(constitutive_tensor(m, skew), MaterialError);
}

TEST_CASE("isotropic reduction") {
  const double E = 100, nu = 0.25;
  Material v = ortho(ConstitutiveMode::Voigt);
  v.E1 = v.E2 = E;
  v.nu1 = nu;
  v.G12 = E / (2 * (1 + nu));
  const Material iso = Material::isotropic(E, nu, 0.1);
  CHECK(iso.G12 == doctest::Approx(40));
  const SurfaceGeometry g = orthonormal_geometry(1.5, 0.8);
  const Tensor4 Cv = constitutive_tensor(v, g);
  const Tensor4 Ci = constitutive_tensor(iso, g);
  for (int k = 0; k < 16; ++k) CHECK(Cv.v[k] == doctest::Approx(Ci.v[k]).epsilon(1e-14));
}

TEST_CASE("paper mode: literal products and half shear stiffness") {
  Material m = ortho(ConstitutiveMode::Paper);
  const StiffnessCoefficients k = stiffness_coefficients(m);
  const Tensor4 H = elasticity_tensor(Mat2::Identity(), m.nu1);
  const Tensor4 P = paper_tensor(k, H);
  CHECK(P(0, 0, 0, 0) == doctest::Approx(k.k11));
  CHECK(P(0, 0, 1, 1) == doctest::Approx(k.k11 * m.nu1));
  CHECK(P(1, 1, 0, 0) == doctest::Approx(k.k22 * m.nu1));
  CHECK(P(0, 1, 0, 1) == doctest::Approx(k.k12 * (1 - m.nu1) / 2));
  const Tensor4 C = constitutive_tensor(m, orthonormal_geometry());
  CHECK(C(0, 0, 1, 1) == doctest::Approx(0.5 * (k.k11 + k.k22) * m.nu1));
  CHECK(C(0, 0, 1, 1) == doctest::Approx(C(1, 1, 0, 0)));
  // isotropic limit: shear entry is G/2 where the classical law has G
  m.E1 = m.E2 = 100;
  m.nu1 = 0.25;
  m.G12 = 40;
  const Tensor4 Cp = constitutive_tensor(m, orthonormal_geometry());
  CHECK(Cp(0, 1, 0, 1) == doctest::Approx(20));
  CHECK(Cp(0, 0, 0, 0) == doctest::Approx(100 / (1 - 0.0625)));
}

TEST_CASE("resultants are energy gradients") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (auto mode : {ConstitutiveMode::Paper, ConstitutiveMode::Voigt, ConstitutiveMode::Isotropic}) {
    const Material m = mode == ConstitutiveMode::Isotropic ? Material::isotropic(70, 0.3, 0.2) : ortho(mode);
    const Tensor4 C = constitutive_tensor(m, orthonormal_geometry(1.3, 0.9));
    StrainState s;
    s.membrane = sym(u(rng), u(rng), u(rng));
    s.bending = sym(u(rng), u(rng), u(rng));
    const StressResultants r = stress_resultants(s, C, m.h);
    const double eps = 1e-6;
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b) {
        // symmetric perturbation of the (a, b) component pair
        StrainState p = s, q = s;
        const double w = a == b ? 1.0 : 0.5;
        p.membrane(a, b) += w * eps;
        p.membrane(b, a) += a == b ? 0 : w * eps;
        q.membrane(a, b) -= w * eps;
        q.membrane(b, a) -= a == b ? 0 : w * eps;
        const double dW = (energy_density(p, C, m.h).membrane - energy_density(q, C, m.h).membrane) / (2 * eps);
        const double expect = a == b ? r.membrane(a, a) : r.membrane(a, b);
        CHECK(dW == doctest::Approx(expect).epsilon(1e-7));
      }
  }
}

TEST_CASE("Table 1 materials give positive definite stiffness") {
  for (const auto& row : hemisphere_table()) {
    for (auto mode : {ConstitutiveMode::Paper, ConstitutiveMode::Voigt}) {
      HemisphereCase c;
      c.lambda = row.lambda;
      c.mode = mode;
      const Material m = hemisphere_material(c);
      CHECK_NOTHROW(m.validate());
      CHECK(m.E1 / m.E2 == doctest::Approx(row.lambda).epsilon(1e-3));
      CHECK(m.nu1 * m.E2 == doctest::Approx(0.3 * m.E1));
      const Tensor4 C = constitutive_tensor(m, orthonormal_geometry());
      Eigen::Matrix3d V;
      V << C(0, 0, 0, 0), C(0, 0, 1, 1), C(0, 0, 0, 1), C(1, 1, 0, 0), C(1, 1, 1, 1), C(1, 1, 0, 1), C(0, 1, 0, 0),
          C(0, 1, 1, 1), C(0, 1, 0, 1);
      const Eigen::Matrix3d S = 0.5 * (V + V.transpose());
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(S).eigenvalues().minCoeff() > 0);
    }
  }
  CHECK_THROWS(hemisphere_row(0.7));
}
