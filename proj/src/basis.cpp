#include "orthoshell/basis.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace orthoshell {

namespace {

// Exponents (a, b) of xi^a eta^b.
constexpr std::array<std::array<int, 2>, 15> kMonomials{{{0, 0},
                                                        {0, 1},
                                                        {0, 2},
                                                        {0, 3},
                                                        {0, 4},
                                                        {1, 0},
                                                        {1, 1},
                                                        {1, 2},
                                                        {1, 3},
                                                        {2, 0},
                                                        {2, 1},
                                                        {2, 2},
                                                        {3, 0},
                                                        {3, 1},
                                                        {4, 0}}};

// 24 x polynomial coefficients per canonical slot.
constexpr std::array<std::array<int, 15>, 12> kBoxSpline24{{
    {{12, 0, -24, 16, -2, 0, -24, 24, -4, -24, 24, 0, 16, -4, -2}},  // (0,0)
    {{2, 4, 0, -8, 4, 8, 12, -24, 8, 12, -12, 0, -8, -4, -2}},       // (1,0)
    {{2, 8, 12, -8, -2, 4, 12, -12, -4, 0, -24, 0, -8, 8, 4}},       // (1,1)
    {{2, 4, 0, -8, 4, -4, -12, 0, 8, 0, 12, 0, 4, -4, -2}},          // (0,1)
    {{2, -4, 0, 4, -2, -8, 12, 0, -4, 12, -12, 0, -8, 4, 2}},        // (-1,0)
    {{2, -8, 12, -8, 2, -4, 12, -12, 4, 0, 0, 0, 4, -4, -2}},        // (-1,-1)
    {{2, -4, 0, 4, -2, 4, -12, 12, -4, 0, 0, 0, -8, 8, 4}},          // (0,-1)
    {{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 4, -4, -2}},               // (1,-1)
    {{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 4, 2}},                 // (2,0)
    {{0, 0, 0, 4, -2, 0, 0, 12, -4, 0, 12, 0, 4, -4, -2}},           // (2,1)
    {{0, 0, 0, 0, 2, 0, 0, 0, 4, 0, 0, 0, 0, 0, 0}},                 // (2,2)
    {{0, 0, 0, 4, -2, 0, 0, 0, -4, 0, 0, 0, 0, 0, 0}},               // (1,2)
}};

constexpr double kInsideTol = 1e-12;

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double loop_beta(int n) {
  double c = 3.0 / 8.0 + 0.25 * std::cos(2.0 * std::numbers::pi / n);
  return (5.0 / 8.0 - c * c) / n;
}

}  // namespace

ShapeTable ShapeTable::zero(Eigen::Index size) {
  ShapeTable t;
  t.n = t.d1 = t.d2 = t.d11 = t.d22 = t.d12 = Eigen::VectorXd::Zero(size);
  return t;
}

QuadraturePoint quadrature_rule() { return {1.0 / 3.0, 1.0 / 3.0, 0.5}; }

ShapeTable box_spline_regular(double xi, double eta) {
  if (!(xi >= -kInsideTol && eta >= -kInsideTol && xi + eta <= 1.0 + kInsideTol))
    throw BasisError("point (" + std::to_string(xi) + ", " + std::to_string(eta) + ") outside the master triangle");
  ShapeTable t = ShapeTable::zero(12);
  for (int s = 0; s < 12; ++s) {
    double v = 0, d1 = 0, d2 = 0, d11 = 0, d22 = 0, d12 = 0;
    for (int k = 0; k < 15; ++k) {
      const double c = kBoxSpline24[s][k];
      if (c == 0) continue;
      const int a = kMonomials[k][0], b = kMonomials[k][1];
      v += c * ipow(xi, a) * ipow(eta, b);
      if (a >= 1) d1 += c * a * ipow(xi, a - 1) * ipow(eta, b);
      if (b >= 1) d2 += c * b * ipow(xi, a) * ipow(eta, b - 1);
      if (a >= 2) d11 += c * a * (a - 1) * ipow(xi, a - 2) * ipow(eta, b);
      if (b >= 2) d22 += c * b * (b - 1) * ipow(xi, a) * ipow(eta, b - 2);
      if (a >= 1 && b >= 1) d12 += c * a * b * ipow(xi, a - 1) * ipow(eta, b - 1);
    }
    t.n[s] = v / 24.0;
    t.d1[s] = d1 / 24.0;
    t.d2[s] = d2 / 24.0;
    t.d11[s] = d11 / 24.0;
    t.d22[s] = d22 / 24.0;
    t.d12[s] = d12 / 24.0;
  }
  return t;
}

Eigen::MatrixXd central_child_matrix(int n) {
  if (n < 3) throw BasisError("vertex valence " + std::to_string(n) + " below 3");
  const int size = n + 6;
  // Parent slots: v1 ring entry k (k = 0..n-1) sits in slot k + 1.
  const int v1 = 0, v2 = 1, v3 = 2, r2 = 3, w12 = n, x = n + 1, y = n + 2, z = n + 3, p = n + 4, q = n + 5;
  auto ring = [n](int k) { return (k % n) + 1; };

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(12, size);
  auto odd = [&](int row, int a, int b, int c, int d) {
    s(row, a) += 3.0 / 8.0;
    s(row, b) += 3.0 / 8.0;
    s(row, c) += 1.0 / 8.0;
    s(row, d) += 1.0 / 8.0;
  };
  auto even = [&](int row, int v, std::initializer_list<int> nbrs) {
    const double beta = loop_beta(static_cast<int>(nbrs.size()));
    s(row, v) += 1.0 - beta * static_cast<double>(nbrs.size());
    for (int m : nbrs) s(row, m) += beta;
  };

  odd(0, v1, v2, v3, w12);
  odd(1, v2, v3, v1, z);
  odd(2, v3, v1, v2, r2);
  {
    const double beta = loop_beta(n);
    s(3, v1) = 1.0 - n * beta;
    for (int k = 0; k < n; ++k) s(3, ring(k)) += beta;
  }
  odd(4, v1, w12, v2, ring(n - 2));
  odd(5, v2, w12, v1, x);
  even(6, v2, {v3, v1, w12, x, y, z});
  odd(7, v2, z, v3, y);
  odd(8, v3, z, v2, p);
  even(9, v3, {v1, v2, z, p, q, r2});
  odd(10, v3, r2, v1, q);
  odd(11, v1, r2, v3, ring(3));
  return s;
}

ShapeTable eval_irregular(int valence, double xi, double eta, int max_depth) {
  if (max_depth < 1) throw BasisError("irregular evaluation needs at least one subdivision step");
  // Central child coordinates.
  const double xc = 2.0 * eta - 1.0 + 2.0 * xi;
  const double ec = 1.0 - 2.0 * xi;
  if (!(xc >= -kInsideTol && ec >= -kInsideTol && xc + ec <= 1.0 + kInsideTol))
    throw BasisError("point (" + std::to_string(xi) + ", " + std::to_string(eta) +
                     ") is not in the central sub-triangle of an irregular patch");
  const ShapeTable child = box_spline_regular(xc, ec);
  const Eigen::MatrixXd s = central_child_matrix(valence);

  // d/dxi = 2 d/dxc - 2 d/dec, d/deta = 2 d/dxc.
  ShapeTable t;
  t.n = s.transpose() * child.n;
  const Eigen::VectorXd g1 = s.transpose() * child.d1;
  const Eigen::VectorXd g2 = s.transpose() * child.d2;
  const Eigen::VectorXd h11 = s.transpose() * child.d11;
  const Eigen::VectorXd h22 = s.transpose() * child.d22;
  const Eigen::VectorXd h12 = s.transpose() * child.d12;
  t.d1 = 2.0 * g1 - 2.0 * g2;
  t.d2 = 2.0 * g1;
  t.d11 = 4.0 * h11 - 8.0 * h12 + 4.0 * h22;
  t.d22 = 4.0 * h11;
  t.d12 = 4.0 * h11 - 4.0 * h12;
  return t;
}

ShapeTable patch_table(const OneRing& ring, double xi, double eta) {
  if (ring.regular()) {
    if (ring.size() != 12) throw BasisError("regular patch must have 12 slots");
    return box_spline_regular(xi, eta);
  }
  if (static_cast<int>(ring.size()) != ring.irregular_valence + 6)
    throw BasisError("irregular patch size does not match its valence");
  return eval_irregular(ring.irregular_valence, xi, eta);
}

ShapeTable collapse(const ShapeTable& t, const PatchExpansion& e) {
  if (e.weights.rows() != t.size()) throw BasisError("expansion does not match the shape table");
  const Eigen::MatrixXd wt = e.weights.transpose();
  return {wt * t.n, wt * t.d1, wt * t.d2, wt * t.d11, wt * t.d22, wt * t.d12};
}

}  // namespace orthoshell
