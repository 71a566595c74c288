#include "orthoshell/orthotropy.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

namespace orthoshell {

Vec3 project_direction(const Vec3& d, const Vec3& a3) {
  Vec3 p = d - d.dot(a3) * a3;
  if (p.norm() < 1e-8) throw OrthotropyError("preferred direction is parallel to the surface normal");
  return p;
}

Vec3 perpendicular_direction(const Vec3& a3, const Vec3& a1_hat) { return a3.cross(a1_hat); }

double basis_angle(const Vec3& a1_hat, const Vec3& a1) {
  return std::atan2(a1_hat.cross(a1).norm(), a1_hat.dot(a1));
}

std::array<Vec3, 2> rescale_basis(const Vec3& a1_hat, const Vec3& a2_hat, const Vec3& a1, const Vec3& a2,
                                  double jacobian) {
  const double l1 = a1.norm(), l2 = a2.norm();
  const double sin12 = jacobian / (l1 * l2);
  if (!(sin12 >= 1e-10)) throw OrthotropyError("degenerate element basis");
  const double s = std::sqrt(sin12);
  return {a1_hat.normalized() * (l1 * s), a2_hat.normalized() * (l2 * s)};
}

Eigen::Matrix3d build_transform(const Vec3& a1, const Vec3& a2, const Vec3& a3, const Vec3& a1_new,
                                const Vec3& a2_new) {
  Eigen::Matrix3d a, an;
  a << a1, a2, a3;
  an << a1_new, a2_new, a3;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
  if (!lu.isInvertible()) throw OrthotropyError("singular element basis");
  return lu.solve(an);
}

ShapeTable transform_shape_table(const ShapeTable& t, const Mat2& T) {
  ShapeTable out;
  out.n = t.n;
  out.d1 = T(0, 0) * t.d1 + T(1, 0) * t.d2;
  out.d2 = T(0, 1) * t.d1 + T(1, 1) * t.d2;
  // H' = T^T H T per node; the table stores one mixed derivative, so
  // symmetry holds on both sides by construction.
  const Eigen::VectorXd& d12 = t.d12;
  out.d11 = T(0, 0) * T(0, 0) * t.d11 + 2.0 * T(0, 0) * T(1, 0) * d12 + T(1, 0) * T(1, 0) * t.d22;
  out.d22 = T(0, 1) * T(0, 1) * t.d11 + 2.0 * T(0, 1) * T(1, 1) * d12 + T(1, 1) * T(1, 1) * t.d22;
  out.d12 = T(0, 0) * T(0, 1) * t.d11 + (T(0, 0) * T(1, 1) + T(1, 0) * T(0, 1)) * d12 +
            T(1, 0) * T(1, 1) * t.d22;
  return out;
}

TransformRecord setup_element_orthotropy(const ShapeTable& table, const NodeMatrix& x, const Vec3& d,
                                         int element) {
  try {
    const SurfaceGeometry g = surface_geometry(table, x);
    TransformRecord r;
    r.a1_hat = project_direction(d, g.a3);
    r.a2_hat = perpendicular_direction(g.a3, r.a1_hat);
    r.theta = basis_angle(r.a1_hat, g.a1);
    auto [n1, n2] = rescale_basis(r.a1_hat, r.a2_hat, g.a1, g.a2, g.jacobian);
    r.a1_new = n1;
    r.a2_new = n2;
    const Eigen::Matrix3d full = build_transform(g.a1, g.a2, g.a3, n1, n2);
    r.T = full.topLeftCorner<2, 2>();
    r.table = transform_shape_table(table, r.T);
    return r;
  } catch (const std::runtime_error& e) {
    if (element < 0) throw;
    throw OrthotropyError("element " + std::to_string(element) + ": " + e.what());
  }
}

}  // namespace orthoshell
