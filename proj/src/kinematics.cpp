#include "orthoshell/kinematics.hpp"

#include <string>

namespace orthoshell {

SurfaceGeometry surface_geometry(const ShapeTable& t, const NodeMatrix& x) {
  if (x.cols() != t.size()) throw KinematicsError("node count does not match the shape table");
  SurfaceGeometry g;
  g.a1 = x * t.d1;
  g.a2 = x * t.d2;
  g.a11 = x * t.d11;
  g.a22 = x * t.d22;
  g.a12 = x * t.d12;
  const Vec3 c = g.a1.cross(g.a2);
  g.jacobian = c.norm();
  if (!(g.jacobian >= 1e-12 * g.a1.norm() * g.a2.norm()) || g.jacobian == 0.0)
    throw KinematicsError("degenerate surface element (J = " + std::to_string(g.jacobian) + ")");
  g.a3 = c / g.jacobian;
  g.metric << g.a1.dot(g.a1), g.a1.dot(g.a2), g.a2.dot(g.a1), g.a2.dot(g.a2);
  g.inverse_metric = g.metric.inverse();
  g.curvature << g.a3.dot(g.a11), g.a3.dot(g.a12), g.a3.dot(g.a12), g.a3.dot(g.a22);
  return g;
}

NodeMatrix gather(const std::vector<int>& nodes, const std::vector<Vec3>& positions,
                  const Eigen::VectorXd* u) {
  NodeMatrix x(3, static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    Vec3 p = positions[nodes[k]];
    if (u) p += u->segment<3>(3 * nodes[k]);
    x.col(static_cast<Eigen::Index>(k)) = p;
  }
  return x;
}

StrainState strains(const SurfaceGeometry& ref, const SurfaceGeometry& def) {
  StrainState s;
  s.membrane = 0.5 * (def.metric - ref.metric);
  s.bending = ref.curvature - def.curvature;
  return s;
}

Mat2 curvature_from_normal_derivative(const SurfaceGeometry& g) {
  // d(a3)/d(xi_beta) = P (a_{1,beta} x a2 + a1 x a_{2,beta}) / J with
  // P = I - a3 a3^T.
  const Eigen::Matrix3d proj = Eigen::Matrix3d::Identity() - g.a3 * g.a3.transpose();
  auto dnormal = [&](const Vec3& a1b, const Vec3& a2b) -> Vec3 {
    return proj * (a1b.cross(g.a2) + g.a1.cross(a2b)) / g.jacobian;
  };
  const Vec3 n1 = dnormal(g.a11, g.a12);
  const Vec3 n2 = dnormal(g.a12, g.a22);
  Mat2 b;
  b << -g.a1.dot(n1), -g.a1.dot(n2), -g.a2.dot(n1), -g.a2.dot(n2);
  return b;
}

}  // namespace orthoshell
