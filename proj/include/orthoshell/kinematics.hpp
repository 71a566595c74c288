#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "orthoshell/basis.hpp"

namespace orthoshell {

using Mat2 = Eigen::Matrix2d;
/// Node positions, one column per shape-table entry.
using NodeMatrix = Eigen::Matrix<double, 3, Eigen::Dynamic>;

class KinematicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Surface quantities at one quadrature point.
struct SurfaceGeometry {
  Vec3 a1, a2;        // covariant basis
  Vec3 a3;            // unit normal
  double jacobian{};  // |a1 x a2|
  Vec3 a11, a22, a12; // basis derivatives a_{alpha,beta}
  Mat2 metric;        // a_{alpha beta}
  Mat2 inverse_metric;
  Mat2 curvature;     // b_{alpha beta} = a3 . a_{alpha,beta}
};

/// Membrane strain alpha = (a - a_ref)/2 and bending strain
/// beta = b_ref - b, in the parametric basis of the table.
struct StrainState {
  Mat2 membrane = Mat2::Zero();
  Mat2 bending = Mat2::Zero();
};

/// Throws KinematicsError when |a1 x a2| < 1e-12 |a1||a2|.
SurfaceGeometry surface_geometry(const ShapeTable& table, const NodeMatrix& x);

/// Gathers mesh node positions (plus optional displacements) for the given
/// node list into a NodeMatrix.
NodeMatrix gather(const std::vector<int>& nodes, const std::vector<Vec3>& positions,
                  const Eigen::VectorXd* displacement = nullptr);

StrainState strains(const SurfaceGeometry& ref, const SurfaceGeometry& def);

/// Shape-tensor coefficients from the derivative of the normal,
/// b_{alpha beta} = -a_alpha . a3_{,beta}, with the normal derivative
/// obtained by differentiating a3 = a1 x a2 / J analytically. Diagnostic
/// counterpart of SurfaceGeometry::curvature.
Mat2 curvature_from_normal_derivative(const SurfaceGeometry& g);

}  // namespace orthoshell
