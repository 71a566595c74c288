#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "orthoshell/mesh.hpp"

namespace orthoshell {

class BasisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape-function values and parametric derivatives at one point, one entry
/// per patch slot (or per real node after collapse()).
struct ShapeTable {
  Eigen::VectorXd n;
  Eigen::VectorXd d1;   // d/dxi
  Eigen::VectorXd d2;   // d/deta
  Eigen::VectorXd d11;
  Eigen::VectorXd d22;
  Eigen::VectorXd d12;

  static ShapeTable zero(Eigen::Index size);
  Eigen::Index size() const { return n.size(); }
};

struct QuadraturePoint {
  double xi;
  double eta;
  double weight;  // dA = J * weight
};

/// Single-point rule at the barycentre of the master triangle
/// (0,0), (1,0), (0,1).
QuadraturePoint quadrature_rule();

/// Quartic box-spline basis of a regular patch in canonical slot order.
/// (xi, eta) must lie in the closed master triangle.
ShapeTable box_spline_regular(double xi, double eta);

/// Linear map from the n + 6 slots of a patch whose vertex v1 has valence n to
/// the 12 slots of its central child patch (m12, m23, m31) after one Loop
/// step. The child patch is regular and its slots follow the canonical order.
Eigen::MatrixXd central_child_matrix(int valence);

/// Limit-surface basis of a patch whose slot-0 vertex has the given valence.
/// The point is pulled back into the central child patch, where the
/// box-spline applies; evaluation stops at the first regular child, so any
/// max_depth >= 1 gives the same result. Points outside the central child
/// throw BasisError.
ShapeTable eval_irregular(int valence, double xi, double eta, int max_depth = 8);

/// Dispatches on ring.regular(). The result is indexed by patch slot.
ShapeTable patch_table(const OneRing& ring, double xi, double eta);

/// Folds ghost slots onto the real nodes: result = weights^T * table.
ShapeTable collapse(const ShapeTable& table, const PatchExpansion& expansion);

}  // namespace orthoshell
