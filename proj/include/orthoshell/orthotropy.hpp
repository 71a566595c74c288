#pragma once

#include <array>
#include <stdexcept>

#include <Eigen/Dense>

#include "orthoshell/kinematics.hpp"

namespace orthoshell {

class OrthotropyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Result of aligning one element's reference basis with the preferred
/// direction.
struct TransformRecord {
  Vec3 a1_hat;       // tangent projection of d
  Vec3 a2_hat;       // a3 x a1_hat
  double theta{};    // angle between a1_hat and the original a1
  Vec3 a1_new;       // rescaled orthogonal basis
  Vec3 a2_new;
  Mat2 T;            // a_new_beta = sum_alpha T(alpha, beta) a_alpha
  ShapeTable table;  // transformed derivatives
};

/// d - (d . a3) a3. Throws OrthotropyError when the result is shorter than
/// 1e-8 (d parallel to the normal).
Vec3 project_direction(const Vec3& d, const Vec3& a3);

Vec3 perpendicular_direction(const Vec3& a3, const Vec3& a1_hat);

/// Angle in [0, pi] between a1_hat and a1 from a two-argument arctangent.
double basis_angle(const Vec3& a1_hat, const Vec3& a1);

/// Scales the directions of a1_hat and a2_hat so that the new basis keeps
/// the lengths ratio of the original one and |a1' x a2'| = J. For an
/// orthogonal original basis a1' and a2' inherit |a1| and |a2| exactly.
/// Throws OrthotropyError when the original basis is degenerate
/// (sine of its angle below 1e-10).
std::array<Vec3, 2> rescale_basis(const Vec3& a1_hat, const Vec3& a2_hat, const Vec3& a1, const Vec3& a2,
                                  double jacobian);

/// Full 3x3 map A^{-1} A' with A = [a1 a2 a3], A' = [a1' a2' a3].
Eigen::Matrix3d build_transform(const Vec3& a1, const Vec3& a2, const Vec3& a3, const Vec3& a1_new,
                                const Vec3& a2_new);

/// N'_{,beta} = T_{alpha beta} N_{,alpha};  H' = T^T H T.
ShapeTable transform_shape_table(const ShapeTable& table, const Mat2& T);

/// Complete reference-configuration pipeline for one element. `table` and
/// `x` are the element's (collapsed) shape table and node positions.
TransformRecord setup_element_orthotropy(const ShapeTable& table, const NodeMatrix& x, const Vec3& d,
                                         int element = -1);

}  // namespace orthoshell
