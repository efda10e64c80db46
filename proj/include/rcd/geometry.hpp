#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>

namespace rcd {

/// Position or velocity in the 3-D motion space (meters, meters/second).
using Position3 = Eigen::Vector3d;

/// Relative threshold on singular values used by the rank test.
inline constexpr double kRankTolerance = 1e-9;
/// A weight must exceed this to count as strictly inside.
inline constexpr double kStrictInsideTolerance = 1e-12;

/// Output of the Lambda operator: weights of a query point with respect to
/// the four vertices of a (possibly virtual) tetrahedron. Entries sum to 1.
struct LambdaWeights {
  Eigen::Vector4d values = Eigen::Vector4d::Zero();

  double operator[](int k) const { return values[k]; }
  double sum() const { return values.sum(); }

  /// True iff the first `count` entries all exceed `threshold`.
  bool all_above(double threshold, int count = 4) const;
  bool strictly_inside(int count = 4) const {
    return all_above(kStrictInsideTolerance, count);
  }
};

/// Numerical rank of [p2-p1 ... p_{n+1}-p1]. Requires exactly n+1 points and
/// n in {2, 3}; throws ArgumentError otherwise.
int rank_simplex(std::span<const Position3> points, int n);

/// Unit normal (p3-p1) x (p2-p1) / |...|. Throws DegeneracyError on collinear input.
Position3 plane_normal(const Position3& p1, const Position3& p2, const Position3& p3);

/// p1 + xi * ((p3-p1) x (p2-p1)): a point off the triangle's plane that
/// completes it to a tetrahedron.
Position3 virtual_fourth_point(const Position3& p1, const Position3& p2, const Position3& p3,
                               double xi = 1.0);

/// Orthogonal projection of c onto the plane through p1, p2, p3.
Position3 project_to_plane(const Position3& c, const Position3& p1, const Position3& p2,
                           const Position3& p3);

/// Solves [p1 p2 p3 p4; 1 1 1 1] lambda = [c; 1].
/// Throws DegeneracyError when the tetrahedron is degenerate.
LambdaWeights barycentric_lambda(const Position3& p1, const Position3& p2, const Position3& p3,
                                 const Position3& p4, const Position3& c);

/// Lambda operator for an n-simplex (n+1 vertices). For n = 2 the fourth
/// vertex is virtual and the query is projected onto the triangle plane, so
/// the fourth weight is zero and the first three are planar barycentric
/// coordinates.
LambdaWeights lambda_nd(std::span<const Position3> simplex, const Position3& c, int n,
                        double xi = 1.0);

/// Area (n = 2) or volume (n = 3) of the simplex.
double simplex_measure(std::span<const Position3> simplex, int n);

}  // namespace rcd
