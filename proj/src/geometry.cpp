#include "rcd/geometry.hpp"

#include "rcd/errors.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <array>
#include <string>

namespace rcd {

namespace {

void require_dimension(int n) {
  if (n != 2 && n != 3) {
    throw ArgumentError("simplex dimension must be 2 or 3, got " + std::to_string(n));
  }
}

Position3 raw_normal(const Position3& p1, const Position3& p2, const Position3& p3) {
  return (p3 - p1).cross(p2 - p1);
}

void require_triangle(const Position3& p1, const Position3& p2, const Position3& p3) {
  const std::array<Position3, 3> pts{p1, p2, p3};
  if (rank_simplex(pts, 2) != 2) {
    throw DegeneracyError("points are collinear or coincident");
  }
}

}  // namespace

bool LambdaWeights::all_above(double threshold, int count) const {
  for (int k = 0; k < count; ++k) {
    if (!(values[k] > threshold)) return false;
  }
  return true;
}

int rank_simplex(std::span<const Position3> points, int n) {
  require_dimension(n);
  if (static_cast<int>(points.size()) != n + 1) {
    throw ArgumentError("rank_simplex expects " + std::to_string(n + 1) + " points, got " +
                        std::to_string(points.size()));
  }
  Eigen::Matrix<double, 3, Eigen::Dynamic> diff(3, n);
  for (int k = 0; k < n; ++k) diff.col(k) = points[k + 1] - points[0];
  if (!diff.allFinite()) throw ArgumentError("non-finite point");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff);
  const auto& sv = svd.singularValues();
  const double largest = sv.size() > 0 ? sv[0] : 0.0;
  if (largest <= 0.0) return 0;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > kRankTolerance * largest) ++rank;
  }
  return rank;
}

Position3 plane_normal(const Position3& p1, const Position3& p2, const Position3& p3) {
  require_triangle(p1, p2, p3);
  return raw_normal(p1, p2, p3).normalized();
}

Position3 virtual_fourth_point(const Position3& p1, const Position3& p2, const Position3& p3,
                               double xi) {
  if (xi == 0.0) throw DegeneracyError("virtual point scale must be nonzero");
  require_triangle(p1, p2, p3);
  return p1 + xi * raw_normal(p1, p2, p3);
}

Position3 project_to_plane(const Position3& c, const Position3& p1, const Position3& p2,
                           const Position3& p3) {
  const Position3 normal = plane_normal(p1, p2, p3);
  return c - (c - p1).dot(normal) * normal;
}

LambdaWeights barycentric_lambda(const Position3& p1, const Position3& p2, const Position3& p3,
                                 const Position3& p4, const Position3& c) {
  const std::array<Position3, 4> pts{p1, p2, p3, p4};
  if (rank_simplex(pts, 3) != 3) {
    throw DegeneracyError("tetrahedron is degenerate");
  }
  Eigen::Matrix4d system;
  for (int k = 0; k < 4; ++k) {
    system.block<3, 1>(0, k) = pts[k];
    system(3, k) = 1.0;
  }
  Eigen::Vector4d rhs;
  rhs << c, 1.0;
  LambdaWeights out;
  out.values = system.fullPivLu().solve(rhs);
  if (!out.values.allFinite()) throw DegeneracyError("singular Lambda system");
  return out;
}

LambdaWeights lambda_nd(std::span<const Position3> simplex, const Position3& c, int n,
                        double xi) {
  require_dimension(n);
  if (static_cast<int>(simplex.size()) != n + 1) {
    throw ArgumentError("lambda_nd expects " + std::to_string(n + 1) + " vertices");
  }
  if (n == 3) return barycentric_lambda(simplex[0], simplex[1], simplex[2], simplex[3], c);

  const Position3 virtual_point = virtual_fourth_point(simplex[0], simplex[1], simplex[2], xi);
  const Position3 projected = project_to_plane(c, simplex[0], simplex[1], simplex[2]);
  return barycentric_lambda(simplex[0], simplex[1], simplex[2], virtual_point, projected);
}

double simplex_measure(std::span<const Position3> simplex, int n) {
  require_dimension(n);
  if (static_cast<int>(simplex.size()) != n + 1) {
    throw ArgumentError("simplex_measure expects " + std::to_string(n + 1) + " vertices");
  }
  const Position3 e1 = simplex[1] - simplex[0];
  const Position3 e2 = simplex[2] - simplex[0];
  if (n == 2) return 0.5 * e1.cross(e2).norm();
  return std::abs(e1.cross(e2).dot(simplex[3] - simplex[0])) / 6.0;
}

}  // namespace rcd
