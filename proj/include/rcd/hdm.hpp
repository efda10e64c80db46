#pragma once

#include "rcd/geometry.hpp"
#include "rcd/refnet.hpp"

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

namespace rcd {

/// Affine map r = Q r0 + d relating reference and current configurations.
struct HomogeneousTransform {
  Eigen::Matrix3d Q = Eigen::Matrix3d::Identity();
  Position3 d = Position3::Zero();
  /// Singular values of Q. For n = 3 sorted descending; for n = 2 the two
  /// in-plane values sorted descending followed by the out-of-plane gain (1).
  std::array<double, 3> singular_values{1.0, 1.0, 1.0};

  Position3 apply(const Position3& r0) const { return Q * r0 + d; }
  double min_singular_value() const;
};

/// Fits the homogeneous transform carrying the leaders' reference simplex
/// onto their current positions. For n = 2 the reference plane normal is
/// mapped onto the current plane normal with unit gain.
HomogeneousTransform fit_homogeneous_transform(std::span<const Position3> leader_ref,
                                               std::span<const Position3> leader_current, int n);

/// Followers' global desired positions W_L * leader positions, one per W_L row.
std::vector<Position3> global_desired_positions(std::span<const Position3> leader_desired,
                                                const Eigen::MatrixXd& W_L);

/// Weighted sum of in-neighbor actual positions.
Position3 local_desired_position(std::span<const Position3> neighbor_actual,
                                 std::span<const double> weights);

/// Local desired position of `id` in the network: a leader returns its own
/// global desired position, a follower the weighted sum of its in-neighbors.
/// Throws CommunicationError when a neighbor position is missing.
Position3 local_desired_position(const ReferenceConfiguration& config, AgentId id,
                                 const PositionMap& actual, const PositionMap& global_desired);

/// Per-axis error vectors (columns x, y, z).
struct HdmErrors {
  Eigen::MatrixXd local_follower;    // E_d^F = P_d^F - P^F
  Eigen::MatrixXd global_follower;   // E_c^F = P_c^F - P^F
  Eigen::MatrixXd global_leader;     // E_c^L = P_c^L - P^L
};

/// Error vectors from actual leader/follower positions (rows ordered as
/// config.leaders / config.followers) and the leaders' global desired positions.
HdmErrors error_vectors(const ReferenceConfiguration& config, const Eigen::MatrixXd& leader_actual,
                        const Eigen::MatrixXd& follower_actual,
                        const Eigen::MatrixXd& leader_desired);

struct SafetyMargin {
  double threshold = 0.0;
  bool satisfied = false;
};

/// threshold = (Delta + eps) / (d_min / 2 + eps); satisfied iff the smallest
/// singular value reaches it.
SafetyMargin collision_safety_margin(const HomogeneousTransform& transform, double delta,
                                     double epsilon, double d_min);

}  // namespace rcd
