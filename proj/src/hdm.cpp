#include "rcd/hdm.hpp"

#include "rcd/errors.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <string>

namespace rcd {

double HomogeneousTransform::min_singular_value() const {
  return *std::min_element(singular_values.begin(), singular_values.end());
}

HomogeneousTransform fit_homogeneous_transform(std::span<const Position3> leader_ref,
                                               std::span<const Position3> leader_current, int n) {
  if (n != 2 && n != 3) throw ArgumentError("dimension must be 2 or 3");
  if (static_cast<int>(leader_ref.size()) != n + 1 ||
      static_cast<int>(leader_current.size()) != n + 1) {
    throw ArgumentError("need n+1 leader positions");
  }
  if (rank_simplex(leader_ref, n) != n) {
    throw DegeneracyError("leader reference positions are degenerate");
  }

  Eigen::Matrix3d ref_frame;
  Eigen::Matrix3d cur_frame;
  for (int k = 0; k < n; ++k) {
    ref_frame.col(k) = leader_ref[k + 1] - leader_ref[0];
    cur_frame.col(k) = leader_current[k + 1] - leader_current[0];
  }
  if (n == 2) {
    ref_frame.col(2) = ref_frame.col(0).cross(ref_frame.col(1)).normalized();
    const Position3 cur_normal = cur_frame.col(0).cross(cur_frame.col(1));
    const double len = cur_normal.norm();
    // A collapsed current triangle keeps the reference normal so Q stays
    // defined; its in-plane singular values expose the collapse.
    cur_frame.col(2) = len > 0.0 ? Position3(cur_normal / len) : Position3(ref_frame.col(2));
  }

  HomogeneousTransform out;
  out.Q = cur_frame * ref_frame.inverse();
  out.d = leader_current[0] - out.Q * leader_ref[0];

  if (n == 3) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(out.Q);
    const auto& sv = svd.singularValues();
    out.singular_values = {sv[0], sv[1], sv[2]};
  } else {
    // Restrict Q to the reference plane: orthonormal in-plane basis.
    const Position3 e1 = ref_frame.col(0).normalized();
    const Position3 e2 = ref_frame.col(2).cross(e1);
    Eigen::Matrix<double, 3, 2> basis;
    basis << e1, e2;
    Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(out.Q * basis);
    const auto& sv = svd.singularValues();
    out.singular_values = {sv[0], sv[1], 1.0};
  }
  return out;
}

std::vector<Position3> global_desired_positions(std::span<const Position3> leader_desired,
                                                const Eigen::MatrixXd& W_L) {
  if (W_L.cols() != static_cast<Eigen::Index>(leader_desired.size())) {
    throw ArgumentError("W_L column count does not match leader count");
  }
  std::vector<Position3> out(static_cast<std::size_t>(W_L.rows()), Position3::Zero());
  for (Eigen::Index r = 0; r < W_L.rows(); ++r) {
    for (Eigen::Index k = 0; k < W_L.cols(); ++k) {
      out[r] += W_L(r, k) * leader_desired[k];
    }
  }
  return out;
}

Position3 local_desired_position(std::span<const Position3> neighbor_actual,
                                 std::span<const double> weights) {
  if (neighbor_actual.size() != weights.size()) {
    throw CommunicationError("neighbor positions and weights differ in length");
  }
  Position3 out = Position3::Zero();
  for (std::size_t k = 0; k < weights.size(); ++k) out += weights[k] * neighbor_actual[k];
  return out;
}

Position3 local_desired_position(const ReferenceConfiguration& config, AgentId id,
                                 const PositionMap& actual, const PositionMap& global_desired) {
  if (config.is_leader(id)) {
    auto it = global_desired.find(id);
    if (it == global_desired.end()) {
      throw CommunicationError("no desired position for leader " + std::to_string(id));
    }
    return it->second;
  }
  auto nb = config.in_neighbors.find(id);
  if (nb == config.in_neighbors.end()) {
    throw CommunicationError("agent " + std::to_string(id) + " is not in the network");
  }
  std::vector<Position3> pts;
  pts.reserve(nb->second.size());
  for (AgentId j : nb->second) {
    auto it = actual.find(j);
    if (it == actual.end()) {
      throw CommunicationError("agent " + std::to_string(id) + " lost in-neighbor " +
                               std::to_string(j));
    }
    pts.push_back(it->second);
  }
  return local_desired_position(pts, config.weights.at(id));
}

HdmErrors error_vectors(const ReferenceConfiguration& config, const Eigen::MatrixXd& leader_actual,
                        const Eigen::MatrixXd& follower_actual,
                        const Eigen::MatrixXd& leader_desired) {
  const auto& m = config.matrices;
  if (leader_actual.rows() != m.B.cols() || leader_desired.rows() != m.B.cols() ||
      follower_actual.rows() != m.A.rows() || leader_actual.cols() != 3 ||
      follower_actual.cols() != 3 || leader_desired.cols() != 3) {
    throw ArgumentError("error_vectors: dimension mismatch");
  }
  HdmErrors out;
  out.local_follower = m.D * follower_actual + m.B * leader_actual;
  out.global_leader = leader_desired - leader_actual;
  out.global_follower = m.W_L * leader_desired - follower_actual;
  return out;
}

SafetyMargin collision_safety_margin(const HomogeneousTransform& transform, double delta,
                                     double epsilon, double d_min) {
  if (!(epsilon > 0.0) || !(d_min > 0.0) || !(delta >= 0.0)) {
    throw ArgumentError("collision margin needs delta >= 0, epsilon > 0, d_min > 0");
  }
  SafetyMargin out;
  out.threshold = (delta + epsilon) / (d_min / 2.0 + epsilon);
  out.satisfied = transform.min_singular_value() >= out.threshold;
  return out;
}

}  // namespace rcd
