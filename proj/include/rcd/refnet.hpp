#pragma once

#include "rcd/geometry.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace rcd {

using AgentId = int;
using PositionMap = std::map<AgentId, Position3>;

/// Default admissibility threshold: 0.1 for n = 2, 0.05 for n = 3.
double default_rho(int n);

struct BoundaryPartition {
  std::set<AgentId> boundary;
  std::set<AgentId> interior;
};

/// Agent i is interior iff some (n+1)-subset of the other agents encloses it
/// with every (planar) Lambda weight above rho; all other agents are boundary.
BoundaryPartition classify_boundary_interior(const PositionMap& positions, int n, double rho,
                                             double xi = 1.0);

/// Returns `override_ids` after validation, or the n+1 boundary agents
/// spanning the largest area (n = 2) / volume (n = 3), lowest id tuple on ties.
std::vector<AgentId> select_leaders(const std::set<AgentId>& boundary,
                                    const PositionMap& positions, int n,
                                    const std::optional<std::vector<AgentId>>& override_ids = {});

/// In-neighbors of interior follower h: the admissible simplex with the
/// smallest summed distance to h, as ids sorted ascending. The candidate
/// pool starts at the `pool` nearest agents and grows until the minimum is
/// provably global. Throws ConnectivityError when no admissible simplex exists.
std::vector<AgentId> find_in_neighbors(AgentId h, const PositionMap& positions, double rho, int n,
                                       double xi = 1.0, std::size_t pool = 8);

/// First n+1 entries of the Lambda operator of follower i against its
/// in-neighbors' reference positions.
std::vector<double> communication_weights(AgentId i, std::span<const AgentId> neighbors,
                                          const PositionMap& positions, int n, double xi = 1.0);

struct WeightMatrices {
  Eigen::MatrixXd W;    // followers x (leaders ++ followers)
  Eigen::MatrixXd B;    // leader columns
  Eigen::MatrixXd A;    // follower columns
  Eigen::MatrixXd D;    // A - I
  Eigen::MatrixXd W_L;  // -D^-1 B
};

/// Assembles W and its partition. Rows follow `followers`, columns list
/// `leaders` then `followers`. Throws NetworkError when D is singular or not
/// Hurwitz.
WeightMatrices build_weight_matrices(std::span<const AgentId> leaders,
                                     std::span<const AgentId> followers,
                                     const std::map<AgentId, std::vector<AgentId>>& in_neighbors,
                                     const std::map<AgentId, std::vector<double>>& weights);

struct DeviationBound {
  double xi_max = 0.0;
  double delta = 0.0;
};

/// Xi_max = max_l (-sum_j Dinv_lj + sum_j B_lj), Delta = Xi_max * |(dx, dy, dz)|.
DeviationBound deviation_bound(const Eigen::MatrixXd& D, const Eigen::MatrixXd& B, double dx,
                               double dy, double dz);

double min_pairwise_distance(const PositionMap& positions);

struct NetworkOptions {
  int n = 2;
  std::optional<double> rho;  // default_rho(n) when unset
  double xi = 1.0;
  std::optional<std::vector<AgentId>> leader_override;
  Position3 tracking_tolerance{0.1, 0.1, 0.1};
  std::size_t neighbor_pool = 8;
};

/// Immutable reference-time communication network.
struct ReferenceConfiguration {
  int n = 2;
  double rho = 0.1;
  double xi = 1.0;
  PositionMap ref_positions;
  std::vector<AgentId> leaders;
  std::vector<AgentId> followers;
  std::set<AgentId> boundary;
  std::set<AgentId> interior;
  std::map<AgentId, std::vector<AgentId>> in_neighbors;
  std::map<AgentId, std::vector<double>> weights;
  WeightMatrices matrices;
  DeviationBound bound;
  double d_min = 0.0;

  bool is_leader(AgentId id) const;
  /// Weight w_{follower, neighbor}; 0 when there is no such link.
  double weight(AgentId follower, AgentId neighbor) const;
  /// Row of `follower` in W / W_L, or -1.
  int follower_row(AgentId follower) const;
};

ReferenceConfiguration build_reference_configuration(const PositionMap& positions,
                                                     const NetworkOptions& options = {});

}  // namespace rcd
