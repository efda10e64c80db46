#pragma once

#include "rcd/geometry.hpp"
#include "rcd/refnet.hpp"

#include <set>
#include <span>
#include <string>
#include <vector>

namespace rcd {

/// Slack allowed when comparing a static weight with its bound interval.
inline constexpr double kBoundSlack = 1e-9;

/// Transient weights of an agent against its in-neighbors' actual positions
/// (Lambda operator route). Throws DegeneracyError when the neighbors do not
/// span an n-simplex.
std::vector<double> transient_weights(std::span<const Position3> neighbor_actual,
                                      const Position3& own_actual, int n, double xi = 1.0);

/// Signed distance of the agent to the side/face opposite each vertex, and of
/// the vertex itself to that side/face. Positive on the vertex's side.
struct OppositeDistances {
  std::vector<double> agent;   // d_k
  std::vector<double> vertex;  // l_k
};
OppositeDistances opposite_distances(std::span<const Position3> neighbor_actual,
                                     const Position3& own_actual, int n);

/// Transient weights as the ratio d_k / l_k.
std::vector<double> geometric_transient_weights(std::span<const Position3> neighbor_actual,
                                                const Position3& own_actual, int n);

struct WeightBound {
  double lo = 0.0;
  double hi = 0.0;
};

/// Interval of weights consistent with every agent lying within `delta` of
/// its global desired position: the ratio of d_k +- 2 delta over l_k -+ 2 delta.
/// hi becomes +infinity once l_k <= 2 delta.
std::vector<WeightBound> transient_weight_bounds(std::span<const Position3> neighbor_actual,
                                                 const Position3& own_actual, double delta, int n);

struct TransientWeightReport {
  struct Entry {
    AgentId neighbor = 0;
    double weight = 0.0;     // static communication weight w
    double transient = 0.0;  // varpi
    double lo = 0.0;
    double hi = 0.0;
    bool pass = true;
  };
  AgentId agent = 0;
  double time = 0.0;
  bool rank_ok = true;
  std::vector<Entry> entries;
};

/// Builds the report of follower `agent` from a consistent snapshot of
/// actual positions. A degenerate neighbor simplex yields rank_ok = false.
TransientWeightReport evaluate_agent(const ReferenceConfiguration& config, AgentId agent,
                                     const PositionMap& actual, double delta, double time);

/// Condition Psi for one agent: every static weight lies in its interval.
bool check_agent_health(const TransientWeightReport& report);

struct HealthPartition {
  std::set<AgentId> healthy;
  std::set<AgentId> anomalous;
  /// Flagged agents whose own in-neighbors were also flagged.
  std::vector<std::string> ambiguities;
};

/// Splits `agents` by their reports; agents without a report (leaders) are healthy.
HealthPartition partition_health(std::span<const TransientWeightReport> reports,
                                 const std::set<AgentId>& agents);

}  // namespace rcd
