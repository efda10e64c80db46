#include "rcd/anomaly.hpp"

#include "rcd/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace rcd {

namespace {

void require_simplex(std::span<const Position3> pts, int n) {
  if (n != 2 && n != 3) throw ArgumentError("dimension must be 2 or 3");
  if (static_cast<int>(pts.size()) != n + 1) throw ArgumentError("need n+1 in-neighbors");
  if (rank_simplex(pts, n) != n) throw DegeneracyError("in-neighbor simplex is degenerate");
}

WeightBound ratio_interval(double d, double l, double delta) {
  const double num_lo = d - 2.0 * delta;
  const double num_hi = d + 2.0 * delta;
  const double den_lo = l - 2.0 * delta;
  const double den_hi = l + 2.0 * delta;
  constexpr double inf = std::numeric_limits<double>::infinity();
  WeightBound b;
  if (den_lo > 0.0) {
    b.lo = num_lo >= 0.0 ? num_lo / den_hi : num_lo / den_lo;
    b.hi = num_hi >= 0.0 ? num_hi / den_lo : num_hi / den_hi;
  } else {
    b.lo = num_lo >= 0.0 ? num_lo / den_hi : -inf;
    b.hi = inf;
  }
  return b;
}

}  // namespace

std::vector<double> transient_weights(std::span<const Position3> neighbor_actual,
                                      const Position3& own_actual, int n, double xi) {
  require_simplex(neighbor_actual, n);
  const LambdaWeights lambda = lambda_nd(neighbor_actual, own_actual, n, xi);
  return {lambda.values.data(), lambda.values.data() + n + 1};
}

OppositeDistances opposite_distances(std::span<const Position3> neighbor_actual,
                                     const Position3& own_actual, int n) {
  require_simplex(neighbor_actual, n);
  OppositeDistances out;
  const int count = n + 1;
  if (n == 2) {
    const Position3& p1 = neighbor_actual[0];
    const Position3 normal = plane_normal(p1, neighbor_actual[1], neighbor_actual[2]);
    const Position3 q = project_to_plane(own_actual, p1, neighbor_actual[1], neighbor_actual[2]);
    for (int k = 0; k < count; ++k) {
      const Position3& v = neighbor_actual[k];
      const Position3& a = neighbor_actual[(k + 1) % count];
      const Position3& b = neighbor_actual[(k + 2) % count];
      Position3 m = (b - a).cross(normal).normalized();
      if ((v - a).dot(m) < 0.0) m = -m;
      out.agent.push_back((q - a).dot(m));
      out.vertex.push_back((v - a).dot(m));
    }
  } else {
    for (int k = 0; k < count; ++k) {
      const Position3& v = neighbor_actual[k];
      const Position3& a = neighbor_actual[(k + 1) % count];
      const Position3& b = neighbor_actual[(k + 2) % count];
      const Position3& c = neighbor_actual[(k + 3) % count];
      Position3 m = (b - a).cross(c - a).normalized();
      if ((v - a).dot(m) < 0.0) m = -m;
      out.agent.push_back((own_actual - a).dot(m));
      out.vertex.push_back((v - a).dot(m));
    }
  }
  return out;
}

std::vector<double> geometric_transient_weights(std::span<const Position3> neighbor_actual,
                                                const Position3& own_actual, int n) {
  const OppositeDistances dist = opposite_distances(neighbor_actual, own_actual, n);
  std::vector<double> out(dist.agent.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = dist.agent[k] / dist.vertex[k];
  return out;
}

std::vector<WeightBound> transient_weight_bounds(std::span<const Position3> neighbor_actual,
                                                 const Position3& own_actual, double delta,
                                                 int n) {
  if (!(delta >= 0.0)) throw ArgumentError("deviation bound must be nonnegative");
  const OppositeDistances dist = opposite_distances(neighbor_actual, own_actual, n);
  std::vector<WeightBound> out;
  out.reserve(dist.agent.size());
  for (std::size_t k = 0; k < dist.agent.size(); ++k) {
    out.push_back(ratio_interval(dist.agent[k], dist.vertex[k], delta));
  }
  return out;
}

TransientWeightReport evaluate_agent(const ReferenceConfiguration& config, AgentId agent,
                                     const PositionMap& actual, double delta, double time) {
  TransientWeightReport report;
  report.agent = agent;
  report.time = time;
  const auto& neighbors = config.in_neighbors.at(agent);
  const auto& weights = config.weights.at(agent);

  std::vector<Position3> pts;
  pts.reserve(neighbors.size());
  for (AgentId j : neighbors) {
    auto it = actual.find(j);
    if (it == actual.end()) {
      throw CommunicationError("agent " + std::to_string(agent) + " lost in-neighbor " +
                               std::to_string(j));
    }
    pts.push_back(it->second);
  }
  const Position3& own = actual.at(agent);

  std::vector<double> varpi;
  std::vector<WeightBound> bounds;
  try {
    varpi = transient_weights(pts, own, config.n, config.xi);
    bounds = transient_weight_bounds(pts, own, delta, config.n);
  } catch (const DegeneracyError&) {
    report.rank_ok = false;
  }
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    TransientWeightReport::Entry e;
    e.neighbor = neighbors[k];
    e.weight = weights[k];
    if (report.rank_ok) {
      e.transient = varpi[k];
      e.lo = bounds[k].lo;
      e.hi = bounds[k].hi;
      e.pass = e.lo - kBoundSlack <= e.weight && e.weight <= e.hi + kBoundSlack;
    } else {
      e.transient = std::numeric_limits<double>::quiet_NaN();
      e.lo = e.hi = std::numeric_limits<double>::quiet_NaN();
      e.pass = false;
    }
    report.entries.push_back(e);
  }
  return report;
}

bool check_agent_health(const TransientWeightReport& report) {
  if (!report.rank_ok) return false;
  for (const auto& e : report.entries) {
    if (!e.pass) return false;
  }
  return true;
}

HealthPartition partition_health(std::span<const TransientWeightReport> reports,
                                 const std::set<AgentId>& agents) {
  HealthPartition out;
  std::map<AgentId, const TransientWeightReport*> by_agent;
  for (const auto& r : reports) by_agent[r.agent] = &r;
  for (AgentId id : agents) {
    auto it = by_agent.find(id);
    const bool ok = it == by_agent.end() || check_agent_health(*it->second);
    (ok ? out.healthy : out.anomalous).insert(id);
  }
  for (AgentId id : out.anomalous) {
    for (const auto& e : by_agent.at(id)->entries) {
      if (out.anomalous.contains(e.neighbor)) {
        out.ambiguities.push_back("agent " + std::to_string(id) + " flagged while in-neighbor " +
                                  std::to_string(e.neighbor) + " is also flagged");
      }
    }
  }
  return out;
}

}  // namespace rcd
