#include "rcd/refnet.hpp"

#include "rcd/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace rcd {

namespace {

constexpr double kVirtualWeightTolerance = 1e-9;
constexpr double kTieTolerance = 1e-12;

void require_dimension(int n) {
  if (n != 2 && n != 3) {
    throw ArgumentError("network dimension must be 2 or 3, got " + std::to_string(n));
  }
}

const Position3& position_of(const PositionMap& positions, AgentId id) {
  auto it = positions.find(id);
  if (it == positions.end()) throw ArgumentError("unknown agent id " + std::to_string(id));
  return it->second;
}

std::vector<Position3> gather(const PositionMap& positions, std::span<const AgentId> ids) {
  std::vector<Position3> out;
  out.reserve(ids.size());
  for (AgentId id : ids) out.push_back(position_of(positions, id));
  return out;
}

/// Lambda at `query` against the simplex `ids` (already sorted), or nullopt
/// when the simplex is degenerate.
std::optional<LambdaWeights> try_lambda(const PositionMap& positions, std::span<const AgentId> ids,
                                        const Position3& query, int n, double xi) {
  const auto pts = gather(positions, ids);
  if (rank_simplex(pts, n) != n) return std::nullopt;
  return lambda_nd(pts, query, n, xi);
}

bool admissible(const LambdaWeights& lambda, int n, double rho) {
  if (!lambda.all_above(rho, n + 1)) return false;
  return n == 3 || std::abs(lambda[3]) <= kVirtualWeightTolerance;
}

/// Visits every (n+1)-combination of indices in [0, k) whose largest index
/// is >= `fresh_from`, in lexicographic order. Stops early when `visit`
/// returns false.
bool for_each_new_combination(std::size_t k, std::size_t fresh_from, int size,
                              const std::function<bool(std::span<const std::size_t>)>& visit) {
  std::vector<std::size_t> idx(size);
  std::function<bool(int, std::size_t)> rec = [&](int depth, std::size_t start) -> bool {
    if (depth == size) {
      if (idx.back() < fresh_from) return true;
      return visit(idx);
    }
    for (std::size_t i = start; i + (size - depth) <= k; ++i) {
      idx[depth] = i;
      if (!rec(depth + 1, i + 1)) return false;
    }
    return true;
  };
  return rec(0, 0);
}

struct Candidate {
  AgentId id;
  double distance;
};

std::vector<Candidate> others_by_distance(const PositionMap& positions, AgentId h) {
  const Position3& origin = position_of(positions, h);
  std::vector<Candidate> out;
  out.reserve(positions.size());
  for (const auto& [id, p] : positions) {
    if (id != h) out.push_back({id, (p - origin).norm()});
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  });
  return out;
}

std::vector<AgentId> sorted_ids(const std::vector<Candidate>& pool,
                                std::span<const std::size_t> idx) {
  std::vector<AgentId> ids;
  ids.reserve(idx.size());
  for (std::size_t i : idx) ids.push_back(pool[i].id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void require_distinct(const PositionMap& positions) {
  for (auto a = positions.begin(); a != positions.end(); ++a) {
    for (auto b = std::next(a); b != positions.end(); ++b) {
      if ((a->second - b->second).norm() == 0.0) {
        throw DegeneracyError("agents " + std::to_string(a->first) + " and " +
                              std::to_string(b->first) + " coincide");
      }
    }
  }
}

}  // namespace

double default_rho(int n) {
  require_dimension(n);
  return n == 2 ? 0.1 : 0.05;
}

BoundaryPartition classify_boundary_interior(const PositionMap& positions, int n, double rho,
                                             double xi) {
  require_dimension(n);
  if (static_cast<int>(positions.size()) < n + 2) {
    throw ConfigurationError("need at least " + std::to_string(n + 2) + " agents, got " +
                             std::to_string(positions.size()));
  }
  require_distinct(positions);

  BoundaryPartition out;
  for (const auto& [id, p] : positions) {
    const auto pool = others_by_distance(positions, id);
    bool enclosed = false;
    std::size_t done = 0;
    std::size_t k = std::min<std::size_t>(pool.size(), 8);
    while (!enclosed) {
      for_each_new_combination(k, done, n + 1, [&](std::span<const std::size_t> idx) {
        const auto ids = sorted_ids(pool, idx);
        const auto lambda = try_lambda(positions, ids, p, n, xi);
        if (lambda && admissible(*lambda, n, rho)) enclosed = true;
        return !enclosed;
      });
      if (enclosed || k == pool.size()) break;
      done = k;
      k = std::min(pool.size(), 2 * k);
    }
    (enclosed ? out.interior : out.boundary).insert(id);
  }
  return out;
}

std::vector<AgentId> select_leaders(const std::set<AgentId>& boundary,
                                    const PositionMap& positions, int n,
                                    const std::optional<std::vector<AgentId>>& override_ids) {
  require_dimension(n);
  if (override_ids) {
    const auto& ids = *override_ids;
    if (static_cast<int>(ids.size()) != n + 1) {
      throw SelectionError("leader override must list " + std::to_string(n + 1) + " agents");
    }
    std::set<AgentId> unique(ids.begin(), ids.end());
    if (unique.size() != ids.size()) throw SelectionError("leader override repeats an agent");
    for (AgentId id : ids) {
      if (!boundary.contains(id)) {
        throw SelectionError("leader " + std::to_string(id) + " is not a boundary agent");
      }
    }
    if (rank_simplex(gather(positions, ids), n) != n) {
      throw SelectionError("leader override forms a degenerate simplex");
    }
    return ids;
  }

  if (static_cast<int>(boundary.size()) < n + 1) {
    throw SelectionError("need at least " + std::to_string(n + 1) + " boundary agents");
  }
  const std::vector<AgentId> pool(boundary.begin(), boundary.end());
  std::vector<AgentId> best;
  double best_measure = 0.0;
  for_each_new_combination(pool.size(), 0, n + 1, [&](std::span<const std::size_t> idx) {
    std::vector<AgentId> ids;
    for (std::size_t i : idx) ids.push_back(pool[i]);
    const auto pts = gather(positions, ids);
    if (rank_simplex(pts, n) != n) return true;
    const double measure = simplex_measure(pts, n);
    if (best.empty() || measure > best_measure * (1.0 + kTieTolerance)) {
      best = ids;
      best_measure = measure;
    }
    return true;
  });
  if (best.empty()) throw SelectionError("boundary agents do not span an n-D simplex");
  return best;
}

std::vector<AgentId> find_in_neighbors(AgentId h, const PositionMap& positions, double rho, int n,
                                       double xi, std::size_t pool_size) {
  require_dimension(n);
  const Position3& target = position_of(positions, h);
  const auto pool = others_by_distance(positions, h);
  if (static_cast<int>(pool.size()) < n + 1) {
    throw ConnectivityError("agent " + std::to_string(h) + " has too few candidate neighbors");
  }

  std::vector<AgentId> best;
  double best_sum = std::numeric_limits<double>::infinity();
  std::size_t done = 0;
  std::size_t k = std::clamp<std::size_t>(pool_size, n + 1, pool.size());
  for (;;) {
    for_each_new_combination(k, done, n + 1, [&](std::span<const std::size_t> idx) {
      double sum = 0.0;
      for (std::size_t i : idx) sum += pool[i].distance;
      const double tol = kTieTolerance * std::max(1.0, sum);
      if (sum > best_sum + tol) return true;
      auto ids = sorted_ids(pool, idx);
      const auto lambda = try_lambda(positions, ids, target, n, xi);
      if (!lambda || !admissible(*lambda, n, rho)) return true;
      if (sum < best_sum - tol || ids < best) {
        best = std::move(ids);
        best_sum = sum;
      }
      return true;
    });
    if (k == pool.size()) break;
    // Any simplex using an agent beyond the first k costs at least this much.
    double floor = pool[k].distance;
    for (int j = 0; j < n; ++j) floor += pool[j].distance;
    if (!best.empty() && best_sum < floor - kTieTolerance * std::max(1.0, floor)) break;
    done = k;
    k = std::min(pool.size(), 2 * k);
  }
  if (best.empty()) {
    throw ConnectivityError("no admissible enclosing simplex for agent " + std::to_string(h));
  }
  return best;
}

std::vector<double> communication_weights(AgentId i, std::span<const AgentId> neighbors,
                                          const PositionMap& positions, int n, double xi) {
  require_dimension(n);
  if (static_cast<int>(neighbors.size()) != n + 1) {
    throw ArgumentError("follower " + std::to_string(i) + " needs " + std::to_string(n + 1) +
                        " in-neighbors");
  }
  const auto pts = gather(positions, neighbors);
  if (rank_simplex(pts, n) != n) {
    throw DegeneracyError("in-neighbors of agent " + std::to_string(i) + " are degenerate");
  }
  const LambdaWeights lambda = lambda_nd(pts, position_of(positions, i), n, xi);
  return {lambda.values.data(), lambda.values.data() + n + 1};
}

WeightMatrices build_weight_matrices(std::span<const AgentId> leaders,
                                     std::span<const AgentId> followers,
                                     const std::map<AgentId, std::vector<AgentId>>& in_neighbors,
                                     const std::map<AgentId, std::vector<double>>& weights) {
  const auto nl = static_cast<Eigen::Index>(leaders.size());
  const auto nf = static_cast<Eigen::Index>(followers.size());
  std::map<AgentId, Eigen::Index> column;
  for (Eigen::Index k = 0; k < nl; ++k) column[leaders[k]] = k;
  for (Eigen::Index k = 0; k < nf; ++k) column[followers[k]] = nl + k;

  WeightMatrices out;
  out.W = Eigen::MatrixXd::Zero(nf, nl + nf);
  for (Eigen::Index row = 0; row < nf; ++row) {
    const AgentId f = followers[row];
    auto nb = in_neighbors.find(f);
    auto wt = weights.find(f);
    if (nb == in_neighbors.end() || wt == weights.end() ||
        nb->second.size() != wt->second.size()) {
      throw NetworkError("follower " + std::to_string(f) + " has no consistent weights");
    }
    for (std::size_t k = 0; k < nb->second.size(); ++k) {
      auto col = column.find(nb->second[k]);
      if (col == column.end()) {
        throw NetworkError("follower " + std::to_string(f) + " links to unknown agent " +
                           std::to_string(nb->second[k]));
      }
      out.W(row, col->second) += wt->second[k];
    }
  }
  out.B = out.W.leftCols(nl);
  out.A = out.W.rightCols(nf);
  out.D = out.A - Eigen::MatrixXd::Identity(nf, nf);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(out.D);
  if (!lu.isInvertible()) throw NetworkError("D is singular: some followers never reach a leader");
  Eigen::EigenSolver<Eigen::MatrixXd> eig(out.D, /*computeEigenvectors=*/false);
  if ((eig.eigenvalues().real().array() >= 0.0).any()) {
    throw NetworkError("D is not Hurwitz");
  }
  out.W_L = -lu.solve(out.B);
  return out;
}

DeviationBound deviation_bound(const Eigen::MatrixXd& D, const Eigen::MatrixXd& B, double dx,
                               double dy, double dz) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
  if (D.rows() == 0 || !lu.isInvertible()) throw NetworkError("D is singular");
  const Eigen::MatrixXd d_inv = lu.inverse();
  const Eigen::VectorXd rows = -d_inv.rowwise().sum() + B.rowwise().sum();
  DeviationBound out;
  out.xi_max = rows.maxCoeff();
  out.delta = out.xi_max * std::sqrt(dx * dx + dy * dy + dz * dz);
  return out;
}

double min_pairwise_distance(const PositionMap& positions) {
  double best = std::numeric_limits<double>::infinity();
  for (auto a = positions.begin(); a != positions.end(); ++a) {
    for (auto b = std::next(a); b != positions.end(); ++b) {
      best = std::min(best, (a->second - b->second).norm());
    }
  }
  return best;
}

bool ReferenceConfiguration::is_leader(AgentId id) const {
  return std::find(leaders.begin(), leaders.end(), id) != leaders.end();
}

double ReferenceConfiguration::weight(AgentId follower, AgentId neighbor) const {
  auto nb = in_neighbors.find(follower);
  if (nb == in_neighbors.end()) return 0.0;
  const auto& ids = nb->second;
  auto it = std::find(ids.begin(), ids.end(), neighbor);
  if (it == ids.end()) return 0.0;
  return weights.at(follower)[static_cast<std::size_t>(it - ids.begin())];
}

int ReferenceConfiguration::follower_row(AgentId follower) const {
  auto it = std::find(followers.begin(), followers.end(), follower);
  return it == followers.end() ? -1 : static_cast<int>(it - followers.begin());
}

ReferenceConfiguration build_reference_configuration(const PositionMap& positions,
                                                     const NetworkOptions& options) {
  ReferenceConfiguration cfg;
  cfg.n = options.n;
  cfg.rho = options.rho.value_or(default_rho(options.n));
  cfg.xi = options.xi;
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0 / (cfg.n + 1))) {
    throw ArgumentError("rho must lie in (0, 1/(n+1))");
  }
  cfg.ref_positions = positions;

  auto partition = classify_boundary_interior(positions, cfg.n, cfg.rho, cfg.xi);
  cfg.boundary = std::move(partition.boundary);
  cfg.interior = std::move(partition.interior);
  cfg.leaders = select_leaders(cfg.boundary, positions, cfg.n, options.leader_override);

  for (const auto& [id, p] : positions) {
    if (!cfg.is_leader(id)) cfg.followers.push_back(id);
  }
  for (AgentId f : cfg.followers) {
    std::vector<AgentId> neighbors =
        cfg.interior.contains(f)
            ? find_in_neighbors(f, positions, cfg.rho, cfg.n, cfg.xi, options.neighbor_pool)
            : cfg.leaders;
    cfg.weights[f] = communication_weights(f, neighbors, positions, cfg.n, cfg.xi);
    cfg.in_neighbors[f] = std::move(neighbors);
  }

  cfg.matrices = build_weight_matrices(cfg.leaders, cfg.followers, cfg.in_neighbors, cfg.weights);
  const Position3& tol = options.tracking_tolerance;
  cfg.bound = deviation_bound(cfg.matrices.D, cfg.matrices.B, tol.x(), tol.y(), tol.z());
  cfg.d_min = min_pairwise_distance(positions);
  return cfg;
}

}  // namespace rcd
