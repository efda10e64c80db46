#include "rcd/simulation.hpp"

#include "rcd/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rcd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFailureTimeSlack = 1e-9;

std::string id_list(const std::set<AgentId>& ids) {
  std::string out;
  for (AgentId id : ids) {
    if (!out.empty()) out += ';';
    out += std::to_string(id);
  }
  return out;
}

std::string id_list(const std::vector<AgentId>& ids) {
  return id_list(std::set<AgentId>(ids.begin(), ids.end()));
}

std::string tick_context(long tick, double t) {
  std::ostringstream out;
  out << "tick " << tick << " (t=" << t << "): ";
  return out.str();
}

// Rethrows the in-flight exception as the same library type with `ctx`
// prefixed to its message.
template <typename E, typename... Rest>
[[noreturn]] void rethrow_with_context(const std::string& ctx) {
  try {
    throw;
  } catch (const E& e) {
    throw E(ctx + e.what());
  } catch (...) {
    if constexpr (sizeof...(Rest) > 0) {
      rethrow_with_context<Rest...>(ctx);
    } else {
      throw;
    }
  }
}

[[noreturn]] void rethrow_library_error(const std::string& ctx) {
  rethrow_with_context<ArgumentError, DegeneracyError, ConfigurationError, SelectionError,
                       ConnectivityError, NetworkError, CommunicationError, SingularityError,
                       StagnationError, ScenarioError, NumericError, Error>(ctx);
}

using Stack = std::vector<Position3>;

Stack rk4(const Stack& x, double t, double dt,
          const std::function<Stack(double, const Stack&)>& f) {
  auto axpy = [](const Stack& a, double s, const Stack& b) {
    Stack out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
    return out;
  };
  const Stack k1 = f(t, x);
  const Stack k2 = f(t + 0.5 * dt, axpy(x, 0.5 * dt, k1));
  const Stack k3 = f(t + 0.5 * dt, axpy(x, 0.5 * dt, k2));
  const Stack k4 = f(t + dt, axpy(x, dt, k3));
  Stack out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

}  // namespace

bool AgentState::failed_at(double t) const {
  return failure && t >= failure->time - kFailureTimeSlack;
}

int TrajectoryLog::column_of(AgentId id) const {
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] == id) return static_cast<int>(k);
  }
  return -1;
}

Simulation::Simulation(ScenarioConfig config) : config_(std::move(config)) {
  if (!(config_.dt > 0.0)) throw ScenarioError("dt must be positive");
  if (config_.duration < 0.0) throw ScenarioError("duration must be nonnegative");
  if (config_.log_stride == 0) throw ScenarioError("log.stride must be positive");
  total_ticks_ = std::lround(config_.duration / config_.dt);

  try {
    state_.network = std::make_shared<const ReferenceConfiguration>(
        build_reference_configuration(config_.agents, config_.network_options()));
  } catch (const Error&) {
    rethrow_library_error("reference network: ");
  }
  for (const auto& [id, wps] : config_.leader_trajectory) {
    if (!state_.network->is_leader(id)) {
      throw ScenarioError("leader_trajectory." + std::to_string(id) + ": agent " +
                          std::to_string(id) + " is not a leader (leaders: " +
                          id_list(state_.network->leaders) + ")");
    }
    trajectory_leaders_.push_back(id);
  }

  for (const auto& [id, p] : config_.agents) {
    AgentState a;
    a.id = id;
    a.actual = p;
    state_.agents.emplace(id, a);
    log_.ids.push_back(id);
  }
  log_.dt = config_.dt;
  log_.stride = config_.log_stride;

  state_.mode.containment_half_size = config_.containment_half_size;
  state_.mode.norm_kind = config_.containment_norm;
  emit("network_built", "leaders=" + id_list(state_.network->leaders) +
                            " delta=" + std::to_string(state_.network->bound.delta));

  for (const auto& f : config_.failures) inject_failure(f.agent, f.kind, f.time, f.velocity);

  refresh_desired();
  update_margin();
  update_center();
  record_row();
}

void Simulation::emit(const std::string& kind, const std::string& payload) {
  log_.events.push_back({state_.clock, kind, payload});
}

void Simulation::inject_failure(AgentId agent, FailureKind kind, double time,
                                const Position3& velocity) {
  auto it = state_.agents.find(agent);
  if (it == state_.agents.end()) {
    throw ArgumentError("cannot fail unknown agent " + std::to_string(agent));
  }
  if (time > config_.duration) {
    emit("failure_out_of_window", "agent=" + std::to_string(agent) + " time=" + std::to_string(time));
    return;
  }
  it->second.failure = FailureSpec{agent, time, kind, velocity};
}

Position3 Simulation::failure_velocity(const AgentState& a) const {
  if (a.failure && a.failure->kind == FailureKind::Drift) return a.failure->velocity;
  return Position3::Zero();
}

Position3 Simulation::commanded_centroid(double t) const {
  Position3 c = Position3::Zero();
  if (trajectory_leaders_.empty()) return c;
  for (AgentId id : trajectory_leaders_) {
    c += interpolate_waypoints(config_.leader_trajectory.at(id), t);
  }
  return c / static_cast<double>(trajectory_leaders_.size());
}

Position3 Simulation::leader_command(AgentId id, double t) const {
  if (state_.leader_reset) {
    const LeaderReset& r = *state_.leader_reset;
    return r.positions.at(id) + (commanded_centroid(t) - r.anchor);
  }
  auto it = config_.leader_trajectory.find(id);
  if (it != config_.leader_trajectory.end()) return interpolate_waypoints(it->second, t);
  return state_.network->ref_positions.at(id);
}

void Simulation::refresh_desired() {
  const double t = state_.clock;
  if (state_.mode.mode == Mode::CEM) {
    for (auto& [id, a] : state_.agents) {
      const Position3 target = state_.healthy(id) ? state_.cem_targets.at(id) : a.actual;
      a.local_desired = a.global_desired = target;
    }
    return;
  }

  const ReferenceConfiguration& net = *state_.network;
  std::vector<Position3> leader_desired;
  for (AgentId id : net.leaders) leader_desired.push_back(leader_command(id, t));
  const auto follower_desired = global_desired_positions(leader_desired, net.matrices.W_L);

  PositionMap actual;
  for (const auto& [id, a] : state_.agents) actual[id] = a.actual;
  PositionMap global;
  for (std::size_t k = 0; k < net.leaders.size(); ++k) global[net.leaders[k]] = leader_desired[k];
  for (std::size_t k = 0; k < net.followers.size(); ++k) {
    global[net.followers[k]] = follower_desired[k];
  }

  for (auto& [id, a] : state_.agents) {
    if (!net.ref_positions.contains(id)) {
      a.local_desired = a.global_desired = a.actual;
      continue;
    }
    a.global_desired = global.at(id);
    a.local_desired = local_desired_position(net, id, actual, global);
  }
}

void Simulation::run_anomaly_checks() {
  const ReferenceConfiguration& net = *state_.network;
  PositionMap actual;
  for (const auto& [id, a] : state_.agents) actual[id] = a.actual;

  state_.reports.clear();
  for (AgentId f : net.followers) {
    state_.reports.push_back(evaluate_agent(net, f, actual, net.bound.delta, state_.clock));
  }
  std::set<AgentId> members;
  for (const auto& [id, p] : net.ref_positions) members.insert(id);
  const HealthPartition part = partition_health(state_.reports, members);
  for (AgentId id : part.anomalous) {
    if (!state_.anomalous.contains(id)) emit("anomaly_detected", "agent=" + std::to_string(id));
  }
  for (AgentId id : state_.anomalous) {
    if (!part.anomalous.contains(id)) emit("anomaly_cleared", "agent=" + std::to_string(id));
  }
  if (!part.ambiguities.empty() && part.anomalous != state_.anomalous) {
    for (const auto& note : part.ambiguities) emit("attribution_ambiguity", note);
  }
  state_.anomalous = part.anomalous;

  // Leaders have no in-neighbors to check them; only their own command
  // tracking can be watched.
  for (AgentId id : net.leaders) {
    const bool off = (actual.at(id) - leader_command(id, state_.clock)).norm() > net.bound.delta;
    if (off && state_.deviating_leaders.insert(id).second) {
      emit("leader_deviation", "agent=" + std::to_string(id));
    } else if (!off) {
      state_.deviating_leaders.erase(id);
    }
  }
}

void Simulation::update_margin() {
  if (state_.mode.mode == Mode::CEM) {
    state_.transform.singular_values = {kNaN, kNaN, kNaN};
    state_.margin.satisfied = false;
    return;
  }
  const ReferenceConfiguration& net = *state_.network;
  std::vector<Position3> ref, cur;
  for (AgentId id : net.leaders) {
    ref.push_back(net.ref_positions.at(id));
    cur.push_back(leader_command(id, state_.clock));
  }
  state_.transform = fit_homogeneous_transform(ref, cur, net.n);
  const double d_min = config_.d_min.value_or(net.d_min);
  state_.margin =
      collision_safety_margin(state_.transform, net.bound.delta, config_.vehicle_radius, d_min);
}

void Simulation::update_center() {
  if (state_.mode.mode == Mode::CEM && config_.center_mode == CenterMode::Frozen) return;
  std::vector<Position3> pts;
  for (const auto& [id, a] : state_.agents) {
    if (!state_.healthy(id) || state_.anomalous.contains(id)) continue;
    if (state_.mode.mode == Mode::HDM && !state_.network->ref_positions.contains(id)) continue;
    pts.push_back(a.global_desired);
  }
  if (!pts.empty()) state_.mode.containment_center = nominal_containment_position(pts);
}

void Simulation::supervise() {
  PositionMap actual;
  for (const auto& [id, a] : state_.agents) actual[id] = a.actual;
  const std::set<AgentId>& flagged =
      state_.mode.mode == Mode::HDM ? state_.anomalous : state_.excluded;
  const Transition tr = transition(state_.mode, flagged, actual, state_.clock);
  const Mode before = state_.mode.mode;
  state_.mode = tr.next;
  for (const auto& e : tr.events) log_.events.push_back(e);
  if (before == Mode::HDM && state_.mode.mode == Mode::CEM) enter_cem();
  if (tr.reference_reset) reset_reference();
}

void Simulation::enter_cem() {
  state_.excluded.insert(state_.anomalous.begin(), state_.anomalous.end());
  std::vector<Position3> failed;
  for (AgentId id : state_.excluded) failed.push_back(state_.agents.at(id).actual);
  const CemParams& p = config_.cem;
  FlowField flow = build_flow_from_failures(failed, p.u_inf, p.theta_inf, p.exclusion_radius);
  flow.height_surface.slope_x = p.slope_x;
  flow.height_surface.slope_y = p.slope_y;
  for (const auto& pair : flow.overlapping_disks()) {
    emit("overlapping_disks", std::to_string(pair[0]) + ";" + std::to_string(pair[1]));
  }

  std::map<int, Position3> healthy;
  for (const auto& [id, a] : state_.agents) {
    if (state_.healthy(id)) healthy[id] = a.actual;
  }
  state_.stream_constants = assign_stream_constants(healthy, flow);
  state_.cem_targets = healthy;
  state_.flow = std::move(flow);
  state_.stalled.clear();
  state_.reports.clear();
  refresh_desired();
}

void Simulation::reset_reference() {
  PositionMap positions;
  for (const auto& [id, a] : state_.agents) {
    if (state_.healthy(id)) positions[id] = a.actual;
  }
  NetworkOptions opts = config_.network_options();
  std::shared_ptr<const ReferenceConfiguration> net;
  try {
    net = std::make_shared<const ReferenceConfiguration>(
        build_reference_configuration(positions, opts));
  } catch (const SelectionError& e) {
    emit("leader_override_invalid", e.what());
    opts.leader_override.reset();
    net = std::make_shared<const ReferenceConfiguration>(
        build_reference_configuration(positions, opts));
  }
  state_.network = std::move(net);

  LeaderReset reset;
  reset.time = state_.clock;
  reset.anchor = commanded_centroid(state_.clock);
  for (AgentId id : state_.network->leaders) reset.positions[id] = positions.at(id);
  state_.leader_reset = std::move(reset);

  state_.flow.reset();
  state_.stream_constants.clear();
  state_.cem_targets.clear();
  state_.anomalous.clear();
  state_.deviating_leaders.clear();
  emit("network_built", "leaders=" + id_list(state_.network->leaders) +
                            " delta=" + std::to_string(state_.network->bound.delta));
  refresh_desired();
}

void Simulation::step_hdm() {
  const double t0 = state_.clock;
  const double g = config_.gain;
  const ReferenceConfiguration& net = *state_.network;

  std::map<AgentId, std::size_t> index;
  Stack x;
  for (const auto& [id, a] : state_.agents) {
    index[id] = x.size();
    x.push_back(a.actual);
  }
  auto rates = [&](double t, const Stack& s) {
    Stack v(s.size(), Position3::Zero());
    for (const auto& [id, a] : state_.agents) {
      const std::size_t i = index.at(id);
      if (a.failed_at(t0)) {
        v[i] = failure_velocity(a);
      } else if (!net.ref_positions.contains(id)) {
        v[i] = Position3::Zero();
      } else if (net.is_leader(id)) {
        v[i] = g * (leader_command(id, t) - s[i]);
      } else {
        const auto& nbrs = net.in_neighbors.at(id);
        const auto& w = net.weights.at(id);
        Position3 target = Position3::Zero();
        for (std::size_t k = 0; k < nbrs.size(); ++k) target += w[k] * s[index.at(nbrs[k])];
        v[i] = g * (target - s[i]);
      }
    }
    return v;
  };
  const Stack next = rk4(x, t0, config_.dt, rates);
  for (auto& [id, a] : state_.agents) a.actual = next[index.at(id)];
}

void Simulation::step_cem() {
  const double t0 = state_.clock;
  const double dt = config_.dt;
  const double g = config_.gain;
  const FlowField& flow = *state_.flow;

  PositionMap next_target;
  for (const auto& [id, target] : state_.cem_targets) {
    const StreamlineStep st = step_streamline(target, flow, config_.cem.v_phi, dt);
    Position3 p = st.position;
    if (st.stalled && state_.stalled.insert(id).second) {
      emit("stagnation", "agent=" + std::to_string(id));
    }
    const double psi0 = state_.stream_constants.at(id);
    if (!st.stalled && std::abs(eval_flow(flow, p.x(), p.y()).psi - psi0) > 1e-9) {
      p = project_to_streamline(p, flow, psi0);
    }
    next_target[id] = p;
  }

  std::map<AgentId, std::size_t> index;
  Stack x;
  for (const auto& [id, a] : state_.agents) {
    index[id] = x.size();
    x.push_back(a.actual);
  }
  auto rates = [&](double t, const Stack& s) {
    Stack v(s.size(), Position3::Zero());
    const double frac = (t - t0) / dt;
    for (const auto& [id, a] : state_.agents) {
      const std::size_t i = index.at(id);
      if (!state_.healthy(id)) {
        v[i] = a.failed_at(t0) ? failure_velocity(a) : Position3::Zero();
      } else {
        const Position3& from = state_.cem_targets.at(id);
        const Position3 target = from + frac * (next_target.at(id) - from);
        v[i] = g * (target - s[i]);
      }
    }
    return v;
  };
  const Stack next = rk4(x, t0, dt, rates);
  for (auto& [id, a] : state_.agents) a.actual = next[index.at(id)];
  state_.cem_targets = std::move(next_target);
}

void Simulation::check_finite() const {
  for (const auto& [id, a] : state_.agents) {
    if (!a.actual.allFinite()) {
      throw NumericError("non-finite position of agent " + std::to_string(id));
    }
  }
}

void Simulation::step() {
  if (finished()) return;
  try {
    if (state_.mode.mode == Mode::HDM) {
      step_hdm();
    } else {
      step_cem();
    }
    ++state_.tick;
    state_.clock = static_cast<double>(state_.tick) * config_.dt;
    check_finite();

    if (state_.mode.mode == Mode::CEM) {
      for (const auto& [id, a] : state_.agents) {
        if (state_.healthy(id) && state_.flow->inside_exclusion(a.actual.x(), a.actual.y())) {
          ++state_.disk_violations;
          emit("exclusion_violation", "agent=" + std::to_string(id));
        }
      }
    }
    refresh_desired();
    if (state_.mode.mode == Mode::HDM) run_anomaly_checks();
    update_center();
    supervise();
    update_margin();
  } catch (const Error&) {
    rethrow_library_error(tick_context(state_.tick, state_.clock));
  }
  record_row();
}

void Simulation::record_row() {
  if (state_.tick % static_cast<long>(config_.log_stride) != 0) return;
  LogRow row;
  row.time = state_.clock;
  row.mode = state_.mode.mode;
  for (AgentId id : log_.ids) {
    const AgentState& a = state_.agents.at(id);
    row.actual.push_back(a.actual);
    row.local_desired.push_back(a.local_desired);
    row.global_desired.push_back(a.global_desired);
    row.healthy.push_back(state_.healthy(id) && !state_.anomalous.contains(id) ? 1 : 0);
  }
  row.sigma = state_.transform.singular_values;
  row.threshold = state_.margin.threshold;
  row.margin_ok = state_.margin.satisfied;
  row.center = state_.mode.containment_center;
  log_.rows.push_back(std::move(row));
  if (config_.log_reports) {
    log_.reports.insert(log_.reports.end(), state_.reports.begin(), state_.reports.end());
  }
}

TrajectoryLog run_scenario(const ScenarioConfig& config,
                           const std::function<void(const Simulation&)>& observer) {
  Simulation sim(config);
  if (observer) observer(sim);
  while (!sim.finished()) {
    sim.step();
    if (observer) observer(sim);
  }
  return sim.log();
}

}  // namespace rcd
