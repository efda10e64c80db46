#pragma once

#include "rcd/anomaly.hpp"
#include "rcd/automaton.hpp"
#include "rcd/cem.hpp"
#include "rcd/hdm.hpp"
#include "rcd/refnet.hpp"
#include "rcd/scenario.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

namespace rcd {

struct AgentState {
  AgentId id = 0;
  Position3 actual = Position3::Zero();
  Position3 local_desired = Position3::Zero();
  Position3 global_desired = Position3::Zero();
  std::optional<FailureSpec> failure;

  bool failed_at(double t) const;
};

/// Leader commands after a reference reset: each new leader keeps its
/// position at reset and follows the translation of the originally
/// commanded leader centroid since then.
struct LeaderReset {
  double time = 0.0;
  Position3 anchor = Position3::Zero();
  PositionMap positions;
};

struct SimState {
  double clock = 0.0;
  long tick = 0;
  ModeState mode;
  std::map<AgentId, AgentState> agents;
  std::shared_ptr<const ReferenceConfiguration> network;
  /// Agents flagged anomalous at a CEM entry; never re-admitted.
  std::set<AgentId> excluded;
  std::optional<FlowField> flow;
  std::map<AgentId, double> stream_constants;
  PositionMap cem_targets;
  std::optional<LeaderReset> leader_reset;
  std::vector<TransientWeightReport> reports;  // latest tick, HDM only
  std::set<AgentId> anomalous;                 // latest tick
  std::set<AgentId> deviating_leaders;         // leaders beyond Delta of their command
  HomogeneousTransform transform;
  SafetyMargin margin;
  std::set<AgentId> stalled;  // stagnation already reported this CEM episode
  std::size_t disk_violations = 0;

  bool healthy(AgentId id) const { return !excluded.contains(id); }
};

struct LogRow {
  double time = 0.0;
  Mode mode = Mode::HDM;
  std::vector<Position3> actual;  // ordered as TrajectoryLog::ids
  std::vector<Position3> local_desired;
  std::vector<Position3> global_desired;
  std::vector<int> healthy;
  std::array<double, 3> sigma{0.0, 0.0, 0.0};  // NaN in CEM
  double threshold = 0.0;
  bool margin_ok = false;
  Position3 center = Position3::Zero();
};

struct TrajectoryLog {
  std::vector<AgentId> ids;
  double dt = 0.0;
  std::size_t stride = 1;
  std::vector<LogRow> rows;
  std::vector<Event> events;
  std::vector<TransientWeightReport> reports;

  int column_of(AgentId id) const;
};

class Simulation {
 public:
  explicit Simulation(ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }
  const SimState& state() const { return state_; }
  const TrajectoryLog& log() const { return log_; }
  long total_ticks() const { return total_ticks_; }
  bool finished() const { return state_.tick >= total_ticks_; }

  /// From `time` on the agent ignores coordination. Failures scheduled past
  /// the run's end are ignored with a warning event. Throws ArgumentError for
  /// an unknown agent.
  void inject_failure(AgentId agent, FailureKind kind, double time,
                      const Position3& velocity = Position3::Zero());

  /// Advances one tick of length dt.
  void step();

  /// Commanded position of leader `id` at time t.
  Position3 leader_command(AgentId id, double t) const;

 private:
  void refresh_desired();
  void run_anomaly_checks();
  void update_margin();
  void update_center();
  void supervise();
  void enter_cem();
  void reset_reference();
  void step_hdm();
  void step_cem();
  void check_finite() const;
  void record_row();
  void emit(const std::string& kind, const std::string& payload);
  Position3 failure_velocity(const AgentState& a) const;
  Position3 commanded_centroid(double t) const;

  ScenarioConfig config_;
  SimState state_;
  TrajectoryLog log_;
  long total_ticks_ = 0;
  std::vector<AgentId> trajectory_leaders_;
};

/// Runs the scenario to completion. The observer sees the simulation after
/// the initial state and after every tick.
TrajectoryLog run_scenario(const ScenarioConfig& config,
                           const std::function<void(const Simulation&)>& observer = {});

}  // namespace rcd
