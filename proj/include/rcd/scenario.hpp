#pragma once

#include "rcd/automaton.hpp"
#include "rcd/geometry.hpp"
#include "rcd/refnet.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rcd {

struct Waypoint {
  double t = 0.0;
  Position3 position = Position3::Zero();
};

/// Linear interpolation through time-sorted waypoints, clamped at both ends.
Position3 interpolate_waypoints(const std::vector<Waypoint>& waypoints, double t);

enum class FailureKind { Freeze, Drift };

struct FailureSpec {
  AgentId agent = 0;
  double time = 0.0;
  FailureKind kind = FailureKind::Freeze;
  Position3 velocity = Position3::Zero();  // drift only
};

/// How the containment center moves while CEM is active.
enum class CenterMode { Tracking, Frozen };

struct CemParams {
  double u_inf = 10.0;
  double theta_inf = 0.0;
  double exclusion_radius = 4.0;
  double v_phi = 10.0;
  double slope_x = 0.0;  // height surface z = z_enter + slope . (x, y)
  double slope_y = 0.0;
};

struct ScenarioConfig {
  std::string name;
  int n = 2;
  PositionMap agents;
  std::optional<std::vector<AgentId>> leader_override;
  std::map<AgentId, std::vector<Waypoint>> leader_trajectory;
  double gain = 25.0;
  double dt = 1e-3;
  double duration = 0.0;
  Position3 tracking_tolerance{0.1, 0.1, 0.1};
  double vehicle_radius = 0.5;
  std::optional<double> d_min;
  std::optional<double> rho;
  double xi = 1.0;
  double containment_half_size = 40.0;
  NormKind containment_norm = NormKind::L1;
  CenterMode center_mode = CenterMode::Tracking;
  CemParams cem;
  std::vector<FailureSpec> failures;
  std::size_t log_stride = 1;
  bool log_reports = false;

  NetworkOptions network_options() const;
};

/// Parses and validates a JSON scenario document. Throws ScenarioError whose
/// message names the offending field path.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace rcd
