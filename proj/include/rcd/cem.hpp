#pragma once

#include "rcd/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace rcd {

/// Doublet obstacle centered at (a, b) with strength delta (m^3/s) and
/// orientation gamma (rad).
struct Doublet {
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
};

/// Slope of the surface z(x, y) that healthy agents ride in CEM. The default
/// is flat: each agent keeps the height it had when the mode started.
struct HeightSurface {
  double slope_x = 0.0;
  double slope_y = 0.0;
  /// Optional analytic gradient (dz/dx, dz/dy) overriding the constant slopes.
  std::function<std::array<double, 2>(double, double)> gradient;

  std::array<double, 2> gradient_at(double x, double y) const {
    return gradient ? gradient(x, y) : std::array<double, 2>{slope_x, slope_y};
  }
};

/// Uniform flow plus superposed doublets.
struct FlowField {
  double u_inf = 1.0;
  double theta_inf = 0.0;
  std::vector<Doublet> doublets;
  HeightSurface height_surface;

  /// Radius of the closed zero streamline around doublet k.
  double exclusion_radius_of(std::size_t k) const;
  /// True when (x, y) lies strictly inside some exclusion disk.
  bool inside_exclusion(double x, double y) const;
  /// Pairs of doublets whose exclusion disks intersect.
  std::vector<std::array<std::size_t, 2>> overlapping_disks() const;
};

/// Potential/stream values, gradients and Jacobian determinant at a point.
struct FlowSample {
  double phi = 0.0;
  double psi = 0.0;
  Eigen::Vector2d grad_phi = Eigen::Vector2d::Zero();
  Eigen::Vector2d grad_psi = Eigen::Vector2d::Zero();
  double jac_det = 0.0;
  bool unsafe = false;  // strictly inside an exclusion disk
};

/// sqrt(delta / u_inf).
double exclusion_radius(double u_inf, double delta);

/// One doublet per failed agent with strength radius^2 * u_inf and
/// orientation theta_inf + pi, so the stream function vanishes on the
/// circle of that radius. Radius defaults to 4 m.
FlowField build_flow_from_failures(std::span<const Position3> failed_positions, double u_inf,
                                   double theta_inf, std::optional<double> radius = {});

/// Throws SingularityError at a doublet center.
FlowSample eval_flow(const FlowField& field, double x, double y);

/// Sensitivities of phi to the flow parameters at (x, y).
struct PhiSensitivities {
  double d_u_inf = 0.0;
  double d_theta_inf = 0.0;
  /// Per doublet: (d/da, d/db, d/ddelta).
  std::vector<std::array<double, 3>> d_doublet;
};
PhiSensitivities phi_sensitivities(const FlowField& field, double x, double y);

/// psi at each healthy agent's position. Throws ScenarioError naming the
/// first agent found strictly inside an exclusion disk.
std::map<int, double> assign_stream_constants(const std::map<int, Position3>& healthy_positions,
                                              const FlowField& field);

/// Singularity floor on jac_det relative to u_inf^2.
inline constexpr double kStagnationFloor = 1e-9;

/// Velocity sliding along the local streamline with dphi/dt = v_phi:
/// (v_phi / |J|) (dpsi/dy, -dpsi/dx), plus the height-surface z rate.
/// Throws StagnationError when jac_det < kStagnationFloor * u_inf^2.
Position3 streamline_velocity(const FlowField& field, double x, double y, double v_phi);

/// Shape matrix of the general CEM motion H * qdot, with qdot laid out as
/// (u_inf', theta_inf', [a_i', b_i', delta_i']..., v_phi).
struct CemShapeMatrix {
  Eigen::MatrixXd H;  // 3 x (3 + 3 * failed_count)
  int failed_count = 0;

  /// Generalized-coordinate rate vector for the steady case.
  Eigen::VectorXd steady_rates(double v_phi) const;
};
CemShapeMatrix cem_shape_matrix(const FlowField& field, double x, double y);

struct StreamlineStep {
  Position3 position = Position3::Zero();
  bool stalled = false;    // a stage hit the stagnation floor; velocity clamped to zero
  bool projected = false;  // result was pulled back onto the starting streamline
};

/// One classical RK4 step along the streamline through `position`.
StreamlineStep step_streamline(const Position3& position, const FlowField& field, double v_phi,
                               double dt);

/// Moves (x, y) along grad psi until psi equals `psi_target`.
Position3 project_to_streamline(const Position3& position, const FlowField& field,
                                double psi_target);

}  // namespace rcd
