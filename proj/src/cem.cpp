#include "rcd/cem.hpp"

#include "rcd/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rcd {

namespace {

constexpr double kDefaultExclusionRadius = 4.0;
constexpr double kInsideMargin = 1e-12;

struct DoubletTerms {
  double phi = 0.0;
  double psi = 0.0;
  double phi_x = 0.0;  // derivatives with respect to the local offset (X, Y)
  double phi_y = 0.0;
  double psi_x = 0.0;
  double psi_y = 0.0;
};

// phi_D = -delta (c X + s Y) / r^2 and psi_D = delta (-s X + c Y) / r^2 form a
// conjugate pair: phi_D + i psi_D = -delta e^{i gamma} / (X + i Y).
DoubletTerms doublet_terms(const Doublet& d, double x, double y) {
  const double X = x - d.a;
  const double Y = y - d.b;
  const double r2 = X * X + Y * Y;
  if (r2 == 0.0) {
    throw SingularityError("flow evaluated at doublet center (" + std::to_string(d.a) + ", " +
                           std::to_string(d.b) + ")");
  }
  const double r4 = r2 * r2;
  const double c = std::cos(d.gamma);
  const double s = std::sin(d.gamma);
  const double along = c * X + s * Y;
  const double across = -s * X + c * Y;

  DoubletTerms t;
  t.phi = -d.delta * along / r2;
  t.psi = d.delta * across / r2;
  t.phi_x = -d.delta * (c * r2 - 2.0 * X * along) / r4;
  t.phi_y = -d.delta * (s * r2 - 2.0 * Y * along) / r4;
  t.psi_x = d.delta * (-s * r2 - 2.0 * X * across) / r4;
  t.psi_y = d.delta * (c * r2 - 2.0 * Y * across) / r4;
  return t;
}

/// Non-throwing planar+height velocity used inside integrator stages.
std::optional<Position3> try_velocity(const FlowField& field, const Position3& p, double v_phi) {
  FlowSample s;
  try {
    s = eval_flow(field, p.x(), p.y());
  } catch (const SingularityError&) {
    return std::nullopt;
  }
  if (!(s.jac_det >= kStagnationFloor * field.u_inf * field.u_inf)) return std::nullopt;
  const double scale = v_phi / s.jac_det;
  const double vx = scale * s.grad_psi.y();
  const double vy = -scale * s.grad_psi.x();
  const auto slope = field.height_surface.gradient_at(p.x(), p.y());
  return Position3(vx, vy, slope[0] * vx + slope[1] * vy);
}

}  // namespace

double FlowField::exclusion_radius_of(std::size_t k) const {
  return std::sqrt(doublets.at(k).delta / u_inf);
}

bool FlowField::inside_exclusion(double x, double y) const {
  for (std::size_t k = 0; k < doublets.size(); ++k) {
    const double r = exclusion_radius_of(k);
    const double dx = x - doublets[k].a;
    const double dy = y - doublets[k].b;
    if (dx * dx + dy * dy < r * r * (1.0 - kInsideMargin)) return true;
  }
  return false;
}

std::vector<std::array<std::size_t, 2>> FlowField::overlapping_disks() const {
  std::vector<std::array<std::size_t, 2>> out;
  for (std::size_t i = 0; i < doublets.size(); ++i) {
    for (std::size_t j = i + 1; j < doublets.size(); ++j) {
      const double dist = std::hypot(doublets[i].a - doublets[j].a, doublets[i].b - doublets[j].b);
      if (dist < exclusion_radius_of(i) + exclusion_radius_of(j)) out.push_back({i, j});
    }
  }
  return out;
}

double exclusion_radius(double u_inf, double delta) {
  if (!(u_inf > 0.0) || !(delta > 0.0)) {
    throw ArgumentError("exclusion radius needs u_inf > 0 and delta > 0");
  }
  return std::sqrt(delta / u_inf);
}

FlowField build_flow_from_failures(std::span<const Position3> failed_positions, double u_inf,
                                   double theta_inf, std::optional<double> radius) {
  if (!(u_inf > 0.0)) throw ArgumentError("u_inf must be positive");
  const double r = radius.value_or(kDefaultExclusionRadius);
  if (!(r > 0.0)) throw ArgumentError("exclusion radius must be positive");
  FlowField field;
  field.u_inf = u_inf;
  field.theta_inf = theta_inf;
  for (const Position3& p : failed_positions) {
    field.doublets.push_back({p.x(), p.y(), r * r * u_inf, theta_inf + std::numbers::pi});
  }
  return field;
}

FlowSample eval_flow(const FlowField& field, double x, double y) {
  const double u = field.u_inf;
  const double c = std::cos(field.theta_inf);
  const double s = std::sin(field.theta_inf);

  FlowSample out;
  out.phi = u * (x * c + y * s);
  out.psi = u * (-x * s + y * c);
  out.grad_phi = {u * c, u * s};
  out.grad_psi = {-u * s, u * c};
  for (const Doublet& d : field.doublets) {
    const DoubletTerms t = doublet_terms(d, x, y);
    out.phi += t.phi;
    out.psi += t.psi;
    out.grad_phi += Eigen::Vector2d(t.phi_x, t.phi_y);
    out.grad_psi += Eigen::Vector2d(t.psi_x, t.psi_y);
  }
  out.jac_det = out.grad_phi.x() * out.grad_psi.y() - out.grad_phi.y() * out.grad_psi.x();
  out.unsafe = field.inside_exclusion(x, y);
  return out;
}

PhiSensitivities phi_sensitivities(const FlowField& field, double x, double y) {
  const double c = std::cos(field.theta_inf);
  const double s = std::sin(field.theta_inf);
  PhiSensitivities out;
  out.d_u_inf = x * c + y * s;
  out.d_theta_inf = field.u_inf * (-x * s + y * c);
  for (const Doublet& d : field.doublets) {
    const DoubletTerms t = doublet_terms(d, x, y);
    // The center enters through X = x - a, Y = y - b; phi_D is linear in delta.
    out.d_doublet.push_back({-t.phi_x, -t.phi_y, t.phi / d.delta});
  }
  return out;
}

std::map<int, double> assign_stream_constants(const std::map<int, Position3>& healthy_positions,
                                              const FlowField& field) {
  std::map<int, double> out;
  for (const auto& [id, p] : healthy_positions) {
    if (field.inside_exclusion(p.x(), p.y())) {
      throw ScenarioError("healthy agent " + std::to_string(id) +
                          " lies inside an exclusion disk at CEM activation");
    }
    out[id] = eval_flow(field, p.x(), p.y()).psi;
  }
  return out;
}

Position3 streamline_velocity(const FlowField& field, double x, double y, double v_phi) {
  const FlowSample s = eval_flow(field, x, y);
  if (!(s.jac_det >= kStagnationFloor * field.u_inf * field.u_inf)) {
    throw StagnationError("flow Jacobian vanishes near (" + std::to_string(x) + ", " +
                          std::to_string(y) + ")");
  }
  const double scale = v_phi / s.jac_det;
  const double vx = scale * s.grad_psi.y();
  const double vy = -scale * s.grad_psi.x();
  const auto slope = field.height_surface.gradient_at(x, y);
  return {vx, vy, slope[0] * vx + slope[1] * vy};
}

Eigen::VectorXd CemShapeMatrix::steady_rates(double v_phi) const {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(H.cols());
  q[H.cols() - 1] = v_phi;
  return q;
}

CemShapeMatrix cem_shape_matrix(const FlowField& field, double x, double y) {
  const FlowSample s = eval_flow(field, x, y);
  if (!(s.jac_det >= kStagnationFloor * field.u_inf * field.u_inf)) {
    throw StagnationError("flow Jacobian vanishes; shape matrix undefined");
  }
  const PhiSensitivities sens = phi_sensitivities(field, x, y);
  const int failed = static_cast<int>(field.doublets.size());
  const Eigen::Vector2d tangent = Eigen::Vector2d(s.grad_psi.y(), -s.grad_psi.x()) / s.jac_det;

  Eigen::MatrixXd planar(2, 3 + 3 * failed);
  planar.col(0) = -tangent * sens.d_u_inf;
  planar.col(1) = -tangent * sens.d_theta_inf;
  for (int i = 0; i < failed; ++i) {
    for (int k = 0; k < 3; ++k) planar.col(2 + 3 * i + k) = -tangent * sens.d_doublet[i][k];
  }
  planar.col(2 + 3 * failed) = tangent;

  const auto slope = field.height_surface.gradient_at(x, y);
  Eigen::Matrix<double, 3, 2> lift;
  lift << 1.0, 0.0, 0.0, 1.0, slope[0], slope[1];

  CemShapeMatrix out;
  out.H = lift * planar;
  out.failed_count = failed;
  return out;
}

Position3 project_to_streamline(const Position3& position, const FlowField& field,
                                double psi_target) {
  Position3 p = position;
  for (int iter = 0; iter < 20; ++iter) {
    const FlowSample s = eval_flow(field, p.x(), p.y());
    const double residual = s.psi - psi_target;
    if (std::abs(residual) <= 1e-13 * std::max(1.0, std::abs(psi_target))) break;
    const double g2 = s.grad_psi.squaredNorm();
    if (g2 == 0.0) break;
    p.x() -= residual * s.grad_psi.x() / g2;
    p.y() -= residual * s.grad_psi.y() / g2;
  }
  // Newton can land on the interior branch of psi; push back to the rim.
  for (std::size_t k = 0; k < field.doublets.size(); ++k) {
    const Doublet& d = field.doublets[k];
    const Eigen::Vector2d offset(p.x() - d.a, p.y() - d.b);
    const double r = field.exclusion_radius_of(k);
    if (offset.norm() < r && offset.norm() > 0.0) {
      const Eigen::Vector2d rim = offset.normalized() * r;
      p.x() = d.a + rim.x();
      p.y() = d.b + rim.y();
    }
  }
  return p;
}

StreamlineStep step_streamline(const Position3& position, const FlowField& field, double v_phi,
                               double dt) {
  if (dt < 0.0) throw ArgumentError("streamline step needs dt >= 0");
  if (field.inside_exclusion(position.x(), position.y())) {
    throw ArgumentError("streamline step started inside an exclusion disk");
  }
  StreamlineStep out;
  out.position = position;
  if (dt == 0.0) return out;

  auto velocity = [&](const Position3& p) {
    auto v = try_velocity(field, p, v_phi);
    if (!v) {
      out.stalled = true;
      return Position3(Position3::Zero());
    }
    return *v;
  };
  const Position3 k1 = velocity(position);
  const Position3 k2 = velocity(position + 0.5 * dt * k1);
  const Position3 k3 = velocity(position + 0.5 * dt * k2);
  const Position3 k4 = velocity(position + dt * k3);
  if (out.stalled) return out;
  out.position = position + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  if (field.inside_exclusion(out.position.x(), out.position.y())) {
    const double psi0 = eval_flow(field, position.x(), position.y()).psi;
    out.position = project_to_streamline(out.position, field, psi0);
    out.projected = true;
  }
  return out;
}

}  // namespace rcd
