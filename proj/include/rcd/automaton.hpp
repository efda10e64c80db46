#pragma once

#include "rcd/geometry.hpp"
#include "rcd/refnet.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace rcd {

enum class Mode { HDM, CEM };
enum class NormKind { L1, L2 };

std::string to_string(Mode mode);

/// Supervisor state: active mode and the rigid containment domain.
struct ModeState {
  Mode mode = Mode::HDM;
  double entered_at = 0.0;
  Position3 containment_center = Position3::Zero();
  double containment_half_size = 40.0;
  NormKind norm_kind = NormKind::L1;
};

/// Timestamped entry of the run's event log.
struct Event {
  double time = 0.0;
  std::string kind;
  std::string payload;
};

/// sum_i beta_i r_i; uniform weights when `betas` is empty. Throws
/// ArgumentError when betas are negative, mis-sized or do not sum to 1.
Position3 nominal_containment_position(std::span<const Position3> positions,
                                       std::span<const double> betas = {});

/// |r - center| <= half_size in the chosen norm (boundary inclusive).
bool containment_contains(const Position3& r, const Position3& center, double half_size,
                          NormKind norm = NormKind::L1);

struct Transition {
  ModeState next;
  std::vector<Event> events;
  bool reference_reset = false;
};

/// HDM -> CEM once an anomalous agent lies inside the containment domain;
/// CEM -> HDM (with a reference reset) once every anomalous agent has left it.
/// Membership uses actual positions.
Transition transition(const ModeState& state, const std::set<AgentId>& anomalous,
                      const PositionMap& actual, double clock);

}  // namespace rcd
