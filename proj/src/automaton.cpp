#include "rcd/automaton.hpp"

#include "rcd/errors.hpp"

#include <cmath>
#include <sstream>

namespace rcd {

namespace {

std::string id_list(const std::set<AgentId>& ids) {
  std::ostringstream out;
  bool first = true;
  for (AgentId id : ids) {
    if (!first) out << ' ';
    out << id;
    first = false;
  }
  return out.str();
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::HDM ? "HDM" : "CEM"; }

Position3 nominal_containment_position(std::span<const Position3> positions,
                                       std::span<const double> betas) {
  if (positions.empty()) throw ArgumentError("containment center needs at least one agent");
  Position3 out = Position3::Zero();
  if (betas.empty()) {
    for (const auto& p : positions) out += p;
    return out / static_cast<double>(positions.size());
  }
  if (betas.size() != positions.size()) throw ArgumentError("one beta per agent required");
  double total = 0.0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (betas[i] < 0.0) throw ArgumentError("betas must be nonnegative");
    total += betas[i];
    out += betas[i] * positions[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("betas must sum to 1");
  return out;
}

bool containment_contains(const Position3& r, const Position3& center, double half_size,
                          NormKind norm) {
  if (!(half_size > 0.0)) throw ArgumentError("containment half size must be positive");
  const Position3 offset = r - center;
  const double dist = norm == NormKind::L1 ? offset.lpNorm<1>() : offset.norm();
  return dist <= half_size;
}

Transition transition(const ModeState& state, const std::set<AgentId>& anomalous,
                      const PositionMap& actual, double clock) {
  Transition out;
  out.next = state;
  std::set<AgentId> inside;
  for (AgentId id : anomalous) {
    auto it = actual.find(id);
    if (it == actual.end()) throw ArgumentError("no position for agent " + std::to_string(id));
    if (containment_contains(it->second, state.containment_center, state.containment_half_size,
                             state.norm_kind)) {
      inside.insert(id);
    }
  }

  if (state.mode == Mode::HDM && !inside.empty()) {
    out.next.mode = Mode::CEM;
    out.next.entered_at = clock;
    out.events.push_back({clock, "hdm_to_cem", "anomalous=" + id_list(inside)});
  } else if (state.mode == Mode::CEM && inside.empty()) {
    out.next.mode = Mode::HDM;
    out.next.entered_at = clock;
    out.reference_reset = true;
    out.events.push_back({clock, "cem_to_hdm", "excluded=" + id_list(anomalous)});
    out.events.push_back({clock, "reference_reset", ""});
  }
  return out;
}

}  // namespace rcd
