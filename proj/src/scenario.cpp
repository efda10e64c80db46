#include "rcd/scenario.hpp"

#include "rcd/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rcd {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(path + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw ScenarioError(path.empty() ? key + " required" : path + "." + key + " required");
  }
  return *it;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0.0)) fail(path, "must be positive");
  return x;
}

Position3 vec3(const json& v, const std::string& path) {
  if (!v.is_array() || (v.size() != 3 && v.size() != 2)) {
    fail(path, "expected [x, y, z] (or [x, y])");
  }
  Position3 p = Position3::Zero();
  for (std::size_t k = 0; k < v.size(); ++k) {
    p[static_cast<Eigen::Index>(k)] = number(v[k], path + "[" + std::to_string(k) + "]");
  }
  return p;
}

AgentId agent_id(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer agent id");
  return v.get<AgentId>();
}

template <typename F>
void optional_field(const json& obj, const std::string& key, const std::string& path, F&& f) {
  auto it = obj.find(key);
  if (it != obj.end() && !it->is_null()) f(*it, join(path, key));
}

}  // namespace

Position3 interpolate_waypoints(const std::vector<Waypoint>& waypoints, double t) {
  if (waypoints.empty()) throw ArgumentError("no waypoints");
  if (t <= waypoints.front().t) return waypoints.front().position;
  if (t >= waypoints.back().t) return waypoints.back().position;
  for (std::size_t k = 1; k < waypoints.size(); ++k) {
    const Waypoint& b = waypoints[k];
    if (t <= b.t) {
      const Waypoint& a = waypoints[k - 1];
      const double s = (t - a.t) / (b.t - a.t);
      return a.position + s * (b.position - a.position);
    }
  }
  return waypoints.back().position;
}

NetworkOptions ScenarioConfig::network_options() const {
  NetworkOptions opts;
  opts.n = n;
  opts.rho = rho;
  opts.xi = xi;
  opts.leader_override = leader_override;
  opts.tracking_tolerance = tracking_tolerance;
  return opts;
}

ScenarioConfig parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("malformed scenario document: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("scenario document must be an object");

  ScenarioConfig cfg;
  optional_field(doc, "name", "", [&](const json& v, const std::string& p) {
    if (!v.is_string()) fail(p, "expected a string");
    cfg.name = v.get<std::string>();
  });
  optional_field(doc, "n", "", [&](const json& v, const std::string& p) {
    if (!v.is_number_integer() || (v.get<int>() != 2 && v.get<int>() != 3)) fail(p, "must be 2 or 3");
    cfg.n = v.get<int>();
  });

  const json& agents = require(doc, "agents", "");
  if (!agents.is_array() || agents.empty()) fail("agents", "expected a non-empty list");
  for (std::size_t k = 0; k < agents.size(); ++k) {
    const std::string p = "agents[" + std::to_string(k) + "]";
    const AgentId id = agent_id(require(agents[k], "id", p), p + ".id");
    const Position3 pos = vec3(require(agents[k], "position", p), p + ".position");
    if (!cfg.agents.emplace(id, pos).second) fail(p + ".id", "duplicate agent id " + std::to_string(id));
  }

  cfg.dt = positive(require(doc, "dt", ""), "dt");
  cfg.duration = number(require(doc, "duration", ""), "duration");
  if (cfg.duration < 0.0) fail("duration", "must be nonnegative");

  optional_field(doc, "leaders", "", [&](const json& v, const std::string& p) {
    if (!v.is_array()) fail(p, "expected a list of agent ids");
    std::vector<AgentId> ids;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const AgentId id = agent_id(v[k], p + "[" + std::to_string(k) + "]");
      if (!cfg.agents.contains(id)) fail(p, "unknown agent " + std::to_string(id));
      ids.push_back(id);
    }
    cfg.leader_override = ids;
  });

  optional_field(doc, "leader_trajectory", "", [&](const json& v, const std::string& p) {
    if (!v.is_object()) fail(p, "expected an object keyed by agent id");
    for (const auto& [key, points] : v.items()) {
      const std::string lp = p + "." + key;
      AgentId id = 0;
      try {
        std::size_t used = 0;
        id = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        fail(lp, "key must be an agent id");
      }
      if (!cfg.agents.contains(id)) fail(lp, "unknown agent " + key);
      if (!points.is_array() || points.empty()) fail(lp, "expected a non-empty waypoint list");
      std::vector<Waypoint> wps;
      for (std::size_t k = 0; k < points.size(); ++k) {
        const std::string wp = lp + "[" + std::to_string(k) + "]";
        Waypoint w;
        w.t = number(require(points[k], "t", wp), wp + ".t");
        w.position = vec3(require(points[k], "position", wp), wp + ".position");
        if (!wps.empty() && !(w.t > wps.back().t)) fail(wp + ".t", "waypoints must be strictly time-sorted");
        wps.push_back(w);
      }
      cfg.leader_trajectory[id] = std::move(wps);
    }
  });

  optional_field(doc, "gain", "", [&](const json& v, const std::string& p) { cfg.gain = positive(v, p); });
  optional_field(doc, "tracking_tolerance", "", [&](const json& v, const std::string& p) {
    cfg.tracking_tolerance = vec3(v, p);
    if ((cfg.tracking_tolerance.array() < 0.0).any()) fail(p, "must be nonnegative");
  });
  optional_field(doc, "vehicle_radius", "", [&](const json& v, const std::string& p) { cfg.vehicle_radius = positive(v, p); });
  optional_field(doc, "d_min", "", [&](const json& v, const std::string& p) { cfg.d_min = positive(v, p); });
  optional_field(doc, "rho", "", [&](const json& v, const std::string& p) {
    const double rho = positive(v, p);
    if (!(rho < 1.0 / (cfg.n + 1))) fail(p, "must be below 1/(n+1)");
    cfg.rho = rho;
  });
  optional_field(doc, "xi", "", [&](const json& v, const std::string& p) {
    cfg.xi = number(v, p);
    if (cfg.xi == 0.0) fail(p, "must be nonzero");
  });

  optional_field(doc, "containment", "", [&](const json& c, const std::string& p) {
    if (!c.is_object()) fail(p, "expected an object");
    optional_field(c, "half_size", p, [&](const json& v, const std::string& q) { cfg.containment_half_size = positive(v, q); });
    optional_field(c, "norm", p, [&](const json& v, const std::string& q) {
      const std::string s = v.is_string() ? v.get<std::string>() : "";
      if (s == "l1") cfg.containment_norm = NormKind::L1;
      else if (s == "l2") cfg.containment_norm = NormKind::L2;
      else fail(q, "expected \"l1\" or \"l2\"");
    });
    optional_field(c, "center", p, [&](const json& v, const std::string& q) {
      const std::string s = v.is_string() ? v.get<std::string>() : "";
      if (s == "tracking") cfg.center_mode = CenterMode::Tracking;
      else if (s == "frozen") cfg.center_mode = CenterMode::Frozen;
      else fail(q, "expected \"tracking\" or \"frozen\"");
    });
  });

  optional_field(doc, "cem", "", [&](const json& c, const std::string& p) {
    if (!c.is_object()) fail(p, "expected an object");
    optional_field(c, "u_inf", p, [&](const json& v, const std::string& q) { cfg.cem.u_inf = positive(v, q); });
    optional_field(c, "theta_inf", p, [&](const json& v, const std::string& q) { cfg.cem.theta_inf = number(v, q); });
    optional_field(c, "exclusion_radius", p, [&](const json& v, const std::string& q) { cfg.cem.exclusion_radius = positive(v, q); });
    optional_field(c, "v_phi", p, [&](const json& v, const std::string& q) { cfg.cem.v_phi = number(v, q); });
    optional_field(c, "slope", p, [&](const json& v, const std::string& q) {
      if (!v.is_array() || v.size() != 2) fail(q, "expected [dz/dx, dz/dy]");
      cfg.cem.slope_x = number(v[0], q + "[0]");
      cfg.cem.slope_y = number(v[1], q + "[1]");
    });
  });

  optional_field(doc, "failures", "", [&](const json& v, const std::string& p) {
    if (!v.is_array()) fail(p, "expected a list");
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::string fp = p + "[" + std::to_string(k) + "]";
      FailureSpec f;
      f.agent = agent_id(require(v[k], "agent", fp), fp + ".agent");
      if (!cfg.agents.contains(f.agent)) fail(fp + ".agent", "unknown agent " + std::to_string(f.agent));
      f.time = number(require(v[k], "time", fp), fp + ".time");
      const json& kind = require(v[k], "kind", fp);
      const std::string s = kind.is_string() ? kind.get<std::string>() : "";
      if (s == "freeze") {
        f.kind = FailureKind::Freeze;
      } else if (s == "drift") {
        f.kind = FailureKind::Drift;
        f.velocity = vec3(require(v[k], "velocity", fp), fp + ".velocity");
      } else {
        fail(fp + ".kind", "expected \"freeze\" or \"drift\"");
      }
      cfg.failures.push_back(f);
    }
  });

  optional_field(doc, "log", "", [&](const json& c, const std::string& p) {
    if (!c.is_object()) fail(p, "expected an object");
    optional_field(c, "stride", p, [&](const json& v, const std::string& q) {
      if (!v.is_number_integer() || v.get<long>() < 1) fail(q, "must be a positive integer");
      cfg.log_stride = v.get<std::size_t>();
    });
    optional_field(c, "reports", p, [&](const json& v, const std::string& q) {
      if (!v.is_boolean()) fail(q, "expected true or false");
      cfg.log_reports = v.get<bool>();
    });
  });

  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace rcd
