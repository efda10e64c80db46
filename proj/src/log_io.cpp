#include "rcd/log_io.hpp"

#include "rcd/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace rcd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ScenarioError(where + ": not a number '" + s + "'");
  }
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, bool required) {
  std::ifstream in(path);
  if (!in) {
    if (required) throw ScenarioError("cannot open " + path.string());
    return {};
  }
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(split_csv(line));
  }
  return rows;
}

Mode parse_mode(const std::string& s) {
  if (s == "HDM") return Mode::HDM;
  if (s == "CEM") return Mode::CEM;
  throw ScenarioError("unknown mode '" + s + "'");
}

double json_num(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

Position3 json_vec(const json& v) { return {json_num(v[0]), json_num(v[1]), json_num(v[2])}; }

TrajectoryLog read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    TrajectoryLog log;
    log.ids = doc.at("ids").get<std::vector<AgentId>>();
    log.dt = doc.at("dt").get<double>();
    log.stride = doc.at("stride").get<std::size_t>();
    for (const auto& r : doc.at("rows")) {
      LogRow row;
      row.time = r.at("time").get<double>();
      row.mode = parse_mode(r.at("mode").get<std::string>());
      for (const auto& p : r.at("actual")) row.actual.push_back(json_vec(p));
      for (const auto& p : r.at("local_desired")) row.local_desired.push_back(json_vec(p));
      for (const auto& p : r.at("global_desired")) row.global_desired.push_back(json_vec(p));
      row.healthy = r.at("healthy").get<std::vector<int>>();
      for (int k = 0; k < 3; ++k) row.sigma[k] = json_num(r.at("sigma")[k]);
      row.threshold = json_num(r.at("threshold"));
      row.margin_ok = r.at("satisfied").get<bool>();
      row.center = json_vec(r.at("center"));
      log.rows.push_back(std::move(row));
    }
    for (const auto& e : doc.at("events")) {
      log.events.push_back({e.at("time").get<double>(), e.at("kind").get<std::string>(),
                            e.at("payload").get<std::string>()});
    }
    for (const auto& r : doc.at("reports")) {
      TransientWeightReport rep;
      rep.time = r.at("time").get<double>();
      rep.agent = r.at("agent").get<AgentId>();
      rep.rank_ok = r.at("rank_ok").get<bool>();
      for (const auto& e : r.at("entries")) {
        rep.entries.push_back({e.at("neighbor").get<AgentId>(), json_num(e.at("w")),
                               json_num(e.at("varpi")), json_num(e.at("lo")),
                               json_num(e.at("hi")), e.at("pass").get<bool>()});
      }
      log.reports.push_back(std::move(rep));
    }
    return log;
  } catch (const json::exception& e) {
    throw ScenarioError("malformed log " + path.string() + ": " + e.what());
  }
}

TrajectoryLog read_csv_dir(const fs::path& dir) {
  TrajectoryLog log;
  const auto traj = read_csv(dir / "trajectory.csv", true);
  const auto safety = read_csv(dir / "safety.csv", true);
  if (traj.empty() || safety.empty()) throw ScenarioError("empty log in " + dir.string());
  const auto& header = traj.front();
  if ((header.size() - 1) % 10 != 0) throw ScenarioError("trajectory.csv: bad column count");
  for (std::size_t c = 1; c < header.size(); c += 10) {
    const std::string& name = header[c];
    if (name.rfind("x_", 0) != 0) throw ScenarioError("trajectory.csv: bad header " + name);
    log.ids.push_back(static_cast<AgentId>(parse_num(name.substr(2), "trajectory.csv header")));
  }
  if (safety.size() != traj.size()) {
    throw ScenarioError("trajectory.csv and safety.csv row counts differ");
  }
  for (std::size_t r = 1; r < traj.size(); ++r) {
    const auto& t = traj[r];
    const auto& s = safety[r];
    if (t.size() != header.size() || s.size() < 10) {
      throw ScenarioError("row " + std::to_string(r) + ": wrong field count");
    }
    const std::string where = "trajectory.csv row " + std::to_string(r);
    LogRow row;
    row.time = parse_num(t[0], where);
    for (std::size_t k = 0; k < log.ids.size(); ++k) {
      const std::size_t c = 1 + 10 * k;
      auto v = [&](std::size_t off) { return parse_num(t[c + off], where); };
      row.actual.emplace_back(v(0), v(1), v(2));
      row.local_desired.emplace_back(v(3), v(4), v(5));
      row.global_desired.emplace_back(v(6), v(7), v(8));
      row.healthy.push_back(static_cast<int>(v(9)));
    }
    const std::string swhere = "safety.csv row " + std::to_string(r);
    row.mode = parse_mode(s[1]);
    for (int k = 0; k < 3; ++k) row.sigma[k] = parse_num(s[2 + k], swhere);
    row.threshold = parse_num(s[5], swhere);
    row.margin_ok = s[6] == "1";
    row.center = {parse_num(s[7], swhere), parse_num(s[8], swhere), parse_num(s[9], swhere)};
    log.rows.push_back(std::move(row));
  }
  if (log.rows.size() >= 2) log.dt = log.rows[1].time - log.rows[0].time;

  const auto events = read_csv(dir / "events.csv", false);
  for (std::size_t r = 1; r < events.size(); ++r) {
    const auto& e = events[r];
    if (e.size() != 3) throw ScenarioError("events.csv row " + std::to_string(r) + ": expected 3 fields");
    log.events.push_back({parse_num(e[0], "events.csv"), e[1], e[2]});
  }

  const auto weights = read_csv(dir / "weights.csv", false);
  for (std::size_t r = 1; r < weights.size(); ++r) {
    const auto& w = weights[r];
    if (w.size() != 8) throw ScenarioError("weights.csv row " + std::to_string(r) + ": expected 8 fields");
    const double time = parse_num(w[0], "weights.csv");
    const AgentId agent = static_cast<AgentId>(parse_num(w[1], "weights.csv"));
    if (log.reports.empty() || log.reports.back().time != time || log.reports.back().agent != agent) {
      TransientWeightReport rep;
      rep.time = time;
      rep.agent = agent;
      log.reports.push_back(rep);
    }
    TransientWeightReport::Entry e;
    e.neighbor = static_cast<AgentId>(parse_num(w[2], "weights.csv"));
    e.weight = parse_num(w[3], "weights.csv");
    e.transient = parse_num(w[4], "weights.csv");
    e.lo = parse_num(w[5], "weights.csv");
    e.hi = parse_num(w[6], "weights.csv");
    e.pass = w[7] == "1";
    if (std::isnan(e.transient)) log.reports.back().rank_ok = false;
    log.reports.back().entries.push_back(e);
  }
  return log;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_log_csv(const TrajectoryLog& log, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "trajectory.csv");
    out << "time";
    for (AgentId id : log.ids) {
      const std::string s = std::to_string(id);
      out << ",x_" << s << ",y_" << s << ",z_" << s << ",x_d_" << s << ",y_d_" << s << ",z_d_"
          << s << ",x_c_" << s << ",y_c_" << s << ",z_c_" << s << ",health_" << s;
    }
    out << '\n';
    for (const auto& row : log.rows) {
      out << num(row.time);
      for (std::size_t k = 0; k < log.ids.size(); ++k) {
        for (const Position3* p : {&row.actual[k], &row.local_desired[k], &row.global_desired[k]}) {
          out << ',' << num(p->x()) << ',' << num(p->y()) << ',' << num(p->z());
        }
        out << ',' << row.healthy[k];
      }
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "safety.csv");
    out << "time,mode,sigma1,sigma2,sigma3,threshold,satisfied,center_x,center_y,center_z\n";
    for (const auto& row : log.rows) {
      out << num(row.time) << ',' << to_string(row.mode) << ',' << num(row.sigma[0]) << ','
          << num(row.sigma[1]) << ',' << num(row.sigma[2]) << ',' << num(row.threshold) << ','
          << (row.margin_ok ? 1 : 0) << ',' << num(row.center.x()) << ',' << num(row.center.y())
          << ',' << num(row.center.z()) << '\n';
    }
  }
  {
    auto out = open_out(dir / "events.csv");
    out << "time,kind,payload\n";
    for (const auto& e : log.events) {
      out << num(e.time) << ',' << quote(e.kind) << ',' << quote(e.payload) << '\n';
    }
  }
  if (!log.reports.empty()) {
    auto out = open_out(dir / "weights.csv");
    out << "time,agent,neighbor,w,varpi,lo,hi,pass\n";
    for (const auto& r : log.reports) {
      for (const auto& e : r.entries) {
        out << num(r.time) << ',' << r.agent << ',' << e.neighbor << ',' << num(e.weight) << ','
            << num(e.transient) << ',' << num(e.lo) << ',' << num(e.hi) << ',' << (e.pass ? 1 : 0)
            << '\n';
      }
    }
  }
}

void write_log_json(const TrajectoryLog& log, const fs::path& dir) {
  fs::create_directories(dir);
  auto finite = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  auto vec = [&](const Position3& p) { return json::array({finite(p.x()), finite(p.y()), finite(p.z())}); };
  json doc;
  doc["ids"] = log.ids;
  doc["dt"] = log.dt;
  doc["stride"] = log.stride;
  doc["rows"] = json::array();
  for (const auto& row : log.rows) {
    json r;
    r["time"] = row.time;
    r["mode"] = to_string(row.mode);
    r["actual"] = json::array();
    r["local_desired"] = json::array();
    r["global_desired"] = json::array();
    for (std::size_t k = 0; k < row.actual.size(); ++k) {
      r["actual"].push_back(vec(row.actual[k]));
      r["local_desired"].push_back(vec(row.local_desired[k]));
      r["global_desired"].push_back(vec(row.global_desired[k]));
    }
    r["healthy"] = row.healthy;
    r["sigma"] = json::array({finite(row.sigma[0]), finite(row.sigma[1]), finite(row.sigma[2])});
    r["threshold"] = finite(row.threshold);
    r["satisfied"] = row.margin_ok;
    r["center"] = vec(row.center);
    doc["rows"].push_back(std::move(r));
  }
  doc["events"] = json::array();
  for (const auto& e : log.events) {
    doc["events"].push_back({{"time", e.time}, {"kind", e.kind}, {"payload", e.payload}});
  }
  doc["reports"] = json::array();
  for (const auto& r : log.reports) {
    json entries = json::array();
    for (const auto& e : r.entries) {
      entries.push_back({{"neighbor", e.neighbor}, {"w", finite(e.weight)},
                         {"varpi", finite(e.transient)}, {"lo", finite(e.lo)},
                         {"hi", finite(e.hi)}, {"pass", e.pass}});
    }
    doc["reports"].push_back(
        {{"time", r.time}, {"agent", r.agent}, {"rank_ok", r.rank_ok}, {"entries", entries}});
  }
  auto out = open_out(dir / "run.json");
  out << doc.dump() << '\n';
}

TrajectoryLog read_log(const fs::path& path) {
  if (fs::is_directory(path)) {
    if (fs::exists(path / "trajectory.csv")) return read_csv_dir(path);
    if (fs::exists(path / "run.json")) return read_json(path / "run.json");
    throw ScenarioError("no trajectory.csv or run.json in " + path.string());
  }
  if (path.extension() == ".json") return read_json(path);
  if (path.filename() == "trajectory.csv") return read_csv_dir(path.parent_path().empty() ? "." : path.parent_path());
  throw ScenarioError("unrecognized log path " + path.string());
}

std::vector<std::string> series_names() { return {"positions", "sigma", "weight-bounds", "cem-paths"}; }

void write_series(const TrajectoryLog& log, const std::string& name, std::ostream& out) {
  if (name == "positions") {
    out << "time,agent,x,y,z,x_d,y_d,z_d,x_c,y_c,z_c,healthy\n";
    for (const auto& row : log.rows) {
      for (std::size_t k = 0; k < log.ids.size(); ++k) {
        out << num(row.time) << ',' << log.ids[k];
        for (const Position3* p : {&row.actual[k], &row.local_desired[k], &row.global_desired[k]}) {
          out << ',' << num(p->x()) << ',' << num(p->y()) << ',' << num(p->z());
        }
        out << ',' << row.healthy[k] << '\n';
      }
    }
  } else if (name == "sigma") {
    out << "time,mode,sigma1,sigma2,sigma3,threshold,satisfied\n";
    for (const auto& row : log.rows) {
      out << num(row.time) << ',' << to_string(row.mode) << ',' << num(row.sigma[0]) << ','
          << num(row.sigma[1]) << ',' << num(row.sigma[2]) << ',' << num(row.threshold) << ','
          << (row.margin_ok ? 1 : 0) << '\n';
    }
  } else if (name == "weight-bounds") {
    out << "time,agent,neighbor,w,varpi,lo,hi,pass\n";
    for (const auto& r : log.reports) {
      for (const auto& e : r.entries) {
        out << num(r.time) << ',' << r.agent << ',' << e.neighbor << ',' << num(e.weight) << ','
            << num(e.transient) << ',' << num(e.lo) << ',' << num(e.hi) << ','
            << (e.pass ? 1 : 0) << '\n';
      }
    }
  } else if (name == "cem-paths") {
    out << "time,agent,x,y,z\n";
    for (const auto& row : log.rows) {
      if (row.mode != Mode::CEM) continue;
      for (std::size_t k = 0; k < log.ids.size(); ++k) {
        if (!row.healthy[k]) continue;
        const Position3& p = row.actual[k];
        out << num(row.time) << ',' << log.ids[k] << ',' << num(p.x()) << ',' << num(p.y()) << ','
            << num(p.z()) << '\n';
      }
    }
  } else {
    throw ArgumentError("unknown series '" + name + "'");
  }
}

}  // namespace rcd
