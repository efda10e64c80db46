#pragma once

#include "rcd/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rcd {

/// Writes trajectory.csv, events.csv, safety.csv and (when reports were
/// logged) weights.csv into `dir`, creating it if needed.
void write_log_csv(const TrajectoryLog& log, const std::filesystem::path& dir);

/// Writes the whole log as one JSON document `dir`/run.json.
void write_log_json(const TrajectoryLog& log, const std::filesystem::path& dir);

/// Reads a log back from a run directory (CSV files or run.json) or from a
/// run.json / trajectory.csv path. Throws ScenarioError on malformed input.
TrajectoryLog read_log(const std::filesystem::path& path);

/// Names accepted by write_series.
std::vector<std::string> series_names();

/// Emits a CSV data series: "positions", "sigma", "weight-bounds" or
/// "cem-paths". Throws ArgumentError for an unknown name.
void write_series(const TrajectoryLog& log, const std::string& name, std::ostream& out);

}  // namespace rcd
