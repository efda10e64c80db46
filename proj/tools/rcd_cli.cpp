// Command-line front end: simulate a scenario, check its network, or pull
// data series out of a run log.

#include "rcd/errors.hpp"
#include "rcd/log_io.hpp"
#include "rcd/scenario.hpp"
#include "rcd/simulation.hpp"

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <iostream>
#include <sstream>

namespace {

constexpr int kExitScenario = 2;
constexpr int kExitNumeric = 3;

std::string join_ids(const std::vector<rcd::AgentId>& ids) {
  std::ostringstream out;
  for (std::size_t k = 0; k < ids.size(); ++k) out << (k ? " " : "") << ids[k];
  return out.str();
}

int cmd_simulate(const std::string& scenario, const std::string& out_dir, const std::string& format) {
  const rcd::ScenarioConfig cfg = rcd::load_scenario(scenario);
  const rcd::TrajectoryLog log = rcd::run_scenario(cfg);
  if (format == "json") {
    rcd::write_log_json(log, out_dir);
  } else {
    rcd::write_log_csv(log, out_dir);
  }
  std::cout << "ticks " << (log.rows.empty() ? 0 : log.rows.size() - 1) * log.stride << ", rows "
            << log.rows.size() << ", events " << log.events.size() << " -> " << out_dir << "\n";
  for (const auto& e : log.events) {
    if (e.kind == "hdm_to_cem" || e.kind == "cem_to_hdm" || e.kind == "anomaly_detected") {
      std::cout << "  t=" << e.time << " " << e.kind << " " << e.payload << "\n";
    }
  }
  return 0;
}

int cmd_check(const std::string& scenario, bool as_json) {
  const rcd::ScenarioConfig cfg = rcd::load_scenario(scenario);
  rcd::ReferenceConfiguration net;
  try {
    net = rcd::build_reference_configuration(cfg.agents, cfg.network_options());
  } catch (const rcd::Error& e) {
    throw rcd::ScenarioError(std::string("reference network: ") + e.what());
  }
  const double d_min = cfg.d_min.value_or(net.d_min);
  const rcd::SafetyMargin margin =
      rcd::collision_safety_margin(rcd::HomogeneousTransform{}, net.bound.delta, cfg.vehicle_radius, d_min);
  const double max_re = net.matrices.D.size() == 0
                            ? 0.0
                            : Eigen::EigenSolver<Eigen::MatrixXd>(net.matrices.D).eigenvalues().real().maxCoeff();

  if (as_json) {
    nlohmann::json doc;
    doc["n"] = net.n;
    doc["rho"] = net.rho;
    doc["leaders"] = net.leaders;
    doc["boundary"] = net.boundary;
    doc["interior"] = net.interior;
    for (const auto& [f, nb] : net.in_neighbors) {
      doc["in_neighbors"][std::to_string(f)] = {{"neighbors", nb}, {"weights", net.weights.at(f)}};
    }
    doc["xi_max"] = net.bound.xi_max;
    doc["delta"] = net.bound.delta;
    doc["d_min"] = d_min;
    doc["max_real_eig_D"] = max_re;
    doc["sigma_threshold"] = margin.threshold;
    std::cout << doc.dump(2) << "\n";
    return 0;
  }
  std::cout << "agents " << net.ref_positions.size() << ", n=" << net.n << ", rho=" << net.rho << "\n";
  std::cout << "leaders: " << join_ids(net.leaders) << "\n";
  std::cout << "boundary: " << join_ids({net.boundary.begin(), net.boundary.end()}) << "\n";
  std::cout << "interior: " << join_ids({net.interior.begin(), net.interior.end()}) << "\n";
  for (rcd::AgentId f : net.followers) {
    std::cout << "  " << f << " <- " << join_ids(net.in_neighbors.at(f)) << "  w =";
    for (double w : net.weights.at(f)) std::cout << " " << w;
    std::cout << "\n";
  }
  std::cout << "max Re eig(D) = " << max_re << "\n";
  std::cout << "Xi_max = " << net.bound.xi_max << ", Delta = " << net.bound.delta << " m\n";
  std::cout << "d_min = " << d_min << " m, eps = " << cfg.vehicle_radius
            << " m, collision-free iff sigma_min >= " << margin.threshold << "\n";
  return 0;
}

int cmd_analyze(const std::string& path, const std::string& series) {
  const rcd::TrajectoryLog log = rcd::read_log(path);
  rcd::write_series(log, series, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resilient continuum deformation coordination simulator"};
  app.require_subcommand(1);

  std::string scenario, out_dir = "run", format = "csv", log_path, series;
  bool check_json = false;

  auto* sim = app.add_subcommand("simulate", "Run a scenario and write its logs");
  sim->add_option("scenario", scenario, "Scenario file")->required();
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_option("--format", format, "Log format")->check(CLI::IsMember({"csv", "json"}));

  auto* check = app.add_subcommand("check", "Build the reference network and report its bounds");
  check->add_option("scenario", scenario, "Scenario file")->required();
  check->add_flag("--json", check_json, "Emit JSON");

  auto* analyze = app.add_subcommand("analyze", "Emit a data series from a run log");
  analyze->add_option("log", log_path, "Run directory, run.json or trajectory.csv")->required();
  analyze->add_option("--series", series, "Series name")
      ->required()
      ->check(CLI::IsMember(rcd::series_names()));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return cmd_simulate(scenario, out_dir, format);
    if (*check) return cmd_check(scenario, check_json);
    if (*analyze) return cmd_analyze(log_path, series);
  } catch (const rcd::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const rcd::StagnationError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const rcd::SingularityError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const rcd::Error& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kExitScenario;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
