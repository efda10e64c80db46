// Acceptance run: one PASS/FAIL line per criterion, each with its tolerance
// and runtime budget. Exit status is nonzero when any criterion fails.

#include "rcd/anomaly.hpp"
#include "rcd/cem.hpp"
#include "rcd/errors.hpp"
#include "rcd/geometry.hpp"
#include "rcd/hdm.hpp"
#include "rcd/refnet.hpp"
#include "rcd/scenario.hpp"
#include "rcd/simulation.hpp"

#include "deviation.hpp"
#include "formations.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using rcd::AgentId;
using rcd::Position3;
using rcd::PositionMap;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  const char* title;
  double budget_ms;
  std::function<Outcome()> run;
};

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// --- 1 -------------------------------------------------------------------

Outcome exclusion_radius() {
  const double r = rcd::exclusion_radius(10.0, 160.0);
  return {std::abs(r - 4.0) <= 1e-12, fmt("radius %.17g", r)};
}

// --- 2 -------------------------------------------------------------------

Outcome lambda_properties() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(-10, 10);
  double worst_sum = 0.0;
  int disagreements = 0, inside = 0, queries = 0;
  while (queries < 10000) {
    const bool planar = queries % 2 == 1;
    const Position3 p1(u(rng), u(rng), u(rng)), p2(u(rng), u(rng), u(rng)), p3(u(rng), u(rng), u(rng));
    const Position3 p4 = planar ? Position3::Zero() : Position3(u(rng), u(rng), u(rng));
    const Position3 c(u(rng), u(rng), u(rng));
    if (planar) {
      const double area = 0.5 * (p2 - p1).cross(p3 - p1).norm();
      if (area < 1.0) continue;
      const std::vector<Position3> s{p1, p2, p3};
      const auto w = rcd::lambda_nd(s, c, 2);
      const auto o = oracle::tri_barycentric(p1, p2, p3, c);
      const bool oracle_in = o[0] > 0 && o[1] > 0 && o[2] > 0;
      worst_sum = std::max(worst_sum, std::abs(w.sum() - 1.0));
      disagreements += oracle_in != w.strictly_inside(3);
      inside += oracle_in;
    } else {
      if (std::abs(oracle::orient3(p1, p2, p3, p4)) < 6.0) continue;
      const std::vector<Position3> s{p1, p2, p3, p4};
      const auto w = rcd::lambda_nd(s, c, 3);
      const bool oracle_in = oracle::tet_contains(p1, p2, p3, p4, c);
      worst_sum = std::max(worst_sum, std::abs(w.sum() - 1.0));
      disagreements += oracle_in != w.strictly_inside(4);
      inside += oracle_in;
    }
    ++queries;
  }
  return {worst_sum <= 1e-9 && disagreements == 0,
          fmt("max |sum-1| %.2e, %d disagreements, %d of %d inside", worst_sum, disagreements, inside,
              queries)};
}

// --- 3 -------------------------------------------------------------------

Outcome planar_fourth_weight() {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> u(-50, 50);
  double worst = 0.0;
  int done = 0;
  while (done < 1000) {
    const Position3 p1(u(rng), u(rng), u(rng)), p2(u(rng), u(rng), u(rng)), p3(u(rng), u(rng), u(rng));
    if ((p2 - p1).cross(p3 - p1).norm() < 1.0) continue;
    const std::vector<Position3> s{p1, p2, p3};
    const Position3 c(u(rng), u(rng), u(rng));
    worst = std::max(worst, std::abs(rcd::lambda_nd(s, c, 2)[3]));
    ++done;
  }
  return {worst <= 1e-9, fmt("max |lambda_4| %.2e", worst)};
}

// --- 4 -------------------------------------------------------------------

Outcome leader_weights() {
  std::mt19937_64 rng(1003);
  double worst = 0.0, max_re = -1e300;
  int hurwitz_failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int count = 8 + static_cast<int>(rng() % 23);
    const auto pos = testing_support::random_formation(rng, count, 2);
    const auto net = rcd::build_reference_configuration(pos);
    const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(net.matrices.D).eigenvalues();
    const double re = eig.real().maxCoeff();
    max_re = std::max(max_re, re);
    hurwitz_failures += re >= 0.0;
    const Position3& l1 = net.ref_positions.at(net.leaders[0]);
    const Position3& l2 = net.ref_positions.at(net.leaders[1]);
    const Position3& l3 = net.ref_positions.at(net.leaders[2]);
    for (AgentId f : net.followers) {
      const auto alpha = oracle::tri_barycentric(l1, l2, l3, net.ref_positions.at(f));
      const int row = net.follower_row(f);
      for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(net.matrices.W_L(row, k) - alpha[k]));
    }
  }
  return {worst <= 1e-9 && hurwitz_failures == 0,
          fmt("max |W_L - alpha| %.2e, max Re eig(D) %.3f, %d non-Hurwitz", worst, max_re,
              hurwitz_failures)};
}

// --- 5 -------------------------------------------------------------------

Outcome transient_invariance() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> m(-2, 2), off(-200, 200);
  double worst = 0.0;
  int followers = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto pos = testing_support::random_formation(rng, 10 + trial % 15, 2);
    const auto net = rcd::build_reference_configuration(pos);
    Eigen::Matrix3d Q = Eigen::Matrix3d::Identity();
    do {
      Q.topLeftCorner<2, 2>() << m(rng), m(rng), m(rng), m(rng);
    } while (std::abs(Q.topLeftCorner<2, 2>().determinant()) < 0.2);
    const Position3 d(off(rng), off(rng), 0.0);
    PositionMap moved;
    for (const auto& [id, p] : pos) moved[id] = Q * p + d;
    for (AgentId f : net.followers) {
      std::vector<Position3> nb;
      for (AgentId j : net.in_neighbors.at(f)) nb.push_back(moved.at(j));
      const auto varpi = rcd::transient_weights(nb, moved.at(f), 2);
      const auto& w = net.weights.at(f);
      for (std::size_t k = 0; k < w.size(); ++k) worst = std::max(worst, std::abs(varpi[k] - w[k]));
      ++followers;
    }
  }
  return {worst <= 1e-9, fmt("max |varpi - w| %.2e over %d followers", worst, followers)};
}

// --- 6 -------------------------------------------------------------------

Outcome deviation_bound() {
  const auto cfg = rcd::load_scenario(RCD_SCENARIO_DIR "/three_phase_22.json");
  const auto net = rcd::build_reference_configuration(cfg.agents, cfg.network_options());
  const double delta = net.bound.xi_max * 0.1 * std::sqrt(3.0);
  std::mt19937_64 rng(1005);
  Eigen::MatrixXd ld(3, 3);
  for (int k = 0; k < 3; ++k) ld.row(k) = net.ref_positions.at(net.leaders[k]).transpose();
  int violations = 0;
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const auto s = testing_support::disturb(net, ld, rng, 0.1);
    const double dev = std::max((s.follower_actual - s.follower_global).rowwise().norm().maxCoeff(),
                                (s.leader_actual - s.leader_desired).rowwise().norm().maxCoeff());
    worst = std::max(worst, dev);
    violations += dev > delta;
  }
  const bool consistent = std::abs(delta - net.bound.delta) <= 1e-12 * delta;
  return {violations == 0 && consistent,
          fmt("Delta %.4f, worst deviation %.4f, %d violations", delta, worst, violations)};
}

// --- 7 -------------------------------------------------------------------

Outcome streamline_conservation() {
  const std::vector<Position3> failed{{0, 0, 0}};
  const auto flow = rcd::build_flow_from_failures(failed, 10.0, 0.0, 4.0);
  const double dt = 1e-3;
  double worst = 0.0;
  int violations = 0, stalls = 0;
  for (double y0 : {-6.0, -3.0, -1.0, -0.5, 0.5, 1.0, 3.0, 6.0}) {
    Position3 p(-15.0, y0, 2.0);
    const double psi0 = rcd::eval_flow(flow, p.x(), p.y()).psi;
    for (int k = 0; k < 20000; ++k) {
      const auto s = rcd::step_streamline(p, flow, 20.0, dt);
      stalls += s.stalled;
      p = s.position;
      worst = std::max(worst, std::abs(rcd::eval_flow(flow, p.x(), p.y()).psi - psi0));
      violations += std::hypot(p.x(), p.y()) < 4.0;
    }
  }
  return {worst <= 1e-6 && violations == 0,
          fmt("max |psi - psi0| %.2e, %d ticks inside the disk, %d stalled steps", worst, violations,
              stalls)};
}

// --- 8 -------------------------------------------------------------------

Outcome flow_numerics() {
  std::mt19937_64 rng(1008);
  std::uniform_real_distribution<double> c(-20, 20), th(-3.1, 3.1), uu(1, 15), q(-30, 30);
  double lap = 0.0, cr = 0.0, fd = 0.0;
  for (int point = 0; point < 1000; ++point) {
    std::vector<Position3> failed;
    const int count = 1 + static_cast<int>(rng() % 3);
    while (static_cast<int>(failed.size()) < count) {
      const Position3 p(c(rng), c(rng), 0);
      bool ok = true;
      for (const auto& o : failed) ok = ok && (p - o).norm() > 10.0;
      if (ok) failed.push_back(p);
    }
    const double radius = 3.0;
    const auto f = rcd::build_flow_from_failures(failed, uu(rng), th(rng), radius);
    double x = 0, y = 0;
    for (bool ok = false; !ok;) {
      x = q(rng), y = q(rng);
      ok = true;
      for (const auto& d : f.doublets) ok = ok && std::hypot(x - d.a, y - d.b) > 1.2 * radius;
    }
    const auto s = rcd::eval_flow(f, x, y);
    auto phi = [&](double px, double py) { return rcd::eval_flow(f, px, py).phi; };
    auto psi = [&](double px, double py) { return rcd::eval_flow(f, px, py).psi; };
    const double scale = s.grad_phi.norm();

    const double h = 1e-5;
    const double fx = (phi(x + h, y) - phi(x - h, y)) / (2 * h);
    const double fy = (phi(x, y + h) - phi(x, y - h)) / (2 * h);
    const double gx = (psi(x + h, y) - psi(x - h, y)) / (2 * h);
    const double gy = (psi(x, y + h) - psi(x, y - h)) / (2 * h);
    fd = std::max({fd, std::abs(fx - s.grad_phi.x()) / scale, std::abs(fy - s.grad_phi.y()) / scale,
                   std::abs(gx - s.grad_psi.x()) / scale, std::abs(gy - s.grad_psi.y()) / scale});
    cr = std::max({cr, std::abs(fx - gy) / scale, std::abs(fy + gx) / scale});

    // Five-point Laplacian relative to the second-derivative scale |grad| / radius.
    const double hl = 1e-3 * radius;
    const double lphi = (phi(x + hl, y) + phi(x - hl, y) + phi(x, y + hl) + phi(x, y - hl) - 4 * s.phi) / (hl * hl);
    const double lpsi = (psi(x + hl, y) + psi(x - hl, y) + psi(x, y + hl) + psi(x, y - hl) - 4 * s.psi) / (hl * hl);
    lap = std::max({lap, std::abs(lphi) * radius / scale, std::abs(lpsi) * radius / scale});
  }
  return {lap <= 1e-4 && cr <= 1e-6 && fd <= 1e-6,
          fmt("Laplace %.2e, Cauchy-Riemann %.2e, gradient FD %.2e (relative)", lap, cr, fd)};
}

// --- 9 -------------------------------------------------------------------

struct ReplaySummary {
  rcd::TrajectoryLog log;
  double cem_entry = -1, cem_exit = -1, first_beyond = -1;
  bool hdm_until_failure = true;
  bool inside_while_cem = true;
  bool network_ok = false;
  std::string network_note;
};

double l1(const Position3& v) { return v.cwiseAbs().sum(); }

ReplaySummary replay(const rcd::ScenarioConfig& cfg) {
  ReplaySummary r;
  rcd::Mode previous = rcd::Mode::HDM;
  const AgentId failed = 11;
  auto observer = [&](const rcd::Simulation& sim) {
    const auto& st = sim.state();
    const double t = st.clock;
    if (t <= 100.0 + 1e-9 && st.mode.mode != rcd::Mode::HDM) r.hdm_until_failure = false;
    const double dist = l1(st.agents.at(failed).actual - st.mode.containment_center);
    if (previous == rcd::Mode::CEM) {
      // The supervisor's center is left untouched by the reset, so it is the
      // one the exit decision used.
      if (dist > 40.0 && r.first_beyond < 0) r.first_beyond = t;
      if (st.mode.mode == rcd::Mode::CEM && dist > 40.0) r.inside_while_cem = false;
    }
    if (previous == rcd::Mode::HDM && st.mode.mode == rcd::Mode::CEM && r.cem_entry < 0) r.cem_entry = t;
    if (previous == rcd::Mode::CEM && st.mode.mode == rcd::Mode::HDM && r.cem_exit < 0) {
      r.cem_exit = t;
      const auto& net = *st.network;
      const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(net.matrices.D).eigenvalues();
      const double re = eig.real().maxCoeff();
      const double row_sum = (net.matrices.W_L.rowwise().sum().array() - 1.0).abs().maxCoeff();
      r.network_ok = net.leaders.size() == 3 && !net.ref_positions.contains(failed) &&
                     net.ref_positions.size() == 21 && re < 0.0 && row_sum <= 1e-9;
      r.network_note = fmt("rebuilt: %zu leaders, max Re eig(D) %.3f", net.leaders.size(), re);
    }
    previous = st.mode.mode;
  };
  r.log = rcd::run_scenario(cfg, observer);
  return r;
}

bool same_log(const rcd::TrajectoryLog& a, const rcd::TrajectoryLog& b) {
  if (a.rows.size() != b.rows.size() || a.events.size() != b.events.size()) return false;
  for (std::size_t k = 0; k < a.events.size(); ++k) {
    if (a.events[k].time != b.events[k].time || a.events[k].kind != b.events[k].kind ||
        a.events[k].payload != b.events[k].payload)
      return false;
  }
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    if (a.rows[k].mode != b.rows[k].mode || a.rows[k].actual != b.rows[k].actual ||
        a.rows[k].global_desired != b.rows[k].global_desired)
      return false;
  }
  return true;
}

Outcome three_phase_replay() {
  const auto cfg = rcd::load_scenario(RCD_SCENARIO_DIR "/three_phase_22.json");
  const bool setup = cfg.gain == 25.0 && cfg.containment_half_size == 40.0 &&
                     cfg.containment_norm == rcd::NormKind::L1 && cfg.failures.size() == 1 &&
                     cfg.failures[0].agent == 11 && cfg.failures[0].time == 100.0 &&
                     cfg.failures[0].kind == rcd::FailureKind::Freeze;
  const auto first = replay(cfg);
  const auto second = replay(cfg);
  const double latency = first.cem_entry - 100.0;
  const bool detect = first.cem_entry > 100.0 && latency <= 1.0;
  const bool exit_rule = first.cem_exit > first.cem_entry && first.cem_exit == first.first_beyond &&
                         first.inside_while_cem;
  const bool deterministic = same_log(first.log, second.log);
  return {setup && first.hdm_until_failure && detect && exit_rule && first.network_ok && deterministic,
          fmt("HDM on [0,100] %s, HDM->CEM at %.3f s (latency %.3f s), CEM->HDM at %.3f s "
              "(first |r11 - c|_1 > 40 at %.3f s), %s, deterministic %s",
              first.hdm_until_failure ? "yes" : "no", first.cem_entry, latency, first.cem_exit,
              first.first_beyond, first.network_note.c_str(), deterministic ? "yes" : "no")};
}

// --- 10 ------------------------------------------------------------------

Outcome collision_certificate() {
  rcd::HomogeneousTransform t;
  const auto m = rcd::collision_safety_margin(t, 0.0, 0.5, 2.0);
  t.singular_values = {1.0, 0.3, 1.0};
  const auto unsafe = rcd::collision_safety_margin(t, 0.0, 0.5, 2.0);
  return {m.threshold == 1.0 / 3.0 && m.satisfied && !unsafe.satisfied,
          fmt("threshold %.17g, sigma_min 0.3 %s", m.threshold, unsafe.satisfied ? "safe" : "unsafe")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "exclusion-disk radius", 1.0, exclusion_radius},
      {2, "Lambda operator sums and containment", 5000.0, lambda_properties},
      {3, "planar fourth weight vanishes", 1000.0, planar_fourth_weight},
      {4, "leader weights and Hurwitz D", 10000.0, leader_weights},
      {5, "transient-weight invariance", 5000.0, transient_invariance},
      {6, "global deviation bound", 10000.0, deviation_bound},
      {7, "streamline conservation", 30000.0, streamline_conservation},
      {8, "flow-field numerics", 5000.0, flow_numerics},
      {9, "three-phase replay", 120000.0, three_phase_replay},
      {10, "collision certificate", 1.0, collision_certificate},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const bool pass = out.pass && ms < c.budget_ms;
    failures += !pass;
    std::printf("[%s] %2d %s: %s (%.3f ms, budget %.0f ms)\n", pass ? "PASS" : "FAIL", c.number, c.title,
                out.detail.c_str(), ms, c.budget_ms);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
