#include "rcd/anomaly.hpp"
#include "rcd/automaton.hpp"
#include "rcd/cem.hpp"
#include "rcd/errors.hpp"
#include "rcd/geometry.hpp"
#include "rcd/hdm.hpp"
#include "rcd/refnet.hpp"
#include "rcd/scenario.hpp"
#include "rcd/simulation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace rcd;

namespace {

// rows x agents x 3 array of one position kind.
py::array_t<double> stack_positions(const TrajectoryLog& log,
                                    std::vector<Position3> LogRow::*field) {
  const auto rows = static_cast<py::ssize_t>(log.rows.size());
  const auto cols = static_cast<py::ssize_t>(log.ids.size());
  py::array_t<double> out({rows, cols, py::ssize_t{3}});
  auto a = out.mutable_unchecked<3>();
  for (py::ssize_t r = 0; r < rows; ++r) {
    for (py::ssize_t c = 0; c < cols; ++c) {
      for (py::ssize_t k = 0; k < 3; ++k) a(r, c, k) = (log.rows[r].*field)[c][k];
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_rcd, m) {
  m.doc() = "Resilient continuum deformation coordination core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(m, "ArgumentError", base);
  py::register_exception<DegeneracyError>(m, "DegeneracyError", base);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", base);
  py::register_exception<SelectionError>(m, "SelectionError", base);
  py::register_exception<ConnectivityError>(m, "ConnectivityError", base);
  py::register_exception<NetworkError>(m, "NetworkError", base);
  py::register_exception<CommunicationError>(m, "CommunicationError", base);
  py::register_exception<SingularityError>(m, "SingularityError", base);
  py::register_exception<StagnationError>(m, "StagnationError", base);
  py::register_exception<ScenarioError>(m, "ScenarioError", base);
  py::register_exception<NumericError>(m, "NumericError", base);

  m.def(
      "lambda_nd",
      [](const std::vector<Position3>& simplex, const Position3& c, int n, double xi) {
        const LambdaWeights w = lambda_nd(simplex, c, n, xi);
        return Eigen::Vector4d(w.values);
      },
      py::arg("simplex"), py::arg("point"), py::arg("n"), py::arg("xi") = 1.0);
  m.def("rank_simplex", [](const std::vector<Position3>& pts, int n) { return rank_simplex(pts, n); },
        py::arg("points"), py::arg("n"));

  py::class_<DeviationBound>(m, "DeviationBound")
      .def_readonly("xi_max", &DeviationBound::xi_max)
      .def_readonly("delta", &DeviationBound::delta);

  py::class_<ReferenceConfiguration>(m, "ReferenceConfiguration")
      .def_readonly("n", &ReferenceConfiguration::n)
      .def_readonly("rho", &ReferenceConfiguration::rho)
      .def_readonly("ref_positions", &ReferenceConfiguration::ref_positions)
      .def_readonly("leaders", &ReferenceConfiguration::leaders)
      .def_readonly("followers", &ReferenceConfiguration::followers)
      .def_readonly("boundary", &ReferenceConfiguration::boundary)
      .def_readonly("interior", &ReferenceConfiguration::interior)
      .def_readonly("in_neighbors", &ReferenceConfiguration::in_neighbors)
      .def_readonly("weights", &ReferenceConfiguration::weights)
      .def_readonly("bound", &ReferenceConfiguration::bound)
      .def_readonly("d_min", &ReferenceConfiguration::d_min)
      .def_property_readonly("W", [](const ReferenceConfiguration& c) { return c.matrices.W; })
      .def_property_readonly("B", [](const ReferenceConfiguration& c) { return c.matrices.B; })
      .def_property_readonly("D", [](const ReferenceConfiguration& c) { return c.matrices.D; })
      .def_property_readonly("W_L", [](const ReferenceConfiguration& c) { return c.matrices.W_L; });

  m.def(
      "build_reference_configuration",
      [](const PositionMap& positions, int n, std::optional<double> rho,
         std::optional<std::vector<AgentId>> leaders, double xi) {
        NetworkOptions opts;
        opts.n = n;
        opts.rho = rho;
        opts.leader_override = std::move(leaders);
        opts.xi = xi;
        return build_reference_configuration(positions, opts);
      },
      py::arg("positions"), py::arg("n") = 2, py::arg("rho") = py::none(),
      py::arg("leaders") = py::none(), py::arg("xi") = 1.0);

  py::class_<HomogeneousTransform>(m, "HomogeneousTransform")
      .def_readonly("Q", &HomogeneousTransform::Q)
      .def_readonly("d", &HomogeneousTransform::d)
      .def_readonly("singular_values", &HomogeneousTransform::singular_values)
      .def("apply", &HomogeneousTransform::apply);
  m.def(
      "fit_homogeneous_transform",
      [](const std::vector<Position3>& ref, const std::vector<Position3>& cur, int n) {
        return fit_homogeneous_transform(ref, cur, n);
      },
      py::arg("leader_ref"), py::arg("leader_current"), py::arg("n"));

  py::class_<SafetyMargin>(m, "SafetyMargin")
      .def_readonly("threshold", &SafetyMargin::threshold)
      .def_readonly("satisfied", &SafetyMargin::satisfied);
  m.def(
      "collision_safety_margin",
      [](double sigma_min, double delta, double epsilon, double d_min) {
        HomogeneousTransform t;
        t.singular_values = {sigma_min, sigma_min, sigma_min};
        return collision_safety_margin(t, delta, epsilon, d_min);
      },
      py::arg("sigma_min"), py::arg("delta"), py::arg("epsilon"), py::arg("d_min"));

  py::class_<FlowField>(m, "FlowField")
      .def_readonly("u_inf", &FlowField::u_inf)
      .def_readonly("theta_inf", &FlowField::theta_inf)
      .def("exclusion_radius_of", &FlowField::exclusion_radius_of)
      .def("inside_exclusion", &FlowField::inside_exclusion);
  m.def("exclusion_radius", &exclusion_radius, py::arg("u_inf"), py::arg("delta"));
  m.def(
      "build_flow_from_failures",
      [](const std::vector<Position3>& failed, double u_inf, double theta_inf,
         std::optional<double> radius) {
        return build_flow_from_failures(failed, u_inf, theta_inf, radius);
      },
      py::arg("failed_positions"), py::arg("u_inf"), py::arg("theta_inf"),
      py::arg("radius") = py::none());
  m.def(
      "eval_flow",
      [](const FlowField& f, double x, double y) {
        const FlowSample s = eval_flow(f, x, y);
        py::dict d;
        d["phi"] = s.phi;
        d["psi"] = s.psi;
        d["grad_phi"] = Eigen::Vector2d(s.grad_phi);
        d["grad_psi"] = Eigen::Vector2d(s.grad_psi);
        d["jac_det"] = s.jac_det;
        d["unsafe"] = s.unsafe;
        return d;
      },
      py::arg("field"), py::arg("x"), py::arg("y"));
  m.def("streamline_velocity", &streamline_velocity, py::arg("field"), py::arg("x"), py::arg("y"),
        py::arg("v_phi"));
  m.def(
      "step_streamline",
      [](const Position3& p, const FlowField& f, double v_phi, double dt) {
        const StreamlineStep s = step_streamline(p, f, v_phi, dt);
        return py::make_tuple(Position3(s.position), s.stalled, s.projected);
      },
      py::arg("position"), py::arg("field"), py::arg("v_phi"), py::arg("dt"));

  m.def(
      "transient_weights",
      [](const std::vector<Position3>& nbrs, const Position3& own, int n, double xi) {
        return transient_weights(nbrs, own, n, xi);
      },
      py::arg("neighbor_positions"), py::arg("position"), py::arg("n"), py::arg("xi") = 1.0);
  m.def(
      "transient_weight_bounds",
      [](const std::vector<Position3>& nbrs, const Position3& own, double delta, int n) {
        std::vector<std::pair<double, double>> out;
        for (const auto& b : transient_weight_bounds(nbrs, own, delta, n)) out.emplace_back(b.lo, b.hi);
        return out;
      },
      py::arg("neighbor_positions"), py::arg("position"), py::arg("delta"), py::arg("n"));

  m.def(
      "containment_contains",
      [](const Position3& r, const Position3& center, double half, const std::string& norm) {
        if (norm != "l1" && norm != "l2") throw ArgumentError("norm must be 'l1' or 'l2'");
        return containment_contains(r, center, half, norm == "l1" ? NormKind::L1 : NormKind::L2);
      },
      py::arg("r"), py::arg("center"), py::arg("half_size"), py::arg("norm") = "l1");

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readonly("name", &ScenarioConfig::name)
      .def_readonly("n", &ScenarioConfig::n)
      .def_readonly("agents", &ScenarioConfig::agents)
      .def_readwrite("gain", &ScenarioConfig::gain)
      .def_readwrite("dt", &ScenarioConfig::dt)
      .def_readwrite("duration", &ScenarioConfig::duration)
      .def_readwrite("log_stride", &ScenarioConfig::log_stride);
  m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text); },
        py::arg("text"));
  m.def("load_scenario", [](const std::filesystem::path& p) { return load_scenario(p); },
        py::arg("path"));

  py::class_<TrajectoryLog>(m, "TrajectoryLog")
      .def_readonly("ids", &TrajectoryLog::ids)
      .def_readonly("dt", &TrajectoryLog::dt)
      .def_property_readonly("times",
                             [](const TrajectoryLog& l) {
                               std::vector<double> t;
                               for (const auto& r : l.rows) t.push_back(r.time);
                               return t;
                             })
      .def_property_readonly("modes",
                             [](const TrajectoryLog& l) {
                               std::vector<std::string> out;
                               for (const auto& r : l.rows) out.push_back(to_string(r.mode));
                               return out;
                             })
      .def_property_readonly("events",
                             [](const TrajectoryLog& l) {
                               std::vector<std::tuple<double, std::string, std::string>> out;
                               for (const auto& e : l.events) out.emplace_back(e.time, e.kind, e.payload);
                               return out;
                             })
      .def_property_readonly("actual", [](const TrajectoryLog& l) { return stack_positions(l, &LogRow::actual); })
      .def_property_readonly("local_desired",
                             [](const TrajectoryLog& l) { return stack_positions(l, &LogRow::local_desired); })
      .def_property_readonly("global_desired",
                             [](const TrajectoryLog& l) { return stack_positions(l, &LogRow::global_desired); });
  m.def("run_scenario", [](const ScenarioConfig& c) { return run_scenario(c); }, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
}
