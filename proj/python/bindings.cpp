// Python bindings for the reference-governor toolkit.  The module exposes
// the same operations the CLI is built on: problem construction and IO,
// admissible-set synthesis, the governor itself, and the closed-loop
// simulator.  Matrices cross the boundary as numpy arrays via Eigen.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rgov/governor.hpp"
#include "rgov/lift.hpp"
#include "rgov/lp.hpp"
#include "rgov/moas.hpp"
#include "rgov/pipeline.hpp"
#include "rgov/polykron.hpp"
#include "rgov/problem_io.hpp"
#include "rgov/sim.hpp"
#include "rgov/types.hpp"

namespace py = pybind11;
using namespace rgov;

namespace {

const char* lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    default: return "degenerate";
  }
}

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Overflow: return "overflow";
    case ErrorCode::TightenedInfeasible: return "tightened-infeasible";
    case ErrorCode::NotFinitelyDetermined: return "not-finitely-determined";
    case ErrorCode::UnboundedCoordinate: return "unbounded-coordinate";
    case ErrorCode::InadmissibleInitialState: return "inadmissible-initial-state";
    case ErrorCode::NumericalFailure: return "numerical-failure";
    default: return "error";
  }
}

Mat polytope_rows(const Polytope& p) { return p.G; }

}  // namespace

PYBIND11_MODULE(_rgov, m) {
  m.doc() =
      "Reference governors for pre-stabilized linear loops with polynomial "
      "constraints under bounded parametric uncertainty";

  static py::exception<Error> exc(m, "GovernorError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      std::string msg = std::string(error_code_name(e.code())) + ": " + e.what();
      if (e.code() == ErrorCode::InvalidArgument)
        PyErr_SetString(PyExc_ValueError, msg.c_str());
      else
        py::set_error(exc, msg.c_str());
    }
  });

  // ---- building blocks -------------------------------------------------
  m.def("sigma", &sigma, py::arg("n"), py::arg("p"),
        "Number of degree-p monomials in n variables (compressed Kronecker "
        "power length)");

  m.def(
      "power_vector",
      [](const Vec& x, int p) { return eval_power(x, power_basis((int)x.size(), p)); },
      py::arg("x"), py::arg("p"),
      "Compressed degree-p power vector of x in the library's basis order");

  m.def(
      "c2d",
      [](const Mat& F, const Mat& G, double Ts) {
        ContinuousPlant plant;
        plant.F = F;
        plant.G = G;
        plant.Ts = Ts;
        return c2d(plant);
      },
      py::arg("F"), py::arg("G"), py::arg("Ts"),
      "Zero-order-hold discretization: returns (A, B)");

  m.def(
      "solve_lp",
      [](const Vec& c, const Mat& G, const Vec& g) {
        LinearProgram lp{c, G, g};
        LpOutcome out = solve_lp(lp);
        py::dict d;
        d["status"] = lp_status_name(out.status);
        d["value"] = out.value;
        d["iterations"] = out.iterations;
        if (out.status == LpStatus::Optimal) d["point"] = out.point;
        return d;
      },
      py::arg("c"), py::arg("G"), py::arg("g"),
      "Maximize c'z subject to G z <= g; returns a dict with status, value, "
      "point, iterations");

  // ---- problem data ----------------------------------------------------
  py::class_<Box>(m, "Box")
      .def(py::init<>())
      .def_readwrite("lower", &Box::lower)
      .def_readwrite("upper", &Box::upper)
      .def("is_zero", &Box::is_zero)
      .def("__repr__", [](const Box& b) {
        return "Box(dim=" + std::to_string(b.size()) + ")";
      });

  py::class_<AircraftPreset>(m, "AircraftPreset")
      .def(py::init<>())
      .def_readwrite("beta", &AircraftPreset::beta)
      .def_readwrite("horizon", &AircraftPreset::horizon)
      .def_readwrite("alpha0_deg", &AircraftPreset::alpha0_deg)
      .def_readwrite("u_max", &AircraftPreset::u_max)
      .def_readwrite("w_bound", &AircraftPreset::w_bound)
      .def("x0", &AircraftPreset::x0);

  py::class_<ProblemSpec>(m, "ProblemSpec")
      .def_readonly("A", &ProblemSpec::A)
      .def_readonly("B", &ProblemSpec::B)
      .def_readonly("Bw", &ProblemSpec::Bw)
      .def_readonly("beta", &ProblemSpec::beta)
      .def_readonly("degree", &ProblemSpec::degree)
      .def_readonly("theta_box", &ProblemSpec::theta_box)
      .def_readonly("w_box", &ProblemSpec::w_box)
      .def_property_readonly("nx", &ProblemSpec::nx)
      .def_property_readonly("nv", &ProblemSpec::nv)
      .def_property_readonly("ntheta", &ProblemSpec::ntheta)
      .def_property_readonly("constraint_names",
                             [](const ProblemSpec& s) {
                               std::vector<std::string> names;
                               for (const auto& c : s.constraints)
                                 names.push_back(c.name);
                               return names;
                             })
      .def("to_json",
           [](const ProblemSpec& s) { return problem_to_json(s); })
      .def("__repr__", [](const ProblemSpec& s) {
        return "ProblemSpec(nx=" + std::to_string(s.nx()) +
               ", nv=" + std::to_string(s.nv()) +
               ", degree=" + std::to_string(s.degree) + ")";
      });

  m.def(
      "aircraft_problem",
      [](double beta, bool disturbed) {
        AircraftPreset preset;
        preset.beta = beta;
        return build_aircraft_problem(preset, disturbed);
      },
      py::arg("beta") = 0.95, py::arg("disturbed") = false,
      "Bundled pitch-axis example: pre-stabilized loop, stall corridor, and "
      "a cubic elevator-force bound with three uncertain lift coefficients");

  m.def("load_problem", &load_problem, py::arg("path"));
  m.def("save_problem", &save_problem, py::arg("path"), py::arg("spec"));
  m.def(
      "aircraft_force",
      [](const AircraftPreset& preset, const Vec& x_v, const Vec& theta) {
        return aircraft_force(preset, x_v, theta);
      },
      py::arg("preset"), py::arg("x_v"), py::arg("theta"),
      "Elevator force for joint state (alpha, alpha_dot, v) and lift "
      "coefficients theta");

  // ---- polytopes and synthesis ------------------------------------------
  py::class_<Polytope>(m, "Polytope")
      .def_property_readonly("G", &polytope_rows)
      .def_property_readonly("g", [](const Polytope& p) { return p.g; })
      .def_property_readonly("ordering",
                             [](const Polytope& p) { return p.ordering; })
      .def_property_readonly("rows", &Polytope::rows)
      .def_property_readonly("dim", &Polytope::dim)
      .def("contains", &Polytope::contains, py::arg("z"),
           py::arg("tol") = 1e-7)
      .def("__repr__", [](const Polytope& p) {
        return "Polytope(rows=" + std::to_string(p.rows()) +
               ", dim=" + std::to_string(p.dim()) + ")";
      });

  m.def("save_polytope", &save_polytope, py::arg("path"), py::arg("polytope"));
  m.def("load_polytope", &load_polytope, py::arg("path"));

  py::class_<MoasResult>(m, "MoasResult")
      .def_readonly("t_star", &MoasResult::t_star)
      .def_readonly("iterations", &MoasResult::iterations)
      .def_readonly("rows_before", &MoasResult::rows_before)
      .def_readonly("rows_after", &MoasResult::rows_after)
      .def_readonly("polytope", &MoasResult::polytope);

  py::class_<GovernorSetReport>(m, "GovernorSetReport")
      .def_readonly("linear", &GovernorSetReport::linear)
      .def_readonly("robust", &GovernorSetReport::robust)
      .def_readonly("state_box", &GovernorSetReport::state_box)
      .def_readonly("lifted_box", &GovernorSetReport::lifted_box)
      .def_readonly("omega", &GovernorSetReport::omega)
      .def_readonly("vertex_rows", &GovernorSetReport::vertex_rows)
      .def_readonly("box_row_count", &GovernorSetReport::box_row_count)
      .def_readonly("single_stage", &GovernorSetReport::single_stage)
      .def_readonly("wall_seconds", &GovernorSetReport::wall_seconds);

  m.def(
      "build_governor_set",
      [](const ProblemSpec& spec, double eps, int iteration_cap) {
        MoasOptions opt;
        opt.eps = eps;
        opt.iteration_cap = iteration_cap;
        return build_governor_set(spec, opt);
      },
      py::arg("spec"), py::arg("eps") = std::numeric_limits<double>::quiet_NaN(),
      py::arg("iteration_cap") = 10000,
      "Two-stage admissible-set synthesis; returns the full report");

  // ---- lifting and the governor ------------------------------------------
  py::class_<LiftingMap>(m, "LiftingMap")
      .def_property_readonly("ordering",
                             [](const LiftingMap& l) { return l.ordering; })
      .def("embed", &LiftingMap::embed, py::arg("x"), py::arg("v"));

  m.def("make_lifting_map", &make_lifting_map, py::arg("nx"), py::arg("nv"),
        py::arg("p"));

  py::class_<GovernorState>(m, "Governor")
      .def_property_readonly("v", [](const GovernorState& s) { return s.v; })
      .def_property_readonly(
          "margin_exhausted",
          [](const GovernorState& s) { return s.margin_exhausted; })
      .def_property_readonly(
          "last_lambda", [](const GovernorState& s) { return s.last_lambda; })
      .def(
          "initialize",
          [](GovernorState& s, const Vec& x0) { initialize(s, x0, nullptr); },
          py::arg("x0"),
          "Pick a near-minimum-norm admissible initial reference")
      .def(
          "update", [](GovernorState& s, const Vec& x) { return update(s, x); },
          py::arg("x"),
          "Advance v(k) = (1 - lambda) beta v(k-1) with the largest safe "
          "lambda found by bisection")
      .def(
          "admissible",
          [](const GovernorState& s, const Vec& x, const Vec& v) {
            return admissible(s, x, v);
          },
          py::arg("x"), py::arg("v"));

  m.def("make_governor", &make_governor_from, py::arg("spec"),
        py::arg("report"), py::arg("bisection_depth") = 30,
        "Governor wired to the robust polytope of a synthesis report");

  m.def(
      "init_reference",
      [](const Vec& x0, const Polytope& moas, const LiftingMap& lift) {
        return init_reference(x0, moas, lift, nullptr);
      },
      py::arg("x0"), py::arg("moas"), py::arg("lift"));

  // ---- simulation --------------------------------------------------------
  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("steps",
                             [](const Trajectory& t) { return t.steps; })
      .def_property_readonly(
          "states",
          [](const Trajectory& t) {
            Mat out(t.size(), t.size() ? t.states[0].size() : 0);
            for (int k = 0; k < t.size(); ++k)
              out.row(k) = t.states[k].transpose();
            return out;
          })
      .def_property_readonly(
          "refs",
          [](const Trajectory& t) {
            Mat out(t.size(), t.size() ? t.refs[0].size() : 0);
            for (int k = 0; k < t.size(); ++k) out.row(k) = t.refs[k].transpose();
            return out;
          })
      .def_property_readonly(
          "disturbances",
          [](const Trajectory& t) {
            Mat out(t.size(), t.size() ? t.disturbances[0].size() : 0);
            for (int k = 0; k < t.size(); ++k)
              out.row(k) = t.disturbances[k].transpose();
            return out;
          })
      .def_property_readonly(
          "in_moas",
          [](const Trajectory& t) {
            std::vector<bool> out(t.in_moas.begin(), t.in_moas.end());
            return out;
          })
      .def_property_readonly(
          "margin_flags",
          [](const Trajectory& t) {
            std::vector<bool> out(t.margin_flags.begin(),
                                  t.margin_flags.end());
            return out;
          })
      .def("__len__", &Trajectory::size);

  m.def(
      "simulate",
      [](const ProblemSpec& spec, GovernorState* governor, const Vec& x0,
         int steps, const std::string& disturbance, std::uint64_t seed) {
        DisturbanceSource src(parse_disturbance_kind(disturbance), spec.w_box,
                              seed);
        return simulate(spec, governor, x0, steps, src);
      },
      py::arg("spec"), py::arg("governor").none(true), py::arg("x0"),
      py::arg("steps"), py::arg("disturbance") = "zero", py::arg("seed") = 0,
      "Closed-loop run; pass governor=None for the raw v = 0 loop");

  py::class_<SweepSeries>(m, "SweepSeries")
      .def_readonly("theta", &SweepSeries::theta)
      .def_readonly("values", &SweepSeries::values)
      .def_readonly("max_abs", &SweepSeries::max_abs);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("constraint_index", &SweepResult::constraint_index)
      .def_readonly("constraint_name", &SweepResult::constraint_name)
      .def_readonly("series", &SweepResult::series);

  m.def(
      "theta_sweep",
      [](const ProblemSpec& spec, const Trajectory& traj,
         std::vector<Vec> samples, int constraint_index) {
        return theta_sweep(spec, traj, std::move(samples), constraint_index);
      },
      py::arg("spec"), py::arg("traj"), py::arg("samples") = std::vector<Vec>{},
      py::arg("constraint_index") = -1,
      "Constraint-output family along the trajectory: vertices plus the "
      "midpoint by default");
}
