// Python bindings for the sitdyn core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "sitdyn/config.hpp"
#include "sitdyn/dynamics.hpp"
#include "sitdyn/entrance_time.hpp"
#include "sitdyn/equilibria.hpp"
#include "sitdyn/error.hpp"
#include "sitdyn/experiments.hpp"
#include "sitdyn/params.hpp"
#include "sitdyn/releases.hpp"
#include "sitdyn/schedule.hpp"
#include "sitdyn/separatrix.hpp"

namespace py = pybind11;
using namespace sitdyn;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sterile-male release dynamics: equilibria, separatrix clouds and entrance times";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidParameter>(m, "InvalidParameter", error.ptr());
  py::register_exception<NoPositiveEquilibrium>(m, "NoPositiveEquilibrium", error.ptr());
  py::register_exception<CalibrationInfeasible>(m, "CalibrationInfeasible", error.ptr());
  py::register_exception<UnaidedCollapse>(m, "UnaidedCollapse", error.ptr());
  py::register_exception<NoGuarantee>(m, "NoGuarantee", error.ptr());
  py::register_exception<NotApplicable>(m, "NotApplicable", error.ptr());
  py::register_exception<NumericFailure>(m, "NumericFailure", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<FingerprintMismatch>(m, "FingerprintMismatch", error.ptr());
  py::register_exception<MalformedFile>(m, "MalformedFile", error.ptr());

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("b", &ModelParams::b)
      .def_readwrite("K", &ModelParams::K)
      .def_readwrite("nu_E", &ModelParams::nu_E)
      .def_readwrite("nu_E_tilde", &ModelParams::nu_E_tilde)
      .def_readwrite("mu_E", &ModelParams::mu_E)
      .def_readwrite("mu_L", &ModelParams::mu_L)
      .def_readwrite("nu_L", &ModelParams::nu_L)
      .def_readwrite("mu_M", &ModelParams::mu_M)
      .def_readwrite("mu_F", &ModelParams::mu_F)
      .def_readwrite("mu_i", &ModelParams::mu_i)
      .def_readwrite("r", &ModelParams::r)
      .def_readwrite("beta", &ModelParams::beta)
      .def_readwrite("gamma_i", &ModelParams::gamma_i)
      .def("validate", &ModelParams::validate)
      .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; });

  py::class_<Aggregates>(m, "Aggregates")
      .def_readonly("N", &Aggregates::N)
      .def_readonly("lam", &Aggregates::lambda)
      .def_readonly("psi", &Aggregates::psi)
      .def_readonly("xi", &Aggregates::xi);

  py::class_<State3>(m, "State3")
      .def(py::init<>())
      .def(py::init([](double E, double M, double F) { return State3{E, M, F}; }), py::arg("E"),
           py::arg("M"), py::arg("F"))
      .def_readwrite("E", &State3::E)
      .def_readwrite("M", &State3::M)
      .def_readwrite("F", &State3::F)
      .def("__repr__", [](const State3& s) {
        return "State3(E=" + std::to_string(s.E) + ", M=" + std::to_string(s.M) +
               ", F=" + std::to_string(s.F) + ")";
      });

  py::class_<State4>(m, "State4")
      .def_readonly("E", &State4::E)
      .def_readonly("M", &State4::M)
      .def_readonly("Mi", &State4::Mi)
      .def_readonly("F", &State4::F)
      .def_readonly("Fst", &State4::Fst);

  m.def("simulation_defaults", &simulation_defaults, py::arg("nu_E"), py::arg("beta"),
        py::arg("M_target") = 5106.0);
  m.def("aggregates", &aggregates, py::arg("p"));
  m.def("calibrate_K", &calibrate_K, py::arg("p"), py::arg("M_target"));
  m.def("fingerprint", &fingerprint, py::arg("p"), py::arg("mi_level") = 0.0,
        py::arg("dt") = 0.0, py::arg("tag") = "");

  py::enum_<Stability>(m, "Stability")
      .value("Stable", Stability::Stable)
      .value("Unstable", Stability::Unstable);

  py::class_<MiCrit>(m, "MiCrit")
      .def_readonly("value", &MiCrit::value)
      .def_readonly("upper_estimate", &MiCrit::upper_estimate);

  py::class_<SteadyStateSet>(m, "SteadyStateSet")
      .def_readonly("E_minus", &SteadyStateSet::E_minus)
      .def_readonly("E_plus", &SteadyStateSet::E_plus)
      .def_readonly("M_minus", &SteadyStateSet::M_minus)
      .def_readonly("M_plus", &SteadyStateSet::M_plus)
      .def_readonly("minus_stability", &SteadyStateSet::minus_stability)
      .def_readonly("plus_stability", &SteadyStateSet::plus_stability)
      .def("positive_count", &SteadyStateSet::positive_count);

  m.def("mi_crit", &mi_crit, py::arg("p"));
  m.def("one_step_effort_level", &one_step_effort_level, py::arg("p"));
  m.def("steady_states", &steady_states, py::arg("Mi"), py::arg("p"));
  m.def("f_characteristic", &f_characteristic, py::arg("x"), py::arg("y"), py::arg("N"),
        py::arg("psi"));

  py::enum_<ScheduleKind>(m, "ScheduleKind")
      .value("Constant", ScheduleKind::Constant)
      .value("Periodic", ScheduleKind::Periodic)
      .value("Impulsive", ScheduleKind::Impulsive);

  py::class_<ReleaseSchedule>(m, "ReleaseSchedule")
      .def_static("constant", &ReleaseSchedule::constant, py::arg("u0"), py::arg("Mi0") = 0.0)
      .def_static("periodic", &ReleaseSchedule::periodic, py::arg("T"), py::arg("profile"),
                  py::arg("N_r") = std::nullopt, py::arg("Mi0") = 0.0)
      .def_static("impulsive", &ReleaseSchedule::impulsive, py::arg("Lambda"), py::arg("T"),
                  py::arg("N_r") = std::nullopt, py::arg("Mi0") = 0.0)
      .def_readonly("kind", &ReleaseSchedule::kind)
      .def_readonly("T", &ReleaseSchedule::T)
      .def_readonly("Lambda", &ReleaseSchedule::Lambda)
      .def_readonly("N_r", &ReleaseSchedule::N_r)
      .def("rate", &ReleaseSchedule::rate, py::arg("t"));

  py::class_<MiEnvelope>(m, "MiEnvelope")
      .def_readonly("Mi_lower", &MiEnvelope::Mi_lower)
      .def_readonly("Mi_upper", &MiEnvelope::Mi_upper)
      .def_readonly("Mi_limit", &MiEnvelope::Mi_limit);

  py::enum_<ThresholdVerdict>(m, "ThresholdVerdict")
      .value("GloballyStable0", ThresholdVerdict::GloballyStable0)
      .value("Bistable", ThresholdVerdict::Bistable)
      .value("Inconclusive", ThresholdVerdict::Inconclusive);

  m.def("mi_envelope", &mi_envelope, py::arg("schedule"), py::arg("mu_i"), py::arg("dt") = 0.1);
  m.def("extinction_threshold_check", &extinction_threshold_check, py::arg("schedule"),
        py::arg("p"), py::arg("dt") = 0.1);
  m.def("sufficiency_scale", &sufficiency_scale, py::arg("p"));
  m.def("sufficient_impulse", &sufficient_impulse, py::arg("T"), py::arg("p"));
  m.def("sufficient_period", &sufficient_period, py::arg("Lambda"), py::arg("p"));
  m.def("lambda_for_phi", &lambda_for_phi, py::arg("phi"), py::arg("T"), py::arg("p"));
  m.def("min_release_count", &min_release_count, py::arg("schedule"), py::arg("p"),
        py::arg("tau"), py::arg("dt") = 0.1);

  py::enum_<StopReason>(m, "StopReason")
      .value("Condition", StopReason::Condition)
      .value("MaxSteps", StopReason::MaxSteps);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("times", &Trajectory::times)
      .def_readonly("states", &Trajectory::states)
      .def_readonly("reason", &Trajectory::reason)
      .def_readonly("steps", &Trajectory::steps);

  m.def(
      "simulate",
      [](const ModelParams& p, const ReleaseSchedule& s, const State3& start, double dt,
         long steps, int stride) {
        const NsfdConfig cfg = make_nsfd_config(p, dt, true, steps);
        const State4 s0{start.E, start.M, s.Mi0, start.F, 0.0};
        return simulate(s0, s, cfg, p, {}, stride, true);
      },
      py::arg("p"), py::arg("schedule"), py::arg("start"), py::arg("dt") = 0.1,
      py::arg("steps") = 3650, py::arg("stride") = 1,
      "Controlled model from `start` (no sterile females) for `steps` NSFD steps.");

  py::enum_<MeshScaling>(m, "MeshScaling")
      .value("Equilibrium", MeshScaling::Equilibrium)
      .value("Raw", MeshScaling::Raw);

  py::class_<SeparatrixCloud>(m, "SeparatrixCloud")
      .def_readonly("points", &SeparatrixCloud::points)
      .def_readonly("epsilon", &SeparatrixCloud::epsilon)
      .def_readonly("mesh_n", &SeparatrixCloud::mesh_n)
      .def_readonly("fingerprint", &SeparatrixCloud::fingerprint);

  py::class_<DominanceTree>(m, "DominanceTree")
      .def(py::init<std::vector<State3>>(), py::arg("points"))
      .def("query_below", &DominanceTree::query_below, py::arg("x"))
      .def("__len__", &DominanceTree::size)
      .def("depth", &DominanceTree::depth);

  m.def("ray_bisection",
        [](const State3& v, double Mi, const ModelParams& p, double eps, double dt) {
          return ray_bisection(v, Mi, p, eps, make_nsfd_config(p, dt, false));
        },
        py::arg("v"), py::arg("Mi"), py::arg("p"), py::arg("eps") = 1e-2, py::arg("dt") = 0.1);
  m.def("build_cloud", &build_cloud, py::arg("p"), py::arg("Mi") = 0.0, py::arg("mesh_n") = 40,
        py::arg("eps") = 1e-2, py::arg("dt") = 0.1, py::arg("jobs") = 1,
        py::arg("scaling") = MeshScaling::Equilibrium, py::arg("jitter_seed") = std::nullopt,
        py::call_guard<py::gil_scoped_release>());
  m.def("cached_cloud", &cached_cloud, py::arg("p"), py::arg("mesh_n") = 40,
        py::arg("eps") = 1e-2, py::arg("dt") = 0.1, py::arg("jobs") = 1,
        py::arg("cache_dir") = "", py::arg("build_if_missing") = true,
        py::arg("scaling") = MeshScaling::Equilibrium, py::arg("jitter_seed") = std::nullopt,
        py::call_guard<py::gil_scoped_release>());
  m.def("save_cloud", &save_cloud, py::arg("cloud"), py::arg("path"));
  m.def("load_cloud", &load_cloud, py::arg("path"),
        py::arg("expected_fingerprint") = std::nullopt);
  m.def("linear_scan_below", &linear_scan_below, py::arg("points"), py::arg("x"));

  py::class_<UpperBound>(m, "UpperBound")
      .def_readonly("days", &UpperBound::days)
      .def_readonly("failed", &UpperBound::failed);

  py::class_<EntranceTime>(m, "EntranceTime")
      .def_readonly("entered", &EntranceTime::entered)
      .def_readonly("t", &EntranceTime::t)
      .def_readonly("steps", &EntranceTime::steps);

  py::class_<ControlledEntrance>(m, "ControlledEntrance")
      .def_readonly("entered", &ControlledEntrance::entered)
      .def_readonly("t_star", &ControlledEntrance::t_star)
      .def_readonly("n_tot", &ControlledEntrance::n_tot)
      .def_readonly("rho_tot", &ControlledEntrance::rho_tot)
      .def_readonly("female_ratio", &ControlledEntrance::female_ratio)
      .def_readonly("steps", &ControlledEntrance::steps);

  m.def("tau_lower_bound", &tau_lower_bound, py::arg("p"));
  m.def("tau_upper_bound", &tau_upper_bound, py::arg("Mi"), py::arg("p"));
  m.def("tau_upper_bound_eps", &tau_upper_bound_eps, py::arg("eps"), py::arg("p"));
  m.def("tau_numeric", &tau_numeric, py::arg("Mi"), py::arg("p"), py::arg("tree"),
        py::arg("dt") = 0.1, py::arg("max_steps") = 300000,
        py::call_guard<py::gil_scoped_release>());
  m.def("entrance_time_controlled", &entrance_time_controlled, py::arg("schedule"),
        py::arg("p"), py::arg("tree"), py::arg("with_Fst") = true, py::arg("dt") = 0.1,
        py::arg("max_steps") = 300000, py::call_guard<py::gil_scoped_release>());
  m.def("constant_total_effort", &constant_total_effort, py::arg("Mi"), py::arg("t"),
        py::arg("p"));

  m.def(
      "model_from_config",
      [](const std::string& text) { return parse_config(text, "<python>").model.resolve(); },
      py::arg("text"), "Parameters from INI text with a [model] section.");
}
