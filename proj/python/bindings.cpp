#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <variant>

#include "aoisched/io.hpp"
#include "aoisched/policies.hpp"
#include "aoisched/sim.hpp"
#include "aoisched/verify.hpp"

namespace py = pybind11;
using namespace aoisched;

namespace {

// Solve output together with the parameters that produced it, so it can be
// written back out as a policy document.
struct PySolve {
  SolveResult result;
  SolveParams params;
};

using ThresholdDict = std::map<std::pair<int, int>, int>;
using PolicyArg = std::variant<std::string, Policy, ThresholdDict>;

ThresholdTable to_table(const ThresholdDict& dict, const ModelParams& m) {
  ThresholdTable t(m.k, m.delta_max);
  for (const auto& [key, tau] : dict) t.set(key.first, key.second, tau);
  return t;
}

PolicySpec to_spec(const PolicyArg& arg, const ModelParams& m) {
  if (const auto* name = std::get_if<std::string>(&arg)) {
    if (*name != "persistent") throw ValidityError("policy name must be 'persistent'");
    return PolicySpec::persistent();
  }
  if (const auto* pi = std::get_if<Policy>(&arg)) return PolicySpec::optimal_table(*pi);
  return PolicySpec::threshold(to_table(std::get<ThresholdDict>(arg), m));
}

py::list reports_to_list(const std::vector<ViolationReport>& reports) {
  py::list out;
  for (const auto& r : reports) {
    py::list first;
    for (const auto& v : r.violations)
      first.append(py::make_tuple(v.lhs, v.rhs ? py::cast(*v.rhs) : py::none(), v.lhs_value, v.rhs_value, v.slack));
    py::dict d;
    d["property"] = r.property_id;
    d["passed"] = r.passed();
    d["informational"] = r.informational;
    d["violation_count"] = r.violation_count;
    d["pairs_checked"] = r.pairs_checked;
    d["violations"] = first;
    out.append(d);
  }
  return out;
}

VerifyOptions verify_options(double epsilon, std::optional<int> margin) {
  VerifyOptions o;
  o.epsilon = epsilon;
  o.margin = margin;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Age-of-information scheduling MDP: solver, structural checks and simulator";

  auto base = py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
  py::register_exception<ValidityError>(mod, "ValidityError", PyExc_ValueError);
  py::register_exception<FormatError>(mod, "FormatError", PyExc_ValueError);
  py::register_exception<StructureError>(mod, "StructureError", base.ptr());
  py::register_exception<CoverageError>(mod, "CoverageError", base.ptr());
  py::register_exception<ConvergenceError>(mod, "ConvergenceError", base.ptr());

  py::class_<State>(mod, "State")
      .def(py::init<int, int, int>(), py::arg("delta"), py::arg("d") = 0, py::arg("l") = 0)
      .def(py::init([](const py::tuple& t) {
        if (t.size() != 3) throw ValidityError("a state tuple needs (delta, d, l)");
        return State{t[0].cast<int>(), t[1].cast<int>(), t[2].cast<int>()};
      }))
      .def_readonly("delta", &State::delta)
      .def_readonly("d", &State::d)
      .def_readonly("l", &State::l)
      .def("__eq__", [](const State& a, const State& b) { return a == b; })
      .def("__lt__", [](const State& a, const State& b) { return a < b; })
      .def("__hash__", [](const State& s) { return py::hash(py::make_tuple(s.delta, s.d, s.l)); })
      .def("__iter__", [](const State& s) { return py::iter(py::make_tuple(s.delta, s.d, s.l)); })
      .def("__repr__", [](const State& s) { return "State" + to_string(s); });
  py::implicitly_convertible<py::tuple, State>();

  py::enum_<Action>(mod, "Action")
      .value("CONTINUE", Action::kContinue)
      .value("RESTART", Action::kRestart);

  py::class_<ModelParams>(mod, "ModelParams")
      .def(py::init([](int k, double p, int delta_max) { return make_params(k, p, delta_max); }), py::arg("k"),
           py::arg("p"), py::arg("delta_max") = 0)
      .def_readonly("k", &ModelParams::k)
      .def_readonly("p", &ModelParams::p)
      .def_readonly("delta_max", &ModelParams::delta_max)
      .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; })
      .def("__repr__", [](const ModelParams& m) {
        return "ModelParams(k=" + std::to_string(m.k) + ", p=" + format_double(m.p) +
               ", delta_max=" + std::to_string(m.delta_max) + ")";
      });

  mod.def("make_params", &make_params, py::arg("k"), py::arg("p"), py::arg("delta_max") = 0);
  mod.def("default_delta_max", &default_delta_max, py::arg("k"), py::arg("p"));
  mod.def("count_states", &count_states, py::arg("model"));
  mod.def("enumerate_states", &enumerate_states, py::arg("model"));
  mod.def(
      "transition",
      [](const State& s, Action a, const ModelParams& m) {
        std::vector<std::pair<State, double>> out;
        for (const auto& e : transition(s, a, m)) out.emplace_back(e.state, e.prob);
        return out;
      },
      py::arg("state"), py::arg("action"), py::arg("model"));

  py::class_<ValueTable>(mod, "ValueTable")
      .def_property_readonly("model", &ValueTable::params)
      .def("__len__", &ValueTable::size)
      .def("__getitem__", &ValueTable::at)
      .def("states", [](const ValueTable& v) { return enumerate_states(v.params()); })
      .def("to_numpy", [](const ValueTable& v) {
        return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.values().data());
      });

  py::class_<Policy>(mod, "Policy")
      .def_property_readonly("model", &Policy::params)
      .def("__len__", &Policy::size)
      .def("__getitem__", &Policy::at)
      .def("__setitem__", &Policy::set)
      .def("__eq__", [](const Policy& a, const Policy& b) { return a == b; })
      .def("states", [](const Policy& pi) { return enumerate_states(pi.params()); })
      .def("to_numpy", [](const Policy& pi) {
        py::array_t<std::uint8_t> out(static_cast<py::ssize_t>(pi.size()));
        auto w = out.mutable_unchecked<1>();
        for (std::size_t i = 0; i < pi.size(); ++i) w(static_cast<py::ssize_t>(i)) = to_int(pi[i]);
        return out;
      });

  py::class_<SolveReport>(mod, "SolveReport")
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("final_span", &SolveReport::final_span)
      .def_readonly("average_cost", &SolveReport::average_cost)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("argmin_evaluations", &SolveReport::argmin_evaluations)
      .def_readonly("max_contraction_ratio", &SolveReport::max_contraction_ratio)
      .def_readonly("damping", &SolveReport::damping);

  py::class_<PySolve>(mod, "SolveResult")
      .def_property_readonly("values", [](const PySolve& s) { return s.result.values; })
      .def_property_readonly("policy", [](const PySolve& s) { return s.result.policy; })
      .def_property_readonly("report", [](const PySolve& s) { return s.result.report; })
      .def_property_readonly("model", [](const PySolve& s) { return s.result.values.params(); });

  mod.def(
      "solve",
      [](const ModelParams& m, std::optional<double> alpha, double tol, int max_iter, bool structured,
         std::optional<double> damping) {
        SolveParams sp;
        sp.alpha = alpha;
        sp.tol = tol;
        sp.max_iter = max_iter;
        sp.use_structure = structured;
        sp.damping = damping;
        py::gil_scoped_release release;
        return PySolve{solve(m, sp), sp};
      },
      py::arg("model"), py::arg("alpha") = py::none(), py::arg("tol") = 1e-9, py::arg("max_iter") = 100000,
      py::arg("structured") = false, py::arg("damping") = py::none(),
      "Relative value iteration (alpha=None) or discounted value iteration.");

  mod.def(
      "evaluate_policy_exact",
      [](const Policy& pi) {
        py::gil_scoped_release release;
        return evaluate_policy_exact(pi);
      },
      py::arg("policy"));
  mod.def("persistent_policy", &persistent_policy, py::arg("model"));
  mod.def("persistent_avg_aoi", &persistent_avg_aoi, py::arg("k"), py::arg("p"));
  mod.def(
      "extract_thresholds",
      [](const Policy& pi) {
        ThresholdDict out;
        extract_thresholds(pi).for_each([&](int delta0, int d, int tau) { out[{delta0, d}] = tau; });
        return out;
      },
      py::arg("policy"), "Map (delta0, d) -> tau.");
  mod.def(
      "threshold_policy", [](const ThresholdDict& t, const ModelParams& m) { return threshold_policy(to_table(t, m), m); },
      py::arg("thresholds"), py::arg("model"));

  mod.def(
      "check_value_structure",
      [](const ValueTable& v, double epsilon, std::optional<int> margin) {
        return reports_to_list(check_value_structure(v, verify_options(epsilon, margin)));
      },
      py::arg("values"), py::arg("epsilon") = 1e-9, py::arg("margin") = py::none());
  mod.def(
      "check_policy_structure",
      [](const Policy& pi, double epsilon, std::optional<int> margin) {
        return reports_to_list(check_policy_structure(pi, verify_options(epsilon, margin)));
      },
      py::arg("policy"), py::arg("epsilon") = 1e-9, py::arg("margin") = py::none());

  mod.def(
      "simulate",
      [](const PolicyArg& policy, const ModelParams& m, std::int64_t horizon, std::vector<std::uint64_t> seeds,
         std::optional<std::int64_t> burn_in) {
        const PolicySpec spec = to_spec(policy, m);
        SimConfig cfg;
        cfg.horizon = horizon;
        cfg.seeds = std::move(seeds);
        cfg.burn_in = burn_in;
        SimResult r;
        {
          py::gil_scoped_release release;
          r = simulate(spec, m, cfg);
        }
        py::dict d;
        d["policy"] = spec.name();
        d["mean_aoi"] = r.mean_aoi;
        d["stderr"] = r.std_error;
        d["per_seed_means"] = r.per_seed_means;
        d["slots_simulated"] = r.slots_simulated;
        d["clamp_events"] = r.clamp_events;
        d["generator"] = r.generator;
        return d;
      },
      py::arg("policy"), py::arg("model"), py::arg("horizon") = 1000000,
      py::arg("seeds") = std::vector<std::uint64_t>{1}, py::arg("burn_in") = py::none(),
      "policy is 'persistent', a Policy, or a {(delta0, d): tau} dict.");
  mod.def(
      "trace",
      [](const PolicyArg& policy, const ModelParams& m, std::int64_t slots, std::uint64_t seed) {
        py::list out;
        for (const auto& pt : trace(to_spec(policy, m), m, slots, seed))
          out.append(py::make_tuple(pt.t, pt.state.delta, pt.state.d, pt.state.l, to_int(pt.action),
                                    to_string(pt.outcome)));
        return out;
      },
      py::arg("policy"), py::arg("model"), py::arg("slots"), py::arg("seed") = 1,
      "Rows of (t, delta, d, l, action, outcome).");

  mod.def(
      "save_policy_document",
      [](const PySolve& s, const std::filesystem::path& path) {
        save_policy_document(make_policy_document(s.result, s.params), path);
      },
      py::arg("result"), py::arg("path"));
  mod.def(
      "load_policy_document",
      [](const std::filesystem::path& path) {
        PolicyDocument doc = load_policy_document(path);
        PySolve s;
        s.params.alpha = doc.solve.alpha;
        s.params.tol = doc.solve.tol;
        s.result.values = std::move(doc.values);
        s.result.policy = std::move(doc.policy);
        s.result.report.iterations = doc.solve.iterations;
        s.result.report.average_cost = doc.solve.average_cost;
        s.result.report.converged = doc.solve.converged;
        return s;
      },
      py::arg("path"));
}
