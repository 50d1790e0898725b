#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>

#include "rbsde/io.hpp"

namespace py = pybind11;
using namespace rbsde;

namespace {

py::dict verify_to_dict(const VerifyReport& report) {
  auto check = [](const VerifyReport::Check& c) {
    py::dict d;
    d["pass"] = c.pass;
    d["worst"] = c.worst;
    d["node"] = c.where;
    return d;
  };
  py::dict d;
  d["reconstruction"] = check(report.reconstruction);
  d["domination"] = check(report.domination);
  d["a_part"] = check(report.a_part);
  d["c_part"] = check(report.c_part);
  d["all_pass"] = report.all_pass();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Scenario-tree laboratory for reflected backward stochastic equations";
  m.attr("__version__") = "0.1.0";

  py::class_<ScenarioSpec>(m, "ScenarioSpec")
      .def(py::init<>())
      .def_static("uniform", &ScenarioSpec::uniform, py::arg("horizon"),
                  py::arg("periods"), py::arg("marks"), py::arg("event_prob"))
      .def_readwrite("horizon", &ScenarioSpec::horizon)
      .def_readwrite("periods", &ScenarioSpec::periods)
      .def_readwrite("marks", &ScenarioSpec::marks)
      .def_readwrite("event_prob", &ScenarioSpec::event_prob)
      .def_readwrite("mark_kernel", &ScenarioSpec::mark_kernel)
      .def_readwrite("seed", &ScenarioSpec::seed);

  py::class_<EventTree>(m, "EventTree")
      .def_property_readonly("num_nodes", &EventTree::num_nodes)
      .def_property_readonly("num_leaves", &EventTree::num_leaves)
      .def_property_readonly("periods", &EventTree::periods)
      .def_property_readonly("num_marks", &EventTree::num_marks)
      .def_property_readonly("horizon", &EventTree::horizon)
      .def("level", &EventTree::level)
      .def("parent", &EventTree::parent)
      .def("branch", &EventTree::branch)
      .def("cond_prob", &EventTree::cond_prob)
      .def("path_prob", &EventTree::path_prob)
      .def("time_of", &EventTree::time_of)
      .def("delta_k", &EventTree::delta_k)
      .def("cum_k", &EventTree::cum_k)
      .def("is_leaf", &EventTree::is_leaf);

  py::class_<Obstacle>(m, "Obstacle")
      .def(py::init([](std::vector<double> at, std::vector<double> post) {
             return Obstacle{std::move(at), std::move(post)};
           }),
           py::arg("at"), py::arg("post"))
      .def_readwrite("at", &Obstacle::at)
      .def_readwrite("post", &Obstacle::post);

  py::class_<LadlagProcess>(m, "LadlagProcess")
      .def_readwrite("at", &LadlagProcess::at)
      .def_readwrite("post", &LadlagProcess::post);

  py::class_<AffineDriver>(m, "AffineDriver")
      .def(py::init<double, std::vector<double>, std::vector<double>>(),
           py::arg("a"), py::arg("b"), py::arg("g0_per_period"))
      .def("lipschitz", &AffineDriver::lipschitz);

  py::class_<PicardParams>(m, "PicardParams")
      .def(py::init<>())
      .def_readwrite("beta", &PicardParams::beta)
      .def_readwrite("eps", &PicardParams::eps)
      .def_readwrite("tol", &PicardParams::tol)
      .def_readwrite("max_iter", &PicardParams::max_iter);

  py::class_<RbsdeSolution>(m, "Solution")
      .def_property_readonly("y_at",
                             [](const RbsdeSolution& s) { return s.y.at; })
      .def_property_readonly("y_post",
                             [](const RbsdeSolution& s) { return s.y.post; })
      .def_property_readonly("z",
                             [](const RbsdeSolution& s) { return s.z.values; })
      .def_property_readonly(
          "martingale", [](const RbsdeSolution& s) { return s.parts.martingale; })
      .def_property_readonly("a_cum",
                             [](const RbsdeSolution& s) { return s.parts.a_cum; })
      .def_property_readonly("c_cum",
                             [](const RbsdeSolution& s) { return s.parts.c_cum; })
      .def_property_readonly("root_value",
                             [](const RbsdeSolution& s) { return s.y.at[0]; })
      .def_property_readonly("iterations", [](const RbsdeSolution& s) {
        return s.diagnostics.iterations;
      })
      .def_property_readonly("converged", [](const RbsdeSolution& s) {
        return s.diagnostics.converged;
      });

  py::class_<FlatOffReport>(m, "FlatOffResult")
      .def_property_readonly("all_ok", &FlatOffReport::all_ok);

  m.def("build_tree",
        [](const ScenarioSpec& spec) { return build_tree(spec); },
        py::arg("spec"));
  m.def("constant_obstacle", &constant_obstacle, py::arg("tree"), py::arg("value"));
  m.def(
      "terminal_payoff_obstacle",
      [](const EventTree& tree, std::vector<double> by_event_count, double interior) {
        return terminal_payoff_obstacle(tree, by_event_count, interior);
      },
      py::arg("tree"), py::arg("by_event_count"), py::arg("interior") = 0.0);
  m.def(
      "validate_obstacle",
      [](const EventTree& tree, const Obstacle& obs) {
        const auto report = validate_obstacle(tree, obs);
        py::list violations;
        for (const auto& v : report.violations) {
          violations.append(py::make_tuple(v.node, v.what));
        }
        return py::make_tuple(report.valid(), violations);
      },
      py::arg("tree"), py::arg("obstacle"));
  m.def(
      "solve_frozen",
      [](const EventTree& tree, const Obstacle& obs, std::vector<double> gain) {
        if (gain.empty()) gain.assign(tree.num_nodes(), 0.0);
        return solve_frozen(tree, obs, gain);
      },
      py::arg("tree"), py::arg("obstacle"),
      py::arg("gain_rate") = std::vector<double>{});
  m.def(
      "picard_solve",
      [](const EventTree& tree, const Obstacle& obs, const AffineDriver& driver,
         const PicardParams& params) {
        return picard_solve(tree, obs, driver, params);
      },
      py::arg("tree"), py::arg("obstacle"), py::arg("driver"),
      py::arg("params") = PicardParams{});
  m.def(
      "verify_solution",
      [](const EventTree& tree, const RbsdeSolution& sol, const Obstacle& obs,
         const AffineDriver& driver) {
        return verify_to_dict(verify_solution(tree, sol, obs, driver));
      },
      py::arg("tree"), py::arg("solution"), py::arg("obstacle"), py::arg("driver"));
  m.def(
      "verify_frozen",
      [](const EventTree& tree, const RbsdeSolution& sol, const Obstacle& obs,
         std::vector<double> gain) {
        if (gain.empty()) gain.assign(tree.num_nodes(), 0.0);
        FrozenGainDriver driver(std::move(gain));
        return verify_to_dict(verify_solution(tree, sol, obs, driver));
      },
      py::arg("tree"), py::arg("solution"), py::arg("obstacle"),
      py::arg("gain_rate") = std::vector<double>{});
  m.def(
      "brute_force_value",
      [](const EventTree& tree, const Obstacle& obs, std::vector<double> gain,
         int start) {
        if (gain.empty()) gain.assign(tree.num_nodes(), 0.0);
        return brute_force_value(tree, obs, gain, start);
      },
      py::arg("tree"), py::arg("obstacle"),
      py::arg("gain_rate") = std::vector<double>{}, py::arg("start") = 0);
  m.def(
      "epsilon_optimal_value",
      [](const EventTree& tree, const RbsdeSolution& sol, const Obstacle& obs,
         std::vector<double> gain, int start, double eps) {
        if (gain.empty()) gain.assign(tree.num_nodes(), 0.0);
        const auto rule = epsilon_optimal_time(tree, sol.y, obs, start, eps);
        return rule_value(tree, obs, gain, rule, start);
      },
      py::arg("tree"), py::arg("solution"), py::arg("obstacle"),
      py::arg("gain_rate") = std::vector<double>{}, py::arg("start") = 0,
      py::arg("eps") = 0.0);
  m.def(
      "s2_norm",
      [](const EventTree& tree, std::vector<double> at, std::vector<double> post,
         double beta) {
        return s2_norm(tree, LadlagProcess{std::move(at), std::move(post)}, beta);
      },
      py::arg("tree"), py::arg("at"), py::arg("post"), py::arg("beta") = 0.0);
  m.def(
      "h2_norm",
      [](const EventTree& tree, std::vector<double> values, double beta) {
        PredictableField z;
        z.marks = tree.num_marks();
        z.values = std::move(values);
        return h2_norm(tree, z, beta);
      },
      py::arg("tree"), py::arg("values"), py::arg("beta") = 0.0);

  py::class_<LoadedScenario>(m, "LoadedScenario")
      .def_readonly("tree", &LoadedScenario::tree)
      .def_readonly("obstacle", &LoadedScenario::obstacle)
      .def_readonly("frozen", &LoadedScenario::frozen)
      .def_readonly("frozen_gain", &LoadedScenario::frozen_gain)
      .def("solve", [](const LoadedScenario& s) {
        if (s.frozen) return solve_frozen(s.tree, s.obstacle, s.frozen_gain);
        return picard_solve(s.tree, s.obstacle, *s.driver, PicardParams{});
      });
  m.def("load_scenario",
        [](const std::string& path_or_json) {
          if (!path_or_json.empty() && path_or_json.front() == '{') {
            return load_scenario_json(path_or_json);
          }
          return load_scenario_file(path_or_json);
        },
        py::arg("path_or_json"));

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NonConvergenceError>(m, "NonConvergenceError",
                                              PyExc_RuntimeError);
  py::register_exception<OracleTooLargeError>(m, "OracleTooLargeError",
                                              PyExc_RuntimeError);
}
