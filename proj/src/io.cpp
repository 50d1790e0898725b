#include "rbsde/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rbsde {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> per_period(const json& j, int periods, const char* field) {
  std::vector<double> out;
  if (j.is_number()) {
    out.assign(periods, j.get<double>());
  } else if (j.is_array()) {
    out = j.get<std::vector<double>>();
    if (static_cast<int>(out.size()) != periods) {
      throw InputError(std::string(field) + " list must have one entry per period");
    }
  } else {
    throw InputError(std::string(field) + " must be a number or a list");
  }
  return out;
}

Obstacle resolve_obstacle(const json& j, const EventTree& tree) {
  if (!j.is_object() || !j.contains("type")) {
    throw InputError("obstacle must be an object with a type");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "constant") {
    return constant_obstacle(tree, j.at("value").get<double>());
  }
  if (type == "terminal_payoff") {
    const double interior = j.value("interior", 0.0);
    if (j.contains("by_event_count")) {
      const auto payoff = j.at("by_event_count").get<std::vector<double>>();
      return terminal_payoff_obstacle(tree, payoff, interior);
    }
    if (j.contains("by_leaf")) {
      const auto payoff = j.at("by_leaf").get<std::vector<double>>();
      return terminal_payoff_obstacle_by_leaf(tree, payoff, interior);
    }
    throw InputError("terminal_payoff obstacle needs by_event_count or by_leaf");
  }
  if (type == "table") {
    Obstacle obs;
    obs.at = j.at("at").get<std::vector<double>>();
    obs.post = j.at("post").get<std::vector<double>>();
    if (static_cast<int>(obs.at.size()) != tree.num_nodes() ||
        static_cast<int>(obs.post.size()) != tree.num_nodes()) {
      throw InputError("table obstacle needs at/post values for every node (node order)");
    }
    return obs;
  }
  throw InputError("unknown obstacle type: " + type);
}

}  // namespace

LoadedScenario load_scenario_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("scenario parse error: ") + e.what());
  }
  try {
    LoadedScenario s;
    s.spec.horizon = j.at("horizon").get<double>();
    s.spec.periods = j.at("periods").get<int>();
    if (s.spec.periods < 1) throw InputError("periods must be >= 1");
    s.spec.marks = j.at("marks").get<std::vector<std::string>>();
    s.spec.event_prob = per_period(j.at("event_prob"), s.spec.periods, "event_prob");

    const json& mk = j.at("mark_kernel");
    if (mk.is_array() && !mk.empty() && mk.front().is_array()) {
      s.spec.mark_kernel = mk.get<std::vector<std::vector<double>>>();
      if (static_cast<int>(s.spec.mark_kernel.size()) != s.spec.periods) {
        throw InputError("mark_kernel must list one kernel per period");
      }
    } else {
      s.spec.mark_kernel.assign(s.spec.periods, mk.get<std::vector<double>>());
    }
    s.spec.seed = j.value("seed", std::uint64_t{0});
    s.seed = s.spec.seed;

    s.tree = build_tree(s.spec);
    s.obstacle = resolve_obstacle(j.at("obstacle"), s.tree);
    const auto report = validate_obstacle(s.tree, s.obstacle);
    if (!report.valid()) {
      throw InputError("invalid obstacle: " + report.violations.front().what +
                       " at node " + std::to_string(report.violations.front().node));
    }

    s.frozen_gain.assign(s.tree.num_nodes(), 0.0);
    if (j.contains("driver")) {
      const json& d = j.at("driver");
      const std::string type = d.at("type").get<std::string>();
      if (type == "affine") {
        const double a = d.value("a", 0.0);
        auto b = d.value("b", std::vector<double>(s.tree.num_marks(), 0.0));
        if (static_cast<int>(b.size()) != s.tree.num_marks()) {
          throw InputError("driver b must have one coefficient per mark");
        }
        auto g0 = per_period(d.value("g0", json(0.0)), s.spec.periods, "g0");
        s.driver = std::make_unique<AffineDriver>(a, std::move(b), std::move(g0));
        s.frozen = false;
      } else if (type == "frozen") {
        const json& g = d.at("g");
        if (g.is_number()) {
          s.frozen_gain.assign(s.tree.num_nodes(), g.get<double>());
        } else {
          s.frozen_gain = g.get<std::vector<double>>();
          if (static_cast<int>(s.frozen_gain.size()) != s.tree.num_nodes()) {
            throw InputError("frozen driver g must be scalar or one rate per node");
          }
        }
      } else {
        throw InputError("unknown driver type: " + type);
      }
    }
    if (s.frozen) {
      s.driver = std::make_unique<FrozenGainDriver>(s.frozen_gain);
    }
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("scenario field error: ") + e.what());
  }
}

LoadedScenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario_json(buf.str());
}

void write_solution_csv(std::ostream& os, const EventTree& tree,
                        const Obstacle& obs, const RbsdeSolution& sol) {
  os << "row,level,node,t,xi_at,xi_post,y_at,y_post,delta_a,delta_c,m\n";
  for (int node = 0; node < tree.num_nodes(); ++node) {
    const double da = tree.is_leaf(node) ? 0.0 : sol.parts.delta_a[node];
    os << "node," << tree.level(node) << ',' << node << ','
       << num(tree.time_of(node)) << ',' << num(obs.at[node]) << ','
       << num(obs.post[node]) << ',' << num(sol.y.at[node]) << ','
       << num(sol.y.post[node]) << ',' << num(da) << ','
       << num(sol.parts.delta_c[node]) << ','
       << num(sol.parts.martingale[node]) << '\n';
  }
  os << "row,level,node,t,mark,z\n";
  for (int node = 0; node < tree.num_interior(); ++node) {
    for (int j = 0; j < tree.num_marks(); ++j) {
      os << "z," << tree.level(node) << ',' << node << ','
         << num(tree.time_of_level(tree.level(node) + 1)) << ','
         << tree.marks()[j] << ',' << num(sol.z.at(node, j)) << '\n';
    }
  }
}

void write_diagnostics_json(std::ostream& os, const SolveDiagnostics& diag,
                            std::uint64_t seed) {
  json j;
  j["iterations"] = diag.iterations;
  j["converged"] = diag.converged;
  j["seed"] = seed;
  j["parameters"] = {{"beta", diag.beta},
                     {"eps", diag.eps},
                     {"tol", diag.tol},
                     {"max_iter", diag.max_iter},
                     {"beta_overridden", diag.beta_overridden},
                     {"eps_overridden", diag.eps_overridden},
                     {"lipschitz", diag.lipschitz}};
  j["weighted_distances"] = diag.weighted_distances;
  j["sup_distances"] = diag.sup_distances;
  j["contraction_ratios"] = diag.ratios;
  j["final_ratio"] = diag.final_ratio;
  os << j.dump(2) << '\n';
}

void write_verify_json(std::ostream& os, const VerifyArtifacts& a) {
  json j;
  auto check = [](const VerifyReport::Check& c) {
    return json{{"pass", c.pass}, {"worst", c.worst}, {"node", c.where}};
  };
  j["definition"] = {{"reconstruction", check(a.definition.reconstruction)},
                     {"domination", check(a.definition.domination)},
                     {"a_part", check(a.definition.a_part)},
                     {"c_part", check(a.definition.c_part)}};
  j["flat_off"] = {{"pass", a.flat_off.all_ok()},
                   {"paths", a.flat_off.paths.size()}};
  j["ito_identity"] = {{"max_defect", a.ito_defect}, {"pass", a.ito_defect < 1e-10}};
  if (a.oracle_value) {
    j["oracle"] = {{"value", *a.oracle_value}, {"gap", *a.oracle_gap}};
  } else {
    j["oracle"] = {{"skipped", "enumeration beyond guard"}};
  }
  j["all_pass"] = a.all_pass;
  os << j.dump(2) << '\n';
}

void write_compare_json(std::ostream& os, const CompareReport& report,
                        double y1_root, double y2_root) {
  json j;
  j["obstacles_ordered"] = report.obstacles_ordered;
  j["driver_hypothesis_ok"] = report.driver_hypothesis_ok;
  j["in_hypothesis"] = report.in_hypothesis();
  j["conclusion_holds"] = report.conclusion_holds;
  j["max_violation"] = report.max_violation;
  j["worst_node"] = report.worst_node;
  j["tolerance"] = report.tolerance;
  j["y1_root"] = y1_root;
  j["y2_root"] = y2_root;
  os << j.dump(2) << '\n';
}

}  // namespace rbsde
