#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rbsde/io.hpp"

namespace fs = std::filesystem;
using namespace rbsde;

namespace {

enum ExitCode { kOk = 0, kCheckFailed = 1, kInputError = 2, kNonConvergence = 3 };

int log_level() {
  const char* env = std::getenv("RBSDE_LOG");
  if (env == nullptr) return 0;
  const std::string v = env;
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

std::mutex log_mutex;

void log_info(const std::string& msg) {
  if (log_level() >= 1) {
    std::scoped_lock lock(log_mutex);
    std::cerr << "[rbsde] " << msg << '\n';
  }
}

struct CommonOpts {
  std::vector<std::string> inputs;
  std::string out_dir = ".";
  std::optional<double> beta, eps;
  double tol = 1e-10;
  int max_iter = 200;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool multi_input = true) {
  if (multi_input) {
    cmd->add_option("inputs", opts.inputs, "scenario file(s)")->required()->expected(-1);
  } else {
    cmd->add_option("inputs", opts.inputs, "scenario file")->required()->expected(1);
  }
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--beta", opts.beta, "weight rate override");
  cmd->add_option("--eps", opts.eps, "contraction parameter override");
  cmd->add_option("--tol", opts.tol, "fixed-point tolerance");
  cmd->add_option("--max-iter", opts.max_iter, "fixed-point iteration cap");
  cmd->add_option("--jobs", opts.jobs, "parallel instances in campaign mode");
  cmd->add_option("--seed", opts.seed, "seed override");
}

PicardParams picard_params(const CommonOpts& opts) {
  PicardParams p;
  p.beta = opts.beta;
  p.eps = opts.eps;
  p.tol = opts.tol;
  p.max_iter = opts.max_iter;
  return p;
}

RbsdeSolution solve_loaded(const LoadedScenario& s, const CommonOpts& opts) {
  if (s.frozen) return solve_frozen(s.tree, s.obstacle, s.frozen_gain);
  return picard_solve(s.tree, s.obstacle, *s.driver, picard_params(opts));
}

fs::path instance_dir(const CommonOpts& opts, const std::string& input,
                      bool campaign) {
  fs::path dir = opts.out_dir;
  if (campaign) dir /= fs::path(input).stem();
  fs::create_directories(dir);
  return dir;
}

int run_solve_one(const std::string& input, const CommonOpts& opts, bool campaign) {
  LoadedScenario s = load_scenario_file(input);
  if (opts.seed) s.seed = *opts.seed;
  RbsdeSolution sol = solve_loaded(s, opts);
  const fs::path dir = instance_dir(opts, input, campaign);
  {
    std::ofstream csv(dir / "solution.csv", std::ios::binary);
    write_solution_csv(csv, s.tree, s.obstacle, sol);
  }
  {
    std::ofstream js(dir / "diagnostics.json", std::ios::binary);
    write_diagnostics_json(js, sol.diagnostics, s.seed);
  }
  log_info(input + ": root value " + std::to_string(sol.y.at[0]));
  return kOk;
}

int run_verify_one(const std::string& input, const CommonOpts& opts, bool campaign) {
  LoadedScenario s = load_scenario_file(input);
  RbsdeSolution sol = solve_loaded(s, opts);

  VerifyArtifacts artifacts;
  artifacts.definition = verify_solution(s.tree, sol, s.obstacle, *s.driver);

  const StoppingRule rule = epsilon_optimal_time(s.tree, sol.y, s.obstacle, 0, 0.0);
  artifacts.flat_off =
      check_flat_off(s.tree, sol.parts, sol.y, s.obstacle, rule, 0.0);

  const auto dec = solution_decomposition(s.tree, sol);
  artifacts.ito_defect = ito_identity_check(s.tree, sol.y, dec, 0.0);

  // Root value against exhaustive stopping-rule enumeration, when feasible.
  try {
    std::vector<double> gains(s.tree.num_nodes(), 0.0);
    for (int node = 0; node < s.tree.num_interior(); ++node) {
      gains[node] = s.driver->eval(s.tree, node, sol.y.at[node], sol.z.row(node));
    }
    const double oracle = brute_force_value(s.tree, s.obstacle, gains);
    artifacts.oracle_value = oracle;
    artifacts.oracle_gap = std::abs(oracle - sol.y.at[0]);
  } catch (const OracleTooLargeError&) {
  }

  artifacts.all_pass = artifacts.definition.all_pass() &&
                       artifacts.flat_off.all_ok() &&
                       artifacts.ito_defect < 1e-10 &&
                       (!artifacts.oracle_gap || *artifacts.oracle_gap <= 1e-8);

  const fs::path dir = instance_dir(opts, input, campaign);
  std::ofstream js(dir / "verify.json", std::ios::binary);
  write_verify_json(js, artifacts);
  return artifacts.all_pass ? kOk : kCheckFailed;
}

int run_campaign(const CommonOpts& opts,
                 int (*runner)(const std::string&, const CommonOpts&, bool)) {
  const bool campaign = opts.inputs.size() > 1;
  std::atomic<int> next{0};
  std::atomic<int> worst{kOk};
  const int jobs = std::max(1, std::min<int>(opts.jobs, opts.inputs.size()));

  auto work = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= static_cast<int>(opts.inputs.size())) break;
      int code;
      try {
        code = runner(opts.inputs[i], opts, campaign);
      } catch (const InputError& e) {
        std::scoped_lock lock(log_mutex);
        std::cerr << "error: " << opts.inputs[i] << ": " << e.what() << '\n';
        code = kInputError;
      } catch (const NonConvergenceError& e) {
        std::scoped_lock lock(log_mutex);
        std::cerr << "error: " << opts.inputs[i] << ": " << e.what() << " (ratios:";
        const auto& d = e.distances;
        for (std::size_t k = 1; k < d.size() && k < 8; ++k) {
          std::cerr << ' ' << (d[k - 1] > 0 ? d[k] / d[k - 1] : 0.0);
        }
        std::cerr << ")\n";
        code = kNonConvergence;
      } catch (const std::exception& e) {
        std::scoped_lock lock(log_mutex);
        std::cerr << "error: " << opts.inputs[i] << ": " << e.what() << '\n';
        code = kInputError;
      }
      int cur = worst.load();
      while (code > cur && !worst.compare_exchange_weak(cur, code)) {
      }
    }
  };

  if (jobs == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return worst.load();
}

int run_compare(const std::string& input, const CommonOpts& opts) {
  std::ifstream in(input);
  if (!in) throw InputError("cannot open scenario file: " + input);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("scenario parse error: ") + e.what());
  }
  if (!j.contains("first") || !j.contains("second")) {
    throw InputError("compare needs a file with 'first' and 'second' scenarios");
  }
  LoadedScenario s1 = load_scenario_json(j.at("first").dump());
  LoadedScenario s2 = load_scenario_json(j.at("second").dump());
  for (const char* field : {"horizon", "periods", "marks", "event_prob", "mark_kernel"}) {
    if (j.at("first").value(field, nlohmann::json()) !=
        j.at("second").value(field, nlohmann::json())) {
      throw InputError(std::string("compare scenarios must share the tree; '") +
                       field + "' differs");
    }
  }

  const CompareReport report = compare(s1.tree, s1.obstacle, *s1.driver,
                                       s2.obstacle, *s2.driver,
                                       picard_params(opts));
  const RbsdeSolution a = s1.frozen
                              ? solve_frozen(s1.tree, s1.obstacle, s1.frozen_gain)
                              : picard_solve(s1.tree, s1.obstacle, *s1.driver,
                                             picard_params(opts));
  const RbsdeSolution b = s2.frozen
                              ? solve_frozen(s2.tree, s2.obstacle, s2.frozen_gain)
                              : picard_solve(s2.tree, s2.obstacle, *s2.driver,
                                             picard_params(opts));

  const fs::path dir = instance_dir(opts, input, false);
  std::ofstream js(dir / "compare.json", std::ios::binary);
  write_compare_json(js, report, a.y.at[0], b.y.at[0]);

  if (!report.in_hypothesis()) {
    std::cout << "out-of-hypothesis (flagged)\n";
    return kOk;
  }
  std::cout << (report.conclusion_holds ? "ordered" : "ordering violated")
            << ": y1=" << a.y.at[0] << " y2=" << b.y.at[0] << '\n';
  return report.conclusion_holds ? kOk : kCheckFailed;
}

int run_oracle(const std::string& input, const CommonOpts& opts) {
  LoadedScenario s = load_scenario_file(input);
  RbsdeSolution sol = solve_loaded(s, opts);
  std::vector<double> gains(s.tree.num_nodes(), 0.0);
  for (int node = 0; node < s.tree.num_interior(); ++node) {
    gains[node] = s.driver->eval(s.tree, node, sol.y.at[node], sol.z.row(node));
  }
  const double oracle = brute_force_value(s.tree, s.obstacle, gains);
  const double dp = sol.y.at[0];
  std::cout.precision(17);
  std::cout << "enumeration " << oracle << "  backward-induction " << dp
            << "  difference " << (dp - oracle) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-tree laboratory for reflected backward equations"};
  app.require_subcommand(1);

  CommonOpts solve_opts, verify_opts, compare_opts, oracle_opts;
  CLI::App* solve = app.add_subcommand("solve", "solve and write solution.csv + diagnostics.json");
  add_common(solve, solve_opts);
  CLI::App* verify = app.add_subcommand("verify", "run the verification suite, write verify.json");
  add_common(verify, verify_opts);
  CLI::App* cmp = app.add_subcommand("compare", "order two scenarios sharing a tree");
  add_common(cmp, compare_opts, false);
  CLI::App* oracle = app.add_subcommand("oracle", "print enumeration vs backward-induction value");
  add_common(oracle, oracle_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (solve->parsed()) return run_campaign(solve_opts, run_solve_one);
    if (verify->parsed()) return run_campaign(verify_opts, run_verify_one);
    if (cmp->parsed()) return run_compare(compare_opts.inputs.front(), compare_opts);
    if (oracle->parsed()) return run_oracle(oracle_opts.inputs.front(), oracle_opts);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}
