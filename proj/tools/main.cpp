// Command-line surface: bound reports for user-supplied problems, schedule
// and QAOA simulation, single-point optimization, the search and p-spin
// sweeps, the QAOA depth certificate, and the randomized verification
// suites. Sweeps emit plot-ready CSV; everything else emits JSON.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsl/bounds.hpp"
#include "qsl/core.hpp"
#include "qsl/dynamics.hpp"
#include "qsl/models.hpp"
#include "qsl/optimize.hpp"
#include "qsl/serialize.hpp"
#include "qsl/verify.hpp"
#include "qsl/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitOptimizer = 2;
constexpr int kExitSuiteFailure = 3;

struct ProblemSpec {
  std::string kind = "grover";
  int n = 2;
  std::int64_t dim = 0;  // grover: explicit Hilbert dimension (0 = use 2^n)
  std::vector<std::int64_t> marked{0};
  int p = 2;
  double lambda = 1.0;
  std::string graph_file;
  double f_max = 1.0;
  double g_max = 1.0;
};

struct OutputSpec {
  std::string path;    // empty = stdout
  std::string format;  // "json" or "csv"; empty = command default
};

struct CommonOptions {
  qsl::OptimizerConfig cfg;
  std::string config_file;
  OutputSpec out;
  std::string aggregate = "best";
};

qsl::SpinGraphFile load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open graph file \"" + path + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("graph file \"" + path + "\": " + e.what());
  }
  return qsl::spin_graph_from_json(j);
}

json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(std::string("cannot open ") + what + " file \"" + path + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string(what) + " file \"" + path + "\": " + e.what());
  }
  return j;
}

qsl::AnnealingProblem build_problem(const ProblemSpec& spec) {
  if (spec.kind == "grover") {
    std::vector<qsl::Index> marked(spec.marked.begin(), spec.marked.end());
    if (spec.dim > 0) return qsl::grover_problem_dim(spec.dim, marked, spec.f_max, spec.g_max);
    return qsl::grover_problem(spec.n, marked, spec.f_max, spec.g_max);
  }
  if (spec.kind == "pspin") return qsl::pspin_problem(spec.n, spec.p, spec.f_max, spec.g_max);
  if (spec.kind == "perturbed-pspin")
    return qsl::perturbed_pspin_problem(spec.n, spec.p, spec.lambda, spec.f_max, spec.g_max);
  if (spec.kind == "spin-graph") {
    if (spec.graph_file.empty())
      throw std::invalid_argument("spin-graph problems require --graph <file>");
    const auto gf = load_graph(spec.graph_file);
    return qsl::spin_network_problem(gf.graph, gf.normalization, spec.f_max, spec.g_max);
  }
  throw std::invalid_argument("unknown problem kind \"" + spec.kind + "\"");
}

void write_output(const OutputSpec& out, const std::string& text) {
  if (out.path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(out.path);
  if (!f) throw std::invalid_argument("cannot open output file \"" + out.path + "\"");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// FNV-1a over the canonical config JSON: a stable digest for CSV headers.
std::string config_digest(const qsl::OptimizerConfig& cfg) {
  const std::string s = qsl::optimizer_config_to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string csv_preamble(const qsl::OptimizerConfig& cfg) {
  std::ostringstream os;
  os << "# version=" << qsl::version_string << " seed=" << cfg.seed
     << " config=" << config_digest(cfg) << "\n";
  return os.str();
}

void add_problem_options(CLI::App* cmd, ProblemSpec& spec) {
  cmd->add_option("--problem", spec.kind, "grover | pspin | perturbed-pspin | spin-graph")
      ->check(CLI::IsMember({"grover", "pspin", "perturbed-pspin", "spin-graph"}));
  cmd->add_option("--n", spec.n, "qubit/spin count (perturbed-pspin: block size n)");
  cmd->add_option("--dim", spec.dim, "explicit Hilbert dimension (grover only)");
  cmd->add_option("--marked", spec.marked, "marked basis indices (grover)")->delimiter(',');
  cmd->add_option("--p", spec.p, "p-spin exponent");
  cmd->add_option("--lambda", spec.lambda, "perturbation strength");
  cmd->add_option("--graph", spec.graph_file, "spin-graph JSON file");
  cmd->add_option("--fmax", spec.f_max, "cap on |f(t)|");
  cmd->add_option("--gmax", spec.g_max, "cap on |g(t)|");
}

void add_common_options(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--seed", common.cfg.seed, "master RNG seed");
  cmd->add_option("--restarts", common.cfg.restarts, "optimizer restarts");
  cmd->add_option("--segments", common.cfg.n_segments, "piecewise-constant segments");
  cmd->add_option("--iterations", common.cfg.max_iterations, "BFGS iteration cap");
  cmd->add_option("--threads", common.cfg.threads, "worker threads (0 = hardware)");
  cmd->add_option("--aggregate", common.aggregate, "avg | best")
      ->check(CLI::IsMember({"avg", "best"}));
  cmd->add_option("--out", common.out.path, "output path (default stdout)");
  cmd->add_option("--format", common.out.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--config", common.config_file, "JSON config file (flags override)");
}

// --config file provides defaults; explicit flags take precedence.
void merge_config_file(const CLI::App* cmd, CommonOptions& common) {
  if (common.config_file.empty()) return;
  const json j = load_json_file(common.config_file, "config");
  qsl::OptimizerConfig from_file = qsl::optimizer_config_from_json(j);
  const auto keep = [&](const char* flag) { return cmd->count(flag) > 0; };
  if (keep("--seed")) from_file.seed = common.cfg.seed;
  if (keep("--restarts")) from_file.restarts = common.cfg.restarts;
  if (keep("--segments")) from_file.n_segments = common.cfg.n_segments;
  if (keep("--iterations")) from_file.max_iterations = common.cfg.max_iterations;
  if (keep("--threads")) from_file.threads = common.cfg.threads;
  common.cfg = from_file;
}

std::vector<qsl::BoundReport> collect_bounds(const ProblemSpec& spec,
                                             const qsl::AnnealingProblem& problem,
                                             const std::optional<qsl::Schedule>& schedule) {
  std::vector<qsl::BoundReport> reports;
  if (schedule.has_value()) reports.push_back(qsl::variance_bound(problem, *schedule));
  reports.push_back(qsl::schedule_independent_bound(problem));
  reports.push_back(qsl::equal_superposition_bound(problem.h_f(), problem.g_max()));
  reports.push_back(qsl::tau_anneal3(problem));

  if (spec.kind == "grover") {
    const qsl::Index d = problem.dim();
    reports.push_back(qsl::grover_bound(d, static_cast<qsl::Index>(spec.marked.size()),
                                        problem.f_max(), problem.g_max()));
  }
  if (spec.kind == "perturbed-pspin")
    reports.push_back(
        qsl::pspin_closed_form_bound(spec.n, spec.p, spec.lambda, problem.g_max()));
  if (spec.kind == "spin-graph") {
    const auto gf = load_graph(spec.graph_file);
    const auto snb =
        qsl::spin_network_bound(gf.graph, problem.psi_t(), qsl::Axis::X, problem.g_max());
    reports.push_back(snb.analytic);
    reports.push_back(snb.exact);
  }

  // witness-commutator bounds with automatically selected single-site Paulis
  std::optional<qsl::Witness> w_initial, v_final;
  try {
    auto [w, r] = qsl::auto_select_witness(problem.h_i(), problem.psi0(), problem.h_f(),
                                           problem.psi_t(), problem.g_max(),
                                           qsl::WitnessSide::Initial);
    w_initial = std::move(w);
    reports.push_back(std::move(r));
  } catch (const std::exception&) {
  }
  try {
    auto [v, r] = qsl::auto_select_witness(problem.h_f(), problem.psi_t(), problem.h_i(),
                                           problem.psi0(), problem.f_max(),
                                           qsl::WitnessSide::Final);
    v_final = std::move(v);
  } catch (const std::exception&) {
  }
  if (w_initial.has_value() && v_final.has_value()) {
    try {
      reports.push_back(qsl::combined_commutator_bound(problem, *v_final, *w_initial));
      reports.push_back(qsl::qaoa_layer_bound(problem, *v_final, *w_initial));
    } catch (const std::runtime_error&) {
      // both terms degenerate for the selected witnesses: nothing to report
    }
  }

  std::stable_sort(reports.begin(), reports.end(),
                   [](const qsl::BoundReport& a, const qsl::BoundReport& b) {
                     const double va = a.applicable() ? a.value : -1.0;
                     const double vb = b.applicable() ? b.value : -1.0;
                     return va > vb;
                   });
  return reports;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  // "4,8,16" or "4:8" (inclusive range)
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    const auto pos = text.find(':');
    const int lo = std::stoi(text.substr(0, pos));
    const int hi = std::stoi(text.substr(pos + 1));
    if (hi < lo) throw std::invalid_argument(std::string(what) + ": empty range " + text);
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
  std::vector<double> out;
  if (points < 2) {
    out.push_back(lo);
    return out;
  }
  const double ratio = std::pow(hi / lo, 1.0 / (points - 1));
  for (int i = 0; i < points; ++i) out.push_back(lo * std::pow(ratio, i));
  return out;
}

int cmd_bound(const ProblemSpec& spec, const CommonOptions& common,
              const std::string& schedule_file) {
  const auto problem = build_problem(spec);
  std::optional<qsl::Schedule> schedule;
  if (!schedule_file.empty())
    schedule = qsl::schedule_from_json(load_json_file(schedule_file, "schedule"));
  const auto reports = collect_bounds(spec, problem, schedule);
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(r.to_json());
  write_output(common.out, arr.dump(2));
  return kExitOk;
}

int cmd_simulate(const ProblemSpec& spec, const CommonOptions& common,
                 const std::string& schedule_file, const std::string& angles_file) {
  if (schedule_file.empty() == angles_file.empty())
    throw std::invalid_argument("simulate needs exactly one of --schedule or --angles");
  const auto problem = build_problem(spec);

  json out;
  if (!schedule_file.empty()) {
    const auto schedule = qsl::schedule_from_json(load_json_file(schedule_file, "schedule"));
    const auto reached = qsl::propagate_schedule(problem, schedule);
    const double f = qsl::fidelity(reached, problem.ground_projector());
    out = {{"fidelity", f},
           {"fidelity_error", 1.0 - f},
           {"total_duration", schedule.total_duration()}};
  } else {
    const auto angles = qsl::qaoa_angles_from_json(load_json_file(angles_file, "angles"));
    const auto reached = qsl::qaoa_evolve(problem, angles);
    const double f = qsl::fidelity(reached, problem.ground_projector());
    out = {{"fidelity", f},
           {"fidelity_error", 1.0 - f},
           {"runtime", qsl::qaoa_runtime(angles)},
           {"layers", angles.depth()}};
  }
  write_output(common.out, out.dump(2));
  return kExitOk;
}

int cmd_optimize(const ProblemSpec& spec, const CommonOptions& common, double time, int layers,
                 bool qaoa, bool unconstrained_f) {
  const auto problem = build_problem(spec);
  qsl::OptimizationResult result;
  if (qaoa) {
    result = qsl::optimize_qaoa(problem, layers, common.cfg);
  } else {
    if (!(time > 0.0)) throw std::invalid_argument("optimize needs --time > 0");
    result = qsl::optimize_schedule(problem, time, common.cfg, unconstrained_f);
  }
  json j = qsl::optimization_result_to_json(result, common.cfg);
  j["average_objective"] = result.average_objective();
  write_output(common.out, j.dump(2));
  return result.aborted_restarts == common.cfg.restarts ? kExitOptimizer : kExitOk;
}

int cmd_sweep_grover(const CommonOptions& common, const std::string& d_list,
                     const std::string& gmax_list, const std::string& t_grid, double threshold) {
  const auto dims = parse_int_list(d_list, "--d-list");
  const auto gmaxes = parse_double_list(gmax_list, "--gmax-list");
  const std::string eps_column = common.aggregate == "avg" ? "epsilon_avg" : "epsilon_best";

  std::ostringstream csv;
  csv << csv_preamble(common.cfg);
  csv << "d,g_max,T," << eps_column << ",bound,flag\n";
  json rows = json::array();

  for (const int d : dims) {
    for (const double g_max : gmaxes) {
      // soft-unconstrained f: the bound keeps only the g term
      const double bound = qsl::grover_bound(d, 1, 1e300, g_max).value;
      std::vector<double> ts;
      if (t_grid == "auto")
        ts = geometric_grid(0.5 * bound, 2.5 * bound, 20);
      else
        ts = parse_double_list(t_grid, "--t-grid");
      const auto problem = qsl::grover_problem_dim(d, {d - 1}, 1.0, g_max);
      for (const double t : ts) {
        const auto r = qsl::optimize_schedule(problem, t, common.cfg, true);
        const double eps =
            common.aggregate == "avg" ? r.average_objective() : r.best_objective;
        const bool violation = (eps < (1.0 - threshold)) && (t < bound - qsl::tol::dominance_slack);
        csv << d << ',' << format_double(g_max) << ',' << format_double(t) << ','
            << format_double(eps) << ',' << format_double(bound) << ','
            << (violation ? "DOMINANCE-VIOLATION" : "") << "\n";
        rows.push_back({{"d", d},
                        {"g_max", g_max},
                        {"T", t},
                        {eps_column, eps},
                        {"bound", bound},
                        {"flag", violation ? "DOMINANCE-VIOLATION" : ""}});
      }
    }
  }
  if (common.out.format == "json")
    write_output(common.out, rows.dump(2));
  else
    write_output(common.out, csv.str());
  return kExitOk;
}

int cmd_sweep_pspin(const CommonOptions& common, const std::string& p_list,
                    const std::string& spins_list, double lambda, double threshold,
                    int max_layers) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("sweep-pspin requires --lambda > 0 (the closed-form bound "
                                "degenerates at lambda = 0)");
  const auto ps = parse_int_list(p_list, "--p-list");
  const auto totals = parse_int_list(spins_list, "--spins");

  std::ostringstream csv;
  csv << csv_preamble(common.cfg);
  csv << "p,total_spins,T_star,layers,bound\n";
  json rows = json::array();

  for (const int p : ps) {
    for (const int total : totals) {
      const int n_block = total - 1;
      if (n_block < 2) throw std::invalid_argument("sweep-pspin: total spins must be >= 3");
      const auto problem = qsl::perturbed_pspin_problem(n_block, p, lambda, 1.0, 1.0);
      qsl::SearchGrid grid;
      grid.max_layers = max_layers;
      const auto result = qsl::minimal_annealing_time(problem, threshold,
                                                      qsl::OptimizationMode::Qaoa, common.cfg,
                                                      grid);
      const double bound = qsl::pspin_closed_form_bound(n_block, p, lambda, 1.0).value;
      csv << p << ',' << total << ',' << format_double(result.t_star) << ','
          << result.layers_star << ',' << format_double(bound) << "\n";
      rows.push_back({{"p", p},
                      {"total_spins", total},
                      {"T_star", result.t_star},
                      {"layers", result.layers_star},
                      {"bound", bound}});
    }
  }
  if (common.out.format == "json")
    write_output(common.out, rows.dump(2));
  else
    write_output(common.out, csv.str());
  return kExitOk;
}

int cmd_qaoa_depth(const ProblemSpec& spec, const CommonOptions& common) {
  const auto problem = build_problem(spec);
  auto [w, wr] = qsl::auto_select_witness(problem.h_i(), problem.psi0(), problem.h_f(),
                                          problem.psi_t(), problem.g_max(),
                                          qsl::WitnessSide::Initial);
  auto [v, vr] = qsl::auto_select_witness(problem.h_f(), problem.psi_t(), problem.h_i(),
                                          problem.psi0(), problem.f_max(),
                                          qsl::WitnessSide::Final);
  const auto report = qsl::qaoa_layer_bound(problem, v, w);
  json j = report.to_json();
  j["witness_initial"] = w.description();
  j["witness_final"] = v.description();
  write_output(common.out, j.dump(2));
  return kExitOk;
}

int cmd_verify(const CommonOptions& common, const std::string& suite, int trials) {
  const auto report = qsl::run_verify_suite(suite, trials, common.cfg.seed);
  write_output(common.out, report.to_json().dump(2));
  return report.passed() ? kExitOk : kExitSuiteFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"schedule-independent lower bounds on quantum annealing times and QAOA depth"};
  app.require_subcommand(1);

  ProblemSpec spec;
  CommonOptions common;

  auto* bound = app.add_subcommand("bound", "compute every applicable bound for a problem");
  std::string bound_schedule;
  add_problem_options(bound, spec);
  add_common_options(bound, common);
  bound->add_option("--schedule", bound_schedule, "schedule JSON for the schedule-dependent bound");

  auto* simulate = app.add_subcommand("simulate", "run a schedule or angle file, print F and eps");
  std::string sim_schedule, sim_angles;
  add_problem_options(simulate, spec);
  add_common_options(simulate, common);
  simulate->add_option("--schedule", sim_schedule, "schedule JSON file");
  simulate->add_option("--angles", sim_angles, "QAOA angles JSON file");

  auto* optimize = app.add_subcommand("optimize", "single-point schedule or QAOA optimization");
  double opt_time = 0.0;
  int opt_layers = 1;
  bool opt_qaoa = false;
  bool opt_unconstrained = false;
  add_problem_options(optimize, spec);
  add_common_options(optimize, common);
  optimize->add_option("--time", opt_time, "total annealing time (schedule mode)");
  optimize->add_option("--layers", opt_layers, "QAOA layer count");
  optimize->add_flag("--qaoa", opt_qaoa, "optimize QAOA angles instead of a schedule");
  optimize->add_flag("--unconstrained-f", opt_unconstrained, "soften the f cap to 20 f_max");

  auto* sweep_grover = app.add_subcommand("sweep-grover", "fidelity-error sweep over (d, g_max, T)");
  std::string sg_dims = "4,8,16,32", sg_gmax = "1", sg_tgrid = "auto";
  double sg_threshold = 0.99;
  add_common_options(sweep_grover, common);
  sweep_grover->add_option("--d-list", sg_dims, "Hilbert dimensions, e.g. 4,8,16,32");
  sweep_grover->add_option("--gmax-list", sg_gmax, "g_max values, e.g. 0.5,1,2");
  sweep_grover->add_option("--t-grid", sg_tgrid, "auto or comma list of times");
  sweep_grover->add_option("--threshold", sg_threshold, "success fidelity for the flag column");

  auto* sweep_pspin = app.add_subcommand("sweep-pspin", "QAOA minimal times for the perturbed p-spin model");
  std::string sp_p = "2,3", sp_spins = "4:8";
  double sp_lambda = 1.0, sp_threshold = 0.99;
  int sp_layers = 16;
  add_common_options(sweep_pspin, common);
  sweep_pspin->add_option("--p-list", sp_p, "p exponents, e.g. 2,3");
  sweep_pspin->add_option("--spins", sp_spins, "total spin counts, e.g. 4:8 or 4,6,8");
  sweep_pspin->add_option("--lambda", sp_lambda, "perturbation strength (> 0)");
  sweep_pspin->add_option("--threshold", sp_threshold, "success fidelity");
  sweep_pspin->add_option("--max-layers", sp_layers, "layer-scan ceiling");

  auto* qaoa_depth = app.add_subcommand("qaoa-depth", "QAOA layer-count certificate");
  add_problem_options(qaoa_depth, spec);
  add_common_options(qaoa_depth, common);

  auto* verify = app.add_subcommand("verify", "run a randomized property suite");
  std::string verify_suite;
  int verify_trials = 100;
  add_common_options(verify, common);
  verify->add_option("--suite", verify_suite, "suite name")->required();
  verify->add_option("--trials", verify_trials, "trial count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    merge_config_file(active, common);
    common.cfg.validate();

    if (active == bound) return cmd_bound(spec, common, bound_schedule);
    if (active == simulate) return cmd_simulate(spec, common, sim_schedule, sim_angles);
    if (active == optimize)
      return cmd_optimize(spec, common, opt_time, opt_layers, opt_qaoa, opt_unconstrained);
    if (active == sweep_grover)
      return cmd_sweep_grover(common, sg_dims, sg_gmax, sg_tgrid, sg_threshold);
    if (active == sweep_pspin)
      return cmd_sweep_pspin(common, sp_p, sp_spins, sp_lambda, sp_threshold, sp_layers);
    if (active == qaoa_depth) return cmd_qaoa_depth(spec, common);
    if (active == verify) return cmd_verify(common, verify_suite, verify_trials);
    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOptimizer;
  }
}
