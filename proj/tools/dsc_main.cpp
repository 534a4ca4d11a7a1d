// dsc: drive-by sensing fleet allocation toolkit.
//
// Subcommands cover the full workflow: generate a synthetic scenario bundle,
// fit the taxi/bus mobility models from raw data, solve the sensor
// allocation for a fleet combination, sweep budgets, run the bus-network
// transfer study, and evaluate or export stored solutions.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dsc/csv.hpp"
#include "dsc/export.hpp"
#include "dsc/joint.hpp"
#include "dsc/kernels.hpp"
#include "dsc/metrics.hpp"
#include "dsc/scenario.hpp"

namespace fs = std::filesystem;
using namespace dsc;

namespace {

int log_level() {
  const char* env = std::getenv("DSC_LOG");
  if (env == nullptr) return 1;
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[dsc] " << msg << "\n";
}

struct CommonArgs {
  std::string scenario_path;
  std::string out = "out";
  std::optional<double> budget;
  std::optional<double> beta;
  std::optional<double> zeta;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_scenario = true) {
  auto* opt = cmd->add_option("--scenario", args.scenario_path, "scenario config (JSON)");
  if (needs_scenario) opt->required();
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--budget", args.budget, "budget override (CNY)");
  cmd->add_option("--beta", args.beta, "utility exponent override");
  cmd->add_option("--zeta", args.zeta, "coverage-ratio calibration override");
  cmd->add_option("--tol", args.tol, "solver tolerance override");
  cmd->add_option("--max-iter", args.max_iter, "solver iteration limit override");
  cmd->add_option("--seed", args.seed, "random seed override");
  cmd->add_option("--jobs", args.jobs, "worker threads (default: logical cores)");
  cmd->add_flag("--dry-run", args.dry_run, "validate inputs, write nothing");
}

SensingScenario load_with(const CommonArgs& args) {
  ScenarioOverrides ov;
  ov.seed = args.seed;
  ov.budget = args.budget;
  ov.beta = args.beta;
  ov.zeta = args.zeta;
  ov.tol = args.tol;
  ov.max_iters = args.max_iter;
  SensingScenario sc = load_scenario(args.scenario_path, ov);
  for (const std::string& w : sc.warnings) info("warning: " + w);
  return sc;
}

std::vector<double> parse_budget_range(const std::string& text) {
  // start:stop:step, inclusive stop
  std::vector<double> parts;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(':', pos);
    const std::string tok = text.substr(pos, next == std::string::npos ? next : next - pos);
    try {
      parts.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw InputError("budget range: '" + tok + "' is not a number");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw InputError("budget range must be start:stop:step or a single value");
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (step <= 0.0 || stop < start) throw InputError("budget range must ascend with a positive step");
  std::vector<double> budgets;
  for (double b = start; b <= stop + 1e-9 * std::max(1.0, std::abs(stop)); b += step)
    budgets.push_back(b);
  return budgets;
}

std::vector<FleetCombo> parse_combos(const std::string& text) {
  if (text == "all") return all_combos();
  std::vector<FleetCombo> combos;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(',', pos);
    combos.push_back(parse_combo(text.substr(pos, next == std::string::npos ? next : next - pos)));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return combos;
}

int exit_code_for(const DscSolution& sol) { return sol.tb.converged ? 0 : 2; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drive-by sensing coverage toolkit"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic scenario bundle");
  std::string gen_spec;
  std::string gen_out = "scenario";
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--spec", gen_spec, "synthetic spec (JSON); defaults apply when omitted");
  gen->add_option("--out", gen_out, "bundle directory")->required();
  gen->add_option("--seed", gen_seed, "seed override");

  CommonArgs fit_taxi_args, fit_bus_args, solve_args, sweep_args, transfer_args, eval_args,
      export_args;

  auto* fit_taxi = app.add_subcommand("fit-taxi", "fit the taxi coverage slopes from traces");
  add_common(fit_taxi, fit_taxi_args);
  int fit_taxi_draws = 20;
  fit_taxi->add_option("--draws", fit_taxi_draws, "validation subset draws");

  auto* fit_bus = app.add_subcommand("fit-bus", "estimate bus line parameters from trips");
  add_common(fit_bus, fit_bus_args);

  auto* solve_cmd = app.add_subcommand("solve", "solve the sensor allocation problem");
  add_common(solve_cmd, solve_args);
  std::string solve_combo = "taxi+bus+dv";
  solve_cmd->add_option("--combo", solve_combo, "taxi, bus, taxi+bus or taxi+bus+dv");

  auto* sweep_cmd = app.add_subcommand("sweep", "solve across a budget range");
  add_common(sweep_cmd, sweep_args);
  std::string sweep_budgets;
  std::string sweep_combos = "all";
  sweep_cmd->add_option("--budgets", sweep_budgets, "start:stop:step (inclusive)")->required();
  sweep_cmd->add_option("--combos", sweep_combos, "comma list or 'all'");

  auto* transfer = app.add_subcommand("transfer-study",
                                      "degrade the bus network and regress sensing gains");
  add_common(transfer, transfer_args);
  int transfer_variants = 30;
  bool transfer_dv = false;
  double transfer_percentile = 0.60;
  transfer->add_option("--variants", transfer_variants, "number of degraded variants");
  transfer->add_flag("--dv", transfer_dv, "include the taxi+bus+dv pair (slower)");
  transfer->add_option("--percentile", transfer_percentile, "taxi coverage percentile for W(T)");

  auto* evaluate = app.add_subcommand("evaluate", "recompute metrics for a stored solution");
  add_common(evaluate, eval_args);
  std::string eval_solution;
  evaluate->add_option("--solution", eval_solution, "solution.json path")->required();

  auto* export_cmd = app.add_subcommand("export", "write report tables for a stored solution");
  add_common(export_cmd, export_args);
  std::string export_solution_path;
  export_cmd->add_option("--solution", export_solution_path, "solution.json path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      SyntheticSpec spec = gen_spec.empty() ? SyntheticSpec{} : load_synthetic_spec(gen_spec);
      if (gen_seed) spec.seed = *gen_seed;
      info("generating synthetic bundle in " + gen_out);
      generate_synthetic(spec, gen_out);
      info("done");
      return 0;
    }

    const CommonArgs& args = fit_taxi->parsed()   ? fit_taxi_args
                             : fit_bus->parsed()  ? fit_bus_args
                             : solve_cmd->parsed() ? solve_args
                             : sweep_cmd->parsed() ? sweep_args
                             : transfer->parsed()  ? transfer_args
                             : evaluate->parsed()  ? eval_args
                                                   : export_args;
    if (args.jobs > 0) par::set_threads(args.jobs);

    info("loading scenario " + args.scenario_path);
    const SensingScenario sc = load_with(args);
    info("scenario: " + std::to_string(sc.n_grids()) + " grids, " +
         std::to_string(sc.n_windows()) + " windows, " + std::to_string(sc.bus_lines.size()) +
         " bus lines, " + std::to_string(sc.network.size()) + " road nodes");

    if (args.dry_run) {
      info("dry run: inputs are valid, nothing written");
      return 0;
    }

    if (fit_taxi->parsed()) {
      // the loader already fitted the model; dump the table plus an
      // in-sample validation report over a spread of subset sizes
      fs::create_directories(args.out);
      {
        csv::Writer w((fs::path(args.out) / "taxi_p_fit.csv").string());
        w.header("grid,window,p");
        for (int g = 0; g < sc.n_grids(); ++g)
          for (int t = 0; t < sc.n_windows(); ++t) {
            w.field(g).field(t).field(sc.taxi.p(g, t));
            w.endrow();
          }
        w.close();
      }
      const TaxiTraceSet traces = load_scenario_taxi_traces(args.scenario_path);
      std::vector<int> sizes;
      for (double f : {0.25, 0.5, 0.75, 1.0}) {
        const int s = std::max(1, static_cast<int>(f * traces.n_vehicles));
        if (sizes.empty() || sizes.back() != s) sizes.push_back(s);
      }
      const TaxiFitValidation report =
          validate_fit(sc.taxi, traces, sizes, fit_taxi_draws, sc.seed + 2);
      export_taxi_validation(report, args.out);
      info("wrote " + args.out + "/taxi_p_fit.csv and validation tables");
      return 0;
    }

    if (fit_bus->parsed()) {
      fs::create_directories(args.out);
      csv::Writer w((fs::path(args.out) / "bus_params_fit.csv").string());
      w.header("line,window,service_hours,turnaround_hours,in_service,synthetic");
      for (const BusLine& line : sc.bus_lines)
        for (int t = 0; t < sc.n_windows(); ++t) {
          w.field(line.name)
              .field(t)
              .field(line.service_hours[static_cast<std::size_t>(t)])
              .field(line.turnaround_hours[static_cast<std::size_t>(t)])
              .field(line.in_service[static_cast<std::size_t>(t)])
              .field(static_cast<int>(line.window_synthetic.empty()
                                          ? 0
                                          : line.window_synthetic[static_cast<std::size_t>(t)]));
          w.endrow();
        }
      w.close();
      info("wrote " + args.out + "/bus_params_fit.csv");
      return 0;
    }

    if (solve_cmd->parsed()) {
      const FleetCombo combo = parse_combo(solve_combo);
      info("solving " + combo_name(combo) + " at budget " + csv::fmt(sc.costs.budget));
      const DscSolution sol = solve_fleet_combination(sc, combo);
      fs::create_directories(args.out);
      save_solution(sol, sc, (fs::path(args.out) / "solution.json").string());
      export_solution(sol, sc, args.out);
      info("phi=" + csv::fmt(sol.phi) +
           " kl=" + (sol.kl_defined ? csv::fmt(sol.kl) : std::string("nan")) + " taxi=" +
           std::to_string(sol.n_taxi) + " dv=" + std::to_string(sol.n_dv));
      if (!sol.tb.converged) info("solver hit its iteration limit; results carry the gap flag");
      return exit_code_for(sol);
    }

    if (sweep_cmd->parsed()) {
      const std::vector<double> budgets = parse_budget_range(sweep_budgets);
      const std::vector<FleetCombo> combos = parse_combos(sweep_combos);
      info("sweeping " + std::to_string(budgets.size()) + " budgets x " +
           std::to_string(combos.size()) + " combos");
      const SweepResult sweep = budget_sweep(sc, budgets, combos);
      export_sweep(sweep, args.out);
      info("wrote " + args.out + "/sweep.csv");
      return 0;
    }

    if (transfer->parsed()) {
      info("transfer study over " + std::to_string(transfer_variants) + " variants");
      const TransferStudy study = run_transfer_study(
          sc, transfer_variants, transfer_dv, args.seed.value_or(sc.seed), transfer_percentile);
      export_transfer(study, args.out);
      info("taxi+bus vs taxi: slope=" + csv::fmt(study.tb_vs_taxi.slope) +
           " r2=" + csv::fmt(study.tb_vs_taxi.r2));
      return 0;
    }

    if (evaluate->parsed()) {
      const DscSolution sol = load_solution(sc, eval_solution);
      fs::create_directories(args.out);
      csv::Writer w((fs::path(args.out) / "evaluation.csv").string());
      w.header("key,value");
      w.field("phi").field(sol.phi);
      w.endrow();
      w.field("kl").field(sol.kl_defined ? csv::fmt(sol.kl) : "nan");
      w.endrow();
      w.field("budget_spent").field(sol.spend_total());
      w.endrow();
      w.field("feasible").field(sol.spend_total() <= sol.budget + 1e-6 ? 1 : 0);
      w.endrow();
      w.close();
      info("phi=" + csv::fmt(sol.phi));
      return 0;
    }

    if (export_cmd->parsed()) {
      const DscSolution sol = load_solution(sc, export_solution_path);
      export_solution(sol, sc, args.out);
      info("wrote report tables to " + args.out);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
