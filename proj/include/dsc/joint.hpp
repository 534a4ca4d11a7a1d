#pragma once

#include <string>
#include <vector>

#include "dsc/convex.hpp"
#include "dsc/metrics.hpp"
#include "dsc/router.hpp"
#include "dsc/scenario.hpp"

namespace dsc {

enum class FleetCombo { kTaxi, kBus, kTaxiBus, kTaxiBusDv };

std::string combo_name(FleetCombo combo);
FleetCombo parse_combo(const std::string& name);
const std::vector<FleetCombo>& all_combos();

// A complete solve result: fleet sizes, sensors, routes, per-fleet coverage
// and the evaluation metrics.
struct DscSolution {
  FleetCombo combo = FleetCombo::kTaxiBus;
  double budget = 0.0;

  long long n_taxi = 0;
  std::vector<long long> sensors;  // per line
  int n_dv = 0;
  std::vector<DvRoute> dv_routes;

  Field taxi_field, bus_field, dv_field;
  double phi = 0.0;
  double kl = 0.0;        // NaN when coverage is empty (distribution undefined)
  bool kl_defined = false;

  double spend_taxi = 0.0, spend_bus = 0.0, spend_dv = 0.0;
  double unspent = 0.0;

  TaxiBusSolution tb;  // relaxed diagnostics of the winning branch
  struct BranchTrace {
    int n_dv;
    std::vector<double> phi;  // inner-iteration objective values
  };
  std::vector<BranchTrace> trace;
  bool dv_cap_hit = false;

  Field total_field() const;
  double spend_total() const { return spend_taxi + spend_bus + spend_dv; }

  // Budget and bound feasibility plus phi == stwsu(total) within 1e-9.
  void assert_feasible(const SensingScenario& scenario) const;
};

// Taxi-bus allocation problem for a scenario at the given budget, with an
// optional fixed coverage added inside the utility.
TaxiBusProblem make_taxi_bus_problem(const SensingScenario& scenario, double budget,
                                     Field background = Field());

// Full three-fleet solve: enumerates the DV fleet size and alternates the
// taxi-bus program with DV re-routing until the objective stops improving.
DscSolution solve_dsc(const SensingScenario& scenario, double budget = -1.0, int max_iter = -1);

// Dispatches to the single-mode, taxi-bus, or full solver.
DscSolution solve_fleet_combination(const SensingScenario& scenario, FleetCombo combo,
                                    double budget = -1.0);

struct SweepRow {
  FleetCombo combo;
  double budget;
  double phi;
  double kl;
  bool kl_defined;
  long long n_taxi;
  long long bus_sensors;
  int n_dv;
};

struct SweepFit {
  FleetCombo combo;
  double a = 0.0;  // phi ~ a * budget^beta + b
  double b = 0.0;
  double r2 = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;   // combo-major, budgets ascending
  std::vector<SweepFit> fits;
};

SweepResult budget_sweep(const SensingScenario& scenario, const std::vector<double>& budgets,
                         const std::vector<FleetCombo>& combos);

// Smallest swept budget reaching the target phi for the combo; NaN if the
// sweep never reaches it.
double inverse_budget_lookup(const SweepResult& sweep, FleetCombo combo, double target_phi);

// Per-grid taxi coverage score used by the spatial coverage indicators:
// the across-window mean of p_{g,t}.
std::vector<double> taxi_grid_score(const TaxiModel& taxi);

CoverageIndicators scenario_coverage_indicators(const SensingScenario& scenario,
                                                double percentile = 0.60);

}  // namespace dsc
