#include "dsc/joint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsc {

std::string combo_name(FleetCombo combo) {
  switch (combo) {
    case FleetCombo::kTaxi: return "taxi";
    case FleetCombo::kBus: return "bus";
    case FleetCombo::kTaxiBus: return "taxi+bus";
    case FleetCombo::kTaxiBusDv: return "taxi+bus+dv";
  }
  return "?";
}

FleetCombo parse_combo(const std::string& name) {
  for (FleetCombo c : all_combos())
    if (combo_name(c) == name) return c;
  throw InputError("unknown fleet combination '" + name +
                   "' (expected taxi, bus, taxi+bus or taxi+bus+dv)");
}

const std::vector<FleetCombo>& all_combos() {
  static const std::vector<FleetCombo> kAll{FleetCombo::kTaxi, FleetCombo::kBus,
                                            FleetCombo::kTaxiBus, FleetCombo::kTaxiBusDv};
  return kAll;
}

Field DscSolution::total_field() const {
  Field total = taxi_field;
  total += bus_field;
  total += dv_field;
  return total;
}

void DscSolution::assert_feasible(const SensingScenario& scenario) const {
  const double spend = spend_total();
  if (spend > budget + 1e-6)
    throw Error("solution overspends the budget: " + std::to_string(spend) + " > " +
                std::to_string(budget));
  if (n_taxi < 0 || n_taxi > scenario.taxi.fleet_bound)
    throw Error("taxi count violates the fleet bound");
  if (sensors.size() != scenario.bus_lines.size())
    throw Error("per-line sensor vector has the wrong length");
  for (std::size_t j = 0; j < sensors.size(); ++j)
    if (sensors[j] < 0 || sensors[j] > scenario.bus_lines[j].fleet_size)
      throw Error("line " + scenario.bus_lines[j].name + ": sensor count violates its bound");
  if (n_dv < 0) throw Error("negative DV count");
  const double recomputed = stwsu(total_field(), scenario.joint_w, scenario.params.beta);
  if (std::abs(recomputed - phi) > 1e-9 * (1.0 + std::abs(phi)))
    throw Error("stored phi diverges from the coverage fields");
}

TaxiBusProblem make_taxi_bus_problem(const SensingScenario& scenario, double budget,
                                     Field background) {
  return TaxiBusProblem(&scenario.taxi, &scenario.bus_lines, &scenario.incidence,
                        scenario.joint_w, scenario.params, scenario.costs.taxi,
                        scenario.costs.bus, budget, std::move(background));
}

namespace {

void attach_metrics(DscSolution& sol, const SensingScenario& scenario) {
  const Field total = sol.total_field();
  sol.phi = stwsu(total, scenario.joint_w, scenario.params.beta);
  if (total.sum() > 0.0) {
    sol.kl = kl_divergence(actual_distribution(total, scenario.params),
                           target_distribution(scenario.weights, scenario.params));
    sol.kl_defined = true;
  } else {
    sol.kl = std::numeric_limits<double>::quiet_NaN();
    sol.kl_defined = false;
  }
}

DscSolution from_taxi_bus(const SensingScenario& scenario, FleetCombo combo, double budget,
                          const TaxiBusSolution& tb) {
  DscSolution sol;
  sol.combo = combo;
  sol.budget = budget;
  sol.n_taxi = tb.n_taxi();
  sol.sensors = tb.sensors();
  sol.tb = tb;
  sol.taxi_field = taxi_coverage(scenario.taxi, static_cast<double>(sol.n_taxi));
  std::vector<double> y(sol.sensors.size());
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = static_cast<double>(sol.sensors[j]);
  sol.bus_field = bus_coverage(scenario.bus_lines, scenario.incidence, y, scenario.n_windows());
  sol.dv_field = Field(scenario.n_grids(), scenario.n_windows());
  sol.spend_taxi = scenario.costs.taxi * static_cast<double>(sol.n_taxi);
  sol.spend_bus = 0.0;
  for (long long s : sol.sensors) sol.spend_bus += scenario.costs.bus * static_cast<double>(s);
  sol.unspent = budget - sol.spend_total();
  attach_metrics(sol, scenario);
  return sol;
}

struct Branch {
  DscSolution solution;
  double phi = -1.0;
};

}  // namespace

DscSolution solve_dsc(const SensingScenario& scenario, double budget, int max_iter) {
  const double M = budget >= 0.0 ? budget : scenario.costs.budget;
  if (M < 0.0) throw InputError("budget must be nonnegative");
  const int inner_limit = max_iter >= 1 ? max_iter : scenario.solver.inner_max_iter;

  const long long affordable = static_cast<long long>(std::floor(M / scenario.costs.dv + 1e-12));
  const int nd_max = static_cast<int>(std::min<long long>(affordable, scenario.dv.fleet_cap));
  const bool cap_hit = affordable > scenario.dv.fleet_cap;

  const std::vector<int> op_windows = scenario.dv.operating_windows;
  const SolverOptions opts{scenario.solver.tol, scenario.solver.max_iters};
  const DvSearchOptions search{scenario.dv.search_radius_km, scenario.dv.psi_weight_spatial};

  std::vector<Branch> branches(static_cast<std::size_t>(nd_max) + 1);

#pragma omp parallel for schedule(dynamic)
  for (int nd = 0; nd <= nd_max; ++nd) {
    const double m_tb = M - scenario.costs.dv * nd;
    Field dv_cover(scenario.n_grids(), scenario.n_windows());
    std::vector<double> warm;
    DscSolution best;
    std::vector<double> phis;
    double phi_prev = 0.0;

    for (int k = 0; k < inner_limit; ++k) {
      const TaxiBusProblem problem = make_taxi_bus_problem(scenario, m_tb, dv_cover);
      const TaxiBusSolution tb = solve(problem, opts, warm.empty() ? nullptr : &warm);
      warm = tb.x_relaxed;

      DscSolution iterate = from_taxi_bus(scenario, FleetCombo::kTaxiBusDv, M, tb);
      std::vector<DvRoute> routes_k;
      Field dv_k(scenario.n_grids(), scenario.n_windows());
      if (nd > 0) {
        Field tb_field = iterate.taxi_field;
        tb_field += iterate.bus_field;
        DvContext ctx(scenario.weights, scenario.params, op_windows, std::move(tb_field));
        std::vector<int> starts = scenario.dv.start_nodes;
        if (static_cast<int>(starts.size()) < nd)
          starts = default_start_nodes(scenario.network, scenario.gridmap,
                                       scenario.weights.spatial, nd);
        starts.resize(static_cast<std::size_t>(nd));
        FleetRoutingResult fleet = route_fleet(scenario.network, scenario.gridmap, ctx, starts,
                                               scenario.dv.window_hours, search,
                                               scenario.dv.adjust_max_iter);
        routes_k = std::move(fleet.routes);
        dv_k = extend_round_trips(routes_k, op_windows, scenario.n_grids(),
                                  scenario.n_windows());
      }
      iterate.dv_field = dv_k;
      iterate.n_dv = nd;
      iterate.dv_routes = routes_k;
      iterate.spend_dv = scenario.costs.dv * nd;
      iterate.unspent = M - iterate.spend_total();
      attach_metrics(iterate, scenario);
      phis.push_back(iterate.phi);

      const bool improved = iterate.phi > phi_prev;
      if (k == 0 || improved) {
        phi_prev = iterate.phi;
        best = std::move(iterate);
        dv_cover = dv_k;
      }
      // no DV feedback means the alternation is already a fixed point
      if (!improved || nd == 0) break;
    }
    best.trace.assign(1, {nd, phis});
    branches[static_cast<std::size_t>(nd)].solution = std::move(best);
    branches[static_cast<std::size_t>(nd)].phi = phi_prev;
  }

  int winner = 0;
  for (int nd = 1; nd <= nd_max; ++nd)
    if (branches[static_cast<std::size_t>(nd)].phi > branches[static_cast<std::size_t>(winner)].phi)
      winner = nd;

  std::vector<DscSolution::BranchTrace> full_trace;
  for (auto& b : branches)
    for (auto& t : b.solution.trace) full_trace.push_back(t);
  DscSolution sol = std::move(branches[static_cast<std::size_t>(winner)].solution);
  sol.trace = std::move(full_trace);
  sol.dv_cap_hit = cap_hit;
  sol.assert_feasible(scenario);
  return sol;
}

DscSolution solve_fleet_combination(const SensingScenario& scenario, FleetCombo combo,
                                    double budget) {
  const double M = budget >= 0.0 ? budget : scenario.costs.budget;
  const SolverOptions opts{scenario.solver.tol, scenario.solver.max_iters};
  switch (combo) {
    case FleetCombo::kTaxi: {
      const TaxiBusProblem problem = make_taxi_bus_problem(scenario, M);
      DscSolution sol =
          from_taxi_bus(scenario, combo, M, solve_single_mode(problem, SingleMode::kTaxi, opts));
      sol.assert_feasible(scenario);
      return sol;
    }
    case FleetCombo::kBus: {
      const TaxiBusProblem problem = make_taxi_bus_problem(scenario, M);
      DscSolution sol =
          from_taxi_bus(scenario, combo, M, solve_single_mode(problem, SingleMode::kBus, opts));
      sol.assert_feasible(scenario);
      return sol;
    }
    case FleetCombo::kTaxiBus: {
      const TaxiBusProblem problem = make_taxi_bus_problem(scenario, M);
      DscSolution sol = from_taxi_bus(scenario, combo, M, solve(problem, opts));
      sol.assert_feasible(scenario);
      return sol;
    }
    case FleetCombo::kTaxiBusDv: {
      DscSolution sol = solve_dsc(scenario, M);
      sol.combo = combo;
      return sol;
    }
  }
  throw InputError("unknown fleet combination");
}

SweepResult budget_sweep(const SensingScenario& scenario, const std::vector<double>& budgets,
                         const std::vector<FleetCombo>& combos) {
  for (std::size_t i = 1; i < budgets.size(); ++i)
    if (budgets[i] < budgets[i - 1]) throw InputError("budgets must be sorted ascending");

  SweepResult result;
  const std::size_t total = combos.size() * budgets.size();
  result.rows.resize(total);

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(total); ++idx) {
    const FleetCombo combo = combos[static_cast<std::size_t>(idx) / budgets.size()];
    const double budget = budgets[static_cast<std::size_t>(idx) % budgets.size()];
    const DscSolution sol = solve_fleet_combination(scenario, combo, budget);
    long long bus_total = 0;
    for (long long s : sol.sensors) bus_total += s;
    result.rows[static_cast<std::size_t>(idx)] =
        SweepRow{combo, budget, sol.phi, sol.kl, sol.kl_defined, sol.n_taxi, bus_total, sol.n_dv};
  }

  // diagnostic fit phi = a * M^beta + b per combo
  const double beta = scenario.params.beta;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    SweepFit fit;
    fit.combo = combos[c];
    const std::size_t base = c * budgets.size();
    const std::size_t n = budgets.size();
    if (n == 0) {
      result.fits.push_back(fit);
      continue;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xv = std::pow(budgets[i], beta);
      const double yv = result.rows[base + i].phi;
      sx += xv;
      sy += yv;
      sxx += xv * xv;
      sxy += xv * yv;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) > 1e-30) {
      fit.a = (n * sxy - sx * sy) / denom;
      fit.b = (sy - fit.a * sx) / n;
    } else {
      fit.a = 0.0;
      fit.b = sy / static_cast<double>(n);
    }
    double ss_res = 0.0, ss_tot = 0.0;
    const double mean = sy / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double yv = result.rows[base + i].phi;
      const double pred = fit.a * std::pow(budgets[i], beta) + fit.b;
      ss_res += (yv - pred) * (yv - pred);
      ss_tot += (yv - mean) * (yv - mean);
    }
    fit.r2 = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : 1.0;
    result.fits.push_back(fit);
  }
  return result;
}

double inverse_budget_lookup(const SweepResult& sweep, FleetCombo combo, double target_phi) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const SweepRow& row : sweep.rows) {
    if (row.combo != combo) continue;
    if (row.phi >= target_phi - 1e-12 && (std::isnan(best) || row.budget < best))
      best = row.budget;
  }
  return best;
}

std::vector<double> taxi_grid_score(const TaxiModel& taxi) {
  std::vector<double> score(static_cast<std::size_t>(taxi.p.grids()), 0.0);
  for (int g = 0; g < taxi.p.grids(); ++g) {
    double s = 0.0;
    for (int t = 0; t < taxi.p.windows(); ++t) s += taxi.p(g, t);
    score[static_cast<std::size_t>(g)] = s / taxi.p.windows();
  }
  return score;
}

CoverageIndicators scenario_coverage_indicators(const SensingScenario& scenario,
                                                double percentile) {
  return spatial_coverage_indicators(scenario.weights.spatial, taxi_grid_score(scenario.taxi),
                                     scenario.incidence.grid_on_any, percentile);
}

}  // namespace dsc
