#include "dsc/export.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "dsc/csv.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dsc {

namespace {

json kl_to_json(const DscSolution& sol) {
  if (!sol.kl_defined) return nullptr;
  if (std::isinf(sol.kl)) return "inf";
  return sol.kl;
}

std::string kl_to_text(double kl, bool defined) {
  if (!defined) return "nan";
  if (std::isinf(kl)) return "inf";
  return csv::fmt(kl);
}

}  // namespace

void save_solution(const DscSolution& sol, const SensingScenario& scenario,
                   const std::string& path) {
  json j;
  j["combo"] = combo_name(sol.combo);
  j["budget"] = sol.budget;
  j["phi"] = sol.phi;
  j["kl"] = kl_to_json(sol);
  j["n_taxi"] = sol.n_taxi;
  j["sensors"] = sol.sensors;
  j["n_dv"] = sol.n_dv;
  j["spend"] = {{"taxi", sol.spend_taxi},
                {"bus", sol.spend_bus},
                {"dv", sol.spend_dv},
                {"total", sol.spend_total()},
                {"unspent", sol.unspent}};
  j["relaxed"] = {{"x", sol.tb.x_relaxed},
                  {"objective", sol.tb.objective_relaxed},
                  {"objective_rounded", sol.tb.objective_rounded},
                  {"gap", sol.tb.gap},
                  {"iterations", sol.tb.iterations},
                  {"converged", sol.tb.converged}};
  json routes = json::array();
  for (const DvRoute& r : sol.dv_routes) {
    json jr;
    std::vector<long long> ext;
    ext.reserve(r.nodes.size());
    for (int u : r.nodes)
      ext.push_back(scenario.network.node_ids[static_cast<std::size_t>(u)]);
    jr["nodes"] = ext;
    jr["hours"] = r.hours;
    jr["grids"] = r.grids;
    jr["collected"] = r.collected;
    jr["starved"] = r.starved;
    routes.push_back(std::move(jr));
  }
  j["dv_routes"] = std::move(routes);
  json trace = json::array();
  for (const auto& t : sol.trace) trace.push_back({{"n_dv", t.n_dv}, {"phi", t.phi}});
  j["trace"] = std::move(trace);

  const Field total = sol.total_field();
  if (total.sum() > 0.0) {
    json gaps = json::array();
    const auto metrics = twsu_and_tag(total, scenario.weights, scenario.params);
    for (int g = 0; g < scenario.n_grids(); ++g) {
      const GridGap& gg = metrics[static_cast<std::size_t>(g)];
      gaps.push_back({{"grid", g},
                      {"twsu", gg.twsu},
                      {"tag_percent", gg.applicable ? json(gg.tag_percent) : json(nullptr)},
                      {"cells_excluded", gg.cells_excluded}});
    }
    j["grid_metrics"] = std::move(gaps);
  } else {
    j["grid_metrics"] = json::array();
  }

  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw InputError("write to '" + path + "' failed");
}

DscSolution load_solution(const SensingScenario& scenario, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open solution file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("solution file: ") + e.what());
  }

  DscSolution sol;
  sol.combo = parse_combo(j.at("combo").get<std::string>());
  sol.budget = j.at("budget").get<double>();
  sol.n_taxi = j.at("n_taxi").get<long long>();
  sol.sensors = j.at("sensors").get<std::vector<long long>>();
  sol.n_dv = j.at("n_dv").get<int>();

  std::map<long long, int> dense;
  for (int u = 0; u < scenario.network.size(); ++u)
    dense[scenario.network.node_ids[static_cast<std::size_t>(u)]] = u;
  for (const json& jr : j.at("dv_routes")) {
    DvRoute r;
    for (long long id : jr.at("nodes").get<std::vector<long long>>()) {
      auto it = dense.find(id);
      if (it == dense.end())
        throw InputError(path + ": route references unknown node id " + std::to_string(id));
      r.nodes.push_back(it->second);
    }
    r.start_node = r.nodes.empty() ? -1 : r.nodes.front();
    r.hours = jr.at("hours").get<double>();
    r.grids = jr.at("grids").get<std::vector<int>>();
    r.collected = jr.value("collected", 0.0);
    r.starved = jr.value("starved", false);
    sol.dv_routes.push_back(std::move(r));
  }

  // rebuild coverage fields from the decisions
  sol.taxi_field = taxi_coverage(scenario.taxi, static_cast<double>(sol.n_taxi));
  std::vector<double> y(sol.sensors.size());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = static_cast<double>(sol.sensors[k]);
  sol.bus_field = bus_coverage(scenario.bus_lines, scenario.incidence, y, scenario.n_windows());
  sol.dv_field = extend_round_trips(sol.dv_routes, scenario.dv.operating_windows,
                                    scenario.n_grids(), scenario.n_windows());
  sol.spend_taxi = scenario.costs.taxi * static_cast<double>(sol.n_taxi);
  sol.spend_bus = 0.0;
  for (long long s : sol.sensors) sol.spend_bus += scenario.costs.bus * static_cast<double>(s);
  sol.spend_dv = scenario.costs.dv * sol.n_dv;
  sol.unspent = sol.budget - sol.spend_total();

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
  return sol;
}

void export_solution(const DscSolution& sol, const SensingScenario& scenario,
                     const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);

  {
    csv::Writer w((base / "summary.csv").string());
    w.header("key,value");
    auto row = [&](const std::string& k, const std::string& v) {
      w.field(k).field(v);
      w.endrow();
    };
    row("combo", combo_name(sol.combo));
    row("budget", csv::fmt(sol.budget));
    row("phi", csv::fmt(sol.phi));
    row("kl", kl_to_text(sol.kl, sol.kl_defined));
    row("n_taxi", std::to_string(sol.n_taxi));
    long long sensors = 0;
    for (long long s : sol.sensors) sensors += s;
    row("bus_sensors", std::to_string(sensors));
    row("n_dv", std::to_string(sol.n_dv));
    row("spend_taxi", csv::fmt(sol.spend_taxi));
    row("spend_bus", csv::fmt(sol.spend_bus));
    row("spend_dv", csv::fmt(sol.spend_dv));
    row("spend_total", csv::fmt(sol.spend_total()));
    row("unspent", csv::fmt(sol.unspent));
    row("relaxed_objective", csv::fmt(sol.tb.objective_relaxed));
    row("solver_gap", csv::fmt(sol.tb.gap));
    row("solver_converged", sol.tb.converged ? "1" : "0");
    w.close();
  }
  {
    csv::Writer w((base / "line_sensors.csv").string());
    w.header("line,sensors,fleet_size");
    for (std::size_t j = 0; j < sol.sensors.size(); ++j) {
      w.field(scenario.bus_lines[j].name)
          .field(sol.sensors[j])
          .field(scenario.bus_lines[j].fleet_size);
      w.endrow();
    }
    w.close();
  }
  {
    csv::Writer w((base / "fields.csv").string());
    w.header("grid,window,taxi,bus,dv,total");
    for (int g = 0; g < scenario.n_grids(); ++g)
      for (int t = 0; t < scenario.n_windows(); ++t) {
        const double taxi = sol.taxi_field(g, t), bus = sol.bus_field(g, t),
                     dv = sol.dv_field(g, t);
        w.field(g).field(t).field(taxi).field(bus).field(dv).field(taxi + bus + dv);
        w.endrow();
      }
    w.close();
  }
  {
    csv::Writer w((base / "grid_metrics.csv").string());
    w.header("grid,twsu,tag_percent,applicable,cells_excluded");
    const Field total = sol.total_field();
    if (total.sum() > 0.0) {
      const auto metrics = twsu_and_tag(total, scenario.weights, scenario.params);
      for (int g = 0; g < scenario.n_grids(); ++g) {
        const GridGap& gg = metrics[static_cast<std::size_t>(g)];
        w.field(g)
            .field(gg.twsu)
            .field(gg.applicable ? csv::fmt(gg.tag_percent) : "nan")
            .field(gg.applicable ? 1 : 0)
            .field(gg.cells_excluded);
        w.endrow();
      }
    }
    w.close();
  }
  {
    csv::Writer w((base / "routes.csv").string());
    w.header("vehicle,seq,node");
    for (std::size_t v = 0; v < sol.dv_routes.size(); ++v)
      for (std::size_t s = 0; s < sol.dv_routes[v].nodes.size(); ++s) {
        w.field(static_cast<long long>(v))
            .field(static_cast<long long>(s))
            .field(static_cast<long long>(
                scenario.network.node_ids[static_cast<std::size_t>(sol.dv_routes[v].nodes[s])]));
        w.endrow();
      }
    w.close();
  }
  {
    csv::Writer w((base / "route_coverage.csv").string());
    w.header("vehicle,window,grid");
    for (std::size_t v = 0; v < sol.dv_routes.size(); ++v) {
      std::vector<int> grids = sol.dv_routes[v].grids;
      std::sort(grids.begin(), grids.end());
      for (int g : grids)
        for (int t : scenario.dv.operating_windows) {
          w.field(static_cast<long long>(v)).field(t).field(g);
          w.endrow();
        }
    }
    w.close();
  }
}

void export_sweep(const SweepResult& sweep, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  {
    csv::Writer w((base / "sweep.csv").string());
    w.header("combo,budget,phi,kl,n_taxi,bus_sensors,n_dv");
    for (const SweepRow& row : sweep.rows) {
      w.field(combo_name(row.combo))
          .field(row.budget)
          .field(row.phi)
          .field(kl_to_text(row.kl, row.kl_defined))
          .field(row.n_taxi)
          .field(row.bus_sensors)
          .field(row.n_dv);
      w.endrow();
    }
    w.close();
  }
  {
    csv::Writer w((base / "sweep_fit.csv").string());
    w.header("combo,a,b,r2");
    for (const SweepFit& fit : sweep.fits) {
      w.field(combo_name(fit.combo)).field(fit.a).field(fit.b).field(fit.r2);
      w.endrow();
    }
    w.close();
  }
}

Regression linear_regression(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("regression inputs must have equal length");
  Regression reg;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    ++reg.points;
  }
  if (reg.points < 2) return reg;
  const double n = static_cast<double>(reg.points);
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) {
    reg.intercept = sy / n;
    return reg;
  }
  reg.slope = (n * sxy - sx * sy) / denom;
  reg.intercept = (sy - reg.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  const double mean = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    const double pred = reg.slope * x[i] + reg.intercept;
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  reg.r2 = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : 1.0;
  return reg;
}

TransferStudy run_transfer_study(const SensingScenario& scenario, int variants, bool with_dv,
                                 std::uint64_t seed, double percentile) {
  if (variants < 1) throw InputError("transfer study needs at least one variant");
  TransferStudy study;
  study.with_dv = with_dv;
  study.rows.resize(static_cast<std::size_t>(variants));

  // taxi-only does not depend on the bus network
  const double phi_taxi = solve_fleet_combination(scenario, FleetCombo::kTaxi).phi;

#pragma omp parallel for schedule(dynamic)
  for (int v = 0; v < variants; ++v) {
    const double fraction = static_cast<double>(v) / variants;
    const SensingScenario degraded = degrade_bus_network(scenario, fraction, seed + static_cast<std::uint64_t>(v));
    TransferRow row;
    row.variant = v;
    row.removal_fraction = fraction;
    row.sci = scenario_coverage_indicators(degraded, percentile);
    row.phi_taxi = phi_taxi;
    row.phi_bus = solve_fleet_combination(degraded, FleetCombo::kBus).phi;
    row.phi_taxi_bus = solve_fleet_combination(degraded, FleetCombo::kTaxiBus).phi;
    row.phi_tbd = with_dv ? solve_fleet_combination(degraded, FleetCombo::kTaxiBusDv).phi
                          : std::numeric_limits<double>::quiet_NaN();
    study.rows[static_cast<std::size_t>(v)] = row;
  }

  std::vector<double> x1, y1, x2, y2, x3, y3;
  for (const TransferRow& r : study.rows) {
    if (r.sci.taxi > 0.0 && r.phi_taxi > 0.0) {
      x1.push_back((r.sci.taxi_bus - r.sci.taxi) / r.sci.taxi);
      y1.push_back((r.phi_taxi_bus - r.phi_taxi) / r.phi_taxi);
    }
    if (r.sci.bus > 0.0 && r.phi_bus > 0.0) {
      x2.push_back((r.sci.taxi_bus - r.sci.bus) / r.sci.bus);
      y2.push_back((r.phi_taxi_bus - r.phi_bus) / r.phi_bus);
    }
    if (with_dv && r.sci.taxi_bus > 0.0 && r.phi_taxi_bus > 0.0) {
      x3.push_back((r.sci.all - r.sci.taxi_bus) / r.sci.taxi_bus);
      y3.push_back((r.phi_tbd - r.phi_taxi_bus) / r.phi_taxi_bus);
    }
  }
  study.tb_vs_taxi = linear_regression(x1, y1);
  study.tb_vs_bus = linear_regression(x2, y2);
  if (with_dv) study.tbd_vs_tb = linear_regression(x3, y3);
  return study;
}

void export_transfer(const TransferStudy& study, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  {
    csv::Writer w((base / "transfer.csv").string());
    w.header(
        "variant,removal_fraction,w_taxi,w_bus,w_taxi_bus,phi_taxi,phi_bus,phi_taxi_bus,phi_tbd,"
        "sci_diff_tb_taxi,gain_tb_taxi,sci_diff_tb_bus,gain_tb_bus,sci_diff_tbd_tb,gain_tbd_tb");
    auto ratio = [](double a, double b) {
      return b > 0.0 ? csv::fmt((a - b) / b) : std::string("nan");
    };
    for (const TransferRow& r : study.rows) {
      w.field(r.variant)
          .field(r.removal_fraction)
          .field(r.sci.taxi)
          .field(r.sci.bus)
          .field(r.sci.taxi_bus)
          .field(r.phi_taxi)
          .field(r.phi_bus)
          .field(r.phi_taxi_bus)
          .field(std::isnan(r.phi_tbd) ? std::string("nan") : csv::fmt(r.phi_tbd))
          .field(ratio(r.sci.taxi_bus, r.sci.taxi))
          .field(ratio(r.phi_taxi_bus, r.phi_taxi))
          .field(ratio(r.sci.taxi_bus, r.sci.bus))
          .field(ratio(r.phi_taxi_bus, r.phi_bus))
          .field(ratio(r.sci.all, r.sci.taxi_bus))
          .field(std::isnan(r.phi_tbd) ? std::string("nan") : ratio(r.phi_tbd, r.phi_taxi_bus));
      w.endrow();
    }
    w.close();
  }
  {
    csv::Writer w((base / "transfer_fit.csv").string());
    w.header("pair,slope,intercept,r2,points");
    auto row = [&](const std::string& name, const Regression& reg) {
      w.field(name).field(reg.slope).field(reg.intercept).field(reg.r2).field(reg.points);
      w.endrow();
    };
    row("taxi_bus_vs_taxi", study.tb_vs_taxi);
    row("taxi_bus_vs_bus", study.tb_vs_bus);
    if (study.with_dv) row("tbd_vs_taxi_bus", study.tbd_vs_tb);
    w.close();
  }
}

void export_taxi_validation(const TaxiFitValidation& report, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  {
    csv::Writer w((base / "taxi_fit_mae.csv").string());
    w.header("window,size,mae");
    for (const auto& row : report.rows) {
      w.field(row.window).field(row.size).field(row.mae);
      w.endrow();
    }
    w.close();
  }
  {
    csv::Writer w((base / "taxi_fit_scatter.csv").string());
    w.header("window,size,grid,empirical,estimated");
    for (const auto& p : report.scatter) {
      w.field(p.window).field(p.size).field(p.grid).field(p.empirical).field(p.estimated);
      w.endrow();
    }
    w.close();
  }
}

}  // namespace dsc
