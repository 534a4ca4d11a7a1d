#include "dsc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "dsc/csv.hpp"
#include "dsc/metrics.hpp"
#include "dsc/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dsc {

namespace {

constexpr double kKmPerDegLat = 110.574;

struct GeoRef {
  double min_lon = 0.0, min_lat = 0.0;
  double km_per_deg_lon = 111.320;

  std::pair<double, double> to_km(double lon, double lat) const {
    return {(lon - min_lon) * km_per_deg_lon, (lat - min_lat) * kKmPerDegLat};
  }
};

const json& require_key(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) throw InputError(ctx + ": missing required field '" + key + "'");
  return j.at(key);
}

double require_num(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = require_key(j, key, ctx);
  if (!v.is_number()) throw InputError(ctx + "." + key + ": expected a number");
  return v.get<double>();
}

double num_or(const json& j, const std::string& key, double def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_number()) throw InputError("field '" + key + "': expected a number");
  return j.at(key).get<double>();
}

std::string resolve(const fs::path& base, const std::string& rel) {
  fs::path p(rel);
  const fs::path full = p.is_absolute() ? p : base / p;
  if (!fs::exists(full)) throw InputError("referenced file does not exist: " + full.string());
  return full.string();
}

std::vector<double> day_night_weights(const HorizonSpec& h) {
  std::vector<double> mu(static_cast<std::size_t>(h.windows));
  double total = 0.0;
  for (int t = 0; t < h.windows; ++t) {
    const double lo = h.start_hour + t * h.window_hours;
    const double hi = lo + h.window_hours;
    const bool day = lo < 20.0 && hi > 8.0;
    mu[static_cast<std::size_t>(t)] = day ? 4.0 : 1.0;
    total += mu[static_cast<std::size_t>(t)];
  }
  for (double& v : mu) v /= total;
  return mu;
}

}  // namespace

void SensingScenario::finalize() {
  if (grid.nx <= 0 || grid.ny <= 0 || grid.cell_km <= 0.0)
    throw InputError("grid: nx, ny and cell_km must be positive");
  if (horizon.windows <= 0 || horizon.window_hours <= 0.0)
    throw InputError("horizon: windows and window_hours must be positive");
  if (weights.grids() != n_grids())
    throw InputError("spatial weights cover " + std::to_string(weights.grids()) +
                     " grids, expected " + std::to_string(n_grids()));
  if (weights.windows() != n_windows())
    throw InputError("temporal weights cover " + std::to_string(weights.windows()) +
                     " windows, expected " + std::to_string(n_windows()));
  weights.validate();
  params.validate();
  costs.validate();
  taxi.validate();
  if (taxi.p.grids() != n_grids() || taxi.p.windows() != n_windows())
    throw InputError("taxi model dimensions do not match the scenario");
  for (const BusLine& line : bus_lines) line.validate(n_grids(), n_windows());
  incidence = BusIncidence::build(bus_lines, n_grids());
  if (network.size() == 0) throw InputError("road network is empty");
  gridmap = GridMap::build(grid, network);
  if (network.scc_count > 1)
    warnings.push_back("road network has " + std::to_string(network.scc_count) +
                       " strongly connected components; routing is confined to the largest");

  if (dv.operating_windows.empty()) dv.operating_windows = default_operating_windows();
  std::sort(dv.operating_windows.begin(), dv.operating_windows.end());
  dv.operating_windows.erase(std::unique(dv.operating_windows.begin(), dv.operating_windows.end()),
                             dv.operating_windows.end());
  for (int t : dv.operating_windows)
    if (t < 0 || t >= n_windows()) throw InputError("dv.operating_windows: index out of range");
  if (dv.search_radius_km <= 0.0) throw InputError("dv.search_radius_km must be positive");
  if (dv.window_hours <= 0.0) throw InputError("dv.window_hours must be positive");
  if (dv.fleet_cap < 0) throw InputError("dv.fleet_cap must be nonnegative");
  if (dv.adjust_max_iter < 0) throw InputError("dv.adjust_max_iter must be nonnegative");
  for (int s : dv.start_nodes) {
    if (s < 0 || s >= network.size()) throw InputError("dv.start_nodes: node index out of range");
    if (!network.routable[static_cast<std::size_t>(s)])
      throw InputError("dv.start_nodes: node " + std::to_string(s) +
                       " is outside the routable component");
  }
  if (solver.tol <= 0.0 || solver.max_iters < 1 || solver.inner_max_iter < 1)
    throw InputError("solver: tol must be positive and iteration limits at least 1");

  joint_w = weights.joint();
}

std::vector<int> SensingScenario::default_operating_windows() const {
  std::vector<int> out;
  for (int t = 0; t < horizon.windows; ++t) {
    const double lo = horizon.start_hour + t * horizon.window_hours;
    const double hi = lo + horizon.window_hours;
    if (lo < 20.0 && hi > 8.0) out.push_back(t);
  }
  return out;
}

namespace {

RoadNetwork load_network(const json& cfg, const fs::path& base, const GeoRef* geo) {
  const std::string ctx = "network";
  const csv::Table nodes = csv::read(resolve(base, require_key(cfg, "nodes", ctx).get<std::string>()));
  const csv::Table edges = csv::read(resolve(base, require_key(cfg, "edges", ctx).get<std::string>()));
  const double speed = num_or(cfg, "speed_kmh", 30.0);

  const bool planar = nodes.has("x_km") && nodes.has("y_km");
  if (!planar && !(nodes.has("lon") && nodes.has("lat")))
    throw InputError(nodes.path + ": expected columns id,x_km,y_km or id,lon,lat");
  if (!planar && geo == nullptr)
    throw InputError(nodes.path + ": lon/lat nodes require a geographic grid bounding box");

  const int cid = nodes.col("id");
  const int cx = planar ? nodes.col("x_km") : nodes.col("lon");
  const int cy = planar ? nodes.col("y_km") : nodes.col("lat");
  std::vector<std::int64_t> ids;
  std::vector<double> xs, ys;
  std::map<long long, int> dense;
  for (std::size_t r = 0; r < nodes.rows.size(); ++r) {
    const long long id = nodes.integer(r, cid);
    if (dense.count(id)) throw InputError(nodes.path + ": duplicate node id " + std::to_string(id));
    dense[id] = static_cast<int>(ids.size());
    ids.push_back(id);
    double x = nodes.num(r, cx), y = nodes.num(r, cy);
    if (!planar) std::tie(x, y) = geo->to_km(x, y);
    xs.push_back(x);
    ys.push_back(y);
  }

  std::vector<std::tuple<int, int, double, double>> es;
  const int cf = edges.col("from"), ct = edges.col("to"), cl = edges.col("length_km");
  const int cs = edges.has("speed_kmh") ? edges.col("speed_kmh") : -1;
  for (std::size_t r = 0; r < edges.rows.size(); ++r) {
    const long long u = edges.integer(r, cf), v = edges.integer(r, ct);
    if (!dense.count(u) || !dense.count(v))
      throw InputError(edges.path + ": row " + std::to_string(r + 2) +
                       " references an unknown node id");
    es.emplace_back(dense[u], dense[v], edges.num(r, cl), cs >= 0 ? edges.num(r, cs) : 0.0);
  }
  return RoadNetwork::build(std::move(ids), std::move(xs), std::move(ys), es, speed);
}

std::vector<double> load_spatial_weights(const std::string& path, int n_grids) {
  const csv::Table t = csv::read(path);
  const int cg = t.col("grid"), cw = t.col("weight");
  std::vector<double> w(static_cast<std::size_t>(n_grids), 0.0);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const long long g = t.integer(r, cg);
    if (g < 0 || g >= n_grids)
      throw InputError(path + ": row " + std::to_string(r + 2) + ": grid id out of range");
    w[static_cast<std::size_t>(g)] = t.num(r, cw);
  }
  return w;
}

TaxiTraceSet load_taxi_traces(const std::string& path, const SensingScenario& sc,
                              const GeoRef* geo) {
  const csv::Table t = csv::read(path);
  TaxiTraceSet traces;
  traces.n_grids = sc.n_grids();
  traces.n_windows = sc.n_windows();

  std::map<std::string, int> vehicles;
  std::map<long long, int> days;
  const bool pre_binned = t.has("window") && t.has("grid");
  const bool raw = t.has("timestamp") && ((t.has("lon") && t.has("lat")) || (t.has("x_km") && t.has("y_km")));
  if (!pre_binned && !raw)
    throw InputError(path +
                     ": expected columns vehicle,day,window,grid or vehicle,timestamp,lon,lat");

  const int cveh = t.col("vehicle");
  const int cop = t.has("operator") ? t.col("operator") : -1;
  std::vector<std::tuple<int, long long, int, int>> rows;  // vehicle, day key, window, grid

  if (pre_binned) {
    const int cday = t.col("day"), cwin = t.col("window"), cgrid = t.col("grid");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string& vid = t.cell(r, cveh);
      auto [it, fresh] = vehicles.emplace(vid, static_cast<int>(vehicles.size()));
      if (fresh) traces.operator_ids.push_back(cop >= 0 ? t.cell(r, cop) : "");
      const long long day = t.integer(r, cday);
      days.emplace(day, 0);
      const long long win = t.integer(r, cwin);
      const long long grid = t.integer(r, cgrid);
      if (win < 0 || win >= sc.n_windows())
        throw InputError(path + ": row " + std::to_string(r + 2) + ": window out of range");
      if (grid < 0 || grid >= sc.n_grids())
        throw InputError(path + ": row " + std::to_string(r + 2) + ": grid out of range");
      rows.emplace_back(it->second, day, static_cast<int>(win), static_cast<int>(grid));
    }
  } else {
    const bool planar = t.has("x_km");
    if (!planar && geo == nullptr)
      throw InputError(path + ": lon/lat traces require a geographic grid bounding box");
    const int cts = t.col("timestamp");
    const int cx = planar ? t.col("x_km") : t.col("lon");
    const int cy = planar ? t.col("y_km") : t.col("lat");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string& vid = t.cell(r, cveh);
      auto [it, fresh] = vehicles.emplace(vid, static_cast<int>(vehicles.size()));
      if (fresh) traces.operator_ids.push_back(cop >= 0 ? t.cell(r, cop) : "");
      const double ts = t.num(r, cts);
      const long long day = static_cast<long long>(std::floor(ts / 86400.0));
      const double hour = (ts - static_cast<double>(day) * 86400.0) / 3600.0;
      const int win = static_cast<int>(
          std::floor((hour - sc.horizon.start_hour) / sc.horizon.window_hours));
      if (win < 0 || win >= sc.n_windows()) continue;  // outside the horizon
      double x = t.num(r, cx), y = t.num(r, cy);
      if (!planar) std::tie(x, y) = geo->to_km(x, y);
      const int grid = sc.grid.cell_of(x, y);
      if (grid < 0) continue;  // outside the study area
      days.emplace(day, 0);
      rows.emplace_back(it->second, day, win, grid);
    }
  }

  int di = 0;
  for (auto& [day, idx] : days) idx = di++;
  traces.n_vehicles = static_cast<int>(vehicles.size());
  traces.n_days = di;
  traces.vehicle_ids.resize(vehicles.size());
  for (const auto& [vid, idx] : vehicles) traces.vehicle_ids[static_cast<std::size_t>(idx)] = vid;
  for (auto& [veh, day, win, grid] : rows)
    traces.visits.push_back({veh, days.at(day), win, grid});
  std::sort(traces.visits.begin(), traces.visits.end(), [](const TaxiVisit& a, const TaxiVisit& b) {
    return std::tie(a.vehicle, a.day, a.window, a.grid) <
           std::tie(b.vehicle, b.day, b.window, b.grid);
  });
  traces.visits.erase(std::unique(traces.visits.begin(), traces.visits.end(),
                                  [](const TaxiVisit& a, const TaxiVisit& b) {
                                    return a.vehicle == b.vehicle && a.day == b.day &&
                                           a.window == b.window && a.grid == b.grid;
                                  }),
                      traces.visits.end());
  return traces;
}

struct LineGeometry {
  std::vector<std::string> names;
  std::vector<long long> fleet;
  std::vector<std::vector<std::pair<double, double>>> polylines;  // coordinate form
  std::vector<std::vector<int>> grids;                            // direct grid form
  bool grid_form = false;
};

LineGeometry load_line_geometry(const std::string& path, const GeoRef* geo) {
  const csv::Table t = csv::read(path);
  LineGeometry geom;
  if (t.rows.empty()) return geom;
  geom.grid_form = t.has("grid");
  const bool planar = t.has("x_km") && t.has("y_km");
  if (!geom.grid_form && !planar && !(t.has("lon") && t.has("lat")))
    throw InputError(path + ": expected columns line,fleet_size,seq plus x_km/y_km, lon/lat or grid");
  if (!geom.grid_form && !planar && geo == nullptr)
    throw InputError(path + ": lon/lat polylines require a geographic grid bounding box");
  const int cl = t.col("line");
  const int cf = t.col("fleet_size");
  const int cseq = t.col("seq");
  const int cg = geom.grid_form ? t.col("grid") : -1;
  const int cx = geom.grid_form ? -1 : (planar ? t.col("x_km") : t.col("lon"));
  const int cy = geom.grid_form ? -1 : (planar ? t.col("y_km") : t.col("lat"));

  std::map<std::string, int> index;
  std::vector<std::vector<std::tuple<long long, double, double, int>>> raw;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& name = t.cell(r, cl);
    auto [it, fresh] = index.emplace(name, static_cast<int>(index.size()));
    if (fresh) {
      geom.names.push_back(name);
      geom.fleet.push_back(t.integer(r, cf));
      raw.emplace_back();
    } else if (geom.fleet[static_cast<std::size_t>(it->second)] != t.integer(r, cf)) {
      throw InputError(path + ": line " + name + " has inconsistent fleet_size values");
    }
    if (geom.grid_form) {
      raw[static_cast<std::size_t>(it->second)].emplace_back(
          t.integer(r, cseq), 0.0, 0.0, static_cast<int>(t.integer(r, cg)));
    } else {
      double x = t.num(r, cx), y = t.num(r, cy);
      if (!planar) std::tie(x, y) = geo->to_km(x, y);
      raw[static_cast<std::size_t>(it->second)].emplace_back(t.integer(r, cseq), x, y, -1);
    }
  }
  for (auto& pts : raw) {
    std::sort(pts.begin(), pts.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    if (geom.grid_form) {
      std::vector<int> cells;
      for (auto& [seq, x, y, g] : pts) cells.push_back(g);
      geom.grids.push_back(std::move(cells));
      geom.polylines.emplace_back();
    } else {
      std::vector<std::pair<double, double>> poly;
      for (auto& [seq, x, y, g] : pts) poly.emplace_back(x, y);
      geom.polylines.push_back(std::move(poly));
      geom.grids.emplace_back();
    }
  }
  return geom;
}

void load_bus_params(const std::string& path, std::vector<BusLine>& lines,
                     const std::map<std::string, int>& index, int n_windows) {
  const csv::Table t = csv::read(path);
  const int cl = t.col("line"), cw = t.col("window");
  const int cs = t.col("service_hours"), ca = t.col("turnaround_hours"), ci = t.col("in_service");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& name = t.cell(r, cl);
    auto it = index.find(name);
    if (it == index.end())
      throw InputError(path + ": row " + std::to_string(r + 2) + ": unknown line '" + name + "'");
    const long long w = t.integer(r, cw);
    if (w < 0 || w >= n_windows)
      throw InputError(path + ": row " + std::to_string(r + 2) + ": window out of range");
    BusLine& line = lines[static_cast<std::size_t>(it->second)];
    line.service_hours[static_cast<std::size_t>(w)] = t.num(r, cs);
    line.turnaround_hours[static_cast<std::size_t>(w)] = t.num(r, ca);
    line.in_service[static_cast<std::size_t>(w)] = t.num(r, ci);
  }
}

std::vector<BusTrip> load_bus_trips(const std::string& path,
                                    const std::map<std::string, int>& index) {
  const csv::Table t = csv::read(path);
  std::vector<BusTrip> trips;
  const int cl = t.col("line"), cv = t.col("vehicle"), cd = t.col("day");
  const int cdep = t.col("depart_hour"), carr = t.col("arrive_hour");
  std::map<std::string, int> vdense;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& name = t.cell(r, cl);
    auto it = index.find(name);
    if (it == index.end())
      throw InputError(path + ": row " + std::to_string(r + 2) + ": unknown line '" + name + "'");
    auto [vit, fresh] = vdense.emplace(t.cell(r, cv), static_cast<int>(vdense.size()));
    trips.push_back({it->second, vit->second, static_cast<int>(t.integer(r, cd)), t.num(r, cdep),
                     t.num(r, carr)});
  }
  return trips;
}

}  // namespace

SensingScenario load_scenario(const std::string& config_path, const ScenarioOverrides& ov) {
  std::ifstream in(config_path);
  if (!in) throw InputError("cannot open scenario config '" + config_path + "'");
  json cfg;
  try {
    cfg = json::parse(in, nullptr, true, true);  // allow comments
  } catch (const json::parse_error& e) {
    throw InputError(std::string("scenario config: ") + e.what());
  }
  const fs::path base = fs::path(config_path).parent_path();

  SensingScenario sc;
  sc.seed = ov.seed.value_or(static_cast<std::uint64_t>(num_or(cfg, "seed", 0.0)));

  // grid: planar km box or geographic bounding box
  const json& jg = require_key(cfg, "grid", "config");
  GeoRef geo;
  bool geographic = false;
  sc.grid.cell_km = num_or(jg, "cell_km", 1.0);
  if (jg.contains("min_lon")) {
    geographic = true;
    geo.min_lon = require_num(jg, "min_lon", "grid");
    geo.min_lat = require_num(jg, "min_lat", "grid");
    const double max_lon = require_num(jg, "max_lon", "grid");
    const double max_lat = require_num(jg, "max_lat", "grid");
    if (max_lon <= geo.min_lon || max_lat <= geo.min_lat)
      throw InputError("grid: geographic bounding box is empty");
    const double mid_lat = 0.5 * (geo.min_lat + max_lat);
    geo.km_per_deg_lon = 111.320 * std::cos(mid_lat * 3.14159265358979323846 / 180.0);
    const auto [w, h] = geo.to_km(max_lon, max_lat);
    sc.grid.min_x = 0.0;
    sc.grid.min_y = 0.0;
    sc.grid.nx = static_cast<int>(std::ceil(w / sc.grid.cell_km - 1e-9));
    sc.grid.ny = static_cast<int>(std::ceil(h / sc.grid.cell_km - 1e-9));
  } else {
    sc.grid.min_x = num_or(jg, "min_x_km", 0.0);
    sc.grid.min_y = num_or(jg, "min_y_km", 0.0);
    sc.grid.nx = static_cast<int>(require_num(jg, "nx", "grid"));
    sc.grid.ny = static_cast<int>(require_num(jg, "ny", "grid"));
  }

  const json& jh = cfg.contains("horizon") ? cfg.at("horizon") : json::object();
  sc.horizon.windows = static_cast<int>(num_or(jh, "windows", 12.0));
  sc.horizon.start_hour = num_or(jh, "start_hour", 8.0);
  sc.horizon.window_hours = num_or(jh, "window_hours", 1.0);

  // weights
  const json& jw = require_key(cfg, "weights", "config");
  std::vector<double> spatial;
  const bool uniform_spatial =
      jw.contains("uniform") &&
      ((jw.at("uniform").is_boolean() && jw.at("uniform").get<bool>()) ||
       (jw.at("uniform").is_number() && jw.at("uniform").get<double>() != 0.0));
  if (jw.contains("spatial_file")) {
    spatial = load_spatial_weights(resolve(base, jw.at("spatial_file").get<std::string>()),
                                   sc.grid.count());
  } else if (uniform_spatial) {
    spatial.assign(static_cast<std::size_t>(sc.grid.count()), 1.0);
  } else {
    throw InputError("weights: provide spatial_file or uniform=true");
  }
  std::vector<double> temporal;
  if (jw.contains("temporal")) {
    temporal = jw.at("temporal").get<std::vector<double>>();
  } else {
    const std::string preset =
        jw.contains("temporal_preset") ? jw.at("temporal_preset").get<std::string>() : "uniform";
    if (preset == "uniform")
      temporal.assign(static_cast<std::size_t>(sc.horizon.windows), 1.0);
    else if (preset == "day-night")
      temporal = day_night_weights(sc.horizon);
    else
      throw InputError("weights.temporal_preset: expected 'uniform' or 'day-night'");
  }
  bool warned = false;
  sc.weights = SensingWeights::normalized(std::move(spatial), std::move(temporal), &warned);
  if (warned)
    sc.warnings.push_back("input weights were renormalized (sum deviated by more than 1e-6)");

  // utility exponent: provided directly or calibrated from zeta
  const json& ju = cfg.contains("utility") ? cfg.at("utility") : json::object();
  auto calibrate_from_zeta = [&](double zeta) {
    double wmax = 0.0, wmin = std::numeric_limits<double>::infinity();
    for (double w : sc.weights.spatial) {
      if (w <= 0.0) continue;  // zero-weight grids do not constrain the ratio
      wmax = std::max(wmax, w);
      wmin = std::min(wmin, w);
    }
    const BetaCalibration cal = calibrate_beta(wmax, wmin, zeta);
    sc.params.beta = cal.degenerate ? 0.5 : cal.beta;
    if (cal.degenerate)
      sc.warnings.push_back("uniform weights make the beta calibration degenerate; using beta=0.5");
  };
  if (ov.beta.has_value()) {
    sc.params.beta = *ov.beta;
  } else if (ov.zeta.has_value()) {
    calibrate_from_zeta(*ov.zeta);
  } else if (ju.contains("beta")) {
    sc.params.beta = require_num(ju, "beta", "utility");
  } else if (ju.contains("zeta")) {
    calibrate_from_zeta(require_num(ju, "zeta", "utility"));
  }
  sc.params.epsilon_smooth = num_or(ju, "epsilon_smooth", 1e-8);

  const json& jc = require_key(cfg, "costs", "config");
  sc.costs.taxi = num_or(jc, "taxi", 52000.0);
  sc.costs.bus = num_or(jc, "bus", 50000.0);
  sc.costs.dv = num_or(jc, "dv", 300000.0);
  sc.costs.budget = ov.budget.value_or(num_or(jc, "budget", 0.0));

  sc.network = load_network(require_key(cfg, "network", "config"), base,
                            geographic ? &geo : nullptr);

  // taxi model: fitted table or traces to fit
  const json& jt = require_key(cfg, "taxi", "config");
  if (jt.contains("p_file")) {
    const csv::Table t = csv::read(resolve(base, jt.at("p_file").get<std::string>()));
    const int cg = t.col("grid"), cw = t.col("window"), cp = t.col("p");
    sc.taxi.p = Field(sc.grid.count(), sc.horizon.windows);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const long long g = t.integer(r, cg), w = t.integer(r, cw);
      if (g < 0 || g >= sc.grid.count() || w < 0 || w >= sc.horizon.windows)
        throw InputError(t.path + ": row " + std::to_string(r + 2) + ": cell out of range");
      sc.taxi.p(static_cast<int>(g), static_cast<int>(w)) = t.num(r, cp);
    }
    sc.taxi.fleet_bound = static_cast<long long>(require_num(jt, "fleet_bound", "taxi"));
  } else if (jt.contains("traces")) {
    const TaxiTraceSet traces = load_taxi_traces(
        resolve(base, jt.at("traces").get<std::string>()), sc, geographic ? &geo : nullptr);
    TaxiFitOptions fit;
    fit.draws = static_cast<int>(num_or(jt, "fit_draws", 20.0));
    fit.seed = sc.seed + 1;
    if (jt.contains("fit_sizes")) fit.subset_sizes = jt.at("fit_sizes").get<std::vector<int>>();
    sc.taxi = fit_p(traces, fit);
    if (jt.contains("fleet_bound"))
      sc.taxi.fleet_bound = static_cast<long long>(require_num(jt, "fleet_bound", "taxi"));
  } else {
    throw InputError("taxi: provide p_file or traces");
  }

  // bus lines
  if (cfg.contains("bus")) {
    const json& jb = cfg.at("bus");
    const LineGeometry geom = load_line_geometry(
        resolve(base, require_key(jb, "lines", "bus").get<std::string>()),
        geographic ? &geo : nullptr);
    std::map<std::string, int> index;
    for (std::size_t j = 0; j < geom.names.size(); ++j) {
      BusLine line;
      line.id = static_cast<int>(j);
      line.name = geom.names[j];
      line.fleet_size = geom.fleet[j];
      line.route_grids = geom.grid_form ? geom.grids[j]
                                        : rasterize_polyline(sc.grid, geom.polylines[j]);
      if (line.route_grids.empty())
        throw InputError("bus line " + line.name + ": route lies outside the grid");
      line.service_hours.assign(static_cast<std::size_t>(sc.horizon.windows), 0.0);
      line.turnaround_hours.assign(static_cast<std::size_t>(sc.horizon.windows), 0.0);
      line.in_service.assign(static_cast<std::size_t>(sc.horizon.windows), 0.0);
      line.window_synthetic.assign(static_cast<std::size_t>(sc.horizon.windows), 0);
      index.emplace(line.name, line.id);
      sc.bus_lines.push_back(std::move(line));
    }
    if (!sc.bus_lines.empty()) {
      if (jb.contains("params")) {
        load_bus_params(resolve(base, jb.at("params").get<std::string>()), sc.bus_lines, index,
                        sc.horizon.windows);
      } else if (jb.contains("trips")) {
        const std::vector<BusTrip> trips =
            load_bus_trips(resolve(base, jb.at("trips").get<std::string>()), index);
        BusParamEstimate est =
            estimate_line_params(trips, std::move(sc.bus_lines), sc.horizon.windows,
                                 sc.horizon.window_hours, sc.horizon.start_hour);
        sc.bus_lines = std::move(est.lines);
        std::string missing;
        for (std::size_t j = 0; j < est.line_unobserved.size(); ++j)
          if (est.line_unobserved[j]) missing += (missing.empty() ? "" : ", ") + sc.bus_lines[j].name;
        if (!missing.empty())
          throw InputError("bus lines with no trip observations need a params file: " + missing);
      } else {
        throw InputError("bus: provide params or trips");
      }
    }
  }

  // DV and solver settings
  const json& jd = cfg.contains("dv") ? cfg.at("dv") : json::object();
  if (jd.contains("operating_windows"))
    sc.dv.operating_windows = jd.at("operating_windows").get<std::vector<int>>();
  sc.dv.search_radius_km = num_or(jd, "search_radius_km", 5.0);
  sc.dv.window_hours = num_or(jd, "window_hours", sc.horizon.window_hours);
  sc.dv.fleet_cap = static_cast<int>(num_or(jd, "fleet_cap", 16.0));
  sc.dv.adjust_max_iter = static_cast<int>(num_or(jd, "adjust_max_iter", 10.0));
  if (jd.contains("psi_weight_spatial")) sc.dv.psi_weight_spatial = jd.at("psi_weight_spatial").get<bool>();
  if (jd.contains("start_nodes")) sc.dv.start_nodes = jd.at("start_nodes").get<std::vector<int>>();

  const json& js = cfg.contains("solver") ? cfg.at("solver") : json::object();
  sc.solver.tol = ov.tol.value_or(num_or(js, "tol", 1e-6));
  sc.solver.max_iters = ov.max_iters.value_or(static_cast<int>(num_or(js, "max_iters", 5000.0)));
  sc.solver.inner_max_iter = static_cast<int>(num_or(js, "inner_max_iter", 5.0));

  sc.finalize();
  return sc;
}

TaxiTraceSet load_scenario_taxi_traces(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw InputError("cannot open scenario config '" + config_path + "'");
  json cfg;
  try {
    cfg = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("scenario config: ") + e.what());
  }
  const fs::path base = fs::path(config_path).parent_path();
  const json& jt = require_key(cfg, "taxi", "config");
  if (!jt.contains("traces"))
    throw InputError("scenario config provides a fitted taxi table, not raw traces");

  // only the grid and horizon are needed to bin raw points
  SensingScenario sc;
  const json& jg = require_key(cfg, "grid", "config");
  GeoRef geo;
  bool geographic = false;
  sc.grid.cell_km = num_or(jg, "cell_km", 1.0);
  if (jg.contains("min_lon")) {
    geographic = true;
    geo.min_lon = require_num(jg, "min_lon", "grid");
    geo.min_lat = require_num(jg, "min_lat", "grid");
    const double max_lon = require_num(jg, "max_lon", "grid");
    const double max_lat = require_num(jg, "max_lat", "grid");
    const double mid_lat = 0.5 * (geo.min_lat + max_lat);
    geo.km_per_deg_lon = 111.320 * std::cos(mid_lat * 3.14159265358979323846 / 180.0);
    const auto [w, h] = geo.to_km(max_lon, max_lat);
    sc.grid.nx = static_cast<int>(std::ceil(w / sc.grid.cell_km - 1e-9));
    sc.grid.ny = static_cast<int>(std::ceil(h / sc.grid.cell_km - 1e-9));
  } else {
    sc.grid.min_x = num_or(jg, "min_x_km", 0.0);
    sc.grid.min_y = num_or(jg, "min_y_km", 0.0);
    sc.grid.nx = static_cast<int>(require_num(jg, "nx", "grid"));
    sc.grid.ny = static_cast<int>(require_num(jg, "ny", "grid"));
  }
  const json& jh = cfg.contains("horizon") ? cfg.at("horizon") : json::object();
  sc.horizon.windows = static_cast<int>(num_or(jh, "windows", 12.0));
  sc.horizon.start_hour = num_or(jh, "start_hour", 8.0);
  sc.horizon.window_hours = num_or(jh, "window_hours", 1.0);

  return load_taxi_traces(resolve(base, jt.at("traces").get<std::string>()), sc,
                          geographic ? &geo : nullptr);
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open synthetic spec '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("synthetic spec: ") + e.what());
  }
  SyntheticSpec spec;
  spec.grid_nx = static_cast<int>(num_or(j, "grid_nx", spec.grid_nx));
  spec.grid_ny = static_cast<int>(num_or(j, "grid_ny", spec.grid_ny));
  spec.cell_km = num_or(j, "cell_km", spec.cell_km);
  spec.road_density = num_or(j, "road_density", spec.road_density);
  spec.bus_lines = static_cast<int>(num_or(j, "bus_lines", spec.bus_lines));
  spec.bus_fleet_per_line = static_cast<int>(num_or(j, "bus_fleet_per_line", spec.bus_fleet_per_line));
  spec.taxi_hotspots = static_cast<int>(num_or(j, "taxi_hotspots", spec.taxi_hotspots));
  spec.taxi_vehicles = static_cast<int>(num_or(j, "taxi_vehicles", spec.taxi_vehicles));
  spec.trace_days = static_cast<int>(num_or(j, "trace_days", spec.trace_days));
  spec.visit_noise = num_or(j, "visit_noise", spec.visit_noise);
  spec.weight_ratio = num_or(j, "weight_ratio", spec.weight_ratio);
  spec.windows = static_cast<int>(num_or(j, "windows", spec.windows));
  spec.start_hour = num_or(j, "start_hour", spec.start_hour);
  spec.budget = num_or(j, "budget", spec.budget);
  spec.zeta = num_or(j, "zeta", spec.zeta);
  spec.seed = static_cast<std::uint64_t>(num_or(j, "seed", static_cast<double>(spec.seed)));
  spec.validate();
  return spec;
}

void save_scenario(const SensingScenario& sc, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);

  {
    csv::Writer w((base / "nodes.csv").string());
    w.header("id,x_km,y_km");
    for (int u = 0; u < sc.network.size(); ++u) {
      w.field(static_cast<long long>(sc.network.node_ids[static_cast<std::size_t>(u)]))
          .field(sc.network.x[static_cast<std::size_t>(u)])
          .field(sc.network.y[static_cast<std::size_t>(u)]);
      w.endrow();
    }
    w.close();
  }
  {
    csv::Writer w((base / "edges.csv").string());
    w.header("from,to,length_km");
    for (int u = 0; u < sc.network.size(); ++u)
      for (const auto& e : sc.network.out[static_cast<std::size_t>(u)]) {
        w.field(static_cast<long long>(sc.network.node_ids[static_cast<std::size_t>(u)]))
            .field(static_cast<long long>(sc.network.node_ids[static_cast<std::size_t>(e.to)]))
            .field(e.length_km);
        w.endrow();
      }
    w.close();
  }
  {
    csv::Writer w((base / "weights.csv").string());
    w.header("grid,weight");
    for (int g = 0; g < sc.n_grids(); ++g) {
      w.field(g).field(sc.weights.spatial[static_cast<std::size_t>(g)]);
      w.endrow();
    }
    w.close();
  }
  {
    csv::Writer w((base / "taxi_p.csv").string());
    w.header("grid,window,p");
    for (int g = 0; g < sc.n_grids(); ++g)
      for (int t = 0; t < sc.n_windows(); ++t) {
        w.field(g).field(t).field(sc.taxi.p(g, t));
        w.endrow();
      }
    w.close();
  }
  {
    csv::Writer w((base / "bus_lines.csv").string());
    w.header("line,fleet_size,seq,grid");
    for (const BusLine& line : sc.bus_lines) {
      for (std::size_t s = 0; s < line.route_grids.size(); ++s) {
        w.field(line.name)
            .field(line.fleet_size)
            .field(static_cast<long long>(s))
            .field(line.route_grids[s]);
        w.endrow();
      }
    }
    w.close();
  }
  {
    csv::Writer w((base / "bus_params.csv").string());
    w.header("line,window,service_hours,turnaround_hours,in_service");
    for (const BusLine& line : sc.bus_lines)
      for (int t = 0; t < sc.n_windows(); ++t) {
        w.field(line.name)
            .field(t)
            .field(line.service_hours[static_cast<std::size_t>(t)])
            .field(line.turnaround_hours[static_cast<std::size_t>(t)])
            .field(line.in_service[static_cast<std::size_t>(t)]);
        w.endrow();
      }
    w.close();
  }

  json cfg;
  cfg["seed"] = sc.seed;
  cfg["grid"] = {{"min_x_km", sc.grid.min_x},
                 {"min_y_km", sc.grid.min_y},
                 {"cell_km", sc.grid.cell_km},
                 {"nx", sc.grid.nx},
                 {"ny", sc.grid.ny}};
  cfg["horizon"] = {{"windows", sc.horizon.windows},
                    {"start_hour", sc.horizon.start_hour},
                    {"window_hours", sc.horizon.window_hours}};
  cfg["weights"] = {{"spatial_file", "weights.csv"},
                    {"temporal", sc.weights.temporal}};
  cfg["utility"] = {{"beta", sc.params.beta}, {"epsilon_smooth", sc.params.epsilon_smooth}};
  cfg["costs"] = {{"taxi", sc.costs.taxi},
                  {"bus", sc.costs.bus},
                  {"dv", sc.costs.dv},
                  {"budget", sc.costs.budget}};
  cfg["network"] = {{"nodes", "nodes.csv"}, {"edges", "edges.csv"}, {"speed_kmh", sc.network.speed_kmh}};
  cfg["taxi"] = {{"p_file", "taxi_p.csv"}, {"fleet_bound", sc.taxi.fleet_bound}};
  cfg["bus"] = {{"lines", "bus_lines.csv"}, {"params", "bus_params.csv"}};
  cfg["dv"] = {{"operating_windows", sc.dv.operating_windows},
               {"search_radius_km", sc.dv.search_radius_km},
               {"window_hours", sc.dv.window_hours},
               {"fleet_cap", sc.dv.fleet_cap},
               {"adjust_max_iter", sc.dv.adjust_max_iter},
               {"psi_weight_spatial", sc.dv.psi_weight_spatial},
               {"start_nodes", sc.dv.start_nodes}};
  cfg["solver"] = {{"tol", sc.solver.tol},
                   {"max_iters", sc.solver.max_iters},
                   {"inner_max_iter", sc.solver.inner_max_iter}};
  std::ofstream out(base / "scenario.json");
  out << cfg.dump(2) << '\n';
  if (!out) throw InputError("failed to write " + (base / "scenario.json").string());
}

void SyntheticSpec::validate() const {
  if (grid_nx <= 0 || grid_ny <= 0 || cell_km <= 0.0)
    throw InputError("synthetic spec: grid dimensions must be positive");
  if (road_density <= 0.0 || road_density > 1.0)
    throw InputError("synthetic spec: road_density must lie in (0,1]");
  if (bus_lines < 0 || taxi_vehicles <= 0 || trace_days <= 0 || windows <= 0)
    throw InputError("synthetic spec: counts must be positive");
  if (weight_ratio < 1.0) throw InputError("synthetic spec: weight_ratio must be >= 1");
  if (visit_noise < 0.0 || visit_noise > 0.5)
    throw InputError("synthetic spec: visit_noise must lie in [0, 0.5]");
}

namespace {

struct SyntheticWorld {
  GridSpec grid;
  std::vector<std::int64_t> node_ids;
  std::vector<double> xs, ys;
  std::vector<std::tuple<int, int, double, double>> edges;
  std::vector<double> spatial_weights;  // unnormalized
  Field taxi_p;
  LineGeometry lines;
  std::vector<BusTrip> trips;
  double beta = 0.2;
};

SyntheticWorld build_world(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticWorld w;
  w.grid = GridSpec{0.0, 0.0, spec.cell_km, spec.grid_nx, spec.grid_ny};

  // road lattice: 2x2 nodes per cell, 4-neighbor streets
  const int mx = 2 * spec.grid_nx, my = 2 * spec.grid_ny;
  const double sp = 0.5 * spec.cell_km;
  auto node_at = [&](int i, int j) { return j * mx + i; };
  for (int j = 0; j < my; ++j)
    for (int i = 0; i < mx; ++i) {
      w.node_ids.push_back(node_at(i, j));
      w.xs.push_back((i + 0.5) * sp);
      w.ys.push_back((j + 0.5) * sp);
    }
  Rng road_rng = rng.fork(11);
  for (int j = 0; j < my; ++j)
    for (int i = 0; i < mx; ++i) {
      if (i + 1 < mx && road_rng.uniform() < spec.road_density) {
        w.edges.emplace_back(node_at(i, j), node_at(i + 1, j), sp, 0.0);
        w.edges.emplace_back(node_at(i + 1, j), node_at(i, j), sp, 0.0);
      }
      if (j + 1 < my && road_rng.uniform() < spec.road_density) {
        w.edges.emplace_back(node_at(i, j), node_at(i, j + 1), sp, 0.0);
        w.edges.emplace_back(node_at(i, j + 1), node_at(i, j), sp, 0.0);
      }
    }

  // spatial weights: smooth bumps scaled so that max/min equals weight_ratio
  Rng wrng = rng.fork(23);
  const double wx = spec.grid_nx * spec.cell_km, wy = spec.grid_ny * spec.cell_km;
  const int n_wcenters = 2;
  std::vector<std::pair<double, double>> wc;
  for (int k = 0; k < n_wcenters; ++k)
    wc.emplace_back(wrng.uniform(0.1 * wx, 0.9 * wx), wrng.uniform(0.1 * wy, 0.9 * wy));
  const double sigma_w = 0.30 * std::max(wx, wy);
  std::vector<double> bump(static_cast<std::size_t>(w.grid.count()), 0.0);
  double bmin = 1e300, bmax = -1e300;
  for (int g = 0; g < w.grid.count(); ++g) {
    const double cx = w.grid.centroid_x(g), cy = w.grid.centroid_y(g);
    double v = 0.0;
    for (auto& [hx, hy] : wc) {
      const double d2 = (cx - hx) * (cx - hx) + (cy - hy) * (cy - hy);
      v = std::max(v, std::exp(-d2 / (2.0 * sigma_w * sigma_w)));
    }
    bump[static_cast<std::size_t>(g)] = v;
    bmin = std::min(bmin, v);
    bmax = std::max(bmax, v);
  }
  w.spatial_weights.resize(static_cast<std::size_t>(w.grid.count()));
  for (int g = 0; g < w.grid.count(); ++g) {
    const double u = bmax > bmin ? (bump[static_cast<std::size_t>(g)] - bmin) / (bmax - bmin) : 0.0;
    w.spatial_weights[static_cast<std::size_t>(g)] = 1.0 + (spec.weight_ratio - 1.0) * u;
  }

  const BetaCalibration cal =
      spec.weight_ratio > 1.0
          ? calibrate_beta(spec.weight_ratio, 1.0, spec.zeta)
          : BetaCalibration{0.5, true};
  w.beta = cal.degenerate ? 0.5 : cal.beta;

  // taxi visit probabilities: tight demand hotspots over a low base rate,
  // the spatially biased coverage pattern typical of taxi fleets
  Rng trng = rng.fork(37);
  std::vector<std::pair<double, double>> hc;
  for (int k = 0; k < std::max(1, spec.taxi_hotspots); ++k)
    hc.emplace_back(trng.uniform(0.1 * wx, 0.9 * wx), trng.uniform(0.1 * wy, 0.9 * wy));
  const double sigma_t = 0.10 * std::max(wx, wy);
  w.taxi_p = Field(w.grid.count(), spec.windows);
  for (int g = 0; g < w.grid.count(); ++g) {
    const double cx = w.grid.centroid_x(g), cy = w.grid.centroid_y(g);
    double v = 0.0;
    for (auto& [hx, hy] : hc) {
      const double d2 = (cx - hx) * (cx - hx) + (cy - hy) * (cy - hy);
      v = std::max(v, std::exp(-d2 / (2.0 * sigma_t * sigma_t)));
    }
    for (int t = 0; t < spec.windows; ++t) {
      const double prof =
          0.7 + 0.3 * std::sin(3.14159265358979323846 * (t + 0.5) / spec.windows);
      w.taxi_p(g, t) = std::clamp(0.015 + 0.75 * v * prof, 0.01, 0.9);
    }
  }

  // bus lines: straight or L-shaped corridors across the area
  Rng brng = rng.fork(53);
  for (int j = 0; j < spec.bus_lines; ++j) {
    std::vector<std::pair<double, double>> poly;
    const bool horizontal = brng.bernoulli(0.5);
    const bool bent = brng.bernoulli(0.5);
    const double margin = 0.05;
    if (horizontal) {
      const double y = (brng.below_int(spec.grid_ny) + 0.5) * spec.cell_km;
      poly.emplace_back(margin * wx, y);
      if (bent) {
        const double bx = brng.uniform(0.3 * wx, 0.7 * wx);
        const double y2 = (brng.below_int(spec.grid_ny) + 0.5) * spec.cell_km;
        poly.emplace_back(bx, y);
        poly.emplace_back(bx, y2);
        poly.emplace_back((1.0 - margin) * wx, y2);
      } else {
        poly.emplace_back((1.0 - margin) * wx, y);
      }
    } else {
      const double x = (brng.below_int(spec.grid_nx) + 0.5) * spec.cell_km;
      poly.emplace_back(x, margin * wy);
      if (bent) {
        const double by = brng.uniform(0.3 * wy, 0.7 * wy);
        const double x2 = (brng.below_int(spec.grid_nx) + 0.5) * spec.cell_km;
        poly.emplace_back(x, by);
        poly.emplace_back(x2, by);
        poly.emplace_back(x2, (1.0 - margin) * wy);
      } else {
        poly.emplace_back(x, (1.0 - margin) * wy);
      }
    }
    w.lines.names.push_back("L" + std::to_string(j));
    w.lines.fleet.push_back(spec.bus_fleet_per_line);
    w.lines.polylines.push_back(std::move(poly));
  }

  // timetable: staggered cycles between 8:00 and 20:00, one template day.
  // slow cycles and a partial service share keep the per-sensor coverage of
  // a route grid on the same scale as taxi coverage
  const double bus_speed = 14.0;
  for (int j = 0; j < spec.bus_lines; ++j) {
    double length = 0.0;
    const auto& poly = w.lines.polylines[static_cast<std::size_t>(j)];
    for (std::size_t s = 0; s + 1 < poly.size(); ++s)
      length += std::hypot(poly[s + 1].first - poly[s].first, poly[s + 1].second - poly[s].second);
    const double ts = std::max(0.2, length / bus_speed);
    const double ta = 0.4;
    const int active = std::max(1, static_cast<int>(std::llround(0.5 * spec.bus_fleet_per_line)));
    for (int v = 0; v < active; ++v) {
      double depart = 8.0 + v * (ts + ta) / active;
      while (depart + ts <= 20.0) {
        w.trips.push_back({j, j * 1000 + v, 0, depart, depart + ts});
        depart += ts + ta;
      }
    }
  }
  return w;
}

}  // namespace

TaxiTraceSet synthetic_taxi_traces(const SyntheticSpec& spec, const Field& taxi_p) {
  spec.validate();
  Rng rng = Rng(spec.seed).fork(71);
  TaxiTraceSet traces;
  traces.n_grids = taxi_p.grids();
  traces.n_windows = taxi_p.windows();
  traces.n_vehicles = spec.taxi_vehicles;
  traces.n_days = spec.trace_days;
  for (int v = 0; v < spec.taxi_vehicles; ++v) {
    traces.vehicle_ids.push_back("T" + std::to_string(v));
    traces.operator_ids.push_back("");
  }
  for (int v = 0; v < spec.taxi_vehicles; ++v)
    for (int d = 0; d < spec.trace_days; ++d) {
      const double jitter =
          spec.visit_noise > 0.0 ? rng.uniform(-spec.visit_noise, spec.visit_noise) : 0.0;
      for (int t = 0; t < taxi_p.windows(); ++t)
        for (int g = 0; g < taxi_p.grids(); ++g) {
          const double p = std::clamp(taxi_p(g, t) * (1.0 + jitter), 0.0, 1.0);
          if (rng.bernoulli(p)) traces.visits.push_back({v, d, t, g});
        }
    }
  return traces;
}

SensingScenario generate_synthetic(const SyntheticSpec& spec, const std::string& dir,
                                   SyntheticGroundTruth* truth) {
  const SyntheticWorld w = build_world(spec);
  const TaxiTraceSet traces = synthetic_taxi_traces(spec, w.taxi_p);

  fs::create_directories(dir);
  const fs::path base(dir);

  {
    csv::Writer out((base / "nodes.csv").string());
    out.header("id,x_km,y_km");
    for (std::size_t u = 0; u < w.node_ids.size(); ++u) {
      out.field(static_cast<long long>(w.node_ids[u])).field(w.xs[u]).field(w.ys[u]);
      out.endrow();
    }
    out.close();
  }
  {
    csv::Writer out((base / "edges.csv").string());
    out.header("from,to,length_km");
    for (const auto& [u, v, len, speed] : w.edges) {
      out.field(static_cast<long long>(w.node_ids[static_cast<std::size_t>(u)]))
          .field(static_cast<long long>(w.node_ids[static_cast<std::size_t>(v)]))
          .field(len);
      out.endrow();
    }
    out.close();
  }
  {
    csv::Writer out((base / "weights.csv").string());
    out.header("grid,weight");
    for (int g = 0; g < w.grid.count(); ++g) {
      out.field(g).field(w.spatial_weights[static_cast<std::size_t>(g)]);
      out.endrow();
    }
    out.close();
  }
  {
    csv::Writer out((base / "taxi_traces.csv").string());
    out.header("vehicle,day,window,grid");
    for (const TaxiVisit& v : traces.visits) {
      out.field(traces.vehicle_ids[static_cast<std::size_t>(v.vehicle)])
          .field(v.day)
          .field(v.window)
          .field(v.grid);
      out.endrow();
    }
    out.close();
  }
  {
    csv::Writer out((base / "bus_lines.csv").string());
    out.header("line,fleet_size,seq,x_km,y_km");
    for (std::size_t j = 0; j < w.lines.names.size(); ++j)
      for (std::size_t s = 0; s < w.lines.polylines[j].size(); ++s) {
        out.field(w.lines.names[j])
            .field(w.lines.fleet[j])
            .field(static_cast<long long>(s))
            .field(w.lines.polylines[j][s].first)
            .field(w.lines.polylines[j][s].second);
        out.endrow();
      }
    out.close();
  }
  {
    csv::Writer out((base / "bus_trips.csv").string());
    out.header("line,vehicle,day,depart_hour,arrive_hour");
    for (const BusTrip& tr : w.trips) {
      out.field(w.lines.names[static_cast<std::size_t>(tr.line)])
          .field("B" + std::to_string(tr.vehicle))
          .field(tr.day)
          .field(tr.depart_hour)
          .field(tr.arrive_hour);
      out.endrow();
    }
    out.close();
  }
  fs::create_directories(base / "truth");
  {
    csv::Writer out((base / "truth" / "taxi_p_true.csv").string());
    out.header("grid,window,p");
    for (int g = 0; g < w.taxi_p.grids(); ++g)
      for (int t = 0; t < w.taxi_p.windows(); ++t) {
        out.field(g).field(t).field(w.taxi_p(g, t));
        out.endrow();
      }
    out.close();
  }

  json cfg;
  cfg["seed"] = spec.seed;
  cfg["grid"] = {{"min_x_km", 0.0},
                 {"min_y_km", 0.0},
                 {"cell_km", spec.cell_km},
                 {"nx", spec.grid_nx},
                 {"ny", spec.grid_ny}};
  cfg["horizon"] = {{"windows", spec.windows},
                    {"start_hour", spec.start_hour},
                    {"window_hours", 1.0}};
  cfg["weights"] = {{"spatial_file", "weights.csv"}, {"temporal_preset", "uniform"}};
  cfg["utility"] = {{"beta", w.beta}};
  cfg["costs"] = {{"taxi", 52000.0}, {"bus", 50000.0}, {"dv", 300000.0}, {"budget", spec.budget}};
  cfg["network"] = {{"nodes", "nodes.csv"}, {"edges", "edges.csv"}, {"speed_kmh", 30.0}};
  cfg["taxi"] = {{"traces", "taxi_traces.csv"}, {"fit_draws", 20}};
  if (spec.bus_lines > 0)
    cfg["bus"] = {{"lines", "bus_lines.csv"}, {"trips", "bus_trips.csv"}};
  cfg["dv"] = {{"search_radius_km", 5.0}, {"window_hours", 1.0}, {"fleet_cap", 16}};
  cfg["solver"] = {{"tol", 1e-6}, {"max_iters", 5000}, {"inner_max_iter", 5}};
  {
    std::ofstream out(base / "scenario.json");
    out << cfg.dump(2) << '\n';
    if (!out) throw InputError("failed to write scenario.json");
  }

  if (truth != nullptr) truth->taxi_p = w.taxi_p;
  return load_scenario((base / "scenario.json").string());
}

SensingScenario generate_synthetic_scenario(const SyntheticSpec& spec,
                                            SyntheticGroundTruth* truth) {
  const SyntheticWorld w = build_world(spec);
  const TaxiTraceSet traces = synthetic_taxi_traces(spec, w.taxi_p);

  SensingScenario sc;
  sc.seed = spec.seed;
  sc.grid = w.grid;
  sc.horizon = HorizonSpec{spec.windows, spec.start_hour, 1.0};
  bool warned = false;
  sc.weights = SensingWeights::normalized(
      w.spatial_weights, std::vector<double>(static_cast<std::size_t>(spec.windows), 1.0), &warned);
  sc.params.beta = w.beta;
  sc.costs = CostStructure{52000.0, 50000.0, 300000.0, spec.budget};
  sc.network = RoadNetwork::build(w.node_ids, w.xs, w.ys, w.edges, 30.0);

  TaxiFitOptions fit;
  fit.seed = spec.seed + 1;
  sc.taxi = fit_p(traces, fit);

  std::vector<BusLine> lines;
  for (std::size_t j = 0; j < w.lines.names.size(); ++j) {
    BusLine line;
    line.id = static_cast<int>(j);
    line.name = w.lines.names[j];
    line.fleet_size = w.lines.fleet[j];
    line.route_grids = rasterize_polyline(sc.grid, w.lines.polylines[j]);
    lines.push_back(std::move(line));
  }
  if (!lines.empty()) {
    BusParamEstimate est = estimate_line_params(w.trips, std::move(lines), spec.windows, 1.0,
                                                spec.start_hour);
    sc.bus_lines = std::move(est.lines);
  }

  sc.finalize();
  if (truth != nullptr) truth->taxi_p = w.taxi_p;
  return sc;
}

SensingScenario degrade_bus_network(const SensingScenario& scenario, double fraction,
                                    std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0)
    throw InputError("removal fraction must lie in [0,1]");
  SensingScenario out = scenario;
  const int m = static_cast<int>(scenario.bus_lines.size());
  const int remove = static_cast<int>(std::ceil(fraction * m - 1e-12));
  if (remove <= 0) return out;

  Rng rng(seed);
  std::vector<int> removed = rng.sample_without_replacement(m, remove);
  std::vector<char> drop(static_cast<std::size_t>(m), 0);
  for (int j : removed) drop[static_cast<std::size_t>(j)] = 1;
  out.bus_lines.clear();
  for (int j = 0; j < m; ++j)
    if (!drop[static_cast<std::size_t>(j)]) out.bus_lines.push_back(scenario.bus_lines[static_cast<std::size_t>(j)]);
  for (std::size_t j = 0; j < out.bus_lines.size(); ++j)
    out.bus_lines[j].id = static_cast<int>(j);
  out.warnings.clear();
  out.finalize();
  return out;
}

}  // namespace dsc
