#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsc/bus.hpp"
#include "dsc/field.hpp"
#include "dsc/network.hpp"
#include "dsc/taxi.hpp"

namespace dsc {

// Discretized planning horizon. Window w spans absolute hours
// [start_hour + w * window_hours, start_hour + (w+1) * window_hours).
struct HorizonSpec {
  int windows = 12;
  double start_hour = 8.0;
  double window_hours = 1.0;
};

struct DvConfig {
  std::vector<int> operating_windows;  // defaults to the 8:00-20:00 share of the horizon
  double search_radius_km = 5.0;
  double window_hours = 1.0;       // planning time budget per one-way trip
  bool psi_weight_spatial = false; // score candidate legs by w_g * eta_g instead of eta_g
  std::vector<int> start_nodes;    // dense node indices; empty -> weight-ranked defaults
  int fleet_cap = 16;              // cap on the enumerated DV fleet sizes
  int adjust_max_iter = 10;        // multi-vehicle adjustment rounds
};

struct SolverConfig {
  double tol = 1e-6;
  int max_iters = 5000;
  int inner_max_iter = 5;  // taxi-bus / DV alternation limit
};

// A fully validated problem instance: everything the solvers need.
struct SensingScenario {
  GridSpec grid;
  HorizonSpec horizon;
  SensingWeights weights;
  UtilityParams params;
  CostStructure costs;
  TaxiModel taxi;
  std::vector<BusLine> bus_lines;
  BusIncidence incidence;
  RoadNetwork network;
  GridMap gridmap;
  DvConfig dv;
  SolverConfig solver;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  Field joint_w;  // cached outer product of the weights

  int n_grids() const { return grid.count(); }
  int n_windows() const { return horizon.windows; }

  // Builds incidence/grid map/joint weights and checks every invariant.
  void finalize();

  // Windows whose absolute hour range intersects [8:00, 20:00).
  std::vector<int> default_operating_windows() const;
};

// Command-line overrides applied while loading (the seed must take effect
// before any model fitting).
struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> budget;
  std::optional<double> beta;
  std::optional<double> zeta;
  std::optional<double> tol;
  std::optional<int> max_iters;
};

// Loads a scenario from a JSON config file; referenced data files are
// resolved relative to the config's directory. Fits the taxi and bus models
// from traces when tables of fitted parameters are not provided.
SensingScenario load_scenario(const std::string& config_path,
                              const ScenarioOverrides& overrides = {});

// Loads just the taxi trace set a config references (for fit validation
// workflows). Fails when the config carries a fitted table instead.
TaxiTraceSet load_scenario_taxi_traces(const std::string& config_path);

// Writes a normalized copy (config + data files) into a directory.
void save_scenario(const SensingScenario& scenario, const std::string& dir);

// Knobs for the synthetic instance generator. Everything derives from the
// seed, so generated bundles are reproducible byte for byte.
struct SyntheticSpec {
  int grid_nx = 6;
  int grid_ny = 6;
  double cell_km = 1.0;
  double road_density = 1.0;  // fraction of lattice edges kept
  int bus_lines = 3;
  int bus_fleet_per_line = 8;
  int taxi_hotspots = 2;
  int taxi_vehicles = 120;
  int trace_days = 7;
  double visit_noise = 0.0;       // day-level jitter on visit probabilities
  double weight_ratio = 2.35;     // w_max / w_min
  int windows = 4;
  double start_hour = 8.0;
  double budget = 2.0e6;
  double zeta = 3.0;              // coverage ratio for the beta calibration
  std::uint64_t seed = 1;

  void validate() const;
};

// Reads a SyntheticSpec from a JSON file; absent fields keep their defaults.
SyntheticSpec load_synthetic_spec(const std::string& path);

struct SyntheticGroundTruth {
  Field taxi_p;  // the visit probabilities the traces were drawn from
};

// Writes a complete scenario bundle (network, lines, traces, weights,
// config, ground truth) under `dir` and returns the loaded scenario.
SensingScenario generate_synthetic(const SyntheticSpec& spec, const std::string& dir,
                                   SyntheticGroundTruth* truth = nullptr);

// In-memory variant used by tests; no files are written.
SensingScenario generate_synthetic_scenario(const SyntheticSpec& spec,
                                            SyntheticGroundTruth* truth = nullptr);

// Builds the trace set the generator would write, exposed for oracle tests.
TaxiTraceSet synthetic_taxi_traces(const SyntheticSpec& spec, const Field& taxi_p);

// Removes ceil(fraction * lines) uniformly sampled bus lines.
SensingScenario degrade_bus_network(const SensingScenario& scenario, double fraction,
                                    std::uint64_t seed);

}  // namespace dsc
