#pragma once

#include <cstdint>
#include <vector>

#include "dsc/field.hpp"
#include "dsc/network.hpp"

namespace dsc {

// Marginal-utility bookkeeping for DV route planning. Coverage committed by
// earlier vehicles lives in `base`; the grids visited by the vehicle being
// routed are tracked separately so its own marginal drops to zero without
// touching the shared state.
class DvContext {
 public:
  DvContext(const SensingWeights& weights, const UtilityParams& params,
            std::vector<int> operating_windows, Field base_coverage);

  // Aggregated marginal utility of one more vehicle covering grid g in every
  // operating window: sum_t mu_t w_g (xi(N+1) - xi(N)). Zero for grids the
  // current vehicle already visited.
  double eta(int grid) const {
    return visited_[static_cast<std::size_t>(grid)] ? 0.0 : eta_[static_cast<std::size_t>(grid)];
  }

  // Marginal ignoring the current vehicle's visited set (used by candidate
  // scoring for grids it would revisit; they contribute nothing anyway).
  double eta_base(int grid) const { return eta_[static_cast<std::size_t>(grid)]; }

  bool visited(int grid) const { return visited_[static_cast<std::size_t>(grid)] != 0; }

  // Marks a grid visited by the current vehicle and returns the utility
  // collected by that first visit.
  double collect(int grid);

  // Folds the current vehicle's visited grids into the shared coverage
  // (+1 in every operating window) and clears its visited set.
  void commit_vehicle();

  // Removes one unit of coverage on the given grids (adjustment step of the
  // multi-vehicle heuristic).
  void remove_coverage(const std::vector<int>& grids);
  void add_coverage(const std::vector<int>& grids);

  // Utility a fresh vehicle would collect by covering exactly `grids`, given
  // the shared coverage only.
  double utility_of(const std::vector<int>& grids) const;

  void reset_vehicle() { std::fill(visited_.begin(), visited_.end(), 0); }
  std::vector<int> visited_grids() const;

  const Field& base() const { return base_; }
  const std::vector<int>& operating_windows() const { return op_windows_; }
  const SensingWeights& weights() const { return *weights_; }
  const UtilityParams& params() const { return params_; }
  int n_grids() const { return static_cast<int>(eta_.size()); }

 private:
  void recompute_eta(int grid);

  const SensingWeights* weights_;
  UtilityParams params_;
  std::vector<int> op_windows_;
  Field base_;
  std::vector<double> eta_;
  std::vector<char> visited_;
};

// Executes a conceptual grid route in the road network: each leg rides the
// time-shortest path to the nearest node of the next grid. Returns the node
// path, its end node, and the grid sequence actually traversed (which may
// differ from the requested one).
struct GRouteExecution {
  NRoute n_route;
  int end_node = -1;
  GRoute actual;
};

GRouteExecution execute_g_route(const RoadNetwork& net, const GridMap& gm, const GRoute& route,
                                int start_node);

// Least-impedance route in the 8-neighbor grid graph. Path cost is the sum
// of impedances of entered grids (origin excluded); the Chebyshev-distance
// heuristic keeps the search exact.
GRoute grid_astar(const GridMap& gm, int origin_grid, int dest_grid,
                  const std::vector<double>& impedance);

// Impedance 1/(eta + floor) used by the destination search; zero-marginal
// grids stay traversable but are maximally avoided.
std::vector<double> impedance_from_eta(const DvContext& ctx, double floor_value = 1e-6);

struct DvLeg {
  int dest_grid = -1;
  GRoute planned;  // A* G-route
  GRouteExecution exec;
  double psi = 0.0;  // utility efficiency of the leg
};

struct DvSearchOptions {
  double radius_km = 5.0;
  bool psi_weight_spatial = false;  // extra w_g factor in the numerator
};

// Enumerates candidate destination grids within the radius, scores each by
// collected marginal utility per travel hour, and returns the best leg.
// Throws EmptySearchError when no candidate is feasible or all have zero
// utility efficiency.
DvLeg local_destination_search(const RoadNetwork& net, const GridMap& gm, const DvContext& ctx,
                               int origin_node, const DvSearchOptions& opt);

struct DvRoute {
  int start_node = -1;
  std::vector<int> nodes;
  double hours = 0.0;
  std::vector<int> grids;  // distinct grids covered, in first-visit order
  double collected = 0.0;
  bool starved = false;  // search failed after widening the radius twice
};

// Single-vehicle routing within a time budget: repeat the local destination
// search, append legs, and truncate the final leg at the node whose arrival
// time is closest to the window end.
DvRoute route_single_dv(const RoadNetwork& net, const GridMap& gm, DvContext& ctx, int start_node,
                        double window_hours, const DvSearchOptions& opt);

struct FleetRoutingResult {
  std::vector<DvRoute> routes;
  double total_utility = 0.0;      // against the coverage the fleet started from
  int adjustment_rounds = 0;
  std::vector<double> utility_trace;  // total after the initial pass and each round
};

// Sequential routing followed by the re-route adjustment passes; a vehicle's
// new route is accepted only when it strictly increases total utility.
FleetRoutingResult route_fleet(const RoadNetwork& net, const GridMap& gm, DvContext& ctx,
                               const std::vector<int>& start_nodes, double window_hours,
                               const DvSearchOptions& opt, int max_iter = 10);

// Turns planned one-way routes into repeated round trips: every route covers
// its grids once per operating window.
Field extend_round_trips(const std::vector<DvRoute>& routes, const std::vector<int>& op_windows,
                         int n_grids, int n_windows);

// Default start nodes: the routable nodes nearest the centroids of the
// highest-weight grids.
std::vector<int> default_start_nodes(const RoadNetwork& net, const GridMap& gm,
                                     const std::vector<double>& spatial_weights, int n_vehicles);

}  // namespace dsc
