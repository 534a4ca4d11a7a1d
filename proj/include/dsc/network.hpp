#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dsc/error.hpp"

namespace dsc {

// Planar grid over the study area; ids are row-major with x fastest.
struct GridSpec {
  double min_x = 0.0;  // km
  double min_y = 0.0;
  double cell_km = 1.0;
  int nx = 0;
  int ny = 0;

  int count() const { return nx * ny; }

  int cell_of(double x, double y) const {
    const int ix = static_cast<int>(std::floor((x - min_x) / cell_km));
    const int iy = static_cast<int>(std::floor((y - min_y) / cell_km));
    if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) return -1;
    return iy * nx + ix;
  }

  int ix(int g) const { return g % nx; }
  int iy(int g) const { return g / nx; }

  double centroid_x(int g) const { return min_x + (ix(g) + 0.5) * cell_km; }
  double centroid_y(int g) const { return min_y + (iy(g) + 0.5) * cell_km; }

  int chebyshev(int a, int b) const {
    return std::max(std::abs(ix(a) - ix(b)), std::abs(iy(a) - iy(b)));
  }

  double centroid_distance(int a, int b) const {
    const double dx = centroid_x(a) - centroid_x(b);
    const double dy = centroid_y(a) - centroid_y(b);
    return std::sqrt(dx * dx + dy * dy);
  }
};

// Directed road graph with planar km coordinates. Travel times are hours.
struct RoadNetwork {
  struct Edge {
    int to;
    double hours;
    double length_km;
  };

  std::vector<std::int64_t> node_ids;  // external ids, dense index order
  std::vector<double> x, y;            // km
  std::vector<std::vector<Edge>> out;  // adjacency, each list sorted by `to`
  std::vector<char> routable;          // in the largest strongly connected component
  double speed_kmh = 30.0;
  int scc_count = 1;

  int size() const { return static_cast<int>(x.size()); }

  static RoadNetwork build(std::vector<std::int64_t> ids, std::vector<double> xs,
                           std::vector<double> ys,
                           const std::vector<std::tuple<int, int, double, double>>& edges,
                           double default_speed_kmh);
};

// Node-to-grid assignment plus the 8-neighbor graph over road-covered grids.
struct GridMap {
  GridSpec spec;
  std::vector<int> node_grid;                // per node
  std::vector<std::vector<int>> grid_nodes;  // routable nodes per grid, ascending
  std::vector<std::vector<int>> grid_adj;    // 8-neighborhood, road-covered only
  std::vector<char> road_covered;

  static GridMap build(const GridSpec& spec, const RoadNetwork& net);
};

// A route in the road network: node sequence plus total travel time.
struct NRoute {
  std::vector<int> nodes;
  double hours = 0.0;

  bool empty() const { return nodes.empty(); }
};

// A route in the grid space: the ordered grids traversed.
using GRoute = std::vector<int>;

// Shortest path by travel time from one node to the nearest node of a target
// grid (ties broken toward the lowest node id). Throws RoutingError when the
// grid cannot be reached.
NRoute shortest_path_to_grid(const RoadNetwork& net, const GridMap& gm, int from, int target_grid);

// Grid sequence actually traversed by a node path (consecutive duplicates
// collapsed).
GRoute traversed_grids(const GridMap& gm, const std::vector<int>& nodes);

// Ordered grids a polyline passes through (cells outside the grid are
// skipped, consecutive duplicates collapsed).
std::vector<int> rasterize_polyline(const GridSpec& spec,
                                    const std::vector<std::pair<double, double>>& points);

}  // namespace dsc
