#pragma once

// Small hand-built worlds shared by the test suites.

#include <tuple>
#include <vector>

#include "dsc/bus.hpp"
#include "dsc/field.hpp"
#include "dsc/network.hpp"
#include "dsc/taxi.hpp"

namespace dsc::test {

struct LatticeWorld {
  GridSpec spec;
  RoadNetwork net;
  GridMap gm;
};

// nx*ny unit cells, one road node at each cell centroid, 4-neighbor streets.
inline LatticeWorld make_lattice(int nx, int ny, double cell_km = 1.0, double speed_kmh = 30.0) {
  GridSpec spec{0.0, 0.0, cell_km, nx, ny};
  std::vector<std::int64_t> ids;
  std::vector<double> xs, ys;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      ids.push_back(j * nx + i);
      xs.push_back((i + 0.5) * cell_km);
      ys.push_back((j + 0.5) * cell_km);
    }
  std::vector<std::tuple<int, int, double, double>> edges;
  auto at = [&](int i, int j) { return j * nx + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (i + 1 < nx) {
        edges.emplace_back(at(i, j), at(i + 1, j), cell_km, 0.0);
        edges.emplace_back(at(i + 1, j), at(i, j), cell_km, 0.0);
      }
      if (j + 1 < ny) {
        edges.emplace_back(at(i, j), at(i, j + 1), cell_km, 0.0);
        edges.emplace_back(at(i, j + 1), at(i, j), cell_km, 0.0);
      }
    }
  LatticeWorld w{spec,
                 RoadNetwork::build(std::move(ids), std::move(xs), std::move(ys), edges, speed_kmh),
                 {}};
  w.gm = GridMap::build(w.spec, w.net);
  return w;
}

inline SensingWeights uniform_weights(int grids, int windows) {
  return SensingWeights::uniform(grids, windows);
}

// Single-window bus line covering the given grids with constant parameters.
inline BusLine simple_line(int id, std::vector<int> grids, long long fleet, double lambda,
                           double cycle_hours, int windows) {
  BusLine line;
  line.id = id;
  line.name = "L" + std::to_string(id);
  line.route_grids = std::move(grids);
  line.fleet_size = fleet;
  line.service_hours.assign(static_cast<std::size_t>(windows), 0.6 * cycle_hours);
  line.turnaround_hours.assign(static_cast<std::size_t>(windows), 0.4 * cycle_hours);
  line.in_service.assign(static_cast<std::size_t>(windows), lambda);
  line.window_synthetic.assign(static_cast<std::size_t>(windows), 0);
  return line;
}

inline TaxiModel constant_taxi(int grids, int windows, double p, long long fleet) {
  TaxiModel m;
  m.p = Field(grids, windows, p);
  m.fleet_bound = fleet;
  return m;
}

}  // namespace dsc::test
