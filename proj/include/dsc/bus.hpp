#pragma once

#include <string>
#include <vector>

#include "dsc/field.hpp"

namespace dsc {

// One bus line: route geometry reduced to the ordered grids it crosses plus
// per-window operating parameters.
struct BusLine {
  int id = 0;
  std::string name;
  std::vector<int> route_grids;          // ordered, consecutive entries distinct
  long long fleet_size = 0;              // L^B_j
  std::vector<double> service_hours;     // T^s_j(t), one-way en-route time
  std::vector<double> turnaround_hours;  // T^a_j(t), terminal dwell
  std::vector<double> in_service;        // lambda_j(t), average buses running
  std::vector<char> window_synthetic;    // parameter copied from a neighboring window

  void validate(int n_grids, int n_windows) const;
};

// delta_{g,j} incidence between grids and lines.
struct BusIncidence {
  int n_grids = 0;
  std::vector<std::vector<int>> line_grids;  // per line, sorted unique grids
  std::vector<char> grid_on_any;             // per grid: on at least one route

  static BusIncidence build(const std::vector<BusLine>& lines, int n_grids);
  bool covers(int grid, int line) const;
};

// gamma_j(t) = lambda_j(t) / L^B_j, the probability a given bus of the line
// is in service during window t.
double service_intensity(const BusLine& line, int window);

// Expected bus coverage N^B_{g,t} = sum_j delta_gj gamma_j(t) y_j / (T^s+T^a).
Field bus_coverage(const std::vector<BusLine>& lines, const BusIncidence& incidence,
                   const std::vector<double>& sensors, int n_windows);

// One observed one-way bus trip; dwell at the terminal is inferred from the
// gap to the same vehicle's next trip when present.
struct BusTrip {
  int line = 0;
  int vehicle = 0;
  int day = 0;
  double depart_hour = 0.0;
  double arrive_hour = 0.0;
};

struct BusParamEstimate {
  std::vector<BusLine> lines;         // parameters filled in
  std::vector<char> line_unobserved;  // no trips at all: needs manual parameters
};

// Estimates T^s, T^a and lambda per (line, window) from trip records. Trips
// attribute to the window containing their midpoint; windows with no trips
// inherit the nearest observed window's times and are flagged synthetic.
BusParamEstimate estimate_line_params(const std::vector<BusTrip>& trips,
                                      std::vector<BusLine> lines, int n_windows,
                                      double window_hours, double start_hour);

}  // namespace dsc
