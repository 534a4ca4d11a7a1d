#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsc/field.hpp"

namespace dsc {

// One (vehicle, day, window) -> grid visit. A vehicle visiting several grids
// in one window produces several records.
struct TaxiVisit {
  int vehicle = 0;  // dense vehicle index
  int day = 0;      // dense day index
  int window = 0;
  int grid = 0;
};

// Grid-level taxi trajectory data over an observation period.
struct TaxiTraceSet {
  int n_grids = 0;
  int n_windows = 0;
  int n_vehicles = 0;
  int n_days = 0;
  std::vector<TaxiVisit> visits;
  std::vector<std::string> vehicle_ids;   // dense index -> external id
  std::vector<std::string> operator_ids;  // per vehicle; reserved, may be empty

  void validate() const;
};

// Binomial taxi coverage model N^T_{g,t} = n^T * p_{g,t}.
struct TaxiModel {
  Field p;             // slopes in [0,1]
  long long fleet_bound = 0;  // L^T

  void validate() const;
};

struct TaxiFitOptions {
  int draws = 20;                 // random subsets per size
  std::vector<int> subset_sizes;  // empty -> 10 evenly spaced sizes up to the fleet
  std::uint64_t seed = 1;
};

// Fits p_{g,t} as the through-origin least-squares slope of day-averaged
// coverage against fleet subset size, estimated over random subset draws.
TaxiModel fit_p(const TaxiTraceSet& traces, const TaxiFitOptions& opt = {});

Field taxi_coverage(const TaxiModel& model, double n_taxi);

struct TaxiFitValidation {
  struct Row {
    int window;
    int size;
    double mae;
  };
  struct ScatterPoint {
    int window;
    int size;
    int grid;
    double empirical;
    double estimated;
  };
  std::vector<Row> rows;
  std::vector<ScatterPoint> scatter;
};

// Mean absolute error between empirical subset coverage on held-out traces
// and the model prediction n * p, per (window, subset size).
TaxiFitValidation validate_fit(const TaxiModel& model, const TaxiTraceSet& holdout,
                               const std::vector<int>& sizes, int draws = 20,
                               std::uint64_t seed = 7);

}  // namespace dsc
