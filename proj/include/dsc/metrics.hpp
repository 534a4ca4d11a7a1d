#pragma once

#include <vector>

#include "dsc/field.hpp"

namespace dsc {

// Sensing utility xi(N) = N^beta for one cell. Strictly increasing and
// strictly concave on (0, inf); xi(0) = 0.
double utility(double n, const UtilityParams& params);

// Space-time weighted sensing utility
//   Phi = sum_t mu_t sum_g w_g (N_{g,t})^beta
// over a joint weight field pi_{g,t} (= w_g * mu_t in the separable case).
// OpenMP kernel; stwsu_serial is the reference implementation and returns a
// bit-identical value.
double stwsu(const Field& coverage, const Field& joint_weights, double beta);
double stwsu_serial(const Field& coverage, const Field& joint_weights, double beta);
double stwsu(const Field& coverage, const SensingWeights& weights, const UtilityParams& params);

struct BetaCalibration {
  double beta;
  bool degenerate;  // w_max == w_min: every beta yields the requested ratio trivially
};

// beta = 1 - log_zeta(w_max / w_min), the exponent for which the optimal
// coverage ratio between the most and least weighted grids equals zeta.
BetaCalibration calibrate_beta(double w_max, double w_min, double zeta);

// Target distribution TD_{g,t} proportional to (mu_t w_g)^{beta/(1-beta)}.
Field target_distribution(const Field& joint_weights, const UtilityParams& params);
Field target_distribution(const SensingWeights& weights, const UtilityParams& params);

// Actual distribution AD_{g,t} = xi(N_{g,t}) / sum xi(N). Throws on an
// all-zero field (the distribution is undefined).
Field actual_distribution(const Field& coverage, const UtilityParams& params);

// KL(AD || TD) in nats. Convention 0 log(0/x) = 0; returns +infinity when
// AD puts mass where TD has none.
double kl_divergence(const Field& ad, const Field& td);

// Per-grid time-weighted utility and time-averaged gap to the target.
struct GridGap {
  double twsu = 0.0;
  double tag_percent = 0.0;  // meaningful only when applicable
  bool applicable = false;   // false when TD_{g,t} = 0 for every window
  int cells_excluded = 0;    // windows skipped because TD_{g,t} = 0
};

std::vector<GridGap> twsu_and_tag(const Field& coverage, const SensingWeights& weights,
                                  const UtilityParams& params);

// Converts a prescribed target distribution of coverage into joint weights
// pi_{g,t} = PTD^{1-beta} (normalized); maximizing stwsu under these weights
// drives the optimal coverage toward the PTD.
Field ptd_to_weights(const Field& ptd, const UtilityParams& params);

// Spatial coverage indicators: weight mass reachable by each fleet mix
// before any allocation. taxi_per_grid is any time-aggregated coverage
// score; grids rank into the upper `percentile` share (count-based, ties to
// the lower grid id, zero-coverage grids never qualify).
struct CoverageIndicators {
  double taxi = 0.0;      // W(T)
  double bus = 0.0;       // W(B)
  double taxi_bus = 0.0;  // W(T+B)
  double all = 1.0;       // W(T+B+D), 1 by definition
};

CoverageIndicators spatial_coverage_indicators(const std::vector<double>& spatial_weights,
                                               const std::vector<double>& taxi_per_grid,
                                               const std::vector<char>& on_bus_route,
                                               double percentile = 0.60);

}  // namespace dsc
