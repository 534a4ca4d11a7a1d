#pragma once

#include <string>
#include <vector>

#include "dsc/joint.hpp"
#include "dsc/metrics.hpp"
#include "dsc/scenario.hpp"

namespace dsc {

// Solution file: decisions plus headline metrics, JSON. Route nodes are
// stored as external node ids.
void save_solution(const DscSolution& sol, const SensingScenario& scenario,
                   const std::string& path);

// Rebuilds a full solution (coverage fields, metrics) from a stored file.
DscSolution load_solution(const SensingScenario& scenario, const std::string& path);

// Delimited exports: summary.csv, grid_metrics.csv, fields.csv, routes.csv,
// route_coverage.csv under `dir`.
void export_solution(const DscSolution& sol, const SensingScenario& scenario,
                     const std::string& dir);

// sweep.csv + sweep_fit.csv.
void export_sweep(const SweepResult& sweep, const std::string& dir);

struct Regression {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

// Ordinary least squares y ~ slope * x + intercept over finite pairs.
Regression linear_regression(const std::vector<double>& x, const std::vector<double>& y);

struct TransferRow {
  int variant = 0;
  double removal_fraction = 0.0;
  CoverageIndicators sci;
  double phi_taxi = 0.0;
  double phi_bus = 0.0;
  double phi_taxi_bus = 0.0;
  double phi_tbd = 0.0;  // NaN when the DV pair is not evaluated
};

struct TransferStudy {
  std::vector<TransferRow> rows;
  Regression tb_vs_taxi;  // (W(T+B)-W(T))/W(T) against (Phi(T+B)-Phi(T))/Phi(T)
  Regression tb_vs_bus;
  Regression tbd_vs_tb;
  bool with_dv = false;
};

// Degrades the bus network over `variants` removal fractions spread across
// [0,1), solves the fleet combinations on each variant, and regresses the
// relative sensing gains on the relative coverage-indicator differences.
TransferStudy run_transfer_study(const SensingScenario& scenario, int variants, bool with_dv,
                                 std::uint64_t seed, double percentile = 0.60);

// transfer.csv + transfer_fit.csv.
void export_transfer(const TransferStudy& study, const std::string& dir);

// Taxi fit validation report + scatter files.
void export_taxi_validation(const TaxiFitValidation& report, const std::string& dir);

}  // namespace dsc
