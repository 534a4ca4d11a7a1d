#pragma once

#include <vector>

#include "dsc/bus.hpp"
#include "dsc/field.hpp"
#include "dsc/taxi.hpp"

namespace dsc {

// Budget-constrained concave allocation over (taxi count, per-line sensor
// counts), with an optional fixed background coverage added inside the
// utility. Variable 0 is the taxi count; variables 1..m are the bus lines.
class TaxiBusProblem {
 public:
  TaxiBusProblem(const TaxiModel* taxi, const std::vector<BusLine>* lines,
                 const BusIncidence* incidence, Field joint_weights, UtilityParams params,
                 double cost_taxi, double cost_bus, double budget, Field background = Field());

  int n_vars() const { return static_cast<int>(cost_.size()); }
  int n_lines() const { return n_vars() - 1; }
  double cost(int i) const { return cost_[static_cast<std::size_t>(i)]; }
  double bound(int i) const { return bound_[static_cast<std::size_t>(i)]; }
  double budget() const { return budget_; }
  const Field& background() const { return background_; }
  const UtilityParams& params() const { return params_; }
  const Field& joint_weights() const { return joint_weights_; }

  // Coverage field induced by a decision vector (background included).
  Field coverage(const std::vector<double>& x) const;

  // Unsmoothed objective sum pi * N^beta; the reported Phi.
  double objective(const std::vector<double>& x) const;

  // Smoothed objective sum pi * (N + eps)^beta used inside the solver.
  double objective_smoothed(const std::vector<double>& x) const;

  // Analytic gradient of the smoothed objective. OpenMP kernel;
  // gradient_smoothed_serial is the bit-identical reference.
  std::vector<double> gradient_smoothed(const std::vector<double>& x) const;
  std::vector<double> gradient_smoothed_serial(const std::vector<double>& x) const;

  // Caps for single-mode solves: returns a copy with the other fleet's
  // bounds forced to zero.
  TaxiBusProblem taxi_only() const;
  TaxiBusProblem bus_only() const;

  void override_bounds(double taxi_bound, const std::vector<double>& line_bounds);

 private:
  template <bool Smoothed>
  double objective_impl(const Field& n) const;
  std::vector<double> gradient_impl(const std::vector<double>& x, bool parallel) const;

  Field joint_weights_;
  UtilityParams params_;
  Field background_;
  double budget_;
  std::vector<double> cost_;
  std::vector<double> bound_;
  Field taxi_p_;                              // zero field when no taxi model
  std::vector<std::vector<int>> line_grids_;  // per line
  std::vector<std::vector<double>> line_rate_;  // gamma/(Ts+Ta) per line, per window
};

struct TaxiBusSolution {
  std::vector<double> x_relaxed;
  std::vector<long long> x_rounded;
  double objective_relaxed = 0.0;  // unsmoothed, background included
  double objective_rounded = 0.0;
  int iterations = 0;
  double gap = 0.0;  // Frank-Wolfe duality gap at exit
  bool converged = false;

  double n_taxi_relaxed() const { return x_relaxed.empty() ? 0.0 : x_relaxed[0]; }
  long long n_taxi() const { return x_rounded.empty() ? 0 : x_rounded[0]; }
  std::vector<long long> sensors() const {
    return x_rounded.empty() ? std::vector<long long>{}
                             : std::vector<long long>(x_rounded.begin() + 1, x_rounded.end());
  }
};

struct SolverOptions {
  double tol = 1e-6;
  int max_iters = 5000;
};

// Exact maximizer of a linear objective over {c.x <= M, 0 <= x <= U}:
// fractional-knapsack greedy on benefit-per-cost, ties to the lowest index.
std::vector<double> linear_minimization_oracle(const std::vector<double>& direction,
                                               const std::vector<double>& cost,
                                               const std::vector<double>& bound, double budget);

// Frank-Wolfe on the smoothed objective. Returns the relaxed solution only
// (x_rounded left empty).
TaxiBusSolution solve_relaxed(const TaxiBusProblem& problem, const SolverOptions& opt = {},
                              const std::vector<double>* warm_start = nullptr);

// Floors the relaxed point, then greedily buys +1 of the variable with the
// best objective gain per unit cost while the budget and bounds allow.
std::vector<long long> round_solution(const TaxiBusProblem& problem,
                                      const std::vector<double>& x_relaxed);

// solve_relaxed + round_solution with both objectives filled in.
TaxiBusSolution solve(const TaxiBusProblem& problem, const SolverOptions& opt = {},
                      const std::vector<double>* warm_start = nullptr);

enum class SingleMode { kTaxi, kBus };

TaxiBusSolution solve_single_mode(const TaxiBusProblem& problem, SingleMode mode,
                                  const SolverOptions& opt = {});

}  // namespace dsc
