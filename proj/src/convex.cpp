#include "dsc/convex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsc/kernels.hpp"

namespace dsc {

TaxiBusProblem::TaxiBusProblem(const TaxiModel* taxi, const std::vector<BusLine>* lines,
                               const BusIncidence* incidence, Field joint_weights,
                               UtilityParams params, double cost_taxi, double cost_bus,
                               double budget, Field background)
    : joint_weights_(std::move(joint_weights)), params_(params), background_(std::move(background)),
      budget_(budget) {
  params_.validate();
  if (budget_ < 0.0) throw InputError("budget must be nonnegative");
  if (cost_taxi <= 0.0 || cost_bus <= 0.0) throw InputError("unit costs must be positive");
  const int n_grids = joint_weights_.grids();
  const int n_windows = joint_weights_.windows();
  if (background_.empty()) background_ = Field(n_grids, n_windows);
  background_.require_same_shape(joint_weights_, "taxi-bus background");
  background_.require_nonnegative("background coverage");

  cost_.push_back(cost_taxi);
  if (taxi != nullptr) {
    taxi->validate();
    if (!taxi->p.same_shape(joint_weights_))
      throw InputError("taxi model dimensions do not match the weights");
    taxi_p_ = taxi->p;
    bound_.push_back(static_cast<double>(taxi->fleet_bound));
  } else {
    taxi_p_ = Field(n_grids, n_windows);
    bound_.push_back(0.0);
  }

  const std::size_t m = lines ? lines->size() : 0;
  if (m > 0) {
    if (incidence == nullptr || incidence->line_grids.size() != m)
      throw InputError("bus incidence does not match the line set");
    for (std::size_t j = 0; j < m; ++j) {
      const BusLine& line = (*lines)[j];
      line.validate(n_grids, n_windows);
      cost_.push_back(cost_bus);
      bound_.push_back(static_cast<double>(line.fleet_size));
      line_grids_.push_back(incidence->line_grids[j]);
      std::vector<double> rate(static_cast<std::size_t>(n_windows), 0.0);
      for (int t = 0; t < n_windows; ++t) {
        if (line.fleet_size == 0 || line.in_service[static_cast<std::size_t>(t)] <= 0.0) continue;
        const double cycle = line.service_hours[static_cast<std::size_t>(t)] +
                             line.turnaround_hours[static_cast<std::size_t>(t)];
        rate[static_cast<std::size_t>(t)] =
            service_intensity(line, t) / cycle;
      }
      line_rate_.push_back(std::move(rate));
    }
  }
}

Field TaxiBusProblem::coverage(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != n_vars()) throw InputError("decision vector size mismatch");
  Field n = background_;
  const double taxis = x[0];
  if (taxis != 0.0)
    for (std::size_t i = 0; i < n.size(); ++i) n.flat(i) += taxis * taxi_p_.flat(i);
  const int windows = n.windows();
  for (int j = 0; j < n_lines(); ++j) {
    const double y = x[static_cast<std::size_t>(j) + 1];
    if (y == 0.0) continue;
    for (int g : line_grids_[static_cast<std::size_t>(j)])
      for (int t = 0; t < windows; ++t)
        n(g, t) += y * line_rate_[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
  }
  return n;
}

template <bool Smoothed>
double TaxiBusProblem::objective_impl(const Field& n) const {
  const double beta = params_.beta;
  const double eps = params_.epsilon_smooth;
  const auto& nv = n.data();
  const auto& wv = joint_weights_.data();
  return par::blocked_sum(static_cast<std::int64_t>(nv.size()), [&](std::int64_t i) {
    const double w = wv[static_cast<std::size_t>(i)];
    if (w <= 0.0) return 0.0;
    if constexpr (Smoothed) {
      return w * std::pow(nv[static_cast<std::size_t>(i)] + eps, beta);
    } else {
      const double v = nv[static_cast<std::size_t>(i)];
      return v > 0.0 ? w * std::pow(v, beta) : 0.0;
    }
  });
}

double TaxiBusProblem::objective(const std::vector<double>& x) const {
  return objective_impl<false>(coverage(x));
}

double TaxiBusProblem::objective_smoothed(const std::vector<double>& x) const {
  return objective_impl<true>(coverage(x));
}

std::vector<double> TaxiBusProblem::gradient_impl(const std::vector<double>& x,
                                                  bool parallel) const {
  const Field n = coverage(x);
  const double beta = params_.beta;
  const double eps = params_.epsilon_smooth;
  const auto& nv = n.data();
  const auto& wv = joint_weights_.data();

  // shared factor pi * beta * (N+eps)^(beta-1)
  std::vector<double> s(nv.size(), 0.0);
  auto fill = [&](std::int64_t i) {
    const double w = wv[static_cast<std::size_t>(i)];
    if (w > 0.0)
      s[static_cast<std::size_t>(i)] = w * beta * std::pow(nv[static_cast<std::size_t>(i)] + eps, beta - 1.0);
  };
  if (parallel)
    par::parallel_for(static_cast<std::int64_t>(nv.size()), fill);
  else
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(nv.size()); ++i) fill(i);

  std::vector<double> grad(static_cast<std::size_t>(n_vars()), 0.0);
  const auto& pv = taxi_p_.data();
  auto taxi_term = [&](std::int64_t i) {
    return s[static_cast<std::size_t>(i)] * pv[static_cast<std::size_t>(i)];
  };
  grad[0] = parallel ? par::blocked_sum(static_cast<std::int64_t>(nv.size()), taxi_term)
                     : par::blocked_sum_serial(static_cast<std::int64_t>(nv.size()), taxi_term);

  const int windows = n.windows();
  auto line_grad = [&](std::int64_t j) {
    double acc = 0.0;
    for (int g : line_grids_[static_cast<std::size_t>(j)]) {
      const std::size_t base = static_cast<std::size_t>(g) * windows;
      for (int t = 0; t < windows; ++t)
        acc += s[base + static_cast<std::size_t>(t)] *
               line_rate_[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
    }
    grad[static_cast<std::size_t>(j) + 1] = acc;
  };
  if (parallel)
    par::parallel_for(static_cast<std::int64_t>(n_lines()), line_grad);
  else
    for (std::int64_t j = 0; j < n_lines(); ++j) line_grad(j);
  return grad;
}

std::vector<double> TaxiBusProblem::gradient_smoothed(const std::vector<double>& x) const {
  return gradient_impl(x, true);
}

std::vector<double> TaxiBusProblem::gradient_smoothed_serial(const std::vector<double>& x) const {
  return gradient_impl(x, false);
}

void TaxiBusProblem::override_bounds(double taxi_bound, const std::vector<double>& line_bounds) {
  if (taxi_bound >= 0.0) bound_[0] = taxi_bound;
  if (!line_bounds.empty()) {
    if (static_cast<int>(line_bounds.size()) != n_lines())
      throw InputError("line bound override size mismatch");
    for (int j = 0; j < n_lines(); ++j) bound_[static_cast<std::size_t>(j) + 1] = line_bounds[static_cast<std::size_t>(j)];
  }
}

TaxiBusProblem TaxiBusProblem::taxi_only() const {
  TaxiBusProblem p = *this;
  for (int j = 0; j < n_lines(); ++j) p.bound_[static_cast<std::size_t>(j) + 1] = 0.0;
  return p;
}

TaxiBusProblem TaxiBusProblem::bus_only() const {
  TaxiBusProblem p = *this;
  p.bound_[0] = 0.0;
  return p;
}

std::vector<double> linear_minimization_oracle(const std::vector<double>& direction,
                                               const std::vector<double>& cost,
                                               const std::vector<double>& bound, double budget) {
  const std::size_t n = direction.size();
  if (cost.size() != n || bound.size() != n)
    throw InputError("LMO inputs must have equal length");
  std::vector<int> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(direction[i])) throw InputError("LMO direction must be finite");
    if (direction[i] > 0.0 && bound[i] > 0.0) order.push_back(static_cast<int>(i));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ra = direction[static_cast<std::size_t>(a)] / cost[static_cast<std::size_t>(a)];
    const double rb = direction[static_cast<std::size_t>(b)] / cost[static_cast<std::size_t>(b)];
    if (ra != rb) return ra > rb;
    return a < b;
  });
  std::vector<double> x(n, 0.0);
  double remaining = budget;
  for (int i : order) {
    if (remaining <= 0.0) break;
    const double take = std::min(bound[static_cast<std::size_t>(i)], remaining / cost[static_cast<std::size_t>(i)]);
    x[static_cast<std::size_t>(i)] = take;
    remaining -= take * cost[static_cast<std::size_t>(i)];
  }
  return x;
}

TaxiBusSolution solve_relaxed(const TaxiBusProblem& problem, const SolverOptions& opt,
                              const std::vector<double>* warm_start) {
  const int n = problem.n_vars();
  std::vector<double> cost(static_cast<std::size_t>(n)), bound(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    cost[static_cast<std::size_t>(i)] = problem.cost(i);
    bound[static_cast<std::size_t>(i)] = problem.bound(i);
  }

  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  if (warm_start != nullptr && static_cast<int>(warm_start->size()) == n) {
    x = *warm_start;
    double spend = 0.0;
    for (int i = 0; i < n; ++i) {
      x[static_cast<std::size_t>(i)] =
          std::clamp(x[static_cast<std::size_t>(i)], 0.0, bound[static_cast<std::size_t>(i)]);
      spend += x[static_cast<std::size_t>(i)] * cost[static_cast<std::size_t>(i)];
    }
    if (spend > problem.budget() && spend > 0.0) {
      const double scale = problem.budget() / spend;
      for (double& v : x) v *= scale;
    }
  }

  TaxiBusSolution sol;
  double phi = problem.objective_smoothed(x);
  int k = 0;
  for (; k < opt.max_iters; ++k) {
    const std::vector<double> grad = problem.gradient_smoothed(x);
    const std::vector<double> s = linear_minimization_oracle(grad, cost, bound, problem.budget());
    double gap = 0.0;
    for (int i = 0; i < n; ++i)
      gap += grad[static_cast<std::size_t>(i)] * (s[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]);
    sol.gap = gap;
    if (gap <= opt.tol * (1.0 + std::abs(phi))) {
      sol.converged = true;
      break;
    }
    // backtracking line search toward the oracle vertex
    std::vector<double> trial(static_cast<std::size_t>(n));
    double step = 1.0;
    double phi_trial = phi;
    bool moved = false;
    while (step > 1e-14) {
      for (int i = 0; i < n; ++i)
        trial[static_cast<std::size_t>(i)] =
            x[static_cast<std::size_t>(i)] +
            step * (s[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]);
      phi_trial = problem.objective_smoothed(trial);
      if (phi_trial >= phi + 0.25 * step * gap) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // numerically stalled
    x.swap(trial);
    phi = phi_trial;
  }
  sol.iterations = k;
  sol.x_relaxed = x;
  sol.objective_relaxed = problem.objective(x);
  return sol;
}

std::vector<long long> round_solution(const TaxiBusProblem& problem,
                                      const std::vector<double>& x_relaxed) {
  const int n = problem.n_vars();
  if (static_cast<int>(x_relaxed.size()) != n) throw InputError("decision vector size mismatch");
  std::vector<long long> xi(static_cast<std::size_t>(n), 0);
  std::vector<double> xd(static_cast<std::size_t>(n), 0.0);
  double spent = 0.0;
  for (int i = 0; i < n; ++i) {
    const double clamped = std::clamp(x_relaxed[static_cast<std::size_t>(i)], 0.0, problem.bound(i));
    xi[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor(clamped + 1e-12));
    xd[static_cast<std::size_t>(i)] = static_cast<double>(xi[static_cast<std::size_t>(i)]);
    spent += xd[static_cast<std::size_t>(i)] * problem.cost(i);
  }

  Field cover = problem.coverage(xd);
  const Field& w = problem.joint_weights();
  const double beta = problem.params().beta;

  // per-variable coverage increment of one unit
  std::vector<Field> unit(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    unit[static_cast<std::size_t>(i)] = problem.coverage(e);
    unit[static_cast<std::size_t>(i)] -= problem.background();
  }

  // marginal Phi gain of one extra unit of variable i at the current point
  auto gain = [&](int i) {
    const Field& u = unit[static_cast<std::size_t>(i)];
    double d = 0.0;
    for (std::size_t c = 0; c < cover.size(); ++c) {
      const double inc = u.flat(c);
      if (inc <= 0.0 || w.flat(c) <= 0.0) continue;
      const double cur = cover.flat(c);
      d += w.flat(c) * (std::pow(cur + inc, beta) - (cur > 0.0 ? std::pow(cur, beta) : 0.0));
    }
    return d;
  };

  while (true) {
    int best = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < n; ++i) {
      if (static_cast<double>(xi[static_cast<std::size_t>(i)]) + 1.0 > problem.bound(i) + 1e-9) continue;
      if (spent + problem.cost(i) > problem.budget() + 1e-9) continue;
      const double ratio = gain(i) / problem.cost(i);
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = i;
      }
    }
    if (best < 0) break;
    xi[static_cast<std::size_t>(best)] += 1;
    xd[static_cast<std::size_t>(best)] += 1.0;
    spent += problem.cost(best);
    cover += unit[static_cast<std::size_t>(best)];
  }
  return xi;
}

TaxiBusSolution solve(const TaxiBusProblem& problem, const SolverOptions& opt,
                      const std::vector<double>* warm_start) {
  TaxiBusSolution sol = solve_relaxed(problem, opt, warm_start);
  sol.x_rounded = round_solution(problem, sol.x_relaxed);
  std::vector<double> xd(sol.x_rounded.size());
  for (std::size_t i = 0; i < xd.size(); ++i) xd[i] = static_cast<double>(sol.x_rounded[i]);
  sol.objective_rounded = problem.objective(xd);
  return sol;
}

TaxiBusSolution solve_single_mode(const TaxiBusProblem& problem, SingleMode mode,
                                  const SolverOptions& opt) {
  const TaxiBusProblem restricted =
      mode == SingleMode::kTaxi ? problem.taxi_only() : problem.bus_only();
  return solve(restricted, opt);
}

}  // namespace dsc
