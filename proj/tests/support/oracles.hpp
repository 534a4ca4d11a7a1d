#pragma once

// Independent reference computations for the test suites. Everything here
// deliberately avoids the library's solver code paths: closed forms are
// checked against plain numerical search, exact algorithms against
// enumeration.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "dsc/convex.hpp"
#include "dsc/field.hpp"
#include "dsc/network.hpp"
#include "dsc/rng.hpp"
#include "dsc/router.hpp"

namespace dsc::test {

// Euclidean projection onto {x >= 0, sum x = total}.
inline std::vector<double> project_simplex(std::vector<double> v, double total) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  int rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - total) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = static_cast<int>(i + 1);
      tau = t;
    }
  }
  (void)rho;
  for (double& x : v) x = std::max(0.0, x - tau);
  return v;
}

// Projected gradient ascent for  max sum_i w_i x_i^beta  s.t.  x in the
// scaled simplex. Cells with w_i = 0 are pinned at zero. The projection
// keeps every active cell above a tiny floor: the optimum is interior, and
// the floor keeps the x^(beta-1) gradient finite so the line search cannot
// stall on a collapsed cell.
inline std::vector<double> maximize_budgeted_utility(const std::vector<double>& w, double beta,
                                                     double total, int max_iters = 200000,
                                                     double rel_tol = 1e-16) {
  const std::size_t n = w.size();
  std::vector<int> active;
  for (std::size_t i = 0; i < n; ++i)
    if (w[i] > 0.0) active.push_back(static_cast<int>(i));
  const double floor_value = 1e-9 * total / static_cast<double>(active.size());
  std::vector<double> xa(active.size(), total / static_cast<double>(active.size()));

  auto value = [&](const std::vector<double>& x) {
    // long double keeps objective differences measurable right down to the
    // per-cell tolerance the acceptance criteria ask for
    long double f = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] > 0.0)
        f += static_cast<long double>(w[static_cast<std::size_t>(active[i])]) *
             powl(static_cast<long double>(x[i]), static_cast<long double>(beta));
    return f;
  };
  auto project_floored = [&](std::vector<double> v) {
    for (double& x : v) x -= floor_value;
    v = project_simplex(std::move(v), total - floor_value * static_cast<double>(v.size()));
    for (double& x : v) x += floor_value;
    return v;
  };

  double step = total / static_cast<double>(active.size());
  long double f = value(xa);
  std::vector<double> grad(active.size());
  int tiny_gains = 0;  // consecutive iterations with negligible improvement
  for (int it = 0; it < max_iters; ++it) {
    for (std::size_t i = 0; i < xa.size(); ++i) {
      const double xi = std::max(xa[i], floor_value);
      grad[i] = w[static_cast<std::size_t>(active[i])] * beta * std::pow(xi, beta - 1.0);
    }
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      std::vector<double> trial(xa.size());
      for (std::size_t i = 0; i < xa.size(); ++i) trial[i] = xa[i] + step * grad[i];
      trial = project_floored(std::move(trial));
      const long double ft = value(trial);
      if (ft > f) {
        const long double gain = ft - f;
        xa.swap(trial);
        f = ft;
        accepted = true;
        step *= 1.5;
        if (step > total) step = total;
        tiny_gains = gain <= static_cast<long double>(rel_tol) * (1.0L + fabsl(f))
                         ? tiny_gains + 1
                         : 0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || tiny_gains >= 30) break;
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < active.size(); ++i) x[static_cast<std::size_t>(active[i])] = xa[i];
  return x;
}

// Exhaustive minimal-impedance path cost between grids: depth-first search
// over simple paths with branch-and-bound pruning. Cost convention matches
// grid_astar (entered grids pay, the origin does not).
namespace detail {
inline void dfs_min_path(const GridMap& gm, int cur, int dest, const std::vector<double>& imp,
                         std::vector<char>& on_path, double cost, double& best) {
  if (cur == dest) {
    best = std::min(best, cost);
    return;
  }
  for (int nb : gm.grid_adj[static_cast<std::size_t>(cur)]) {
    if (on_path[static_cast<std::size_t>(nb)]) continue;
    const double c = cost + imp[static_cast<std::size_t>(nb)];
    if (c >= best) continue;
    on_path[static_cast<std::size_t>(nb)] = 1;
    dfs_min_path(gm, nb, dest, imp, on_path, c, best);
    on_path[static_cast<std::size_t>(nb)] = 0;
  }
}
}  // namespace detail

namespace detail {
inline void dfs_min_path_track(const GridMap& gm, int cur, int dest, const std::vector<double>& imp,
                               std::vector<char>& on_path, std::vector<int>& path, double cost,
                               double& best, std::vector<int>& best_path) {
  if (cur == dest) {
    if (cost < best) {
      best = cost;
      best_path = path;
    }
    return;
  }
  for (int nb : gm.grid_adj[static_cast<std::size_t>(cur)]) {
    if (on_path[static_cast<std::size_t>(nb)]) continue;
    const double c = cost + imp[static_cast<std::size_t>(nb)];
    if (c >= best) continue;
    on_path[static_cast<std::size_t>(nb)] = 1;
    path.push_back(nb);
    dfs_min_path_track(gm, nb, dest, imp, on_path, path, c, best, best_path);
    path.pop_back();
    on_path[static_cast<std::size_t>(nb)] = 0;
  }
}
}  // namespace detail

// Exhaustive minimal-impedance path (the route itself, not just its cost).
inline std::vector<int> exhaustive_grid_path(const GridMap& gm, int origin, int dest,
                                             const std::vector<double>& impedance) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_path, path{origin};
  std::vector<char> on_path(static_cast<std::size_t>(gm.spec.count()), 0);
  on_path[static_cast<std::size_t>(origin)] = 1;
  detail::dfs_min_path_track(gm, origin, dest, impedance, on_path, path, 0.0, best, best_path);
  return best_path;
}

inline double exhaustive_grid_path_cost(const GridMap& gm, int origin, int dest,
                                        const std::vector<double>& impedance) {
  // staircase path toward the destination gives a valid upper bound, which
  // keeps the branch-and-bound search shallow
  double best = 0.0;
  {
    int g = origin;
    while (g != dest) {
      const int dx = gm.spec.ix(dest) > gm.spec.ix(g) ? 1 : (gm.spec.ix(dest) < gm.spec.ix(g) ? -1 : 0);
      const int dy = gm.spec.iy(dest) > gm.spec.iy(g) ? 1 : (gm.spec.iy(dest) < gm.spec.iy(g) ? -1 : 0);
      g = (gm.spec.iy(g) + dy) * gm.spec.nx + (gm.spec.ix(g) + dx);
      if (!gm.road_covered[static_cast<std::size_t>(g)]) {
        best = std::numeric_limits<double>::infinity();  // seed path invalid here
        break;
      }
      best += impedance[static_cast<std::size_t>(g)];
    }
    if (std::isfinite(best)) best += 1e-12;  // keep the seed path itself acceptable
  }
  std::vector<char> on_path(static_cast<std::size_t>(gm.spec.count()), 0);
  on_path[static_cast<std::size_t>(origin)] = 1;
  detail::dfs_min_path(gm, origin, dest, impedance, on_path, 0.0, best);
  return best;
}

// Exhaustive integer optimum of a taxi-bus problem (small instances only).
struct IntegerOptimum {
  std::vector<long long> x;
  double objective = -std::numeric_limits<double>::infinity();
};

inline IntegerOptimum exhaustive_integer_optimum(const TaxiBusProblem& problem) {
  const int n = problem.n_vars();
  IntegerOptimum best;
  std::vector<long long> x(static_cast<std::size_t>(n), 0);

  std::vector<long long> caps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    caps[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor(problem.bound(i) + 1e-9));

  std::vector<double> xd(static_cast<std::size_t>(n));
  auto eval = [&]() {
    double spend = 0.0;
    for (int i = 0; i < n; ++i) {
      xd[static_cast<std::size_t>(i)] = static_cast<double>(x[static_cast<std::size_t>(i)]);
      spend += xd[static_cast<std::size_t>(i)] * problem.cost(i);
    }
    if (spend > problem.budget() + 1e-9) return;
    const double phi = problem.objective(xd);
    if (phi > best.objective) {
      best.objective = phi;
      best.x = x;
    }
  };

  // odometer enumeration
  while (true) {
    eval();
    int i = 0;
    while (i < n) {
      if (x[static_cast<std::size_t>(i)] < caps[static_cast<std::size_t>(i)]) {
        ++x[static_cast<std::size_t>(i)];
        break;
      }
      x[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == n) break;
  }
  return best;
}

// Random walk of a given duration on the road network, collecting marginal
// utility with the same bookkeeping the router uses. The context is taken by
// value so each walk scores against a fresh copy.
inline double random_walk_utility(const RoadNetwork& net, const GridMap& gm, DvContext ctx,
                                  int start, double hours_budget, Rng& rng) {
  ctx.reset_vehicle();
  double collected = ctx.collect(gm.node_grid[static_cast<std::size_t>(start)]);
  int u = start;
  double hours = 0.0;
  while (hours < hours_budget) {
    const auto& adj = net.out[static_cast<std::size_t>(u)];
    if (adj.empty()) break;
    const auto& e = adj[rng.below(adj.size())];
    hours += e.hours;
    u = e.to;
    collected += ctx.collect(gm.node_grid[static_cast<std::size_t>(u)]);
  }
  return collected;
}

// Through-origin least squares by scanning the slope range; the closed form
// in the fitter must match this to fine resolution.
inline double brute_force_origin_slope(const std::vector<double>& xs,
                                       const std::vector<double>& ys) {
  double best_slope = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 200000; ++k) {
    const double s = static_cast<double>(k) / 100000.0;  // [0, 2]
    double err = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d = ys[i] - s * xs[i];
      err += d * d;
    }
    if (err < best_err) {
      best_err = err;
      best_slope = s;
    }
  }
  return best_slope;
}

}  // namespace dsc::test
