#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dsc/convex.hpp"
#include "dsc/metrics.hpp"
#include "dsc/rng.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace dsc;

namespace {

struct Instance {
  TaxiModel taxi;
  std::vector<BusLine> lines;
  BusIncidence incidence;
  Field weights;
};

// random small instance; held by value so the problem can reference it
Instance random_instance(Rng& rng, int grids, int windows, int n_lines) {
  Instance in;
  in.taxi.p = Field(grids, windows);
  for (std::size_t i = 0; i < in.taxi.p.size(); ++i) in.taxi.p.flat(i) = rng.uniform(0.0, 0.8);
  in.taxi.fleet_bound = 5 + rng.below_int(20);
  for (int j = 0; j < n_lines; ++j) {
    std::vector<int> route;
    for (int g = 0; g < grids; ++g)
      if (rng.bernoulli(0.5)) route.push_back(g);
    if (route.empty()) route.push_back(rng.below_int(grids));
    in.lines.push_back(test::simple_line(j, route, 4 + rng.below_int(8), rng.uniform(1.0, 4.0),
                                         rng.uniform(0.5, 1.5), windows));
  }
  in.incidence = BusIncidence::build(in.lines, grids);
  in.weights = Field(grids, windows);
  for (std::size_t i = 0; i < in.weights.size(); ++i) in.weights.flat(i) = rng.uniform(0.05, 1.0);
  double s = in.weights.sum();
  for (std::size_t i = 0; i < in.weights.size(); ++i) in.weights.flat(i) /= s;
  return in;
}

}  // namespace

TEST_CASE("linear minimization oracle") {
  // all-negative direction stays at the origin
  CHECK(linear_minimization_oracle({-1.0, -2.0}, {1.0, 1.0}, {5.0, 5.0}, 10.0) ==
        std::vector<double>{0.0, 0.0});

  // single variable capped by its box
  CHECK(linear_minimization_oracle({1.0}, {1.0}, {3.0}, 5.0) == std::vector<double>{3.0});

  // greedy by benefit-per-cost ratio
  CHECK(linear_minimization_oracle({2.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, 1.0) ==
        std::vector<double>{1.0, 0.0});

  // budget splits across variables after the best one saturates
  const auto x = linear_minimization_oracle({3.0, 1.0}, {1.0, 2.0}, {2.0, 4.0}, 6.0);
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("zero budget keeps only the background utility") {
  const int g = 2, t = 1;
  const TaxiModel taxi = test::constant_taxi(g, t, 0.5, 10);
  Field w(g, t, 0.5);
  Field bg(g, t, 4.0);
  const TaxiBusProblem problem(&taxi, nullptr, nullptr, w, {0.5, 1e-8}, 1.0, 1.0, 0.0, bg);
  const TaxiBusSolution sol = solve(problem);
  CHECK(sol.x_relaxed[0] == 0.0);
  CHECK(sol.x_rounded[0] == 0);
  CHECK(sol.objective_relaxed == doctest::Approx(stwsu(bg, w, 0.5)));
}

TEST_CASE("monotone one-variable problem saturates its budget") {
  const TaxiModel taxi = test::constant_taxi(1, 1, 0.5, 20);
  Field w(1, 1, 1.0);
  const TaxiBusProblem problem(&taxi, nullptr, nullptr, w, {0.5, 1e-8}, 1.0, 1.0, 10.0);
  const TaxiBusSolution sol = solve(problem);
  CHECK(sol.x_relaxed[0] == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(sol.x_rounded[0] == 10);
}

TEST_CASE("two-variable solve matches a dense grid-search oracle") {
  // taxi covers grid 0 only, one line covers grid 1 only
  const int windows = 1;
  TaxiModel taxi;
  taxi.p = Field(2, windows);
  taxi.p(0, 0) = 0.5;
  taxi.fleet_bound = 50;
  std::vector<BusLine> lines{test::simple_line(0, {1}, 30, 2.0, 1.0, windows)};
  const BusIncidence inc = BusIncidence::build(lines, 2);
  Field w(2, windows);
  w(0, 0) = 0.6;
  w(1, 0) = 0.4;
  const double budget = 12.0;
  const TaxiBusProblem problem(&taxi, &lines, &inc, w, {0.3, 1e-8}, 1.0, 1.5, budget);

  SolverOptions opt;
  opt.tol = 1e-10;
  opt.max_iters = 200000;
  const TaxiBusSolution sol = solve_relaxed(problem, opt);

  // the objective rises in both variables, so the best y for a given n
  // saturates the leftover budget
  double best = 0.0;
  for (int k = 0; k <= 12000; ++k) {
    const double n = k * 1e-3;
    const double y = std::min(30.0, (budget - n) / 1.5);
    if (y < 0.0) break;
    best = std::max(best, problem.objective({n, y}));
  }
  CHECK(sol.objective_relaxed == doctest::Approx(best).epsilon(1e-5));
}

TEST_CASE("rounding") {
  const TaxiModel taxi = test::constant_taxi(1, 1, 0.5, 20);
  Field w(1, 1, 1.0);
  const TaxiBusProblem problem(&taxi, nullptr, nullptr, w, {0.5, 1e-8}, 1.0, 1.0, 3.0);

  // already integral stays put
  CHECK(round_solution(problem, {3.0}) == std::vector<long long>{3});

  // floor plus one greedy step
  CHECK(round_solution(problem, {2.9}) == std::vector<long long>{3});
}

TEST_CASE("rounded solutions stay within 5 percent of the integer optimum") {
  Rng rng(21);
  double worst = 1.0;
  for (int rep = 0; rep < 30; ++rep) {
    const Instance in = random_instance(rng, 3, 1, 2);
    const double budget = 1 + rng.below_int(10);
    const TaxiBusProblem problem(&in.taxi, &in.lines, &in.incidence, in.weights,
                                 {rng.uniform(0.15, 0.6), 1e-8}, 1.0, 1.0, budget);
    const TaxiBusSolution sol = solve(problem);
    const test::IntegerOptimum opt = test::exhaustive_integer_optimum(problem);
    CHECK(sol.objective_relaxed >= opt.objective - 1e-5);
    CHECK(sol.objective_rounded <= sol.objective_relaxed + 1e-9);
    if (opt.objective > 0.0) {
      const double ratio = sol.objective_rounded / opt.objective;
      worst = std::min(worst, ratio);
      CHECK(ratio >= 0.95);
    }
  }
  MESSAGE("worst rounded/optimal ratio: ", worst);
}

TEST_CASE("single-mode overrides") {
  Rng rng(31);
  const Instance in = random_instance(rng, 4, 2, 2);
  const TaxiBusProblem problem(&in.taxi, &in.lines, &in.incidence, in.weights, {0.3, 1e-8}, 1.0,
                               1.0, 8.0);

  const TaxiBusSolution taxi_only = solve_single_mode(problem, SingleMode::kTaxi);
  for (int j = 1; j < problem.n_vars(); ++j) CHECK(taxi_only.x_relaxed[static_cast<std::size_t>(j)] == 0.0);

  const TaxiBusSolution bus_only = solve_single_mode(problem, SingleMode::kBus);
  CHECK(bus_only.x_relaxed[0] == 0.0);

  const TaxiBusSolution both = solve(problem);
  CHECK(both.objective_relaxed >=
        std::max(taxi_only.objective_relaxed, bus_only.objective_relaxed) - 1e-6);
  CHECK(both.objective_rounded >=
        std::max(taxi_only.objective_rounded, bus_only.objective_rounded) - 1e-9);
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    const Instance in = random_instance(rng, 3, 2, 2);
    const TaxiBusProblem problem(&in.taxi, &in.lines, &in.incidence, in.weights,
                                 {rng.uniform(0.15, 0.7), 1e-8}, 1.0, 1.0, 50.0);
    std::vector<double> x(static_cast<std::size_t>(problem.n_vars()));
    for (int i = 0; i < problem.n_vars(); ++i)
      x[static_cast<std::size_t>(i)] = rng.uniform(0.5, std::max(0.6, problem.bound(i)));
    const std::vector<double> grad = problem.gradient_smoothed(x);
    for (int i = 0; i < problem.n_vars(); ++i) {
      const double h = 1e-6 * (1.0 + std::abs(x[static_cast<std::size_t>(i)]));
      std::vector<double> hi = x, lo = x;
      hi[static_cast<std::size_t>(i)] += h;
      lo[static_cast<std::size_t>(i)] -= h;
      const double fd = (problem.objective_smoothed(hi) - problem.objective_smoothed(lo)) / (2.0 * h);
      const double denom = std::max(std::abs(fd), 1e-12);
      CHECK(std::abs(grad[static_cast<std::size_t>(i)] - fd) / denom < 1e-5);
    }
  }
}

TEST_CASE("gradient kernel matches its serial reference bit for bit") {
  Rng rng(43);
  const Instance in = random_instance(rng, 24, 6, 4);
  const TaxiBusProblem problem(&in.taxi, &in.lines, &in.incidence, in.weights, {0.3, 1e-8}, 1.0,
                               1.0, 20.0);
  std::vector<double> x(static_cast<std::size_t>(problem.n_vars()));
  for (auto& v : x) v = rng.uniform(0.0, 3.0);
  CHECK(problem.gradient_smoothed(x) == problem.gradient_smoothed_serial(x));
}

TEST_CASE("objective is concave along random segments") {
  Rng rng(51);
  for (int rep = 0; rep < 10; ++rep) {
    const Instance in = random_instance(rng, 4, 2, 2);
    const TaxiBusProblem problem(&in.taxi, &in.lines, &in.incidence, in.weights, {0.25, 1e-8},
                                 1.0, 1.0, 100.0);
    std::vector<double> a(static_cast<std::size_t>(problem.n_vars())),
        b(static_cast<std::size_t>(problem.n_vars()));
    for (int i = 0; i < problem.n_vars(); ++i) {
      a[static_cast<std::size_t>(i)] = rng.uniform(0.0, 5.0);
      b[static_cast<std::size_t>(i)] = rng.uniform(0.0, 5.0);
    }
    const double lam = rng.uniform(0.1, 0.9);
    std::vector<double> mid(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) mid[i] = lam * a[i] + (1.0 - lam) * b[i];
    CHECK(problem.objective(mid) >=
          lam * problem.objective(a) + (1.0 - lam) * problem.objective(b) - 1e-9);
  }
}

TEST_CASE("optimal objective is monotone in budget and background") {
  Rng rng(61);
  const Instance in = random_instance(rng, 3, 1, 1);
  SolverOptions opt;
  opt.tol = 1e-9;

  double prev = -1.0;
  for (double budget : {0.0, 2.0, 5.0, 9.0, 14.0}) {
    const TaxiBusProblem problem(&in.taxi, &in.lines, &in.incidence, in.weights, {0.3, 1e-8},
                                 1.0, 1.0, budget);
    const double phi = solve_relaxed(problem, opt).objective_relaxed;
    CHECK(phi >= prev - 1e-7);
    prev = phi;
  }

  const TaxiBusProblem bare(&in.taxi, &in.lines, &in.incidence, in.weights, {0.3, 1e-8}, 1.0, 1.0,
                            6.0);
  Field bg(3, 1, 0.7);
  const TaxiBusProblem with_bg(&in.taxi, &in.lines, &in.incidence, in.weights, {0.3, 1e-8}, 1.0,
                               1.0, 6.0, bg);
  CHECK(solve_relaxed(with_bg, opt).objective_relaxed >=
        solve_relaxed(bare, opt).objective_relaxed - 1e-9);
}

TEST_CASE("benefit-per-cost ratios equalize at an interior optimum") {
  // taxi feeds cell 0, the line feeds cell 1; the budget binds and both
  // variables settle strictly inside their boxes
  const int windows = 1;
  TaxiModel taxi;
  taxi.p = Field(2, windows);
  taxi.p(0, 0) = 0.6;
  taxi.fleet_bound = 100;
  std::vector<BusLine> lines{test::simple_line(0, {1}, 100, 3.0, 1.0, windows)};
  const BusIncidence inc = BusIncidence::build(lines, 2);
  Field w(2, windows);
  w(0, 0) = 0.55;
  w(1, 0) = 0.45;
  const TaxiBusProblem problem(&taxi, &lines, &inc, w, {0.4, 1e-8}, 1.0, 1.3, 20.0);

  SolverOptions opt;
  opt.tol = 1e-12;
  opt.max_iters = 400000;
  const TaxiBusSolution sol = solve_relaxed(problem, opt);
  for (int i = 0; i < 2; ++i) {
    CHECK(sol.x_relaxed[static_cast<std::size_t>(i)] > 0.5);
    CHECK(sol.x_relaxed[static_cast<std::size_t>(i)] < problem.bound(i) - 0.5);
  }
  const std::vector<double> grad = problem.gradient_smoothed(sol.x_relaxed);
  const double r0 = grad[0] / problem.cost(0);
  const double r1 = grad[1] / problem.cost(1);
  CHECK(std::abs(r0 - r1) / std::max(r0, r1) < 1e-4);
}
