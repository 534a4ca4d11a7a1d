#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dsc/rng.hpp"
#include "dsc/taxi.hpp"
#include "support/oracles.hpp"

using namespace dsc;

namespace {

// every vehicle visits `grids_always` in every window on every day
TaxiTraceSet deterministic_traces(int vehicles, int days, int windows, int grids,
                                  const std::vector<int>& grids_always) {
  TaxiTraceSet t;
  t.n_grids = grids;
  t.n_windows = windows;
  t.n_vehicles = vehicles;
  t.n_days = days;
  for (int v = 0; v < vehicles; ++v) {
    t.vehicle_ids.push_back(std::to_string(v));
    t.operator_ids.push_back("");
    for (int d = 0; d < days; ++d)
      for (int w = 0; w < windows; ++w)
        for (int g : grids_always) t.visits.push_back({v, d, w, g});
  }
  return t;
}

TaxiTraceSet bernoulli_traces(Rng& rng, int vehicles, int days, const std::vector<double>& p_grid,
                              int windows) {
  TaxiTraceSet t;
  t.n_grids = static_cast<int>(p_grid.size());
  t.n_windows = windows;
  t.n_vehicles = vehicles;
  t.n_days = days;
  for (int v = 0; v < vehicles; ++v) {
    t.vehicle_ids.push_back(std::to_string(v));
    t.operator_ids.push_back("");
    for (int d = 0; d < days; ++d)
      for (int w = 0; w < windows; ++w)
        for (int g = 0; g < t.n_grids; ++g)
          if (rng.bernoulli(p_grid[static_cast<std::size_t>(g)])) t.visits.push_back({v, d, w, g});
  }
  return t;
}

}  // namespace

TEST_CASE("fit recovers the extreme slopes exactly") {
  const TaxiTraceSet traces = deterministic_traces(12, 3, 2, 4, {1, 2});
  TaxiFitOptions opt;
  opt.draws = 5;
  const TaxiModel m = fit_p(traces, opt);
  // visited always -> slope 1, never visited -> slope 0
  for (int t = 0; t < 2; ++t) {
    CHECK(m.p(1, t) == doctest::Approx(1.0));
    CHECK(m.p(2, t) == doctest::Approx(1.0));
    CHECK(m.p(0, t) == 0.0);
    CHECK(m.p(3, t) == 0.0);
  }
  CHECK(m.fleet_bound == 12);
}

TEST_CASE("fit recovers a bernoulli visit probability") {
  Rng rng(123);
  const TaxiTraceSet traces = bernoulli_traces(rng, 1000, 4, {0.3, 0.7}, 1);
  TaxiFitOptions opt;
  opt.draws = 8;
  opt.seed = 9;
  const TaxiModel m = fit_p(traces, opt);
  CHECK(m.p(0, 0) == doctest::Approx(0.3).epsilon(0.07));   // 0.3 +- 0.02 absolute
  CHECK(std::abs(m.p(0, 0) - 0.3) < 0.02);
  CHECK(std::abs(m.p(1, 0) - 0.7) < 0.02);
}

TEST_CASE("fitted slope equals the closed form checked by brute force") {
  // tiny case where the draw means can be computed by hand
  const TaxiTraceSet traces = deterministic_traces(4, 2, 1, 2, {0});
  TaxiFitOptions opt;
  opt.draws = 3;
  opt.subset_sizes = {1, 2, 4};
  const TaxiModel m = fit_p(traces, opt);
  // every subset of size n covers grid 0 with exactly n vehicles
  std::vector<double> xs{1, 2, 4}, ys{1, 2, 4};
  const double oracle = test::brute_force_origin_slope(xs, ys);
  CHECK(m.p(0, 0) == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("slopes never exceed one") {
  Rng rng(5);
  const TaxiTraceSet traces = bernoulli_traces(rng, 50, 2, {0.95, 1.0, 0.99}, 2);
  const TaxiModel m = fit_p(traces, {10, {}, 3});
  for (std::size_t i = 0; i < m.p.size(); ++i) CHECK(m.p.flat(i) <= 1.0);
}

TEST_CASE("coverage is the linear binomial mean") {
  TaxiModel m;
  m.p = Field(2, 1, 0.3);
  m.fleet_bound = 200;

  const Field zero = taxi_coverage(m, 0.0);
  CHECK(zero(0, 0) == 0.0);

  const Field f = taxi_coverage(m, 100.0);
  CHECK(f(0, 0) == doctest::Approx(30.0));

  const Field g = taxi_coverage(m, 160.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(g.flat(i) == doctest::Approx(2.0 * taxi_coverage(m, 80.0).flat(i)));

  CHECK_THROWS_AS(taxi_coverage(m, 201.0), Error);
  CHECK_THROWS_AS(taxi_coverage(m, -1.0), Error);
}

TEST_CASE("validation on noise-free traces has zero error") {
  const TaxiTraceSet traces = deterministic_traces(10, 2, 1, 3, {0, 2});
  const TaxiModel m = fit_p(traces, {4, {}, 1});
  const TaxiFitValidation rep = validate_fit(m, traces, {2, 5, 10}, 6, 2);
  for (const auto& row : rep.rows) CHECK(row.mae == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("validation error shrinks for near-deterministic grids") {
  Rng rng(77);
  // grids 0-2 rarely visited, grids 3-5 nearly always
  const std::vector<double> p{0.3, 0.3, 0.3, 0.95, 0.95, 0.95};
  const TaxiTraceSet fitset = bernoulli_traces(rng, 400, 6, p, 1);
  const TaxiModel m = fit_p(fitset, {10, {}, 4});
  const TaxiTraceSet holdout = bernoulli_traces(rng, 400, 6, p, 1);

  const int n = 200;
  const TaxiFitValidation rep = validate_fit(m, holdout, {n}, 30, 5);
  double low = 0.0, high = 0.0;
  for (const auto& s : rep.scatter) {
    const double err = std::abs(s.empirical - s.estimated);
    if (s.grid < 3)
      low += err;
    else
      high += err;
  }
  CHECK(high < low);
}

TEST_CASE("more fit draws never hurt expected validation error") {
  double mae_few = 0.0, mae_many = 0.0;
  for (int seed = 0; seed < 12; ++seed) {
    Rng rng(1000 + static_cast<std::uint64_t>(seed));
    const std::vector<double> p{0.2, 0.5, 0.8};
    const TaxiTraceSet fitset = bernoulli_traces(rng, 150, 3, p, 1);
    const TaxiTraceSet holdout = bernoulli_traces(rng, 150, 3, p, 1);
    const TaxiModel few = fit_p(fitset, {4, {}, static_cast<std::uint64_t>(seed)});
    const TaxiModel many = fit_p(fitset, {8, {}, static_cast<std::uint64_t>(seed)});
    for (const auto& row : validate_fit(few, holdout, {100}, 10, 3).rows) mae_few += row.mae;
    for (const auto& row : validate_fit(many, holdout, {100}, 10, 3).rows) mae_many += row.mae;
  }
  CHECK(mae_many <= mae_few + 0.02);
}

TEST_CASE("input validation") {
  TaxiTraceSet empty;
  CHECK_THROWS_AS(fit_p(empty, {}), Error);

  const TaxiTraceSet traces = deterministic_traces(4, 1, 1, 2, {0});
  TaxiFitOptions opt;
  opt.subset_sizes = {5};  // exceeds the fleet
  CHECK_THROWS_AS(fit_p(traces, opt), Error);
}
