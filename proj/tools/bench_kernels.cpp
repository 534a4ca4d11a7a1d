// Benchmark of the OpenMP kernels against their serial references:
// the weighted utility reduction, the smoothed allocation gradient, and the
// taxi slope fit. Prints one line per kernel with the speedup.

#include <chrono>
#include <cstdio>
#include <functional>

#include "dsc/convex.hpp"
#include "dsc/kernels.hpp"
#include "dsc/metrics.hpp"
#include "dsc/rng.hpp"
#include "dsc/taxi.hpp"

using namespace dsc;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", par::max_threads());
  Rng rng(1);

  // utility reduction over a large field
  {
    const int g = 65536, t = 24;
    Field cov(g, t), w(g, t);
    for (std::size_t i = 0; i < cov.size(); ++i) {
      cov.flat(i) = rng.uniform(0.0, 10.0);
      w.flat(i) = rng.uniform(0.0, 1.0);
    }
    volatile double sink = 0.0;
    const double serial = time_ms(5, [&] { sink = stwsu_serial(cov, w, 0.2); });
    const double parallel = time_ms(5, [&] { sink = stwsu(cov, w, 0.2); });
    std::printf("stwsu %9.3f ms serial  %9.3f ms parallel  speedup %.2fx\n", serial, parallel,
                serial / parallel);
    (void)sink;
  }

  // smoothed gradient of the allocation objective
  {
    const int grids = 4096, windows = 24, lines = 64;
    TaxiModel taxi;
    taxi.p = Field(grids, windows);
    for (std::size_t i = 0; i < taxi.p.size(); ++i) taxi.p.flat(i) = rng.uniform(0.0, 0.8);
    taxi.fleet_bound = 500;
    std::vector<BusLine> ls;
    for (int j = 0; j < lines; ++j) {
      BusLine line;
      line.id = j;
      line.name = "L" + std::to_string(j);
      for (int k = 0; k < 80; ++k) line.route_grids.push_back((j * 53 + k * 17) % grids);
      std::sort(line.route_grids.begin(), line.route_grids.end());
      line.route_grids.erase(std::unique(line.route_grids.begin(), line.route_grids.end()),
                             line.route_grids.end());
      line.fleet_size = 10;
      line.service_hours.assign(windows, 0.6);
      line.turnaround_hours.assign(windows, 0.2);
      line.in_service.assign(windows, 5.0);
      ls.push_back(std::move(line));
    }
    const BusIncidence inc = BusIncidence::build(ls, grids);
    Field w(grids, windows);
    for (std::size_t i = 0; i < w.size(); ++i) w.flat(i) = rng.uniform(0.0, 1.0);
    const TaxiBusProblem problem(&taxi, &ls, &inc, w, {0.2, 1e-8}, 52000.0, 50000.0, 5e6);
    std::vector<double> x(static_cast<std::size_t>(problem.n_vars()), 1.0);
    std::vector<double> out;
    const double serial = time_ms(5, [&] { out = problem.gradient_smoothed_serial(x); });
    const double parallel = time_ms(5, [&] { out = problem.gradient_smoothed(x); });
    std::printf("gradient %6.3f ms serial  %9.3f ms parallel  speedup %.2fx\n", serial, parallel,
                serial / parallel);
  }

  // taxi slope fit over synthetic visits
  {
    const int grids = 400, windows = 12, vehicles = 300, days = 10;
    TaxiTraceSet traces;
    traces.n_grids = grids;
    traces.n_windows = windows;
    traces.n_vehicles = vehicles;
    traces.n_days = days;
    for (int v = 0; v < vehicles; ++v) {
      traces.vehicle_ids.push_back(std::to_string(v));
      traces.operator_ids.push_back("");
      for (int d = 0; d < days; ++d)
        for (int t = 0; t < windows; ++t)
          for (int g = 0; g < grids; ++g)
            if (rng.bernoulli(0.08)) traces.visits.push_back({v, d, t, g});
    }
    TaxiModel m;
    const double fit_ms = time_ms(3, [&] { m = fit_p(traces, {10, {}, 3}); });
    std::printf("taxi fit %6.1f ms (%zu visit records)\n", fit_ms, traces.visits.size());
  }
  return 0;
}
