#include "dsc/bus.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace dsc {

void BusLine::validate(int n_grids, int n_windows) const {
  if (route_grids.empty())
    throw InputError("bus line " + name + ": route crosses no grids");
  for (std::size_t i = 0; i < route_grids.size(); ++i) {
    if (route_grids[i] < 0 || route_grids[i] >= n_grids)
      throw InputError("bus line " + name + ": route grid out of range");
    if (i > 0 && route_grids[i] == route_grids[i - 1])
      throw InputError("bus line " + name + ": consecutive route grids must differ");
  }
  if (fleet_size < 0) throw InputError("bus line " + name + ": negative fleet size");
  if (static_cast<int>(service_hours.size()) != n_windows ||
      static_cast<int>(turnaround_hours.size()) != n_windows ||
      static_cast<int>(in_service.size()) != n_windows)
    throw InputError("bus line " + name + ": per-window parameter arrays must cover the horizon");
  for (int t = 0; t < n_windows; ++t) {
    if (in_service[t] < 0.0 || in_service[t] > static_cast<double>(fleet_size))
      throw InputError("bus line " + name + ": lambda(t) must lie in [0, fleet_size]");
    if (in_service[t] > 0.0 && service_hours[t] + turnaround_hours[t] <= 0.0)
      throw InputError("bus line " + name + ": zero trip duration in an active window " +
                       std::to_string(t));
    if (service_hours[t] < 0.0 || turnaround_hours[t] < 0.0)
      throw InputError("bus line " + name + ": negative trip times");
  }
}

BusIncidence BusIncidence::build(const std::vector<BusLine>& lines, int n_grids) {
  BusIncidence inc;
  inc.n_grids = n_grids;
  inc.grid_on_any.assign(static_cast<std::size_t>(n_grids), 0);
  inc.line_grids.reserve(lines.size());
  for (const BusLine& line : lines) {
    std::vector<int> grids = line.route_grids;
    std::sort(grids.begin(), grids.end());
    grids.erase(std::unique(grids.begin(), grids.end()), grids.end());
    for (int g : grids) inc.grid_on_any[static_cast<std::size_t>(g)] = 1;
    inc.line_grids.push_back(std::move(grids));
  }
  return inc;
}

bool BusIncidence::covers(int grid, int line) const {
  const auto& v = line_grids[static_cast<std::size_t>(line)];
  return std::binary_search(v.begin(), v.end(), grid);
}

double service_intensity(const BusLine& line, int window) {
  if (line.fleet_size <= 0)
    throw InputError("bus line " + line.name + ": service intensity undefined for an empty fleet");
  if (window < 0 || window >= static_cast<int>(line.in_service.size()))
    throw InputError("window index out of range");
  return line.in_service[window] / static_cast<double>(line.fleet_size);
}

Field bus_coverage(const std::vector<BusLine>& lines, const BusIncidence& incidence,
                   const std::vector<double>& sensors, int n_windows) {
  if (sensors.size() != lines.size())
    throw InputError("sensor vector length does not match the number of lines");
  Field out(incidence.n_grids, n_windows);
  for (std::size_t j = 0; j < lines.size(); ++j) {
    const BusLine& line = lines[j];
    const double y = sensors[j];
    if (y < 0.0 || y > static_cast<double>(line.fleet_size))
      throw InputError("bus line " + line.name + ": sensor count " + std::to_string(y) +
                       " outside [0, " + std::to_string(line.fleet_size) + "]");
    if (y == 0.0 || line.fleet_size == 0) continue;
    for (int t = 0; t < n_windows; ++t) {
      const double gamma = service_intensity(line, t);
      if (gamma <= 0.0) continue;
      const double cycle = line.service_hours[t] + line.turnaround_hours[t];
      if (cycle <= 0.0)
        throw InputError("bus line " + line.name + ": zero trip duration in active window " +
                         std::to_string(t));
      const double n = gamma * y / cycle;
      for (int g : incidence.line_grids[j]) out(g, t) += n;
    }
  }
  return out;
}

BusParamEstimate estimate_line_params(const std::vector<BusTrip>& trips,
                                      std::vector<BusLine> lines, int n_windows,
                                      double window_hours, double start_hour) {
  const int m = static_cast<int>(lines.size());
  auto window_of = [&](double hour) {
    const int w = static_cast<int>(std::floor((hour - start_hour) / window_hours));
    return w;
  };

  // dwell = gap until the same vehicle's next trip on the same line and day
  std::map<std::tuple<int, int, int>, std::vector<std::pair<double, double>>> journeys;
  int max_day = -1;
  for (const BusTrip& tr : trips) {
    if (tr.line < 0 || tr.line >= m) throw InputError("bus trip references an unknown line");
    if (tr.arrive_hour < tr.depart_hour) throw InputError("bus trip arrives before departing");
    journeys[{tr.line, tr.vehicle, tr.day}].emplace_back(tr.depart_hour, tr.arrive_hour);
    max_day = std::max(max_day, tr.day);
  }
  const int n_days = max_day + 1;

  struct Acc {
    double dur_sum = 0.0;
    int dur_n = 0;
    double dwell_sum = 0.0;
    int dwell_n = 0;
  };
  std::vector<std::vector<Acc>> acc(static_cast<std::size_t>(m),
                                    std::vector<Acc>(static_cast<std::size_t>(n_windows)));
  // distinct vehicles in service per (line, window, day)
  std::vector<std::vector<std::vector<std::pair<int, int>>>> active(
      static_cast<std::size_t>(m), std::vector<std::vector<std::pair<int, int>>>(
                                       static_cast<std::size_t>(n_windows)));

  for (auto& [key, list] : journeys) {
    const auto [line, vehicle, day] = key;
    std::sort(list.begin(), list.end());
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto [dep, arr] = list[i];
      const int w = window_of(0.5 * (dep + arr));
      if (w >= 0 && w < n_windows) {
        Acc& a = acc[static_cast<std::size_t>(line)][static_cast<std::size_t>(w)];
        a.dur_sum += arr - dep;
        a.dur_n += 1;
        if (i + 1 < list.size() && list[i + 1].first >= arr) {
          a.dwell_sum += list[i + 1].first - arr;
          a.dwell_n += 1;
        }
      }
      // the vehicle is in service across every window its trip touches
      const int w0 = std::max(0, window_of(dep));
      const int w1 = std::min(n_windows - 1, window_of(arr));
      for (int t = w0; t <= w1; ++t)
        active[static_cast<std::size_t>(line)][static_cast<std::size_t>(t)].emplace_back(day,
                                                                                         vehicle);
    }
  }

  BusParamEstimate est;
  est.line_unobserved.assign(static_cast<std::size_t>(m), 0);
  for (int j = 0; j < m; ++j) {
    BusLine& line = lines[static_cast<std::size_t>(j)];
    line.service_hours.assign(static_cast<std::size_t>(n_windows), 0.0);
    line.turnaround_hours.assign(static_cast<std::size_t>(n_windows), 0.0);
    line.in_service.assign(static_cast<std::size_t>(n_windows), 0.0);
    line.window_synthetic.assign(static_cast<std::size_t>(n_windows), 0);

    bool any = false;
    for (int t = 0; t < n_windows; ++t) {
      Acc& a = acc[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
      auto& act = active[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
      std::sort(act.begin(), act.end());
      act.erase(std::unique(act.begin(), act.end()), act.end());
      line.in_service[static_cast<std::size_t>(t)] =
          n_days > 0 ? static_cast<double>(act.size()) / n_days : 0.0;
      if (a.dur_n > 0) {
        any = true;
        line.service_hours[static_cast<std::size_t>(t)] = a.dur_sum / a.dur_n;
        if (a.dwell_n > 0)
          line.turnaround_hours[static_cast<std::size_t>(t)] = a.dwell_sum / a.dwell_n;
      }
    }
    if (!any) {
      est.line_unobserved[static_cast<std::size_t>(j)] = 1;
      continue;
    }
    // carry trip times into unobserved windows from the nearest observed one
    for (int t = 0; t < n_windows; ++t) {
      if (acc[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)].dur_n > 0) continue;
      int best = -1;
      for (int s = 0; s < n_windows; ++s) {
        if (acc[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)].dur_n == 0) continue;
        if (best < 0 || std::abs(s - t) < std::abs(best - t)) best = s;
      }
      line.service_hours[static_cast<std::size_t>(t)] = line.service_hours[static_cast<std::size_t>(best)];
      line.turnaround_hours[static_cast<std::size_t>(t)] =
          line.turnaround_hours[static_cast<std::size_t>(best)];
      line.window_synthetic[static_cast<std::size_t>(t)] = 1;
    }
  }
  est.lines = std::move(lines);
  return est;
}

}  // namespace dsc
