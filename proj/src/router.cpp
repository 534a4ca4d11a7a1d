#include "dsc/router.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "dsc/kernels.hpp"

namespace dsc {

DvContext::DvContext(const SensingWeights& weights, const UtilityParams& params,
                     std::vector<int> operating_windows, Field base_coverage)
    : weights_(&weights), params_(params), op_windows_(std::move(operating_windows)),
      base_(std::move(base_coverage)) {
  params_.validate();
  if (base_.grids() != weights.grids() || base_.windows() != weights.windows())
    throw InputError("coverage field and weights dimensions differ");
  for (int t : op_windows_)
    if (t < 0 || t >= base_.windows()) throw InputError("operating window out of range");
  eta_.assign(static_cast<std::size_t>(base_.grids()), 0.0);
  visited_.assign(static_cast<std::size_t>(base_.grids()), 0);
  for (int g = 0; g < base_.grids(); ++g) recompute_eta(g);
}

void DvContext::recompute_eta(int grid) {
  const double w = weights_->spatial[static_cast<std::size_t>(grid)];
  double v = 0.0;
  if (w > 0.0) {
    for (int t : op_windows_) {
      const double n = base_(grid, t);
      v += weights_->temporal[static_cast<std::size_t>(t)] *
           (std::pow(n + 1.0, params_.beta) - (n > 0.0 ? std::pow(n, params_.beta) : 0.0));
    }
    v *= w;
  }
  eta_[static_cast<std::size_t>(grid)] = v;
}

double DvContext::collect(int grid) {
  if (visited_[static_cast<std::size_t>(grid)]) return 0.0;
  visited_[static_cast<std::size_t>(grid)] = 1;
  return eta_[static_cast<std::size_t>(grid)];
}

void DvContext::commit_vehicle() {
  for (int g = 0; g < base_.grids(); ++g) {
    if (!visited_[static_cast<std::size_t>(g)]) continue;
    for (int t : op_windows_) base_(g, t) += 1.0;
    recompute_eta(g);
    visited_[static_cast<std::size_t>(g)] = 0;
  }
}

void DvContext::remove_coverage(const std::vector<int>& grids) {
  for (int g : grids) {
    for (int t : op_windows_) {
      base_(g, t) -= 1.0;
      if (base_(g, t) < 0.0) throw InputError("coverage removal below zero");
    }
    recompute_eta(g);
  }
}

void DvContext::add_coverage(const std::vector<int>& grids) {
  for (int g : grids) {
    for (int t : op_windows_) base_(g, t) += 1.0;
    recompute_eta(g);
  }
}

double DvContext::utility_of(const std::vector<int>& grids) const {
  double u = 0.0;
  for (int g : grids) u += eta_[static_cast<std::size_t>(g)];
  return u;
}

std::vector<int> DvContext::visited_grids() const {
  std::vector<int> out;
  for (int g = 0; g < static_cast<int>(visited_.size()); ++g)
    if (visited_[static_cast<std::size_t>(g)]) out.push_back(g);
  return out;
}

GRouteExecution execute_g_route(const RoadNetwork& net, const GridMap& gm, const GRoute& route,
                                int start_node) {
  if (route.empty()) throw InputError("grid route is empty");
  if (gm.node_grid[static_cast<std::size_t>(start_node)] != route.front())
    throw InputError("start node does not lie in the first grid of the route");
  GRouteExecution ex;
  ex.n_route.nodes.push_back(start_node);
  ex.end_node = start_node;
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    NRoute leg;
    try {
      leg = shortest_path_to_grid(net, gm, ex.end_node, route[i + 1]);
    } catch (const RoutingError& e) {
      throw RoutingError("leg " + std::to_string(i + 1) + " (grid " + std::to_string(route[i]) +
                         " -> " + std::to_string(route[i + 1]) + "): " + e.what());
    }
    ex.n_route.nodes.insert(ex.n_route.nodes.end(), leg.nodes.begin() + 1, leg.nodes.end());
    ex.n_route.hours += leg.hours;
    ex.end_node = ex.n_route.nodes.back();
  }
  ex.actual = traversed_grids(gm, ex.n_route.nodes);
  return ex;
}

GRoute grid_astar(const GridMap& gm, int origin_grid, int dest_grid,
                  const std::vector<double>& impedance) {
  const int n = gm.spec.count();
  if (origin_grid < 0 || origin_grid >= n || dest_grid < 0 || dest_grid >= n)
    throw InputError("grid index out of range");
  if (!gm.road_covered[static_cast<std::size_t>(origin_grid)] ||
      !gm.road_covered[static_cast<std::size_t>(dest_grid)])
    throw RoutingError("grid A*: origin or destination has no road coverage");
  if (static_cast<int>(impedance.size()) != n)
    throw InputError("impedance vector must cover every grid");
  if (origin_grid == dest_grid) return {origin_grid};

  double min_imp = std::numeric_limits<double>::infinity();
  for (int g = 0; g < n; ++g) {
    if (!gm.road_covered[static_cast<std::size_t>(g)]) continue;
    const double imp = impedance[static_cast<std::size_t>(g)];
    if (!(imp > 0.0) || !std::isfinite(imp))
      throw InputError("impedances must be positive and finite");
    min_imp = std::min(min_imp, imp);
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> gcost(static_cast<std::size_t>(n), kInf);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<char> closed(static_cast<std::size_t>(n), 0);
  auto h = [&](int g) { return min_imp * gm.spec.chebyshev(g, dest_grid); };

  using Item = std::pair<double, int>;  // (f, grid); grid id breaks ties
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  gcost[static_cast<std::size_t>(origin_grid)] = 0.0;
  open.emplace(h(origin_grid), origin_grid);

  while (!open.empty()) {
    const auto [f, g] = open.top();
    open.pop();
    if (closed[static_cast<std::size_t>(g)]) continue;
    closed[static_cast<std::size_t>(g)] = 1;
    if (g == dest_grid) break;
    for (int nb : gm.grid_adj[static_cast<std::size_t>(g)]) {
      if (closed[static_cast<std::size_t>(nb)]) continue;
      const double cand = gcost[static_cast<std::size_t>(g)] + impedance[static_cast<std::size_t>(nb)];
      if (cand < gcost[static_cast<std::size_t>(nb)]) {
        gcost[static_cast<std::size_t>(nb)] = cand;
        parent[static_cast<std::size_t>(nb)] = g;
        open.emplace(cand + h(nb), nb);
      }
    }
  }
  if (!closed[static_cast<std::size_t>(dest_grid)])
    throw RoutingError("grid A*: no route from grid " + std::to_string(origin_grid) + " to " +
                       std::to_string(dest_grid));
  GRoute path;
  for (int g = dest_grid; g != -1; g = parent[static_cast<std::size_t>(g)]) path.push_back(g);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<double> impedance_from_eta(const DvContext& ctx, double floor_value) {
  std::vector<double> imp(static_cast<std::size_t>(ctx.n_grids()));
  for (int g = 0; g < ctx.n_grids(); ++g)
    imp[static_cast<std::size_t>(g)] = 1.0 / (ctx.eta(g) + floor_value);
  return imp;
}

DvLeg local_destination_search(const RoadNetwork& net, const GridMap& gm, const DvContext& ctx,
                               int origin_node, const DvSearchOptions& opt) {
  if (opt.radius_km <= 0.0) throw InputError("search radius must be positive");
  const int origin_grid = gm.node_grid[static_cast<std::size_t>(origin_node)];

  std::vector<int> candidates;
  for (int g = 0; g < gm.spec.count(); ++g) {
    if (g == origin_grid || !gm.road_covered[static_cast<std::size_t>(g)]) continue;
    if (gm.spec.centroid_distance(origin_grid, g) <= opt.radius_km) candidates.push_back(g);
  }
  if (candidates.empty())
    throw EmptySearchError("no candidate grid within " + std::to_string(opt.radius_km) + " km");

  const std::vector<double> imp = impedance_from_eta(ctx);
  std::vector<DvLeg> legs(candidates.size());
  std::vector<char> ok(candidates.size(), 0);

  par::parallel_for(static_cast<std::int64_t>(candidates.size()), [&](std::int64_t i) {
    const int dest = candidates[static_cast<std::size_t>(i)];
    DvLeg leg;
    leg.dest_grid = dest;
    try {
      leg.planned = grid_astar(gm, origin_grid, dest, imp);
      leg.exec = execute_g_route(net, gm, leg.planned, origin_node);
    } catch (const RoutingError&) {
      return;  // unreachable candidate
    }
    if (leg.exec.n_route.hours <= 0.0) return;
    GRoute distinct = leg.exec.actual;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    double gain = 0.0;
    for (int g : distinct)
      gain += opt.psi_weight_spatial ? ctx.weights().spatial[static_cast<std::size_t>(g)] * ctx.eta(g)
                                     : ctx.eta(g);
    leg.psi = gain / leg.exec.n_route.hours;
    legs[static_cast<std::size_t>(i)] = std::move(leg);
    ok[static_cast<std::size_t>(i)] = 1;
  });

  int best = -1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!ok[i]) continue;
    if (best < 0 || legs[i].psi > legs[static_cast<std::size_t>(best)].psi)
      best = static_cast<int>(i);  // candidates ascend by grid id, so ties keep the lowest
  }
  if (best < 0)
    throw EmptySearchError("no reachable candidate within " + std::to_string(opt.radius_km) + " km");
  if (!(legs[static_cast<std::size_t>(best)].psi > 0.0))
    throw EmptySearchError("no candidate collects positive utility within " +
                           std::to_string(opt.radius_km) + " km");
  return legs[static_cast<std::size_t>(best)];
}

DvRoute route_single_dv(const RoadNetwork& net, const GridMap& gm, DvContext& ctx, int start_node,
                        double window_hours, const DvSearchOptions& opt) {
  if (window_hours <= 0.0) throw InputError("time window must have positive length");
  if (!net.routable[static_cast<std::size_t>(start_node)])
    throw RoutingError("start node is not in the routable component");

  DvRoute route;
  route.start_node = start_node;
  route.nodes.push_back(start_node);

  // the vehicle covers its starting grid from the outset
  {
    const int g0 = gm.node_grid[static_cast<std::size_t>(start_node)];
    if (!ctx.visited(g0)) {
      route.collected += ctx.collect(g0);
      route.grids.push_back(g0);
    }
  }

  DvSearchOptions search = opt;
  int widenings = 0;
  int current = start_node;
  while (true) {
    DvLeg leg;
    try {
      leg = local_destination_search(net, gm, ctx, current, search);
    } catch (const EmptySearchError&) {
      if (widenings < 2) {
        search.radius_km *= 2.0;
        ++widenings;
        continue;
      }
      route.starved = true;
      break;
    }
    search.radius_km = opt.radius_km;
    widenings = 0;

    const double leg_hours = leg.exec.n_route.hours;
    if (route.hours + leg_hours < window_hours) {
      route.nodes.insert(route.nodes.end(), leg.exec.n_route.nodes.begin() + 1,
                         leg.exec.n_route.nodes.end());
      for (int g : leg.exec.actual) {
        if (!ctx.visited(g)) {
          route.collected += ctx.collect(g);
          route.grids.push_back(g);
        }
      }
      route.hours += leg_hours;
      current = leg.exec.end_node;
      continue;
    }

    // budget exceeded: cut the leg at the node whose arrival time is closest
    // to the window end; grids entered up to the cut count as covered
    const auto& nodes = leg.exec.n_route.nodes;
    double cum = 0.0;
    double best_diff = std::abs(route.hours - window_hours);
    std::size_t cut = 0;
    std::vector<double> cum_at(nodes.size(), 0.0);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const int u = nodes[i - 1], v = nodes[i];
      double hop = 0.0;
      for (const auto& e : net.out[static_cast<std::size_t>(u)]) {
        if (e.to == v) {
          hop = e.hours;
          break;
        }
      }
      cum += hop;
      cum_at[i] = cum;
      const double diff = std::abs(route.hours + cum - window_hours);
      if (diff < best_diff) {
        best_diff = diff;
        cut = i;
      }
    }
    if (cut > 0) {
      route.nodes.insert(route.nodes.end(), nodes.begin() + 1, nodes.begin() + cut + 1);
      route.hours += cum_at[cut];
      const GRoute prefix = traversed_grids(gm, std::vector<int>(nodes.begin(), nodes.begin() + cut + 1));
      for (int g : prefix) {
        if (!ctx.visited(g)) {
          route.collected += ctx.collect(g);
          route.grids.push_back(g);
        }
      }
    }
    break;
  }
  return route;
}

FleetRoutingResult route_fleet(const RoadNetwork& net, const GridMap& gm, DvContext& ctx,
                               const std::vector<int>& start_nodes, double window_hours,
                               const DvSearchOptions& opt, int max_iter) {
  if (start_nodes.empty()) throw InputError("fleet routing requires at least one vehicle");
  FleetRoutingResult result;
  result.routes.reserve(start_nodes.size());

  for (int start : start_nodes) {
    ctx.reset_vehicle();
    DvRoute r = route_single_dv(net, gm, ctx, start, window_hours, opt);
    result.total_utility += r.collected;
    result.routes.push_back(std::move(r));
    ctx.commit_vehicle();
  }
  result.utility_trace.push_back(result.total_utility);

  for (int round = 0; round < max_iter; ++round) {
    bool improved = false;
    for (std::size_t v = 0; v < result.routes.size(); ++v) {
      DvRoute& old_route = result.routes[v];
      ctx.remove_coverage(old_route.grids);
      const double old_utility = ctx.utility_of(old_route.grids);
      ctx.reset_vehicle();
      DvRoute candidate = route_single_dv(net, gm, ctx, old_route.start_node, window_hours, opt);
      if (candidate.collected > old_utility) {
        result.total_utility += candidate.collected - old_utility;
        old_route = std::move(candidate);
        ctx.commit_vehicle();
        improved = true;
      } else {
        ctx.reset_vehicle();
        ctx.add_coverage(old_route.grids);
      }
    }
    result.utility_trace.push_back(result.total_utility);
    ++result.adjustment_rounds;
    if (!improved) break;
  }
  return result;
}

Field extend_round_trips(const std::vector<DvRoute>& routes, const std::vector<int>& op_windows,
                         int n_grids, int n_windows) {
  Field cover(n_grids, n_windows);
  for (const DvRoute& r : routes)
    for (int g : r.grids)
      for (int t : op_windows) cover(g, t) += 1.0;
  return cover;
}

std::vector<int> default_start_nodes(const RoadNetwork& net, const GridMap& gm,
                                     const std::vector<double>& spatial_weights, int n_vehicles) {
  if (n_vehicles <= 0) return {};
  std::vector<int> grids;
  for (int g = 0; g < gm.spec.count(); ++g)
    if (gm.road_covered[static_cast<std::size_t>(g)]) grids.push_back(g);
  if (grids.empty()) throw RoutingError("no road-covered grid to start from");
  std::stable_sort(grids.begin(), grids.end(), [&](int a, int b) {
    if (spatial_weights[static_cast<std::size_t>(a)] != spatial_weights[static_cast<std::size_t>(b)])
      return spatial_weights[static_cast<std::size_t>(a)] > spatial_weights[static_cast<std::size_t>(b)];
    return a < b;
  });

  std::vector<int> starts;
  starts.reserve(static_cast<std::size_t>(n_vehicles));
  for (int v = 0; v < n_vehicles; ++v) {
    const int g = grids[static_cast<std::size_t>(v) % grids.size()];
    const double cx = gm.spec.centroid_x(g), cy = gm.spec.centroid_y(g);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int u : gm.grid_nodes[static_cast<std::size_t>(g)]) {
      const double dx = net.x[static_cast<std::size_t>(u)] - cx;
      const double dy = net.y[static_cast<std::size_t>(u)] - cy;
      const double d = dx * dx + dy * dy;
      if (d < best_d) {
        best_d = d;
        best = u;
      }
    }
    starts.push_back(best);
  }
  return starts;
}

}  // namespace dsc
