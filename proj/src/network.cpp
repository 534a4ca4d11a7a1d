#include "dsc/network.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace dsc {

namespace {

// Kosaraju; iterative to survive long chain graphs.
std::vector<int> scc_labels(const std::vector<std::vector<RoadNetwork::Edge>>& out, int n) {
  std::vector<std::vector<int>> rev(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u)
    for (const auto& e : out[static_cast<std::size_t>(u)]) rev[static_cast<std::size_t>(e.to)].push_back(u);

  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<std::pair<int, std::size_t>> stack;
  for (int s = 0; s < n; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    stack.emplace_back(s, 0);
    seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
      auto& [u, i] = stack.back();
      if (i < out[static_cast<std::size_t>(u)].size()) {
        const int v = out[static_cast<std::size_t>(u)][i++].to;
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          stack.emplace_back(v, 0);
        }
      } else {
        order.push_back(u);
        stack.pop_back();
      }
    }
  }

  std::vector<int> label(static_cast<std::size_t>(n), -1);
  int comp = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (label[static_cast<std::size_t>(*it)] >= 0) continue;
    std::vector<int> dfs{*it};
    label[static_cast<std::size_t>(*it)] = comp;
    while (!dfs.empty()) {
      const int u = dfs.back();
      dfs.pop_back();
      for (int v : rev[static_cast<std::size_t>(u)]) {
        if (label[static_cast<std::size_t>(v)] < 0) {
          label[static_cast<std::size_t>(v)] = comp;
          dfs.push_back(v);
        }
      }
    }
    ++comp;
  }
  return label;
}

}  // namespace

RoadNetwork RoadNetwork::build(std::vector<std::int64_t> ids, std::vector<double> xs,
                               std::vector<double> ys,
                               const std::vector<std::tuple<int, int, double, double>>& edges,
                               double default_speed_kmh) {
  if (xs.size() != ys.size() || xs.size() != ids.size())
    throw InputError("node arrays must have equal length");
  if (default_speed_kmh <= 0.0) throw InputError("travel speed must be positive");
  RoadNetwork net;
  net.node_ids = std::move(ids);
  net.x = std::move(xs);
  net.y = std::move(ys);
  net.speed_kmh = default_speed_kmh;
  const int n = net.size();
  net.out.assign(static_cast<std::size_t>(n), {});
  for (const auto& [u, v, len, speed] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n) throw InputError("edge endpoint out of range");
    if (u == v) continue;
    if (len <= 0.0) throw InputError("edge lengths must be positive");
    const double s = speed > 0.0 ? speed : default_speed_kmh;
    net.out[static_cast<std::size_t>(u)].push_back({v, len / s, len});
  }
  for (auto& adj : net.out) {
    std::sort(adj.begin(), adj.end(), [](const Edge& a, const Edge& b) {
      return a.to != b.to ? a.to < b.to : a.hours < b.hours;
    });
  }

  const std::vector<int> label = scc_labels(net.out, n);
  int comps = 0;
  for (int l : label) comps = std::max(comps, l + 1);
  net.scc_count = comps;
  std::vector<int> comp_size(static_cast<std::size_t>(comps), 0);
  for (int l : label) comp_size[static_cast<std::size_t>(l)] += 1;
  int largest = 0;
  for (int c = 1; c < comps; ++c)
    if (comp_size[static_cast<std::size_t>(c)] > comp_size[static_cast<std::size_t>(largest)]) largest = c;
  net.routable.assign(static_cast<std::size_t>(n), 0);
  for (int u = 0; u < n; ++u)
    net.routable[static_cast<std::size_t>(u)] = label[static_cast<std::size_t>(u)] == largest ? 1 : 0;
  return net;
}

GridMap GridMap::build(const GridSpec& spec, const RoadNetwork& net) {
  if (spec.nx <= 0 || spec.ny <= 0 || spec.cell_km <= 0.0)
    throw InputError("grid must have positive dimensions and cell size");
  GridMap gm;
  gm.spec = spec;
  gm.node_grid.assign(static_cast<std::size_t>(net.size()), -1);
  gm.grid_nodes.assign(static_cast<std::size_t>(spec.count()), {});
  gm.road_covered.assign(static_cast<std::size_t>(spec.count()), 0);
  for (int u = 0; u < net.size(); ++u) {
    const int g = spec.cell_of(net.x[static_cast<std::size_t>(u)], net.y[static_cast<std::size_t>(u)]);
    if (g < 0)
      throw InputError("node " + std::to_string(net.node_ids[static_cast<std::size_t>(u)]) +
                       " lies outside the grid bounding box");
    gm.node_grid[static_cast<std::size_t>(u)] = g;
    if (net.routable[static_cast<std::size_t>(u)]) {
      gm.grid_nodes[static_cast<std::size_t>(g)].push_back(u);
      gm.road_covered[static_cast<std::size_t>(g)] = 1;
    }
  }
  gm.grid_adj.assign(static_cast<std::size_t>(spec.count()), {});
  for (int g = 0; g < spec.count(); ++g) {
    if (!gm.road_covered[static_cast<std::size_t>(g)]) continue;
    const int gx = spec.ix(g), gy = spec.iy(g);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nxp = gx + dx, nyp = gy + dy;
        if (nxp < 0 || nxp >= spec.nx || nyp < 0 || nyp >= spec.ny) continue;
        const int h = nyp * spec.nx + nxp;
        if (gm.road_covered[static_cast<std::size_t>(h)])
          gm.grid_adj[static_cast<std::size_t>(g)].push_back(h);
      }
    }
  }
  return gm;
}

NRoute shortest_path_to_grid(const RoadNetwork& net, const GridMap& gm, int from, int target_grid) {
  if (from < 0 || from >= net.size()) throw InputError("origin node out of range");
  const auto& targets = gm.grid_nodes[static_cast<std::size_t>(target_grid)];
  if (targets.empty())
    throw RoutingError("grid " + std::to_string(target_grid) + " contains no routable node");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(net.size()), kInf);
  std::vector<int> prev(static_cast<std::size_t>(net.size()), -1);
  // (distance, node); node id breaks ties for determinism
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<std::size_t>(from)] = 0.0;
  pq.emplace(0.0, from);

  std::vector<char> target_mask(static_cast<std::size_t>(net.size()), 0);
  for (int v : targets) target_mask[static_cast<std::size_t>(v)] = 1;

  int reached = -1;
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    if (target_mask[static_cast<std::size_t>(u)]) {
      // equal-distance targets resolve to the lowest node id
      reached = u;
      for (int v : targets)
        if (dist[static_cast<std::size_t>(v)] == d && v < reached) reached = v;
      break;
    }
    for (const auto& e : net.out[static_cast<std::size_t>(u)]) {
      const double nd = d + e.hours;
      if (nd < dist[static_cast<std::size_t>(e.to)]) {
        dist[static_cast<std::size_t>(e.to)] = nd;
        prev[static_cast<std::size_t>(e.to)] = u;
        pq.emplace(nd, e.to);
      }
    }
  }
  if (reached < 0)
    throw RoutingError("grid " + std::to_string(target_grid) + " is unreachable from node " +
                       std::to_string(net.node_ids[static_cast<std::size_t>(from)]));

  NRoute route;
  route.hours = dist[static_cast<std::size_t>(reached)];
  for (int v = reached; v != -1; v = prev[static_cast<std::size_t>(v)]) route.nodes.push_back(v);
  std::reverse(route.nodes.begin(), route.nodes.end());
  return route;
}

GRoute traversed_grids(const GridMap& gm, const std::vector<int>& nodes) {
  GRoute grids;
  for (int v : nodes) {
    const int g = gm.node_grid[static_cast<std::size_t>(v)];
    if (grids.empty() || grids.back() != g) grids.push_back(g);
  }
  return grids;
}

std::vector<int> rasterize_polyline(const GridSpec& spec,
                                    const std::vector<std::pair<double, double>>& points) {
  std::vector<int> cells;
  auto push = [&](int g) {
    if (g >= 0 && (cells.empty() || cells.back() != g)) cells.push_back(g);
  };
  for (std::size_t i = 0; i + 1 < points.size() || (points.size() == 1 && i == 0); ++i) {
    const auto [x0, y0] = points[i];
    push(spec.cell_of(x0, y0));
    if (i + 1 >= points.size()) break;
    const auto [x1, y1] = points[i + 1];
    // sample the segment at sub-cell resolution; exact boundary walking is
    // overkill for route incidence
    const double len = std::hypot(x1 - x0, y1 - y0);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / (spec.cell_km / 16.0))));
    for (int s = 1; s <= steps; ++s) {
      const double f = static_cast<double>(s) / steps;
      push(spec.cell_of(x0 + f * (x1 - x0), y0 + f * (y1 - y0)));
    }
  }
  return cells;
}

}  // namespace dsc
