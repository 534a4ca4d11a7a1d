#include "dsc/taxi.hpp"

#include <algorithm>
#include <cmath>

#include "dsc/kernels.hpp"
#include "dsc/rng.hpp"

namespace dsc {

void TaxiTraceSet::validate() const {
  if (visits.empty()) throw InputError("taxi trace set is empty");
  if (n_grids <= 0 || n_windows <= 0 || n_vehicles <= 0 || n_days <= 0)
    throw InputError("taxi trace set dimensions must be positive");
  for (const TaxiVisit& v : visits) {
    if (v.grid < 0 || v.grid >= n_grids || v.window < 0 || v.window >= n_windows ||
        v.vehicle < 0 || v.vehicle >= n_vehicles || v.day < 0 || v.day >= n_days)
      throw InputError("taxi visit record out of range");
  }
}

void TaxiModel::validate() const {
  if (fleet_bound < 0) throw InputError("taxi fleet bound must be nonnegative");
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = p.flat(i);
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw InputError("taxi slope p must lie in [0,1]");
  }
}

namespace {

// Per (grid,window) cell: the vehicles that ever visit it and how many days
// each did. Subset coverage then reduces to a masked sum.
struct CellVisits {
  std::vector<std::int64_t> cell_start;  // CSR offsets, size cells+1
  std::vector<int> vehicle;
  std::vector<double> day_count;
};

CellVisits index_visits(const TaxiTraceSet& traces) {
  const std::int64_t cells = static_cast<std::int64_t>(traces.n_grids) * traces.n_windows;
  std::vector<std::uint64_t> keys;
  keys.reserve(traces.visits.size());
  const std::uint64_t nv = static_cast<std::uint64_t>(traces.n_vehicles);
  for (const TaxiVisit& v : traces.visits) {
    const std::uint64_t cell =
        static_cast<std::uint64_t>(v.grid) * traces.n_windows + static_cast<std::uint64_t>(v.window);
    keys.push_back(cell * nv + static_cast<std::uint64_t>(v.vehicle));
  }
  std::sort(keys.begin(), keys.end());
  // duplicate (vehicle,day,window,grid) rows collapse to one visit per day,
  // so count distinct days via the sorted run length of identical keys only
  // when day also matches; simpler: recount from scratch with (key, day).
  CellVisits cv;
  cv.cell_start.assign(static_cast<std::size_t>(cells) + 1, 0);

  // build (cell*nv+vehicle, day) pairs, dedupe, then aggregate day counts
  std::vector<std::pair<std::uint64_t, int>> kd;
  kd.reserve(traces.visits.size());
  for (const TaxiVisit& v : traces.visits) {
    const std::uint64_t cell =
        static_cast<std::uint64_t>(v.grid) * traces.n_windows + static_cast<std::uint64_t>(v.window);
    kd.emplace_back(cell * nv + static_cast<std::uint64_t>(v.vehicle), v.day);
  }
  std::sort(kd.begin(), kd.end());
  kd.erase(std::unique(kd.begin(), kd.end()), kd.end());

  std::size_t i = 0;
  while (i < kd.size()) {
    std::size_t j = i;
    while (j < kd.size() && kd[j].first == kd[i].first) ++j;
    const std::uint64_t key = kd[i].first;
    const std::uint64_t cell = key / nv;
    cv.cell_start[static_cast<std::size_t>(cell) + 1] += 1;
    cv.vehicle.push_back(static_cast<int>(key % nv));
    cv.day_count.push_back(static_cast<double>(j - i));
    i = j;
  }
  for (std::size_t c = 1; c < cv.cell_start.size(); ++c) cv.cell_start[c] += cv.cell_start[c - 1];
  return cv;
}

// Day-averaged coverage of every cell for one vehicle subset.
void subset_coverage(const CellVisits& cv, const std::vector<char>& member, double n_days,
                     std::vector<double>& out) {
  const std::int64_t cells = static_cast<std::int64_t>(cv.cell_start.size()) - 1;
  par::parallel_for(cells, [&](std::int64_t c) {
    double s = 0.0;
    for (std::int64_t k = cv.cell_start[static_cast<std::size_t>(c)];
         k < cv.cell_start[static_cast<std::size_t>(c) + 1]; ++k) {
      if (member[static_cast<std::size_t>(cv.vehicle[static_cast<std::size_t>(k)])])
        s += cv.day_count[static_cast<std::size_t>(k)];
    }
    out[static_cast<std::size_t>(c)] = s / n_days;
  });
}

std::vector<int> default_sizes(int fleet) {
  std::vector<int> sizes;
  for (int i = 1; i <= 10; ++i) {
    const int s = static_cast<int>(std::llround(static_cast<double>(i) * fleet / 10.0));
    if (s >= 1 && (sizes.empty() || sizes.back() != s)) sizes.push_back(s);
  }
  if (sizes.empty()) sizes.push_back(1);
  return sizes;
}

}  // namespace

TaxiModel fit_p(const TaxiTraceSet& traces, const TaxiFitOptions& opt) {
  traces.validate();
  std::vector<int> sizes = opt.subset_sizes.empty() ? default_sizes(traces.n_vehicles)
                                                    : opt.subset_sizes;
  std::sort(sizes.begin(), sizes.end());
  for (int s : sizes)
    if (s < 1 || s > traces.n_vehicles)
      throw InputError("subset size " + std::to_string(s) + " exceeds the fleet of " +
                       std::to_string(traces.n_vehicles));
  if (opt.draws < 1) throw InputError("fit requires at least one draw per subset size");

  const CellVisits cv = index_visits(traces);
  const std::int64_t cells = static_cast<std::int64_t>(traces.n_grids) * traces.n_windows;

  // mean over draws of the day-averaged coverage, per cell and size
  std::vector<std::vector<double>> mean_cov(sizes.size(),
                                            std::vector<double>(static_cast<std::size_t>(cells), 0.0));
  std::vector<double> cov(static_cast<std::size_t>(cells));
  std::vector<char> member(static_cast<std::size_t>(traces.n_vehicles), 0);
  Rng rng(opt.seed);
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    for (int d = 0; d < opt.draws; ++d) {
      std::fill(member.begin(), member.end(), 0);
      for (int v : rng.sample_without_replacement(traces.n_vehicles, sizes[si]))
        member[static_cast<std::size_t>(v)] = 1;
      subset_coverage(cv, member, traces.n_days, cov);
      for (std::int64_t c = 0; c < cells; ++c)
        mean_cov[si][static_cast<std::size_t>(c)] += cov[static_cast<std::size_t>(c)];
    }
    for (std::int64_t c = 0; c < cells; ++c)
      mean_cov[si][static_cast<std::size_t>(c)] /= opt.draws;
  }

  double sum_x2 = 0.0;
  for (int s : sizes) sum_x2 += static_cast<double>(s) * s;

  TaxiModel model;
  model.p = Field(traces.n_grids, traces.n_windows);
  model.fleet_bound = traces.n_vehicles;
  for (std::int64_t c = 0; c < cells; ++c) {
    double sum_xy = 0.0;
    for (std::size_t si = 0; si < sizes.size(); ++si)
      sum_xy += sizes[si] * mean_cov[si][static_cast<std::size_t>(c)];
    model.p.flat(static_cast<std::size_t>(c)) = std::clamp(sum_xy / sum_x2, 0.0, 1.0);
  }
  return model;
}

Field taxi_coverage(const TaxiModel& model, double n_taxi) {
  if (n_taxi < 0.0 || n_taxi > static_cast<double>(model.fleet_bound))
    throw InputError("taxi count " + std::to_string(n_taxi) + " outside [0, " +
                     std::to_string(model.fleet_bound) + "]");
  Field out(model.p.grids(), model.p.windows());
  for (std::size_t i = 0; i < out.size(); ++i) out.flat(i) = n_taxi * model.p.flat(i);
  return out;
}

TaxiFitValidation validate_fit(const TaxiModel& model, const TaxiTraceSet& holdout,
                               const std::vector<int>& sizes, int draws, std::uint64_t seed) {
  holdout.validate();
  if (holdout.n_grids != model.p.grids() || holdout.n_windows != model.p.windows())
    throw InputError("holdout dimensions do not match the fitted model");
  const CellVisits cv = index_visits(holdout);
  const std::int64_t cells = static_cast<std::int64_t>(holdout.n_grids) * holdout.n_windows;

  TaxiFitValidation report;
  std::vector<double> cov(static_cast<std::size_t>(cells));
  std::vector<double> emp(static_cast<std::size_t>(cells));
  std::vector<char> member(static_cast<std::size_t>(holdout.n_vehicles), 0);
  Rng rng(seed);
  for (int n : sizes) {
    if (n < 1 || n > holdout.n_vehicles)
      throw InputError("validation size " + std::to_string(n) + " exceeds the holdout fleet");
    std::fill(emp.begin(), emp.end(), 0.0);
    for (int d = 0; d < draws; ++d) {
      std::fill(member.begin(), member.end(), 0);
      for (int v : rng.sample_without_replacement(holdout.n_vehicles, n))
        member[static_cast<std::size_t>(v)] = 1;
      subset_coverage(cv, member, holdout.n_days, cov);
      for (std::int64_t c = 0; c < cells; ++c) emp[static_cast<std::size_t>(c)] += cov[static_cast<std::size_t>(c)];
    }
    for (std::int64_t c = 0; c < cells; ++c) emp[static_cast<std::size_t>(c)] /= draws;

    for (int t = 0; t < holdout.n_windows; ++t) {
      double mae = 0.0;
      for (int g = 0; g < holdout.n_grids; ++g) {
        const double e = emp[static_cast<std::size_t>(g) * holdout.n_windows + t];
        const double est = n * model.p(g, t);
        mae += std::abs(e - est);
        report.scatter.push_back({t, n, g, e, est});
      }
      report.rows.push_back({t, n, mae / holdout.n_grids});
    }
  }
  return report;
}

}  // namespace dsc
