#include "dsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dsc/kernels.hpp"

namespace dsc {

double utility(double n, const UtilityParams& params) {
  params.validate();
  if (n < 0.0 || !std::isfinite(n)) throw InputError("coverage must be finite and nonnegative");
  if (n == 0.0) return 0.0;
  return std::pow(n, params.beta);
}

double stwsu(const Field& coverage, const Field& joint_weights, double beta) {
  coverage.require_same_shape(joint_weights, "stwsu");
  const auto& n = coverage.data();
  const auto& w = joint_weights.data();
  return par::blocked_sum(static_cast<std::int64_t>(n.size()), [&](std::int64_t i) {
    return n[i] > 0.0 ? w[i] * std::pow(n[i], beta) : 0.0;
  });
}

double stwsu_serial(const Field& coverage, const Field& joint_weights, double beta) {
  coverage.require_same_shape(joint_weights, "stwsu");
  const auto& n = coverage.data();
  const auto& w = joint_weights.data();
  return par::blocked_sum_serial(static_cast<std::int64_t>(n.size()), [&](std::int64_t i) {
    return n[i] > 0.0 ? w[i] * std::pow(n[i], beta) : 0.0;
  });
}

double stwsu(const Field& coverage, const SensingWeights& weights, const UtilityParams& params) {
  params.validate();
  if (coverage.grids() != weights.grids() || coverage.windows() != weights.windows())
    throw InputError("stwsu: coverage and weights dimensions differ");
  return stwsu(coverage, weights.joint(), params.beta);
}

BetaCalibration calibrate_beta(double w_max, double w_min, double zeta) {
  if (!(w_min > 0.0) || w_max < w_min)
    throw InputError("calibrate_beta requires w_max >= w_min > 0");
  const double ratio = w_max / w_min;
  if (ratio == 1.0) {
    // log_zeta(1) = 0 puts beta at the excluded endpoint 1; uniform weights
    // admit any exponent, so report it rather than fail.
    return {1.0, true};
  }
  if (!(zeta > ratio))
    throw CalibrationError(
        "coverage ratio zeta must exceed w_max/w_min = " + std::to_string(ratio) +
        "; either raise zeta or re-exponentiate the weights (v_g = w_g^a with a in (0,1) "
        "small enough that zeta > (w_max/w_min)^a)");
  const double beta = 1.0 - std::log(ratio) / std::log(zeta);
  return {beta, false};
}

Field target_distribution(const Field& joint_weights, const UtilityParams& params) {
  params.validate();
  const double expo = params.beta / (1.0 - params.beta);
  Field td(joint_weights.grids(), joint_weights.windows());
  double total = 0.0;
  for (std::size_t i = 0; i < td.size(); ++i) {
    const double w = joint_weights.flat(i);
    if (w < 0.0 || !std::isfinite(w)) throw InputError("weights must be nonnegative and finite");
    td.flat(i) = w > 0.0 ? std::pow(w, expo) : 0.0;
    total += td.flat(i);
  }
  if (total <= 0.0) throw InputError("target distribution undefined: all weights are zero");
  for (std::size_t i = 0; i < td.size(); ++i) td.flat(i) /= total;
  return td;
}

Field target_distribution(const SensingWeights& weights, const UtilityParams& params) {
  return target_distribution(weights.joint(), params);
}

Field actual_distribution(const Field& coverage, const UtilityParams& params) {
  params.validate();
  coverage.require_nonnegative("coverage");
  Field ad(coverage.grids(), coverage.windows());
  double total = 0.0;
  for (std::size_t i = 0; i < ad.size(); ++i) {
    const double n = coverage.flat(i);
    ad.flat(i) = n > 0.0 ? std::pow(n, params.beta) : 0.0;
    total += ad.flat(i);
  }
  if (total <= 0.0) throw InputError("actual distribution undefined: coverage field is all-zero");
  for (std::size_t i = 0; i < ad.size(); ++i) ad.flat(i) /= total;
  return ad;
}

double kl_divergence(const Field& ad, const Field& td) {
  ad.require_same_shape(td, "kl_divergence");
  double kl = 0.0;
  for (std::size_t i = 0; i < ad.size(); ++i) {
    const double a = ad.flat(i);
    if (a <= 0.0) continue;  // 0 log(0/x) = 0
    const double t = td.flat(i);
    if (t <= 0.0) return std::numeric_limits<double>::infinity();
    kl += a * std::log(a / t);
  }
  return kl < 0.0 ? 0.0 : kl;  // clamp the tiny negative round-off near AD == TD
}

std::vector<GridGap> twsu_and_tag(const Field& coverage, const SensingWeights& weights,
                                  const UtilityParams& params) {
  params.validate();
  if (coverage.grids() != weights.grids() || coverage.windows() != weights.windows())
    throw InputError("twsu_and_tag: coverage and weights dimensions differ");
  const Field td = target_distribution(weights, params);
  const Field ad = actual_distribution(coverage, params);
  std::vector<GridGap> out(static_cast<std::size_t>(coverage.grids()));
  for (int g = 0; g < coverage.grids(); ++g) {
    GridGap& gg = out[static_cast<std::size_t>(g)];
    double gap_sum = 0.0;
    int valid = 0;
    for (int t = 0; t < coverage.windows(); ++t) {
      gg.twsu += weights.temporal[t] * utility(coverage(g, t), params);
      if (td(g, t) > 0.0) {
        gap_sum += (ad(g, t) - td(g, t)) / td(g, t);
        ++valid;
      } else {
        ++gg.cells_excluded;
      }
    }
    gg.applicable = valid > 0;
    gg.tag_percent = gg.applicable ? 100.0 * gap_sum / valid : 0.0;
  }
  return out;
}

Field ptd_to_weights(const Field& ptd, const UtilityParams& params) {
  params.validate();
  ptd.require_nonnegative("prescribed target distribution");
  Field w(ptd.grids(), ptd.windows());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w.flat(i) = ptd.flat(i) > 0.0 ? std::pow(ptd.flat(i), 1.0 - params.beta) : 0.0;
    total += w.flat(i);
  }
  if (total <= 0.0) throw InputError("prescribed target distribution is all-zero");
  for (std::size_t i = 0; i < w.size(); ++i) w.flat(i) /= total;
  return w;
}

CoverageIndicators spatial_coverage_indicators(const std::vector<double>& spatial_weights,
                                               const std::vector<double>& taxi_per_grid,
                                               const std::vector<char>& on_bus_route,
                                               double percentile) {
  const int n = static_cast<int>(spatial_weights.size());
  if (static_cast<int>(taxi_per_grid.size()) != n || static_cast<int>(on_bus_route.size()) != n)
    throw InputError("spatial_coverage_indicators: per-grid arrays must have equal length");
  if (!(percentile > 0.0 && percentile < 1.0))
    throw InputError("percentile must lie in (0,1)");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (taxi_per_grid[a] != taxi_per_grid[b]) return taxi_per_grid[a] > taxi_per_grid[b];
    return a < b;
  });
  const int top = static_cast<int>(std::llround(percentile * n));

  std::vector<char> taxi_covered(static_cast<std::size_t>(n), 0);
  for (int r = 0; r < top && r < n; ++r) {
    const int g = order[static_cast<std::size_t>(r)];
    if (taxi_per_grid[g] > 0.0) taxi_covered[static_cast<std::size_t>(g)] = 1;
  }

  CoverageIndicators sci;
  for (int g = 0; g < n; ++g) {
    if (taxi_covered[g]) sci.taxi += spatial_weights[g];
    if (on_bus_route[g]) sci.bus += spatial_weights[g];
    if (taxi_covered[g] || on_bus_route[g]) sci.taxi_bus += spatial_weights[g];
  }
  sci.all = 1.0;
  return sci;
}

}  // namespace dsc
