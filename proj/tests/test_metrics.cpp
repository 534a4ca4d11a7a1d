#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dsc/metrics.hpp"
#include "dsc/rng.hpp"
#include "support/oracles.hpp"

using namespace dsc;

namespace {

Field make_field(int g, int t, std::initializer_list<double> vals) {
  Field f(g, t);
  std::size_t i = 0;
  for (double v : vals) f.flat(i++) = v;
  return f;
}

Field random_field(Rng& rng, int g, int t, double lo, double hi) {
  Field f(g, t);
  for (std::size_t i = 0; i < f.size(); ++i) f.flat(i) = rng.uniform(lo, hi);
  return f;
}

}  // namespace

TEST_CASE("utility power form") {
  CHECK(utility(1.0, {0.2, 0.0}) == doctest::Approx(1.0));
  CHECK(utility(4.0, {0.5, 0.0}) == doctest::Approx(2.0));
  CHECK(utility(0.0, {0.2, 0.0}) == 0.0);
  CHECK_THROWS_AS(utility(-1.0, {0.2, 0.0}), Error);
  CHECK_THROWS_AS(utility(1.0, {1.0, 0.0}), Error);
  CHECK_THROWS_AS(utility(1.0, {0.0, 0.0}), Error);

  // strictly increasing and strictly concave on a sample of points
  const UtilityParams p{0.37, 0.0};
  double prev = 0.0;
  for (double n = 0.5; n < 8.0; n += 0.5) {
    const double u = utility(n, p);
    CHECK(u > prev);
    prev = u;
  }
  for (double n = 0.5; n < 8.0; n += 0.5) {
    const double mid = utility(n + 0.25, p);
    CHECK(mid > 0.5 * (utility(n, p) + utility(n + 0.5, p)));
  }
}

TEST_CASE("stwsu closed cases") {
  const SensingWeights w2{{0.5, 0.5}, {1.0}};
  CHECK(stwsu(make_field(2, 1, {1.0, 1.0}), w2, {0.5, 0.0}) == doctest::Approx(1.0));

  const SensingWeights w1{{1.0}, {1.0}};
  CHECK(stwsu(make_field(1, 1, {9.0}), w1, {0.5, 0.0}) == doctest::Approx(3.0));

  const SensingWeights w3{{0.75, 0.25}, {1.0}};
  CHECK(stwsu(make_field(2, 1, {4.0, 1.0}), w3, {0.5, 0.0}) == doctest::Approx(1.75));

  CHECK_THROWS_AS(stwsu(make_field(3, 1, {1, 1, 1}), w2, {0.5, 0.0}), Error);
}

TEST_CASE("stwsu monotone and concave in the field") {
  Rng rng(42);
  const UtilityParams params{0.2, 0.0};
  for (int rep = 0; rep < 20; ++rep) {
    const int g = 3 + rng.below_int(5), t = 1 + rng.below_int(4);
    SensingWeights w;
    for (int i = 0; i < g; ++i) w.spatial.push_back(rng.uniform(0.1, 1.0));
    for (int i = 0; i < t; ++i) w.temporal.push_back(rng.uniform(0.1, 1.0));
    bool warned = false;
    w = SensingWeights::normalized(w.spatial, w.temporal, &warned);

    Field a = random_field(rng, g, t, 0.0, 5.0);
    Field b = a;
    for (std::size_t i = 0; i < b.size(); ++i) b.flat(i) += rng.uniform(0.0, 2.0);
    CHECK(stwsu(a, w, params) <= stwsu(b, w, params) + 1e-12);

    const Field c = random_field(rng, g, t, 0.0, 5.0);
    const double lambda = rng.uniform(0.05, 0.95);
    Field mix(g, t);
    for (std::size_t i = 0; i < mix.size(); ++i)
      mix.flat(i) = lambda * a.flat(i) + (1.0 - lambda) * c.flat(i);
    CHECK(stwsu(mix, w, params) >=
          lambda * stwsu(a, w, params) + (1.0 - lambda) * stwsu(c, w, params) - 1e-9);
  }
}

TEST_CASE("beta calibration") {
  // ratio 2.35 at zeta 3 gives the paper's working exponent (~0.2)
  const BetaCalibration cal = calibrate_beta(2.35, 1.0, 3.0);
  CHECK_FALSE(cal.degenerate);
  CHECK(cal.beta == doctest::Approx(0.2223).epsilon(1e-3));

  const BetaCalibration uniform = calibrate_beta(1.0, 1.0, 2.0);
  CHECK(uniform.degenerate);
  CHECK(uniform.beta == doctest::Approx(1.0));

  const BetaCalibration exact = calibrate_beta(4.0, 1.0, 16.0);
  CHECK_FALSE(exact.degenerate);
  CHECK(exact.beta == doctest::Approx(0.5));

  CHECK_THROWS_AS(calibrate_beta(4.0, 1.0, 3.0), CalibrationError);
  CHECK_THROWS_AS(calibrate_beta(0.0, 0.0, 3.0), Error);
}

TEST_CASE("beta calibration round-trips through the relaxed optimum") {
  // with beta from the calibration, the optimal coverage ratio between the
  // extreme-weight grids equals zeta
  const double zeta = 3.0;
  const std::vector<double> w{2.35 / 3.35, 1.0 / 3.35};
  const BetaCalibration cal = calibrate_beta(w[0], w[1], zeta);
  const std::vector<double> n =
      test::maximize_budgeted_utility(w, cal.beta, 10.0, 400000, 1e-15);
  CHECK(n[0] / n[1] == doctest::Approx(zeta).epsilon(1e-6));
}

TEST_CASE("target distribution") {
  const UtilityParams p05{0.5, 0.0};
  const Field td_uniform = target_distribution(SensingWeights::uniform(3, 2), p05);
  for (std::size_t i = 0; i < td_uniform.size(); ++i)
    CHECK(td_uniform.flat(i) == doctest::Approx(1.0 / 6.0));

  const SensingWeights w23{{2.0 / 3.0, 1.0 / 3.0}, {1.0}};
  const Field td1 = target_distribution(w23, p05);
  CHECK(td1(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(td1(1, 0) == doctest::Approx(1.0 / 3.0));

  // beta 0.2 -> exponent 1/4; (0.8/0.2)^(1/4) = sqrt(2), so the target is
  // (2-sqrt(2), sqrt(2)-1)
  const SensingWeights w82{{0.8, 0.2}, {1.0}};
  const Field td2 = target_distribution(w82, {0.2, 0.0});
  CHECK(td2(0, 0) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-9));
  CHECK(td2(1, 0) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-9));

  // zero-weight grids receive no target mass
  SensingWeights wz{{0.5, 0.5, 0.0}, {1.0}};
  const Field tdz = target_distribution(wz, p05);
  CHECK(tdz(2, 0) == 0.0);

  // scaling all weights leaves the target unchanged
  Field jw = w82.joint();
  Field scaled = jw;
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled.flat(i) *= 7.5;
  const Field a = target_distribution(jw, {0.2, 0.0});
  const Field b = target_distribution(scaled, {0.2, 0.0});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.flat(i) == doctest::Approx(b.flat(i)));
}

TEST_CASE("actual distribution") {
  const UtilityParams p{0.5, 0.0};
  const Field ad_same = actual_distribution(make_field(2, 2, {3, 3, 3, 3}), p);
  for (std::size_t i = 0; i < ad_same.size(); ++i) CHECK(ad_same.flat(i) == doctest::Approx(0.25));

  const Field ad10 = actual_distribution(make_field(2, 1, {1.0, 0.0}), p);
  CHECK(ad10(0, 0) == doctest::Approx(1.0));
  CHECK(ad10(1, 0) == 0.0);

  const Field ad41 = actual_distribution(make_field(2, 1, {4.0, 1.0}), p);
  CHECK(ad41(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(ad41(1, 0) == doctest::Approx(1.0 / 3.0));

  CHECK_THROWS_AS(actual_distribution(make_field(2, 1, {0.0, 0.0}), p), Error);
}

TEST_CASE("kl divergence") {
  const Field p = make_field(2, 1, {0.5, 0.5});
  CHECK(kl_divergence(p, p) == 0.0);

  CHECK(kl_divergence(make_field(2, 1, {1.0, 0.0}), p) == doctest::Approx(std::log(2.0)));

  CHECK(kl_divergence(make_field(2, 1, {0.75, 0.25}), p) ==
        doctest::Approx(0.130812036).epsilon(1e-7));

  // mass where the target has none
  CHECK(std::isinf(kl_divergence(make_field(2, 1, {0.5, 0.5}), make_field(2, 1, {1.0, 0.0}))));

  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    Field a = random_field(rng, 4, 2, 0.01, 1.0);
    Field b = random_field(rng, 4, 2, 0.01, 1.0);
    double sa = a.sum(), sb = b.sum();
    for (std::size_t i = 0; i < a.size(); ++i) {
      a.flat(i) /= sa;
      b.flat(i) /= sb;
    }
    CHECK(kl_divergence(a, b) >= 0.0);
  }
}

TEST_CASE("per-grid twsu and tag") {
  const UtilityParams p{0.5, 0.0};

  // field whose actual distribution equals the target -> zero gap everywhere
  {
    const SensingWeights w{{0.64, 0.36}, {1.0}};
    // N proportional to w^(1/(1-beta)) = w^2 makes AD == TD at beta = 1/2
    const Field n = make_field(2, 1, {0.64 * 0.64, 0.36 * 0.36});
    const auto gaps = twsu_and_tag(n, w, p);
    for (const GridGap& g : gaps) {
      CHECK(g.applicable);
      CHECK(g.tag_percent == doctest::Approx(0.0).epsilon(1e-9));
    }
  }

  {
    const SensingWeights w{{1.0}, {1.0}};
    const auto gaps = twsu_and_tag(make_field(1, 1, {1.0}), w, p);
    CHECK(gaps[0].twsu == doctest::Approx(1.0));
  }

  {
    const SensingWeights w{{1.0}, {0.5, 0.5}};
    const auto gaps = twsu_and_tag(make_field(1, 2, {4.0, 1.0}), w, p);
    CHECK(gaps[0].twsu == doctest::Approx(1.5));
  }

  // grids with zero weight have no defined target share
  {
    const SensingWeights w{{0.7, 0.3, 0.0}, {1.0}};
    const auto gaps = twsu_and_tag(make_field(3, 1, {1.0, 1.0, 1.0}), w, {0.2, 0.0});
    CHECK(gaps[2].applicable == false);
    CHECK(gaps[2].cells_excluded == 1);
    CHECK(gaps[0].applicable);
  }
}

TEST_CASE("prescribed target distribution conversion") {
  const Field uniform = make_field(2, 1, {0.5, 0.5});
  const Field w_uniform = ptd_to_weights(uniform, {0.3, 0.0});
  CHECK(w_uniform(0, 0) == doctest::Approx(0.5));

  const Field ptd = make_field(2, 1, {0.64, 0.36});
  const Field w = ptd_to_weights(ptd, {0.5, 0.0});
  CHECK(w(0, 0) == doctest::Approx(4.0 / 7.0));
  CHECK(w(1, 0) == doctest::Approx(3.0 / 7.0));

  // beta -> 0 leaves the distribution unchanged
  const Field w0 = ptd_to_weights(ptd, {1e-12, 0.0});
  CHECK(w0(0, 0) == doctest::Approx(0.64).epsilon(1e-6));
}

TEST_CASE("ptd round-trip through the relaxed optimum") {
  Rng rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const int cells = 3 + rng.below_int(4);
    std::vector<double> ptd(static_cast<std::size_t>(cells));
    double sum = 0.0;
    for (double& v : ptd) {
      v = rng.uniform(0.2, 1.0);
      sum += v;
    }
    for (double& v : ptd) v /= sum;

    const double beta = rng.uniform(0.15, 0.6);
    Field ptd_field(cells, 1);
    for (int i = 0; i < cells; ++i) ptd_field(i, 0) = ptd[static_cast<std::size_t>(i)];
    const Field w = ptd_to_weights(ptd_field, {beta, 0.0});

    const std::vector<double> n =
        test::maximize_budgeted_utility(w.data(), beta, 5.0, 400000, 1e-15);
    const double scale = n[0] / ptd[0];
    for (int i = 1; i < cells; ++i)
      CHECK(n[static_cast<std::size_t>(i)] / ptd[static_cast<std::size_t>(i)] ==
            doctest::Approx(scale).epsilon(1e-6));
  }
}

TEST_CASE("relaxed optimum matches the closed-form proportionality") {
  Rng rng(11);
  const double beta = 0.3;
  std::vector<double> w(6);
  for (double& v : w) v = rng.uniform(0.05, 1.0);
  const std::vector<double> n = test::maximize_budgeted_utility(w, beta, 30.0, 400000, 1e-15);
  const double expo = 1.0 / (1.0 - beta);
  const double ref = n[0] / std::pow(w[0], expo);
  for (std::size_t i = 1; i < w.size(); ++i)
    CHECK(n[i] / std::pow(w[i], expo) == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("spatial coverage indicators") {
  const std::vector<double> w{0.25, 0.25, 0.25, 0.25};

  // all grids on bus routes
  CHECK(spatial_coverage_indicators(w, {1, 1, 1, 1}, {1, 1, 1, 1}).bus == doctest::Approx(1.0));

  // no bus routes: W(B)=0 and the union equals W(T)
  {
    const CoverageIndicators sci = spatial_coverage_indicators(w, {9, 7, 2, 1}, {0, 0, 0, 0}, 0.5);
    CHECK(sci.bus == 0.0);
    CHECK(sci.taxi_bus == doctest::Approx(sci.taxi));
  }

  // rank-and-sum: top half of (9,7,2,1) is the first two grids
  {
    const CoverageIndicators sci = spatial_coverage_indicators(w, {9, 7, 2, 1}, {0, 0, 0, 0}, 0.5);
    CHECK(sci.taxi == doctest::Approx(0.5));
    CHECK(sci.all == 1.0);
  }

  // zero-coverage grids never count as taxi-covered
  {
    const CoverageIndicators sci = spatial_coverage_indicators(w, {1, 0, 0, 0}, {0, 0, 0, 0}, 0.75);
    CHECK(sci.taxi == doctest::Approx(0.25));
  }
}
