#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>

#include "mir/error.hpp"
#include "mir/modal_interval.hpp"
#include "mir/random.hpp"
#include "oracles.hpp"

using namespace mir;

TEST_CASE("shortest interval on equal weights") {
  const std::vector<double> v{1, 2, 3, 4, 10, 11};
  const WeightedECDF e = make_weighted_ecdf(v, std::vector<double>(6, 1.0));
  const ModalInterval mi = shortest_interval(e, 0.5);
  CHECK(mi.low == 1.0);
  CHECK(mi.up == 3.0);
  CHECK(mi.mass == doctest::Approx(0.5));
}

TEST_CASE("shortest interval ties go left") {
  const std::vector<double> v{0, 1, 5, 6};
  const WeightedECDF e = make_weighted_ecdf(v, std::vector<double>(4, 1.0));
  const ModalInterval mi = shortest_interval(e, 0.5);
  CHECK(mi.low == 0.0);
  CHECK(mi.up == 1.0);
}

TEST_CASE("shortest interval with a heavy atom") {
  const std::vector<double> v{0, 1, 2, 3};
  const std::vector<double> w{0.1, 0.6, 0.1, 0.2};
  const ModalInterval mi = shortest_interval(make_weighted_ecdf(v, w), 0.5);
  CHECK(mi.low == 1.0);
  CHECK(mi.up == 1.0);
  CHECK(mi.width() == 0.0);
}

TEST_CASE("two-pointer scan agrees with brute force") {
  Rng rng = make_rng(2024);
  std::uniform_int_distribution<int> size(1, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = size(rng);
    std::vector<double> v(static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      // Coarse values make ties and equal-width candidates common.
      v[static_cast<std::size_t>(i)] = std::floor(u(rng) * 20.0);
      w[static_cast<std::size_t>(i)] = trial % 3 == 0 ? 1.0 : u(rng);
    }
    const double alpha = trial % 2 == 0 ? 0.5 : u(rng) * 0.98 + 0.01;
    const WeightedECDF e = make_weighted_ecdf(v, w);
    const ModalInterval mi = shortest_interval(e, alpha);
    const oracle::Interval ref = oracle::brute_force_shortest(e, alpha);
    REQUIRE(mi.low == ref.low);
    REQUIRE(mi.up == ref.up);
  }
}

TEST_CASE("quantile levels bracket the interval mass") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6};
  const WeightedECDF e = make_weighted_ecdf(v, std::vector<double>(6, 1.0));
  const ModalInterval mi = shortest_interval(e, 0.5);
  const QuantileLevels q = mi_quantile_levels(e, mi);
  CHECK(q.low == doctest::Approx(0.0 + 1.0 / 12.0));  // clamped by half a point weight
  CHECK(q.up == doctest::Approx(0.5));
  const ModalInterval inner{2.0, 4.0, 0.5, 0.5};
  const QuantileLevels q2 = mi_quantile_levels(e, inner);
  CHECK(q2.low == doctest::Approx(1.0 / 6.0));
  CHECK(q2.up - q2.low == doctest::Approx(0.5));
  CHECK_THROWS_AS(mi_quantile_levels(e, ModalInterval{2.5, 4.0, 0.5, 0.5}), InvalidArgument);
}

TEST_CASE("levels stay strictly inside (0, 1) with negligible tail weights") {
  const std::vector<double> v{0, 1, 2};
  const std::vector<double> w{1e-30, 1.0, 1e-30};
  const WeightedECDF e = make_weighted_ecdf(v, w);
  const QuantileLevels q = mi_quantile_levels(e, shortest_interval(e, 0.5));
  CHECK(q.low > 0.0);
  CHECK(q.up < 1.0);
}

TEST_CASE("step-1 subsample") {
  const auto all = step1_subsample(200, 1000, 5);
  CHECK(all.size() == 200);
  CHECK(all.front() == 0);
  CHECK(all.back() == 199);
  const auto a = step1_subsample(2000, 1000, 9);
  const auto b = step1_subsample(2000, 1000, 9);
  CHECK(a == b);
  CHECK(a.size() == 1000);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(step1_subsample(2000, 1000, 10) != a);
}

TEST_CASE("levels for all rows when subsampling") {
  Rng rng = make_rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  Dataset d;
  for (int i = 0; i < 300; ++i) {
    d.x.push_back(u(rng));
    d.y.push_back(z(rng));
  }
  const QuantileLevelSet s = estimate_levels_all(d, 0.5, Bandwidth(0.1), 100, 3);
  CHECK(s.size() == 300);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s.p_low[i] > 0.0);
    CHECK(s.p_up[i] < 1.0);
    CHECK(s.p_up[i] - s.p_low[i] >= 0.5 - 1e-9);
  }
  const QuantileLevelSet again = estimate_levels_all(d, 0.5, Bandwidth(0.1), 100, 3);
  CHECK(again.p_low == s.p_low);
  CHECK_THROWS_AS(estimate_levels_all(d, 0.5, Bandwidth(0.1), 10, 3), InvalidArgument);
}

TEST_CASE("normal modal interval has the closed form") {
  const boost::math::normal n01;
  for (double alpha : {0.3, 0.5, 0.9}) {
    const ModalInterval mi = true_mi_normal(2.0, 1.5, alpha);
    const double z = boost::math::quantile(n01, 0.5 + alpha / 2.0);
    CHECK(mi.low == doctest::Approx(2.0 - 1.5 * z).epsilon(1e-12));
    CHECK(mi.up == doctest::Approx(2.0 + 1.5 * z).epsilon(1e-12));
  }
}

TEST_CASE("lognormal modal interval holds alpha mass and beats equal tails") {
  for (double sigma : {0.5, 1.0, 2.0}) {
    const boost::math::lognormal ln(0.3, sigma);
    const ModalInterval mi = true_mi_lognormal(0.3, sigma, 0.5);
    CHECK(boost::math::cdf(ln, mi.up) - boost::math::cdf(ln, mi.low) == doctest::Approx(0.5).epsilon(1e-9));
    // At the optimum the density is equal at both ends.
    CHECK(boost::math::pdf(ln, mi.low) == doctest::Approx(boost::math::pdf(ln, mi.up)).epsilon(1e-5));
    CHECK(mi.width() < equal_tailed_lognormal(0.3, sigma, 0.5).width());
  }
}

TEST_CASE("kernel intervals at query points") {
  Dataset d;
  for (int i = 0; i < 100; ++i) {
    d.x.push_back(i / 100.0);
    d.y.push_back(i % 10);
  }
  const auto mis = kde_intervals(d, Bandwidth(0.2), 0.5, std::vector<double>{0.1, 0.5});
  REQUIRE(mis.size() == 2);
  for (const ModalInterval& mi : mis) {
    CHECK(mi.mass >= 0.5 - 1e-12);
    CHECK(mi.low <= mi.up);
  }
}
