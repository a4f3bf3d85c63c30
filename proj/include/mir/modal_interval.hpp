#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mir/kde.hpp"

namespace mir {

// Slack allowed when comparing an interval's mass against the target
// coverage, so that sums of equal weights like 3 * (1/6) still count as 0.5.
inline constexpr double kMassTolerance = 1e-12;

// Quantile levels are kept at least this far inside (0, 1).
inline constexpr double kLevelFloor = 1e-9;

// Shortest interval holding at least `alpha` of a distribution.
struct ModalInterval {
  double low = 0.0;
  double up = 0.0;
  double alpha = 0.0;  // requested coverage
  double mass = 0.0;   // attained closed-interval mass (1 for analytic intervals' target)

  double width() const noexcept { return up - low; }
};

struct QuantileLevels {
  double low = 0.0;
  double up = 0.0;
};

// Per-observation quantile levels of the conditional MI endpoints.
struct QuantileLevelSet {
  std::vector<double> p_low;
  std::vector<double> p_up;

  std::size_t size() const noexcept { return p_up.size(); }
};

// Shortest [low, up] over observed values whose closed-interval mass is at
// least alpha. Ties in width go to the smallest low endpoint. O(n).
ModalInterval shortest_interval(const WeightedECDF& ecdf, double alpha);

// Converts an interval with observed endpoints into (p_low, p_up) such that
// p_up - p_low is the closed-interval mass. Both levels are kept at least
// max(half the smallest point weight, kLevelFloor) away from 0 and 1.
QuantileLevels mi_quantile_levels(const WeightedECDF& ecdf, const ModalInterval& mi);

// Rows used to build the conditional CDFs: all rows when n <= cap, otherwise
// a seeded uniform sample of `cap` rows (returned sorted).
std::vector<std::size_t> step1_subsample(std::size_t n, std::size_t cap, std::uint64_t seed);

inline constexpr std::size_t kDefaultStep1Cap = 1000;

// Quantile levels at every x_i. Conditional CDFs come from the capped
// subsample; levels are produced for all n rows.
QuantileLevelSet estimate_levels_all(const Dataset& data, double alpha, Bandwidth h,
                                     std::size_t cap = kDefaultStep1Cap, std::uint64_t seed = 0);

// Kernel-estimated conditional MI at arbitrary query points (no regression).
std::vector<ModalInterval> kde_intervals(const Dataset& reference, Bandwidth h, double alpha,
                                         std::span<const double> query);

// [mu - z sigma, mu + z sigma], z the (1 + alpha)/2 standard normal quantile.
ModalInterval true_mi_normal(double mu, double sigma, double alpha);

// Shortest alpha-interval of LogNormal(mu, sigma^2).
ModalInterval true_mi_lognormal(double mu, double sigma, double alpha);

// Equal-tailed alpha-interval of LogNormal(mu, sigma^2).
ModalInterval equal_tailed_lognormal(double mu, double sigma, double alpha);

}  // namespace mir
