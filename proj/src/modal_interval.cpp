#include "mir/modal_interval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "mir/error.hpp"
#include "mir/random.hpp"

namespace mir {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha", "must lie in (0, 1), got " + std::to_string(alpha));
  }
}

double std_normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

}  // namespace

ModalInterval shortest_interval(const WeightedECDF& ecdf, double alpha) {
  check_alpha(alpha);
  if (ecdf.empty()) throw InvalidArgument("ecdf", "empty distribution");

  const std::size_t n = ecdf.size();
  const auto& v = ecdf.values;
  const auto& cum = ecdf.cum;
  const double target = alpha - kMassTolerance;

  std::size_t best_lo = 0;
  std::size_t best_hi = n - 1;
  double best_width = v[n - 1] - v[0];
  double best_mass = 1.0;

  // For each left end, the right end reaching the target never moves left.
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double before = i == 0 ? 0.0 : cum[i - 1];
    j = std::max(j, i);
    while (j < n && cum[j] - before < target) ++j;
    if (j == n) break;
    const double width = v[j] - v[i];
    if (width < best_width) {
      best_width = width;
      best_lo = i;
      best_hi = j;
      best_mass = cum[j] - before;
    }
  }
  if (best_lo == 0 && best_hi == n - 1) best_mass = 1.0;
  return {v[best_lo], v[best_hi], alpha, best_mass};
}

QuantileLevels mi_quantile_levels(const WeightedECDF& ecdf, const ModalInterval& mi) {
  const std::size_t lo = ecdf.find(mi.low);
  const std::size_t hi = ecdf.find(mi.up);
  if (lo == ecdf.size() || hi == ecdf.size()) {
    throw InvalidArgument("interval", "endpoint not found among the distribution's values");
  }
  const double clamp = std::max(0.5 * ecdf.min_point_weight(), kLevelFloor);
  double p_low = (lo == 0 ? 0.0 : ecdf.cum[lo - 1]);
  double p_up = ecdf.cum[hi];
  p_low = std::clamp(p_low, clamp, 1.0 - clamp);
  p_up = std::clamp(p_up, clamp, 1.0 - clamp);
  return {p_low, p_up};
}

std::vector<std::size_t> step1_subsample(std::size_t n, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (n <= cap) return rows;
  // Partial Fisher-Yates.
  Rng rng = make_rng(seed, 0x5ab5a3b1e);
  for (std::size_t k = 0; k < cap; ++k) {
    boost::random::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(rows[k], rows[pick(rng)]);
  }
  rows.resize(cap);
  std::sort(rows.begin(), rows.end());
  return rows;
}

QuantileLevelSet estimate_levels_all(const Dataset& data, double alpha, Bandwidth h, std::size_t cap,
                                     std::uint64_t seed) {
  check_alpha(alpha);
  if (cap < 50) throw InvalidArgument("cap", "must be at least 50, got " + std::to_string(cap));
  data.validate();

  const auto rows = step1_subsample(data.size(), cap, seed);
  const ConditionalCdfEstimator estimator(rows.size() == data.size() ? data : data.subset(rows), h);

  QuantileLevelSet out;
  out.p_low.resize(data.size());
  out.p_up.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const WeightedECDF ecdf = estimator.at(data.x[i]);
    const QuantileLevels lv = mi_quantile_levels(ecdf, shortest_interval(ecdf, alpha));
    out.p_low[i] = lv.low;
    out.p_up[i] = lv.up;
  }
  return out;
}

std::vector<ModalInterval> kde_intervals(const Dataset& reference, Bandwidth h, double alpha,
                                         std::span<const double> query) {
  check_alpha(alpha);
  const ConditionalCdfEstimator estimator(reference, h);
  std::vector<ModalInterval> out;
  out.reserve(query.size());
  for (double x0 : query) out.push_back(shortest_interval(estimator.at(x0), alpha));
  return out;
}

ModalInterval true_mi_normal(double mu, double sigma, double alpha) {
  check_alpha(alpha);
  if (!(sigma > 0.0)) throw InvalidArgument("sigma", "must be positive");
  const double z = std_normal_quantile(0.5 * (1.0 + alpha));
  return {mu - z * sigma, mu + z * sigma, alpha, alpha};
}

ModalInterval equal_tailed_lognormal(double mu, double sigma, double alpha) {
  check_alpha(alpha);
  if (!(sigma > 0.0)) throw InvalidArgument("sigma", "must be positive");
  const double z = std_normal_quantile(0.5 * (1.0 + alpha));
  return {std::exp(mu - z * sigma), std::exp(mu + z * sigma), alpha, alpha};
}

ModalInterval true_mi_lognormal(double mu, double sigma, double alpha) {
  check_alpha(alpha);
  if (!(sigma > 0.0)) throw InvalidArgument("sigma", "must be positive");

  auto quantile = [&](double p) { return std::exp(mu + sigma * std_normal_quantile(p)); };
  auto width = [&](double p) { return quantile(p + alpha) - quantile(p); };

  // Coarse grid to bracket the minimum, then golden-section refinement.
  constexpr int kGrid = 2000;
  const double span = 1.0 - alpha;
  auto grid_p = [&](int k) { return span * (static_cast<double>(k) + 0.5) / kGrid; };
  int best_k = 0;
  double best_w = width(grid_p(0));
  for (int k = 1; k < kGrid; ++k) {
    const double w = width(grid_p(k));
    if (w < best_w) {
      best_w = w;
      best_k = k;
    }
  }
  double a = best_k == 0 ? grid_p(0) * 1e-6 : grid_p(best_k - 1);
  double b = best_k == kGrid - 1 ? span - (span - grid_p(kGrid - 1)) * 1e-6 : grid_p(best_k + 1);

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = width(c);
  double fd = width(d);
  for (int it = 0; it < 200 && (b - a) > 1e-15; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = width(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = width(d);
    }
  }
  double p = 0.5 * (a + b);
  if (!(width(p) <= best_w)) p = grid_p(best_k);
  return {quantile(p), quantile(p + alpha), alpha, alpha};
}

}  // namespace mir
