#include "mir/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "mir/error.hpp"

namespace mir {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2*pi)

// Pairs with squared standardized distance beyond this contribute nothing
// measurable to the SJ functionals.
constexpr double kMaxSquaredDelta = 1000.0;

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sd_of(std::span<const double> x) {
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

// Hyndman-Fan type 7 quantile of sorted data.
double sorted_quantile(const std::vector<double>& s, double p) {
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

// Estimates of the density functionals psi_4 and psi_6 used by the SJ rule.
// Diagonal terms are included and the sum is normalized by n(n-1).
double psi4(const std::vector<double>& sorted, double h) {
  const std::size_t n = sorted.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (sorted[j] - sorted[i]) / h;
      const double d2 = d * d;
      if (d2 >= kMaxSquaredDelta) break;
      sum += std::exp(-0.5 * d2) * (d2 * d2 - 6.0 * d2 + 3.0);
    }
  }
  sum = 2.0 * sum + 3.0 * static_cast<double>(n);
  const double nn = static_cast<double>(n);
  return sum * kInvSqrt2Pi / (nn * (nn - 1.0) * std::pow(h, 5));
}

double psi6(const std::vector<double>& sorted, double h) {
  const std::size_t n = sorted.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (sorted[j] - sorted[i]) / h;
      const double d2 = d * d;
      if (d2 >= kMaxSquaredDelta) break;
      sum += std::exp(-0.5 * d2) * (d2 * d2 * d2 - 15.0 * d2 * d2 + 45.0 * d2 - 15.0);
    }
  }
  sum = 2.0 * sum - 15.0 * static_cast<double>(n);
  const double nn = static_cast<double>(n);
  return sum * kInvSqrt2Pi / (nn * (nn - 1.0) * std::pow(h, 7));
}

void check_bandwidth_input(std::span<const double> x) {
  if (x.size() < 10) {
    throw InvalidArgument("x", "bandwidth selection needs at least 10 points, got " +
                                   std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidArgument("x", "non-finite value");
  }
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  if (*mn == *mx) throw InvalidArgument("x", "degenerate sample");
}

}  // namespace

void Dataset::validate() const {
  if (x.size() != y.size()) {
    throw InvalidArgument("data", "x and y lengths differ (" + std::to_string(x.size()) + " vs " +
                                      std::to_string(y.size()) + ")");
  }
  if (x.empty()) throw InvalidArgument("data", "empty dataset");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InvalidArgument("data", "non-finite value at row " + std::to_string(i));
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.x.reserve(rows.size());
  out.y.reserve(rows.size());
  for (std::size_t r : rows) {
    out.x.push_back(x.at(r));
    out.y.push_back(y.at(r));
  }
  return out;
}

Bandwidth::Bandwidth(double h) : h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidArgument("bandwidth", "must be positive and finite, got " + std::to_string(h));
  }
}

double gaussian_kernel(double u) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

Bandwidth normal_reference_bandwidth(std::span<const double> x) {
  check_bandwidth_input(x);
  return Bandwidth(1.06 * sd_of(x) * std::pow(static_cast<double>(x.size()), -0.2));
}

BandwidthChoice select_bandwidth_detailed(std::span<const double> x) {
  check_bandwidth_input(x);
  const Bandwidth fallback = normal_reference_bandwidth(x);

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double nn = static_cast<double>(sorted.size());

  const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  double scale = sd_of(sorted);
  if (iqr > 0.0) scale = std::min(scale, iqr / 1.349);

  const double a = 1.24 * scale * std::pow(nn, -1.0 / 7.0);
  const double b = 1.23 * scale * std::pow(nn, -1.0 / 9.0);
  const double c1 = 1.0 / (2.0 * std::sqrt(std::numbers::pi) * nn);

  const double td = -psi6(sorted, b);
  const double alpha2 = 1.357 * std::pow(psi4(sorted, a) / td, 1.0 / 7.0);
  if (!std::isfinite(alpha2) || alpha2 <= 0.0) {
    return {fallback, BandwidthMethod::kNormalReference};
  }

  auto equation = [&](double h) {
    const double sd = psi4(sorted, alpha2 * std::pow(h, 5.0 / 7.0));
    return std::pow(c1 / sd, 0.2) - h;
  };

  const double hmax = 1.144 * scale * std::pow(nn, -0.2);
  double lower = 0.1 * hmax;
  double upper = hmax;
  double f_lower = equation(lower);
  double f_upper = equation(upper);
  for (int attempt = 1; f_lower * f_upper > 0.0; ++attempt) {
    if (attempt > 99 || !std::isfinite(f_lower) || !std::isfinite(f_upper)) {
      return {fallback, BandwidthMethod::kNormalReference};
    }
    if (attempt % 2 == 1) {
      upper *= 1.2;
      f_upper = equation(upper);
    } else {
      lower /= 1.2;
      f_lower = equation(lower);
    }
  }
  if (f_lower == 0.0) return {Bandwidth(lower), BandwidthMethod::kSheatherJones};
  if (f_upper == 0.0) return {Bandwidth(upper), BandwidthMethod::kSheatherJones};

  try {
    std::uintmax_t max_iter = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(
        equation, lower, upper, f_lower, f_upper, boost::math::tools::eps_tolerance<double>(48),
        max_iter);
    const double h = 0.5 * (lo + hi);
    if (!(h > 0.0) || !std::isfinite(h)) return {fallback, BandwidthMethod::kNormalReference};
    return {Bandwidth(h), BandwidthMethod::kSheatherJones};
  } catch (const std::exception&) {
    return {fallback, BandwidthMethod::kNormalReference};
  }
}

Bandwidth select_bandwidth(std::span<const double> x) { return select_bandwidth_detailed(x).bandwidth; }

double WeightedECDF::cdf(double y) const {
  const auto it = std::upper_bound(values.begin(), values.end(), y);
  if (it == values.begin()) return 0.0;
  return cum[static_cast<std::size_t>(it - values.begin()) - 1];
}

double WeightedECDF::quantile(double p) const {
  const auto it = std::lower_bound(cum.begin(), cum.end(), p);
  if (it == cum.end()) return values.back();
  return values[static_cast<std::size_t>(it - cum.begin())];
}

double WeightedECDF::min_point_weight() const {
  return *std::min_element(point_weight.begin(), point_weight.end());
}

std::size_t WeightedECDF::find(double value) const {
  const auto it = std::lower_bound(values.begin(), values.end(), value);
  if (it == values.end() || *it != value) return values.size();
  return static_cast<std::size_t>(it - values.begin());
}

namespace {

// Accumulates (value, weight) pairs already sorted by value.
WeightedECDF accumulate_sorted(std::span<const double> values, std::span<const double> weights,
                               double total) {
  WeightedECDF out;
  double running = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    running += weights[i];
    if (!out.values.empty() && out.values.back() == values[i]) {
      out.point_weight.back() += weights[i] / total;
      out.cum.back() = running / total;
    } else {
      out.values.push_back(values[i]);
      out.point_weight.push_back(weights[i] / total);
      out.cum.push_back(running / total);
    }
  }
  if (!out.cum.empty()) out.cum.back() = 1.0;
  return out;
}

}  // namespace

WeightedECDF make_weighted_ecdf(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) {
    throw InvalidArgument("weights", "length differs from values");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> v(values.size());
  std::vector<double> w(values.size());
  double total = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    v[k] = values[order[k]];
    w[k] = weights[order[k]];
    if (!(w[k] >= 0.0) || !std::isfinite(w[k])) {
      throw InvalidArgument("weights", "must be finite and non-negative");
    }
    total += w[k];
  }
  if (!(total > 0.0)) throw NumericalError("all weights are zero");
  return accumulate_sorted(v, w, total);
}

ConditionalCdfEstimator::ConditionalCdfEstimator(const Dataset& data, Bandwidth h) : h_(h.value()) {
  data.validate();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.y[a] < data.y[b] || (data.y[a] == data.y[b] && data.x[a] < data.x[b]);
  });
  x_.reserve(order.size());
  y_.reserve(order.size());
  for (std::size_t r : order) {
    x_.push_back(data.x[r]);
    y_.push_back(data.y[r]);
  }
}

WeightedECDF ConditionalCdfEstimator::at(double x0) const {
  std::vector<double> w(x_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    double k = gaussian_kernel((x_[i] - x0) / h_);
    if (k < kKernelUnderflow) k = 0.0;
    w[i] = k;
    total += k;
  }
  if (!(total > 0.0)) {
    throw NumericalError("kernel weights underflow at x0=" + std::to_string(x0) +
                         " (query far outside the data)");
  }
  return accumulate_sorted(y_, w, total);
}

WeightedECDF conditional_cdf(double x0, const Dataset& data, Bandwidth h) {
  return ConditionalCdfEstimator(data, h).at(x0);
}

std::vector<double> density_weights(std::span<const double> query, std::span<const double> reference,
                                    Bandwidth h, double exponent) {
  if (reference.empty()) throw InvalidArgument("reference", "empty sample");
  if (!std::isfinite(exponent) || exponent < 0.0) {
    throw InvalidArgument("weight_exponent", "must be finite and non-negative");
  }
  const double hv = h.value();
  const double norm = 1.0 / (static_cast<double>(reference.size()) * hv);
  std::vector<double> out(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) {
    double s = 0.0;
    for (double xl : reference) s += gaussian_kernel((query[i] - xl) / hv);
    out[i] = std::pow(s * norm, exponent);
  }
  return out;
}

std::vector<double> density_weights(const Dataset& data, Bandwidth h, double exponent) {
  data.validate();
  return density_weights(data.x, data.x, h, exponent);
}

}  // namespace mir
