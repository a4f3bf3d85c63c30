#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mir {

// Paired observations (x_i, y_i).
struct Dataset {
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const noexcept { return x.size(); }
  bool empty() const noexcept { return x.empty(); }

  // Throws InvalidArgument on length mismatch, empty input or non-finite values.
  void validate() const;

  Dataset subset(std::span<const std::size_t> rows) const;
};

// Kernel bandwidth in units of X.
class Bandwidth {
 public:
  explicit Bandwidth(double h);
  double value() const noexcept { return h_; }

 private:
  double h_;
};

enum class BandwidthMethod { kSheatherJones, kNormalReference };

struct BandwidthChoice {
  Bandwidth bandwidth;
  BandwidthMethod method;
};

inline constexpr double kDefaultWeightExponent = 0.2;

// Kernel weights below this are treated as exact zeros.
inline constexpr double kKernelUnderflow = 1e-300;

double gaussian_kernel(double u) noexcept;

// Sheather-Jones solve-the-equation plug-in bandwidth. Falls back to the
// normal reference rule when the root cannot be bracketed.
Bandwidth select_bandwidth(std::span<const double> x);
BandwidthChoice select_bandwidth_detailed(std::span<const double> x);

// 1.06 * sd * n^(-1/5).
Bandwidth normal_reference_bandwidth(std::span<const double> x);

// Step distribution over distinct sorted values. `cum[k]` is F at values[k],
// `point_weight[k]` is the probability mass sitting exactly at values[k].
struct WeightedECDF {
  std::vector<double> values;
  std::vector<double> cum;
  std::vector<double> point_weight;

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }

  // Right-continuous F(y).
  double cdf(double y) const;
  // Generalized inverse: smallest value with F >= p.
  double quantile(double p) const;
  double min_point_weight() const;
  // Index of an exact value, or size() when absent.
  std::size_t find(double value) const;
};

// Builds an ECDF from samples and non-negative weights (normalized here).
// Zero-weight samples are dropped; repeated values are merged.
WeightedECDF make_weighted_ecdf(std::span<const double> values, std::span<const double> weights);

// Nadaraya-Watson estimate of F(y | X = x0) with a Gaussian kernel.
WeightedECDF conditional_cdf(double x0, const Dataset& data, Bandwidth h);

// Evaluates conditional CDFs at many query points; sorts the responses once.
class ConditionalCdfEstimator {
 public:
  ConditionalCdfEstimator(const Dataset& data, Bandwidth h);

  WeightedECDF at(double x0) const;

 private:
  std::vector<double> x_;  // covariates, ordered by response
  std::vector<double> y_;  // responses, ascending
  double h_;
};

// w_i = fhat(x_i)^exponent, fhat the Gaussian KDE of X.
std::vector<double> density_weights(const Dataset& data, Bandwidth h,
                                    double exponent = kDefaultWeightExponent);

// Same, with the density estimated from `reference` and evaluated at `query`.
std::vector<double> density_weights(std::span<const double> query, std::span<const double> reference,
                                    Bandwidth h, double exponent = kDefaultWeightExponent);

}  // namespace mir
