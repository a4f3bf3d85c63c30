#include "mir/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "mir/error.hpp"

namespace mir {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void FitConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha", "must lie in (0, 1)");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda", "must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma", "must be positive");
  if (iterations < 1) throw InvalidArgument("iterations", "must be >= 1");
  if (!(tolerance >= 0.0)) throw InvalidArgument("tolerance", "must be >= 0");
  if (step1_cap < 50) throw InvalidArgument("cap", "must be >= 50");
  if (!(weight_exponent >= 0.0) || !std::isfinite(weight_exponent)) {
    throw InvalidArgument("weight_exponent", "must be finite and >= 0");
  }
  if (knots.empty() && segments < 2) throw InvalidArgument("knots", "need at least 2 segments");
  if (degree < 2) throw InvalidArgument("degree", "must be >= 2 for the roughness penalty");
  if (smoothness < 0 || smoothness > degree) {
    throw InvalidArgument("smoothness", "must satisfy 0 <= smoothness <= degree");
  }
  if (domain && !(domain->second > domain->first)) throw InvalidArgument("domain", "empty domain");
  if (bandwidth && !(*bandwidth > 0.0)) throw InvalidArgument("bandwidth", "must be positive");
}

SplineBasis resolve_basis(const FitConfig& config, const Dataset& data) {
  if (!config.knots.empty()) return SplineBasis(config.knots, config.degree, config.smoothness);
  double lo = 0.0;
  double hi = 0.0;
  if (config.domain) {
    std::tie(lo, hi) = *config.domain;
  } else {
    data.validate();
    const auto [mn, mx] = std::minmax_element(data.x.begin(), data.x.end());
    lo = *mn;
    hi = *mx;
    if (!(hi > lo)) throw InvalidArgument("x", "all covariate values are equal; give an explicit domain");
  }
  return SplineBasis::uniform(lo, hi, config.segments, config.degree, config.smoothness);
}

LevelStep run_level_step(const Dataset& data, const FitConfig& config) {
  config.validate();
  data.validate();
  const auto start = std::chrono::steady_clock::now();

  LevelStep out;
  out.subsample = step1_subsample(data.size(), config.step1_cap, config.seed);
  const Dataset sub = out.subsample.size() == data.size() ? data : data.subset(out.subsample);

  if (config.bandwidth) {
    out.bandwidth = Bandwidth(*config.bandwidth);
    out.method = BandwidthMethod::kSheatherJones;
  } else {
    const BandwidthChoice choice = select_bandwidth_detailed(sub.x);
    out.bandwidth = choice.bandwidth;
    out.method = choice.method;
  }
  out.levels = estimate_levels_all(data, config.alpha, out.bandwidth, config.step1_cap, config.seed);
  out.weights = density_weights(data.x, sub.x, out.bandwidth, config.weight_exponent);
  out.seconds = seconds_since(start);
  return out;
}

FitReport fit_band(const Dataset& data, const LevelStep& step1, const SplineBasis& basis,
                   const FitConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const MirProblem problem = assemble(data, step1.levels, step1.weights, basis, config.lambda, config.gamma);
  AdmmResult admm = admm_fit(problem, AdmmOptions{config.iterations, config.tolerance});
  FitReport out{step1, std::move(admm), seconds_since(start)};
  return out;
}

FitReport fit_mir(const Dataset& data, const FitConfig& config) {
  const SplineBasis basis = resolve_basis(config, data);
  const LevelStep step1 = run_level_step(data, config);
  return fit_band(data, step1, basis, config);
}

}  // namespace mir
