#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mir/kde.hpp"
#include "mir/modal_interval.hpp"
#include "mir/solver.hpp"
#include "mir/spline.hpp"

namespace mir {

// Everything needed to go from (x, y) to a fitted band.
struct FitConfig {
  double alpha = 0.5;
  double lambda = 1e-2;
  double gamma = 1.0;
  int iterations = 1000;
  double tolerance = 0.0;
  std::size_t step1_cap = kDefaultStep1Cap;
  std::uint64_t seed = 0;
  double weight_exponent = kDefaultWeightExponent;

  // Basis: explicit knots win; otherwise `segments` uniform pieces over
  // `domain`, or over [min x, max x] when no domain is given.
  std::vector<double> knots;
  int segments = 20;
  int degree = 3;
  int smoothness = 2;
  std::optional<std::pair<double, double>> domain;

  // Skips bandwidth selection when set.
  std::optional<double> bandwidth;

  // Throws InvalidArgument naming the first offending field.
  void validate() const;
};

SplineBasis resolve_basis(const FitConfig& config, const Dataset& data);

// Step 1: bandwidth, per-observation quantile levels and density weights.
struct LevelStep {
  Bandwidth bandwidth{1.0};
  BandwidthMethod method = BandwidthMethod::kSheatherJones;
  std::vector<std::size_t> subsample;
  QuantileLevelSet levels;
  std::vector<double> weights;
  double seconds = 0.0;
};

LevelStep run_level_step(const Dataset& data, const FitConfig& config);

struct FitReport {
  LevelStep step1;
  AdmmResult admm;
  double step2_seconds = 0.0;

  const FittedBand& band() const noexcept { return admm.band; }
};

// Step 2 only, reusing a previous Step 1 (e.g. across a lambda grid).
FitReport fit_band(const Dataset& data, const LevelStep& step1, const SplineBasis& basis,
                   const FitConfig& config);

FitReport fit_mir(const Dataset& data, const FitConfig& config);

}  // namespace mir
