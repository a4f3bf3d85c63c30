#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mir/kde.hpp"
#include "mir/pipeline.hpp"
#include "mir/solver.hpp"

namespace mir {

inline constexpr double kDefaultEta = 20.0;

// Coverage/width summary of a band on a test set.
struct BandMetrics {
  double micp = 0.0;   // fraction of test points inside the band
  double nmmiw = 0.0;  // mean width / (max y - min y)
  double mcwc = 0.0;
  double cp = 0.0;     // micp in percent
  double aiw = 0.0;    // mean width, unnormalized
  std::size_t evaluated = 0;
  std::size_t excluded = 0;  // test points outside the band's domain
};

// NMMIW with the exponential under-coverage penalty; equals nmmiw when micp >= alpha.
double mcwc_score(double nmmiw, double micp, double alpha, double eta = kDefaultEta);

BandMetrics band_metrics(const FittedBand& band, const Dataset& test, double alpha,
                         double eta = kDefaultEta);

// Same metrics from precomputed per-point bounds (e.g. a kernel-only band).
BandMetrics interval_metrics(std::span<const double> lower, std::span<const double> upper,
                             std::span<const double> y, double alpha, double eta = kDefaultEta);

struct TruthPoint {
  double x = 0.0;
  double low = 0.0;
  double up = 0.0;
};

// RMSE(upper) + RMSE(lower) of the band against true bounds on a grid.
double rmse_bounds(const FittedBand& band, std::span<const TruthPoint> truth);

// Same for an estimate already evaluated on the truth grid (same order).
double rmse_bounds(std::span<const TruthPoint> estimate, std::span<const TruthPoint> truth);

struct CvOptions {
  std::vector<double> grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  int folds = 5;
  double eta = kDefaultEta;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct CvResult {
  std::vector<double> grid;
  std::vector<double> mean_mcwc;                // NaN for excluded lambdas
  std::vector<std::vector<double>> fold_mcwc;   // [lambda][fold], NaN when the fit failed
  std::size_t selected_index = 0;
  double selected_lambda = 0.0;
  std::vector<std::string> warnings;
};

// Fold index (0..folds-1) per row from a seeded shuffle.
std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed);

// V-fold choice of lambda by mean held-out mCWC. Step 1 is rerun on each
// training split. `config` supplies everything except lambda; its basis is
// resolved once on the full data so every fold shares the same knots.
CvResult select_lambda_cv(const Dataset& data, const FitConfig& config, const CvOptions& options);

}  // namespace mir
