#include "mir/model_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/random/uniform_int_distribution.hpp>

#include "mir/error.hpp"
#include "mir/parallel.hpp"
#include "mir/random.hpp"

namespace mir {

double mcwc_score(double nmmiw, double micp, double alpha, double eta) {
  if (micp >= alpha) return nmmiw;
  return nmmiw * std::exp(-eta * (micp - alpha));
}

BandMetrics interval_metrics(std::span<const double> lower, std::span<const double> upper,
                             std::span<const double> y, double alpha, double eta) {
  if (y.empty()) throw InvalidArgument("test", "no test points inside the band domain");
  if (lower.size() != y.size() || upper.size() != y.size()) {
    throw InvalidArgument("test", "bounds and responses differ in length");
  }
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  const double range = *ymax - *ymin;
  if (!(range > 0.0)) throw InvalidArgument("test", "zero response range");

  std::size_t inside = 0;
  double width = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (lower[i] <= y[i] && y[i] <= upper[i]) ++inside;
    width += upper[i] - lower[i];
  }
  BandMetrics m;
  m.evaluated = y.size();
  m.micp = static_cast<double>(inside) / static_cast<double>(y.size());
  m.cp = 100.0 * m.micp;
  m.aiw = width / static_cast<double>(y.size());
  m.nmmiw = m.aiw / range;
  m.mcwc = mcwc_score(m.nmmiw, m.micp, alpha, eta);
  return m;
}

BandMetrics band_metrics(const FittedBand& band, const Dataset& test, double alpha, double eta) {
  test.validate();
  std::vector<double> lo;
  std::vector<double> up;
  std::vector<double> ys;
  lo.reserve(test.size());
  up.reserve(test.size());
  ys.reserve(test.size());
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!band.basis.contains(test.x[i])) {
      ++excluded;
      continue;
    }
    lo.push_back(band.lower_at(test.x[i]));
    up.push_back(band.upper_at(test.x[i]));
    ys.push_back(test.y[i]);
  }
  BandMetrics m = interval_metrics(lo, up, ys, alpha, eta);
  m.excluded = excluded;
  return m;
}

double rmse_bounds(std::span<const TruthPoint> estimate, std::span<const TruthPoint> truth) {
  if (truth.empty()) throw InvalidArgument("truth", "empty grid");
  if (estimate.size() != truth.size()) throw InvalidArgument("truth", "grid sizes differ");
  double su = 0.0;
  double sl = 0.0;
  for (std::size_t l = 0; l < truth.size(); ++l) {
    su += (truth[l].up - estimate[l].up) * (truth[l].up - estimate[l].up);
    sl += (truth[l].low - estimate[l].low) * (truth[l].low - estimate[l].low);
  }
  const auto n = static_cast<double>(truth.size());
  return std::sqrt(su / n) + std::sqrt(sl / n);
}

double rmse_bounds(const FittedBand& band, std::span<const TruthPoint> truth) {
  std::vector<TruthPoint> est;
  est.reserve(truth.size());
  for (const TruthPoint& t : truth) est.push_back({t.x, band.lower_at(t.x), band.upper_at(t.x)});
  return rmse_bounds(est, truth);
}

std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("folds", "must be >= 2");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, 0xf01d);
  for (std::size_t k = n; k > 1; --k) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::swap(order[k - 1], order[pick(rng)]);
  }
  std::vector<int> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  return fold;
}

CvResult select_lambda_cv(const Dataset& data, const FitConfig& config, const CvOptions& options) {
  data.validate();
  config.validate();
  if (options.grid.empty()) throw InvalidArgument("lambda_grid", "empty grid");
  for (double l : options.grid) {
    if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("lambda_grid", "values must be positive");
  }
  if (options.folds < 2) throw InvalidArgument("folds", "must be >= 2");
  if (data.size() < static_cast<std::size_t>(options.folds) * 20) {
    throw InvalidArgument("data", "cross-validation needs at least 20 rows per fold");
  }

  const SplineBasis basis = resolve_basis(config, data);
  const std::vector<int> fold = fold_assignment(data.size(), options.folds, options.seed);
  const std::size_t nl = options.grid.size();
  const auto nv = static_cast<std::size_t>(options.folds);

  CvResult out;
  out.grid = options.grid;
  out.fold_mcwc.assign(nl, std::vector<double>(nv, std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::vector<std::string>> fold_errors(nv);

  parallel_for(
      nv,
      [&](std::size_t v) {
        std::vector<std::size_t> train_rows;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < data.size(); ++i) {
          (fold[i] == static_cast<int>(v) ? test_rows : train_rows).push_back(i);
        }
        const Dataset train = data.subset(train_rows);
        const Dataset test = data.subset(test_rows);
        FitConfig fc = config;
        fc.seed = config.seed + 1 + v;
        LevelStep step1;
        try {
          step1 = run_level_step(train, fc);
        } catch (const std::exception& e) {
          fold_errors[v].push_back("fold " + std::to_string(v) + ": step 1 failed: " + e.what());
          return;
        }
        for (std::size_t l = 0; l < nl; ++l) {
          fc.lambda = options.grid[l];
          try {
            const FitReport fit = fit_band(train, step1, basis, fc);
            out.fold_mcwc[l][v] = band_metrics(fit.band(), test, config.alpha, options.eta).mcwc;
          } catch (const std::exception& e) {
            fold_errors[v].push_back("fold " + std::to_string(v) + ", lambda " + std::to_string(options.grid[l]) +
                                     ": " + e.what());
          }
        }
      },
      options.threads);

  for (const auto& errs : fold_errors) out.warnings.insert(out.warnings.end(), errs.begin(), errs.end());

  out.mean_mcwc.assign(nl, std::numeric_limits<double>::quiet_NaN());
  bool found = false;
  for (std::size_t l = 0; l < nl; ++l) {
    double sum = 0.0;
    bool complete = true;
    for (std::size_t v = 0; v < nv; ++v) {
      if (std::isnan(out.fold_mcwc[l][v])) {
        complete = false;
        break;
      }
      sum += out.fold_mcwc[l][v];
    }
    if (!complete) {
      out.warnings.push_back("lambda " + std::to_string(options.grid[l]) + " excluded: at least one fold failed");
      continue;
    }
    out.mean_mcwc[l] = sum / static_cast<double>(nv);
    if (!found || out.mean_mcwc[l] < out.mean_mcwc[out.selected_index]) {
      out.selected_index = l;
      found = true;
    }
  }
  if (!found) throw NumericalError("cross-validation failed for every lambda");
  out.selected_lambda = options.grid[out.selected_index];
  return out;
}

}  // namespace mir
