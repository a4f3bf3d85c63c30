#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mir/kde.hpp"
#include "mir/model_select.hpp"

namespace mir {

// Distribution 1: Y | x ~ Normal(mu1(x), sigma1(x)^2).
// Distribution 2: Y | x ~ LogNormal(mu2(x), sigma2(x)^2).  X ~ U(0, 10) for both.
enum class Distribution { kNormal = 1, kLogNormal = 2 };

Distribution distribution_from_id(int id);

double dist1_mean(double x);
double dist1_sd(double x);
double dist2_mu(double x);
double dist2_sigma(double x);

Dataset gen_dist1(std::size_t n, std::uint64_t seed);
Dataset gen_dist2(std::size_t n, std::uint64_t seed);
Dataset generate(Distribution dist, std::size_t n, std::uint64_t seed);

// x_l = 0.1 l, l = 0..100.
std::vector<double> default_truth_grid();

// True conditional MI at each grid point.
std::vector<TruthPoint> true_band(Distribution dist, double alpha, std::span<const double> grid);

// Stable 64-bit seed for a (base, a, b) triple.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

inline constexpr const char* kMethodMir = "kde_mir";
inline constexpr const char* kMethodKde = "kde";

struct SimConfig {
  Distribution dist = Distribution::kNormal;
  std::vector<std::size_t> sizes{1000};
  int replications = 50;
  std::vector<double> lambdas{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  double alpha = 0.5;
  std::uint64_t seed = 0;
  std::size_t step1_cap = 1000;
  std::size_t test_size = 1000;
  std::vector<double> grid = default_truth_grid();
  int iterations = 1000;
  bool include_kde = true;
  // Wall-clock columns are NaN unless enabled, which keeps outputs reproducible.
  bool timing = false;
  int threads = 0;

  void validate() const;
};

// One (method, n, lambda, replication) measurement. lambda is NaN for the
// kernel-only comparator.
struct RunRecord {
  std::string method;
  int dist = 1;
  std::size_t n = 0;
  double lambda = 0.0;
  int rep = 0;
  double rmse = 0.0;
  double cp = 0.0;   // percent
  double aiw = 0.0;
  double step1_s = 0.0;
  double step2_s = 0.0;
};

// Mean and sample SD over replications.
struct ExperimentRow {
  std::string method;
  int dist = 1;
  std::size_t n = 0;
  double lambda = 0.0;
  int reps = 0;
  double rmse_mean = 0.0;
  double rmse_sd = 0.0;
  double cp_mean = 0.0;
  double cp_sd = 0.0;
  double aiw_mean = 0.0;
  double aiw_sd = 0.0;
  double step1_mean_s = 0.0;
  double step2_mean_s = 0.0;
};

struct ReplicationFailure {
  std::size_t n = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<ExperimentRow> rows;
  std::vector<ReplicationFailure> failures;
};

// Monte-Carlo study: per replication, a fresh training set, Step 1 once, Step 2
// per lambda, RMSE on the truth grid and CP/AIW on a fresh test set; plus the
// kernel-only comparator. Failed replications are skipped and listed; 10% or
// more failures per sample size throws NumericalError.
ExperimentResult run_experiment(const SimConfig& config);

std::vector<ExperimentRow> aggregate(std::span<const RunRecord> runs);

}  // namespace mir
