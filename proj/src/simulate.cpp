#include "mir/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <tuple>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "mir/error.hpp"
#include "mir/modal_interval.hpp"
#include "mir/parallel.hpp"
#include "mir/pipeline.hpp"
#include "mir/random.hpp"

namespace mir {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class YDraw>
Dataset draw(std::size_t n, std::uint64_t seed, YDraw&& y_given_x) {
  Rng rng = make_rng(seed, 0xda7a);
  boost::random::uniform_real_distribution<double> ux(0.0, 10.0);
  boost::random::normal_distribution<double> z;
  Dataset d;
  d.x.resize(n);
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.x[i] = ux(rng);
    d.y[i] = y_given_x(d.x[i], z(rng));
  }
  return d;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

Distribution distribution_from_id(int id) {
  if (id == 1) return Distribution::kNormal;
  if (id == 2) return Distribution::kLogNormal;
  throw InvalidArgument("dist", "must be 1 or 2, got " + std::to_string(id));
}

double dist1_mean(double x) { return (3.0 - 0.2 * x) * std::sin(std::numbers::pi * x) + 5.0; }
double dist1_sd(double x) { return 2.0 - 0.15 * x; }
double dist2_mu(double x) { return 1.0 - std::sin(0.4 * std::numbers::pi * x); }
double dist2_sigma(double x) { return 0.04 * x * x - 0.4 * x + 1.2; }

Dataset gen_dist1(std::size_t n, std::uint64_t seed) {
  return draw(n, seed, [](double x, double z) { return dist1_mean(x) + dist1_sd(x) * z; });
}

Dataset gen_dist2(std::size_t n, std::uint64_t seed) {
  return draw(n, seed, [](double x, double z) { return std::exp(dist2_mu(x) + dist2_sigma(x) * z); });
}

Dataset generate(Distribution dist, std::size_t n, std::uint64_t seed) {
  return dist == Distribution::kNormal ? gen_dist1(n, seed) : gen_dist2(n, seed);
}

std::vector<double> default_truth_grid() {
  std::vector<double> g(101);
  for (int l = 0; l <= 100; ++l) g[static_cast<std::size_t>(l)] = 0.1 * l;
  return g;
}

std::vector<TruthPoint> true_band(Distribution dist, double alpha, std::span<const double> grid) {
  std::vector<TruthPoint> out;
  out.reserve(grid.size());
  for (double x : grid) {
    const ModalInterval mi = dist == Distribution::kNormal
                                 ? true_mi_normal(dist1_mean(x), dist1_sd(x), alpha)
                                 : true_mi_lognormal(dist2_mu(x), dist2_sigma(x), alpha);
    out.push_back({x, mi.low, mi.up});
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  Rng rng = make_rng(base, a, b);
  return rng();
}

void SimConfig::validate() const {
  if (sizes.empty()) throw InvalidArgument("n", "no sample sizes given");
  for (std::size_t n : sizes) {
    if (n < 50) throw InvalidArgument("n", "sample size must be >= 50");
  }
  if (replications < 1) throw InvalidArgument("reps", "must be >= 1");
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("lambda", "values must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha", "must lie in (0, 1)");
  if (step1_cap < 50) throw InvalidArgument("cap", "must be >= 50");
  if (test_size < 1) throw InvalidArgument("test_size", "must be >= 1");
  if (iterations < 1) throw InvalidArgument("iterations", "must be >= 1");
  for (double x : grid) {
    if (!(x >= 0.0 && x <= 10.0)) throw InvalidArgument("grid", "points must lie in [0, 10]");
  }
}

std::vector<ExperimentRow> aggregate(std::span<const RunRecord> runs) {
  using Key = std::tuple<std::string, int, std::size_t, double>;
  auto key_of = [](const RunRecord& r) {
    // NaN lambdas (kernel comparator) sort first under a sentinel.
    return Key{r.method, r.dist, r.n, std::isnan(r.lambda) ? -1.0 : r.lambda};
  };
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : runs) groups[key_of(r)].push_back(&r);

  std::vector<ExperimentRow> rows;
  for (const auto& [key, members] : groups) {
    std::vector<double> rmse, cp, aiw, s1, s2;
    for (const RunRecord* r : members) {
      rmse.push_back(r->rmse);
      cp.push_back(r->cp);
      aiw.push_back(r->aiw);
      s1.push_back(r->step1_s);
      s2.push_back(r->step2_s);
    }
    ExperimentRow row;
    row.method = std::get<0>(key);
    row.dist = std::get<1>(key);
    row.n = std::get<2>(key);
    row.lambda = members.front()->lambda;
    row.reps = static_cast<int>(members.size());
    row.rmse_mean = mean(rmse);
    row.rmse_sd = sample_sd(rmse);
    row.cp_mean = mean(cp);
    row.cp_sd = sample_sd(cp);
    row.aiw_mean = mean(aiw);
    row.aiw_sd = sample_sd(aiw);
    row.step1_mean_s = mean(s1);
    row.step2_mean_s = mean(s2);
    rows.push_back(row);
  }
  return rows;
}

ExperimentResult run_experiment(const SimConfig& config) {
  config.validate();
  const int dist_id = static_cast<int>(config.dist);
  const std::vector<TruthPoint> truth = true_band(config.dist, config.alpha, config.grid);

  struct Task {
    std::size_t n;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t n : config.sizes) {
    for (int r = 0; r < config.replications; ++r) tasks.push_back({n, r});
  }

  std::vector<std::vector<RunRecord>> per_task(tasks.size());
  std::vector<std::string> errors(tasks.size());

  parallel_for(
      tasks.size(),
      [&](std::size_t t) {
        const auto [n, rep] = tasks[t];
        const std::uint64_t seed = derive_seed(config.seed, n, static_cast<std::uint64_t>(rep));
        try {
          const Dataset train = generate(config.dist, n, derive_seed(seed, 1));
          const Dataset test = generate(config.dist, config.test_size, derive_seed(seed, 2));

          FitConfig fc;
          fc.alpha = config.alpha;
          fc.iterations = config.iterations;
          fc.step1_cap = config.step1_cap;
          fc.seed = derive_seed(seed, 3);
          fc.domain = std::pair{0.0, 10.0};
          const SplineBasis basis = resolve_basis(fc, train);

          const LevelStep step1 = run_level_step(train, fc);
          std::vector<RunRecord> records;
          for (double lambda : config.lambdas) {
            fc.lambda = lambda;
            const FitReport fit = fit_band(train, step1, basis, fc);
            const BandMetrics m = band_metrics(fit.band(), test, config.alpha);
            records.push_back({kMethodMir, dist_id, n, lambda, rep, rmse_bounds(fit.band(), truth), m.cp, m.aiw,
                               config.timing ? step1.seconds : kNaN, config.timing ? fit.step2_seconds : kNaN});
          }

          if (config.include_kde) {
            const auto start = std::chrono::steady_clock::now();
            const Dataset reference =
                step1.subsample.size() == train.size() ? train : train.subset(step1.subsample);
            const auto grid_mi = kde_intervals(reference, step1.bandwidth, config.alpha, config.grid);
            const auto test_mi = kde_intervals(reference, step1.bandwidth, config.alpha, test.x);
            std::vector<TruthPoint> est;
            for (std::size_t l = 0; l < grid_mi.size(); ++l) {
              est.push_back({config.grid[l], grid_mi[l].low, grid_mi[l].up});
            }
            std::vector<double> lo, up;
            for (const ModalInterval& mi : test_mi) {
              lo.push_back(mi.low);
              up.push_back(mi.up);
            }
            const BandMetrics m = interval_metrics(lo, up, test.y, config.alpha);
            const double elapsed = seconds_since(start);
            records.push_back({kMethodKde, dist_id, n, kNaN, rep, rmse_bounds(est, truth), m.cp, m.aiw,
                               config.timing ? elapsed : kNaN, config.timing ? 0.0 : kNaN});
          }
          per_task[t] = std::move(records);
        } catch (const std::exception& e) {
          errors[t] = e.what();
        }
      },
      config.threads);

  ExperimentResult out;
  std::map<std::size_t, int> failures_by_n;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!errors[t].empty()) {
      out.failures.push_back({tasks[t].n, tasks[t].rep,
                              derive_seed(config.seed, tasks[t].n, static_cast<std::uint64_t>(tasks[t].rep)),
                              errors[t]});
      ++failures_by_n[tasks[t].n];
      continue;
    }
    out.runs.insert(out.runs.end(), per_task[t].begin(), per_task[t].end());
  }
  for (const auto& [n, count] : failures_by_n) {
    if (10 * count >= config.replications) {
      std::string msg = "too many failed replications at n=" + std::to_string(n) + " (" + std::to_string(count) +
                        " of " + std::to_string(config.replications) + ")";
      for (const ReplicationFailure& f : out.failures) {
        if (f.n == n) msg += "; rep " + std::to_string(f.rep) + ": " + f.message;
      }
      throw NumericalError(msg);
    }
  }

  std::stable_sort(out.runs.begin(), out.runs.end(), [](const RunRecord& a, const RunRecord& b) {
    const double la = std::isnan(a.lambda) ? -1.0 : a.lambda;
    const double lb = std::isnan(b.lambda) ? -1.0 : b.lambda;
    return std::tie(a.method, a.n, la, a.rep) < std::tie(b.method, b.n, lb, b.rep);
  });
  out.rows = aggregate(out.runs);
  return out;
}

}  // namespace mir
