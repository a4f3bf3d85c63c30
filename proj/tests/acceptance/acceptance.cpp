// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>

#include "mir/model_select.hpp"
#include "mir/modal_interval.hpp"
#include "mir/pipeline.hpp"
#include "mir/random.hpp"
#include "mir/rhythm.hpp"
#include "mir/simulate.hpp"
#include "mir/solver.hpp"
#include "mir/spline.hpp"
#include "oracles.hpp"

using namespace mir;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s  [%2d] %s: %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

const ExperimentRow* find_row(const ExperimentResult& r, const std::string& method, std::size_t n, double lambda) {
  for (const ExperimentRow& row : r.rows) {
    const bool lambda_match = std::isnan(lambda) ? std::isnan(row.lambda) : row.lambda == lambda;
    if (row.method == method && row.n == n && lambda_match) return &row;
  }
  return nullptr;
}

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> z;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = z(rng);
  return v;
}

SplineBasis random_basis(Rng& rng, int segments, int degree, int smoothness) {
  std::uniform_real_distribution<double> u(0.05, 5.0);
  std::vector<double> knots{0.0};
  for (int j = 0; j < segments; ++j) knots.push_back(knots.back() + u(rng));
  return SplineBasis(knots, degree, smoothness);
}

double grid_x(const SplineBasis& b, int k, int points) {
  return k + 1 == points ? b.upper() : b.lower() + (b.upper() - b.lower()) * k / (points - 1);
}

void distribution1_study() {
  SimConfig cfg;
  cfg.dist = Distribution::kNormal;
  cfg.sizes = {1000};
  cfg.replications = 50;
  cfg.seed = 20240101;
  const ExperimentResult r = run_experiment(cfg);

  const ExperimentRow* mir = find_row(r, kMethodMir, 1000, 1e-2);
  const ExperimentRow* kde = find_row(r, kMethodKde, 1000, std::nan(""));
  if (mir == nullptr || kde == nullptr) {
    report(1, false, "distribution 1, n=1000, lambda=1e-2", "missing rows");
    return;
  }
  report(1,
         in(mir->rmse_mean, 0.55, 0.95) && in(mir->cp_mean, 47.5, 51.5) && in(mir->aiw_mean, 1.55, 1.85) &&
             mir->reps == 50,
         "distribution 1, n=1000, lambda=1e-2, 50 reps",
         fmt("RMSE %.3f (%.3f) in [0.55,0.95], CP %.2f%% in [47.5,51.5], AIW %.3f in [1.55,1.85]", mir->rmse_mean,
             mir->rmse_sd, mir->cp_mean, mir->aiw_mean));

  report(3, kde->rmse_mean >= 1.6 * mir->rmse_mean && kde->cp_mean >= 53.0,
         "kernel-only comparator, distribution 1, n=1000",
         fmt("RMSE %.3f >= 1.6 x %.3f = %.3f, CP %.2f%% >= 53", kde->rmse_mean, mir->rmse_mean,
             1.6 * mir->rmse_mean, kde->cp_mean));

  const ExperimentRow* top = find_row(r, kMethodMir, 1000, 1.0);
  bool monotone = true;
  std::string cps;
  double prev = -1.0;
  for (double lambda : cfg.lambdas) {
    const ExperimentRow* row = find_row(r, kMethodMir, 1000, lambda);
    if (row == nullptr) {
      monotone = false;
      continue;
    }
    if (prev >= 0.0 && row->cp_mean < prev - 0.7) monotone = false;
    prev = row->cp_mean;
    cps += fmt("%s%.2f", cps.empty() ? "" : ", ", row->cp_mean);
  }
  const bool ratio_ok = top != nullptr && top->rmse_mean >= 2.5 * mir->rmse_mean;
  report(4, ratio_ok && monotone, "lambda sensitivity, distribution 1, n=1000",
         fmt("RMSE(1) %.3f >= 2.5 x RMSE(1e-2) %.3f; CP over grid [%s] nondecreasing within 0.7pp",
             top ? top->rmse_mean : std::nan(""), mir->rmse_mean, cps.c_str()));
}

void distribution2_study() {
  SimConfig cfg;
  cfg.dist = Distribution::kLogNormal;
  cfg.sizes = {3000};
  cfg.replications = 50;
  cfg.lambdas = {1e-1};
  cfg.include_kde = false;
  cfg.seed = 20240202;
  const ExperimentResult r = run_experiment(cfg);
  const ExperimentRow* row = find_row(r, kMethodMir, 3000, 1e-1);
  report(2, row != nullptr && in(row->rmse_mean, 0.35, 0.70) && in(row->cp_mean, 48.5, 52.0),
         "distribution 2, n=3000, lambda=1e-1, 50 reps",
         row ? fmt("RMSE %.3f (%.3f) in [0.35,0.70], CP %.2f%% in [48.5,52.0]", row->rmse_mean, row->rmse_sd,
                   row->cp_mean)
             : std::string("missing row"));
}

void timing_study() {
  SimConfig cfg;
  cfg.dist = Distribution::kNormal;
  cfg.sizes = {500, 1000, 2000, 3000};
  cfg.replications = 10;
  cfg.lambdas = {1e-2};
  cfg.include_kde = false;
  cfg.timing = true;
  cfg.threads = 1;
  cfg.seed = 20240303;
  const ExperimentResult r = run_experiment(cfg);
  bool step1_dominates = true;
  std::string detail;
  double total1000 = 0.0, total3000 = 0.0;
  for (std::size_t n : cfg.sizes) {
    const ExperimentRow* row = find_row(r, kMethodMir, n, 1e-2);
    if (row == nullptr) {
      step1_dominates = false;
      continue;
    }
    step1_dominates = step1_dominates && row->step1_mean_s > row->step2_mean_s;
    const double total = row->step1_mean_s + row->step2_mean_s;
    if (n == 1000) total1000 = total;
    if (n == 3000) total3000 = total;
    detail += fmt("n=%zu step1 %.3fs step2 %.3fs; ", n, row->step1_mean_s, row->step2_mean_s);
  }
  const double ratio = total3000 / total1000;
  report(5, step1_dominates && ratio <= 4.0, "timing shape with step-1 cap 1000",
         detail + fmt("total(3000)/total(1000) = %.2f <= 4", ratio));
}

void penalty_oracle() {
  Rng rng = make_rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const SplineBasis b = random_basis(rng, 1 + trial % 4, 3, 2);
    const Eigen::VectorXd c = random_vector(rng, b.size());
    double integral = 0.0;
    for (int j = 0; j < b.segments(); ++j) {
      const double lo = b.knots()[j];
      const double w = b.width(j);
      const auto s2 = [&](double x) {
        const double t = (x - lo) / w;
        const double v = (2.0 * c(4 * j + 2) + 6.0 * c(4 * j + 3) * t) / (w * w);
        return v * v;
      };
      integral += oracle::integrate(s2, lo, lo + w, 8);
    }
    const double form = c.dot(penalty_matrix(b) * c);
    worst = std::max(worst, std::abs(form - integral) / std::abs(integral));
  }
  report(6, worst <= 1e-8, "roughness matrix vs quadrature, 100 random cubics",
         fmt("max relative error %.2e <= 1e-8", worst));
}

void prox_oracle() {
  Rng rng = make_rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  double worst = 0.0;
  for (int trial = 0; trial < 100000; ++trial) {
    const double zz = 5.0 * z(rng);
    const double p = 0.001 + 0.998 * u(rng);
    const double y = 5.0 * z(rng);
    const double w = 0.01 + 5.0 * u(rng);
    const double gamma = 0.01 + 10.0 * u(rng);
    const auto f = [&](double v) { return w * quantile_loss(y - v, p) + (v - zz) * (v - zz) / (2.0 * gamma); };
    const double lo = std::min(zz, y) - gamma * w - 1.0;
    const double hi = std::max(zz, y) + gamma * w + 1.0;
    const double ref = oracle::golden_section(f, lo, hi);
    worst = std::max(worst, std::abs(prox_quantile_loss(zz, p, y, w, gamma) - ref));
  }
  report(7, worst <= 1e-6, "prox of the pinball loss vs golden-section search, 1e5 tuples",
         fmt("max abs error %.2e <= 1e-6", worst));
}

void shortest_interval_oracle() {
  Rng rng = make_rng(8);
  std::uniform_int_distribution<int> size(1, 50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = size(rng);
    std::vector<double> v(static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      v[static_cast<std::size_t>(i)] = trial % 2 == 0 ? std::floor(u(rng) * 15.0) : u(rng);
      w[static_cast<std::size_t>(i)] = trial % 3 == 0 ? 1.0 : u(rng);
    }
    const double alpha = trial % 4 == 0 ? 0.5 : 0.01 + 0.98 * u(rng);
    const WeightedECDF e = make_weighted_ecdf(v, w);
    const ModalInterval mi = shortest_interval(e, alpha);
    const oracle::Interval ref = oracle::brute_force_shortest(e, alpha);
    if (mi.low != ref.low || mi.up != ref.up) ++mismatches;
  }
  report(8, mismatches == 0, "two-pointer shortest interval vs brute force, 1e4 ECDFs",
         fmt("%d mismatches", mismatches));
}

void noncrossing_sufficiency() {
  Rng rng = make_rng(9);
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution zero(0.3);
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 10000; ++trial) {
    const SplineBasis b = random_basis(rng, 1 + trial % 5, 3, 2);
    const Eigen::MatrixXd g = noncross_matrix(b);
    Eigen::VectorXd slack(b.size());
    for (Eigen::Index i = 0; i < slack.size(); ++i) slack(i) = zero(rng) ? 0.0 : e(rng);
    const Eigen::VectorXd lower = random_vector(rng, b.size());
    const Eigen::VectorXd upper = lower + g.triangularView<Eigen::Lower>().solve(slack);
    if ((g * (upper - lower)).minCoeff() < -1e-12) continue;
    for (int k = 0; k < 1000; ++k) {
      const double x = grid_x(b, k, 1000);
      worst = std::min(worst, eval_spline(upper, b, x) - eval_spline(lower, b, x));
    }
  }
  report(9, worst >= -1e-10, "non-crossing sufficiency, 1e4 coefficient pairs",
         fmt("min gap over 1000-point grids %.2e >= -1e-10", worst));
}

void admm_outputs() {
  double worst_continuity = 0.0;
  double worst_gap = std::numeric_limits<double>::infinity();
  int fits = 0;
  int extended = 0;
  for (Distribution dist : {Distribution::kNormal, Distribution::kLogNormal}) {
    for (std::size_t n : {200, 500, 1000, 3000}) {
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Dataset d = generate(dist, n, derive_seed(404, n, seed));
        FitConfig cfg;
        cfg.domain = std::pair{0.0, 10.0};
        cfg.seed = seed;
        const SplineBasis basis = resolve_basis(cfg, d);
        const LevelStep step1 = run_level_step(d, cfg);
        for (double lambda : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
          cfg.lambda = lambda;
          const FitReport r = fit_band(d, step1, basis, cfg);
          worst_continuity = std::max(worst_continuity, r.band().continuity_violation());
          worst_gap = std::min(worst_gap, r.band().min_gap(1000));
          extended += r.admm.extra_iterations > 0 ? 1 : 0;
          ++fits;
        }
      }
    }
  }
  report(10, worst_continuity <= 1e-6 && worst_gap >= -1e-6, "continuity and non-crossing of ADMM outputs",
         fmt("%d fits: max |H c|_inf %.2e <= 1e-6, min grid gap %.2e >= -1e-6 (%d needed iterations past the "
             "budget)",
             fits, worst_continuity, worst_gap, extended));
}

void mcwc_continuity() {
  double worst_equal = 0.0;
  for (double nmmiw : {0.0, 0.1, 0.37, 1.0, 12.5}) {
    for (double alpha : {0.1, 0.5, 0.9}) {
      worst_equal = std::max(worst_equal, std::abs(mcwc_score(nmmiw, alpha, alpha) - nmmiw));
    }
  }
  const double at_e = mcwc_score(1.0, 0.45, 0.5, 20.0);
  report(11, worst_equal == 0.0 && std::abs(at_e - std::numbers::e) <= 1e-12, "mCWC continuity at alpha",
         fmt("|mCWC(micp=alpha) - NMMIW| = %.1e, mCWC(0.45, eta=20, 1) - e = %.1e", worst_equal,
             at_e - std::numbers::e));
}

void true_mi_oracles() {
  const boost::math::normal n01;
  const double z = boost::math::quantile(n01, 0.75);
  double worst_normal = 0.0;
  for (double mu : {-3.0, 0.0, 5.0}) {
    for (double sigma : {0.1, 1.0, 2.5}) {
      const ModalInterval mi = true_mi_normal(mu, sigma, 0.5);
      worst_normal = std::max({worst_normal, std::abs(mi.low - (mu - z * sigma)), std::abs(mi.up - (mu + z * sigma))});
    }
  }

  double worst_grid = 0.0;
  bool shorter = true;
  for (double mu : {0.0, 1.0}) {
    for (double sigma : {0.5, 1.0, 2.0}) {
      const boost::math::lognormal ln(mu, sigma);
      // Shortest [Q(a), Q(a + 1/2)] over a 1e5-point grid of lower-tail masses.
      const int points = 100000;
      double best_w = std::numeric_limits<double>::infinity();
      double best_lo = 0.0, best_up = 0.0;
      for (int k = 0; k < points; ++k) {
        const double a = 0.5 * k / (points - 1);
        const double lo = a <= 0.0 ? 0.0 : boost::math::quantile(ln, a);
        const double up = boost::math::quantile(ln, std::min(a + 0.5, 1.0 - 1e-16));
        if (up - lo < best_w) {
          best_w = up - lo;
          best_lo = lo;
          best_up = up;
        }
      }
      const ModalInterval mi = true_mi_lognormal(mu, sigma, 0.5);
      worst_grid = std::max({worst_grid, std::abs(mi.low - best_lo), std::abs(mi.up - best_up)});
      shorter = shorter && mi.width() < equal_tailed_lognormal(mu, sigma, 0.5).width();
    }
  }
  report(12, worst_normal <= 1e-9 && worst_grid <= 1e-4 && shorter, "true modal interval oracles",
         fmt("normal closed form err %.1e <= 1e-9; lognormal vs 1e5-point grid err %.1e <= 1e-4; shorter than "
             "equal-tailed: %s",
             worst_normal, worst_grid, shorter ? "yes" : "no"));
}

void equivariance() {
  const Dataset d = gen_dist1(1000, 1313);
  FitConfig cfg;
  cfg.domain = std::pair{0.0, 10.0};
  const FittedBand base = fit_mir(d, cfg).band();
  double worst = 0.0;
  for (double k : {-3.7, 10.0, 250.0}) {
    Dataset shifted = d;
    for (double& y : shifted.y) y += k;
    const FittedBand moved = fit_mir(shifted, cfg).band();
    for (int i = 0; i < 1000; ++i) {
      const double x = grid_x(base.basis, i, 1000);
      worst = std::max({worst, std::abs(moved.upper_at(x) - base.upper_at(x) - k),
                        std::abs(moved.lower_at(x) - base.lower_at(x) - k)});
    }
  }
  report(13, worst <= 1e-6, "translation equivariance of the fitted band",
         fmt("max |shifted - original - k| %.2e <= 1e-6 for k in {-3.7, 10, 250}", worst));
}

void rhythm_sine() {
  std::vector<double> x, y;
  for (int h = 0; h <= 240; ++h) {
    x.push_back(h);
    y.push_back(2.0 + std::sin(2.0 * std::numbers::pi * h / 28.0));
  }
  const auto cycles = detect_rhythms(x, y);
  bool ok = !cycles.empty();
  std::string periods;
  for (const RhythmCycle& c : cycles) {
    ok = ok && std::abs(c.period() - 28.0) <= 2.0 && c.classification == RhythmClass::kSignificant;
    periods += fmt("%s%.0f", periods.empty() ? "" : ",", c.period());
  }
  report(14, ok, "rhythm detection on 2 + sin(2 pi t / 28), hourly over 240 h",
         fmt("%zu cycles, periods [%s] h, all significant: %s", cycles.size(), periods.c_str(), ok ? "yes" : "no"));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::function<void()>> checks{
      distribution1_study, distribution2_study, timing_study,     penalty_oracle,  prox_oracle,
      shortest_interval_oracle, noncrossing_sufficiency, admm_outputs, mcwc_continuity, true_mi_oracles,
      equivariance,        rhythm_sine};
  for (const auto& check : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      std::printf("FAIL  exception: %s\n", e.what());
      ++failures;
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d failure(s), %.1f s\n", failures, seconds);
  return failures == 0 ? 0 : 1;
}
