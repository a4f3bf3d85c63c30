#include "cli.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mir/error.hpp"
#include "mir/io.hpp"
#include "mir/model_select.hpp"
#include "mir/pipeline.hpp"
#include "mir/rhythm.hpp"
#include "mir/simulate.hpp"

namespace mir::cli {

namespace {

namespace fs = std::filesystem;

struct FitFlags {
  FitConfig config;
  int knot_count = 20;
  std::vector<double> knot_list;
  std::optional<double> bandwidth;

  void attach(CLI::App& app) {
    app.add_option("--alpha", config.alpha, "Nominal coverage of the modal interval")->capture_default_str();
    app.add_option("--gamma", config.gamma, "ADMM step parameter")->capture_default_str();
    app.add_option("--iterations", config.iterations, "ADMM iterations")->capture_default_str();
    app.add_option("--tolerance", config.tolerance, "Stop when both residuals fall below this (0: never)")
        ->capture_default_str();
    app.add_option("--cap", config.step1_cap, "Step-1 subsample cap")->capture_default_str();
    app.add_option("--knots", knot_count, "Number of uniform spline segments")->capture_default_str();
    app.add_option("--knot-list", knot_list, "Explicit increasing knots (overrides --knots)")->delimiter(',');
    app.add_option("--degree", config.degree, "Polynomial degree d")->capture_default_str();
    app.add_option("--smoothness", config.smoothness, "Continuity order rho")->capture_default_str();
    app.add_option("--bandwidth", bandwidth, "Fixed kernel bandwidth (skips plug-in selection)");
    app.add_option("--weight-exponent", config.weight_exponent, "Exponent of the density weights")
        ->capture_default_str();
  }

  FitConfig resolve(std::uint64_t seed) const {
    FitConfig c = config;
    c.seed = seed;
    c.segments = knot_count;
    c.knots = knot_list;
    c.bandwidth = bandwidth;
    c.validate();
    return c;
  }
};

std::string single_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

void check_grid_points(int points) {
  if (points < 2) throw InvalidArgument("grid-points", "must be >= 2");
}

std::string band_text(const FittedBand& band, int points) {
  const std::vector<double> grid = io::uniform_grid(band.basis.lower(), band.basis.upper(), points);
  return io::band_csv(io::evaluate_band(band, grid));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlinear modal interval regression"};
  app.require_subcommand(1);

  // fit
  CLI::App* fit = app.add_subcommand("fit", "Fit a modal interval band to an x,y CSV");
  FitFlags fit_flags;
  std::string fit_in, fit_out, fit_band;
  double fit_lambda = 1e-2;
  std::uint64_t fit_seed = 0;
  int fit_points = 201;
  fit->add_option("--in", fit_in, "Input CSV with header x,y")->required();
  fit->add_option("--out", fit_out, "Model JSON output")->required();
  fit->add_option("--band", fit_band, "Band CSV output (x,lower,upper,midpoint)");
  fit->add_option("--lambda", fit_lambda, "Roughness penalty")->capture_default_str();
  fit->add_option("--seed", fit_seed, "Seed of the Step-1 subsample")->capture_default_str();
  fit->add_option("--grid-points", fit_points, "Rows of the band CSV")->capture_default_str();
  fit_flags.attach(*fit);

  // cv
  CLI::App* cv = app.add_subcommand("cv", "Choose lambda by V-fold cross-validated mCWC");
  FitFlags cv_flags;
  std::string cv_in, cv_out;
  std::uint64_t cv_seed = 0;
  CvOptions cv_options;
  cv->add_option("--in", cv_in, "Input CSV with header x,y")->required();
  cv->add_option("--out", cv_out, "Per-lambda table CSV")->required();
  cv->add_option("--seed", cv_seed, "Seed of the fold assignment and subsamples")->required();
  cv->add_option("--lambdas", cv_options.grid, "Candidate lambdas")->delimiter(',');
  cv->add_option("--folds", cv_options.folds, "Number of folds V")->capture_default_str();
  cv->add_option("--eta", cv_options.eta, "Under-coverage penalty rate")->capture_default_str();
  cv_flags.attach(*cv);

  // simulate
  CLI::App* sim = app.add_subcommand("simulate", "Monte-Carlo study on the synthetic distributions");
  SimConfig sim_config;
  int sim_dist = 1;
  std::string sim_dir = ".";
  bool sim_no_kde = false;
  sim->add_option("--dist", sim_dist, "Distribution id (1 or 2)")->capture_default_str();
  sim->add_option("--n", sim_config.sizes, "Training sample sizes")->delimiter(',');
  sim->add_option("--reps", sim_config.replications, "Replications per size")->capture_default_str();
  sim->add_option("--seed", sim_config.seed, "Base seed")->required();
  sim->add_option("--lambdas", sim_config.lambdas, "Lambda grid")->delimiter(',');
  sim->add_option("--alpha", sim_config.alpha, "Nominal coverage")->capture_default_str();
  sim->add_option("--cap", sim_config.step1_cap, "Step-1 subsample cap")->capture_default_str();
  sim->add_option("--test-size", sim_config.test_size, "Test set size")->capture_default_str();
  sim->add_option("--iterations", sim_config.iterations, "ADMM iterations")->capture_default_str();
  sim->add_flag("--no-kde", sim_no_kde, "Skip the kernel-only comparator");
  sim->add_flag("--timing", sim_config.timing, "Record wall-clock seconds per step");
  sim->add_option("--out-dir", sim_dir, "Directory for sim_runs.csv and sim_summary.csv")->capture_default_str();

  // band
  CLI::App* band = app.add_subcommand("band", "Evaluate a saved model on a uniform grid");
  std::string band_model, band_out;
  int band_points = 201;
  band->add_option("--model", band_model, "Model JSON written by fit")->required();
  band->add_option("--out", band_out, "Band CSV output")->required();
  band->add_option("--grid-points", band_points, "Number of grid rows")->capture_default_str();

  // rhythm
  CLI::App* rhythm = app.add_subcommand("rhythm", "Detect trough-peak-trough cycles on a band midpoint");
  std::string rhythm_in, rhythm_out;
  RhythmOptions rhythm_options;
  bool rhythm_all = false;
  rhythm->add_option("--band", rhythm_in, "Band CSV (x,lower,upper,midpoint)")->required();
  rhythm->add_option("--out", rhythm_out, "Cycles CSV output")->required();
  rhythm->add_option("--window", rhythm_options.window, "Half-window around a peak, in x units")
      ->capture_default_str();
  rhythm->add_option("--mild", rhythm_options.mild, "Peak/trough ratio for a mild rhythm")->capture_default_str();
  rhythm->add_option("--significant", rhythm_options.significant, "Peak/trough ratio for a significant rhythm")
      ->capture_default_str();
  rhythm->add_flag("--all", rhythm_all, "Also list cycles below the mild threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: arguments: " << single_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (fit->parsed()) {
      const FitConfig config = [&] {
        FitConfig c = fit_flags.resolve(fit_seed);
        c.lambda = fit_lambda;
        c.validate();
        return c;
      }();
      check_grid_points(fit_points);
      const Dataset data = io::read_xy_csv(fit_in);
      const FitReport report = fit_mir(data, config);
      io::write_file_atomic(fit_out, io::model_json(report, config).dump(2) + "\n");
      if (!fit_band.empty()) io::write_file_atomic(fit_band, band_text(report.band(), fit_points));
      if (!report.admm.diagnostic.empty()) err << "warning: " << report.admm.diagnostic << '\n';
      out << "bandwidth " << io::format_number(report.step1.bandwidth.value()) << ", min gap "
          << io::format_number(report.admm.min_gap) << '\n';
    } else if (cv->parsed()) {
      const FitConfig config = cv_flags.resolve(cv_seed);
      cv_options.seed = cv_seed;
      if (cv_options.folds < 2) throw InvalidArgument("folds", "must be >= 2");
      if (cv_options.grid.empty()) throw InvalidArgument("lambdas", "empty grid");
      const Dataset data = io::read_xy_csv(cv_in);
      const CvResult result = select_lambda_cv(data, config, cv_options);
      io::write_file_atomic(cv_out, io::cv_csv(result));
      for (const std::string& w : result.warnings) err << "warning: " << w << '\n';
      out << "selected lambda " << io::format_number(result.selected_lambda) << '\n';
    } else if (sim->parsed()) {
      sim_config.dist = distribution_from_id(sim_dist);
      sim_config.include_kde = !sim_no_kde;
      sim_config.validate();
      if (!fs::is_directory(sim_dir)) throw InvalidArgument("out-dir", "not a directory: " + sim_dir);
      const ExperimentResult result = run_experiment(sim_config);
      io::write_file_atomic(fs::path(sim_dir) / "sim_runs.csv", io::runs_csv(result.runs));
      io::write_file_atomic(fs::path(sim_dir) / "sim_summary.csv", io::summary_csv(result.rows));
      for (const ReplicationFailure& f : result.failures) {
        err << "warning: n=" << f.n << " rep " << f.rep << " seed " << f.seed << " failed: " << single_line(f.message)
            << '\n';
      }
      out << result.runs.size() << " runs written to " << sim_dir << '\n';
    } else if (band->parsed()) {
      check_grid_points(band_points);
      const FittedBand model = io::load_model(band_model);
      io::write_file_atomic(band_out, band_text(model, band_points));
    } else if (rhythm->parsed()) {
      RhythmOptions options = rhythm_options;
      const std::vector<io::BandRow> rows = io::read_band_csv(rhythm_in);
      std::vector<double> x, mid;
      for (const io::BandRow& r : rows) {
        x.push_back(r.x);
        mid.push_back(r.midpoint);
      }
      const std::vector<RhythmCycle> all = detect_rhythms(x, mid, options);
      const std::vector<RhythmCycle> cycles = rhythm_all ? all : detected_only(all, options);
      io::write_file_atomic(rhythm_out, io::cycles_csv(cycles));
      out << cycles.size() << " cycles\n";
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << single_line(e.what()) << '\n';
    return 1;
  } catch (const io::FormatError& e) {
    err << "error: input: " << single_line(e.what()) << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "error: numerical: " << single_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << single_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mir::cli
