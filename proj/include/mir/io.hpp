#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mir/kde.hpp"
#include "mir/model_select.hpp"
#include "mir/pipeline.hpp"
#include "mir/rhythm.hpp"
#include "mir/simulate.hpp"
#include "mir/solver.hpp"

namespace mir::io {

// Thrown for malformed files; the message names the file and line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// %.9g, with "NA" for NaN.
std::string format_number(double v);

// Header row must name columns x and y (any order, extra columns ignored).
Dataset parse_xy_csv(std::istream& in, const std::string& source = "<input>");
Dataset read_xy_csv(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct BandRow {
  double x = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double midpoint = 0.0;
};

std::vector<double> uniform_grid(double lo, double hi, int points);
std::vector<BandRow> evaluate_band(const FittedBand& band, std::span<const double> xs);
std::string band_csv(std::span<const BandRow> rows);
std::vector<BandRow> parse_band_csv(std::istream& in, const std::string& source = "<band>");
std::vector<BandRow> read_band_csv(const std::filesystem::path& path);

// Model file: basis, both coefficient vectors, fit configuration and a
// residual summary. Doubles are written with round-trip precision.
nlohmann::json model_json(const FitReport& report, const FitConfig& config);
FittedBand band_from_json(const nlohmann::json& doc);
FittedBand load_model(const std::filesystem::path& path);

std::string runs_csv(std::span<const RunRecord> runs);
std::string summary_csv(std::span<const ExperimentRow> rows);
std::string cv_csv(const CvResult& cv);
std::string cycles_csv(std::span<const RhythmCycle> cycles);

}  // namespace mir::io
