#include "mir/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "mir/error.hpp"

namespace mir::io {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, const std::string& source, std::size_t line,
                    const std::string& column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw FormatError(source + ":" + std::to_string(line) + ": non-numeric value '" + field + "' in column " +
                      column);
  }
  return v;
}

// Maps required column names to their indices in the header line.
std::vector<std::size_t> header_columns(const std::string& header, const std::vector<std::string>& required,
                                        const std::string& source) {
  std::string h = header;
  if (h.rfind("\xEF\xBB\xBF", 0) == 0) h.erase(0, 3);
  const std::vector<std::string> names = split_fields(h);
  std::vector<std::size_t> idx;
  for (const std::string& want : required) {
    std::size_t found = names.size();
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k] == want) found = k;
    }
    if (found == names.size()) {
      throw FormatError(source + ":1: missing column '" + want + "' in header");
    }
    idx.push_back(found);
  }
  return idx;
}

template <class Row>
std::vector<Row> parse_table(std::istream& in, const std::string& source, const std::vector<std::string>& columns,
                             Row (*make)(const std::vector<double>&)) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source + ":1: empty file, expected a header row");
  const std::vector<std::size_t> idx = header_columns(line, columns, source);
  std::vector<Row> rows;
  std::size_t line_no = 1;
  std::vector<double> values(columns.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (idx[c] >= fields.size()) {
        throw FormatError(source + ":" + std::to_string(line_no) + ": missing column " + columns[c]);
      }
      values[c] = parse_number(fields[idx[c]], source, line_no, columns[c]);
    }
    rows.push_back(make(values));
  }
  return rows;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open for reading");
  return in;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

Dataset parse_xy_csv(std::istream& in, const std::string& source) {
  struct XY {
    double x, y;
  };
  const auto rows = parse_table<XY>(in, source, {"x", "y"},
                                    [](const std::vector<double>& v) { return XY{v[0], v[1]}; });
  if (rows.empty()) throw FormatError(source + ": no data rows");
  Dataset d;
  for (const XY& r : rows) {
    d.x.push_back(r.x);
    d.y.push_back(r.y);
  }
  return d;
}

Dataset read_xy_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_xy_csv(in, path.string());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw FormatError(path.string() + ": write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw FormatError(path.string() + ": rename failed: " + ec.message());
  }
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  if (points < 2) throw InvalidArgument("grid_points", "must be >= 2");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (points - 1);
  g.back() = hi;
  return g;
}

std::vector<BandRow> evaluate_band(const FittedBand& band, std::span<const double> xs) {
  std::vector<BandRow> rows;
  rows.reserve(xs.size());
  for (double x : xs) {
    const double lo = band.lower_at(x);
    const double up = band.upper_at(x);
    rows.push_back({x, lo, up, 0.5 * (lo + up)});
  }
  return rows;
}

std::string band_csv(std::span<const BandRow> rows) {
  std::string out = "x,lower,upper,midpoint\n";
  for (const BandRow& r : rows) {
    out += format_number(r.x) + ',' + format_number(r.lower) + ',' + format_number(r.upper) + ',' +
           format_number(r.midpoint) + '\n';
  }
  return out;
}

std::vector<BandRow> parse_band_csv(std::istream& in, const std::string& source) {
  return parse_table<BandRow>(in, source, {"x", "lower", "upper", "midpoint"}, [](const std::vector<double>& v) {
    return BandRow{v[0], v[1], v[2], v[3]};
  });
}

std::vector<BandRow> read_band_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_band_csv(in, path.string());
}

nlohmann::json model_json(const FitReport& report, const FitConfig& config) {
  const FittedBand& band = report.band();
  const auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json doc;
  doc["format"] = "mir-model";
  doc["version"] = 1;
  doc["basis"] = {{"knots", band.basis.knots()},
                  {"degree", band.basis.degree()},
                  {"smoothness", band.basis.smoothness()}};
  doc["upper"] = vec(band.upper);
  doc["lower"] = vec(band.lower);
  doc["config"] = {{"alpha", config.alpha},
                   {"lambda", config.lambda},
                   {"gamma", config.gamma},
                   {"iterations", config.iterations},
                   {"step1_cap", config.step1_cap},
                   {"seed", config.seed},
                   {"weight_exponent", config.weight_exponent},
                   {"bandwidth", report.step1.bandwidth.value()},
                   {"bandwidth_method", report.step1.method == BandwidthMethod::kSheatherJones
                                            ? "sheather-jones"
                                            : "normal-reference"}};
  const AdmmResult& admm = report.admm;
  doc["diagnostics"] = {{"iterations", admm.iterations},
                        {"primal_residual", admm.primal_residuals.empty() ? 0.0 : admm.primal_residuals.back()},
                        {"dual_residual", admm.dual_residuals.empty() ? 0.0 : admm.dual_residuals.back()},
                        {"objective", admm.objective},
                        {"min_gap", admm.min_gap},
                        {"continuity_violation", band.continuity_violation()},
                        {"warning", admm.diagnostic}};
  return doc;
}

FittedBand band_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "mir-model") throw FormatError("not a mir-model document");
    const auto& b = doc.at("basis");
    SplineBasis basis(b.at("knots").get<std::vector<double>>(), b.at("degree").get<int>(),
                      b.at("smoothness").get<int>());
    const auto up = doc.at("upper").get<std::vector<double>>();
    const auto lo = doc.at("lower").get<std::vector<double>>();
    if (static_cast<int>(up.size()) != basis.size() || static_cast<int>(lo.size()) != basis.size()) {
      throw FormatError("coefficient vectors do not match the basis size");
    }
    return FittedBand{basis, Eigen::Map<const Eigen::VectorXd>(up.data(), basis.size()),
                      Eigen::Map<const Eigen::VectorXd>(lo.data(), basis.size())};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
}

FittedBand load_model(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what());
  }
  return band_from_json(doc);
}

std::string runs_csv(std::span<const RunRecord> runs) {
  std::string out = "method,dist,n,lambda,rep,rmse,cp,aiw,step1_s,step2_s\n";
  for (const RunRecord& r : runs) {
    out += r.method + ',' + std::to_string(r.dist) + ',' + std::to_string(r.n) + ',' + format_number(r.lambda) +
           ',' + std::to_string(r.rep) + ',' + format_number(r.rmse) + ',' + format_number(r.cp) + ',' +
           format_number(r.aiw) + ',' + format_number(r.step1_s) + ',' + format_number(r.step2_s) + '\n';
  }
  return out;
}

std::string summary_csv(std::span<const ExperimentRow> rows) {
  std::string out =
      "method,dist,n,lambda,reps,rmse_mean,rmse_sd,cp_mean,cp_sd,aiw_mean,aiw_sd,step1_mean_s,step2_mean_s\n";
  for (const ExperimentRow& r : rows) {
    out += r.method + ',' + std::to_string(r.dist) + ',' + std::to_string(r.n) + ',' + format_number(r.lambda) +
           ',' + std::to_string(r.reps) + ',' + format_number(r.rmse_mean) + ',' + format_number(r.rmse_sd) + ',' +
           format_number(r.cp_mean) + ',' + format_number(r.cp_sd) + ',' + format_number(r.aiw_mean) + ',' +
           format_number(r.aiw_sd) + ',' + format_number(r.step1_mean_s) + ',' + format_number(r.step2_mean_s) +
           '\n';
  }
  return out;
}

std::string cv_csv(const CvResult& cv) {
  std::string out = "lambda,mean_mcwc,folds_ok,selected\n";
  for (std::size_t l = 0; l < cv.grid.size(); ++l) {
    int ok = 0;
    for (double v : cv.fold_mcwc[l]) ok += std::isnan(v) ? 0 : 1;
    out += format_number(cv.grid[l]) + ',' + format_number(cv.mean_mcwc[l]) + ',' + std::to_string(ok) + ',' +
           (l == cv.selected_index ? "1" : "0") + '\n';
  }
  return out;
}

std::string cycles_csv(std::span<const RhythmCycle> cycles) {
  std::string out =
      "trough1_x,peak_x,trough2_x,trough1_mid,peak_mid,trough2_mid,ratio1,ratio2,period,class,undefined_ratio\n";
  for (const RhythmCycle& c : cycles) {
    out += format_number(c.trough1_x) + ',' + format_number(c.peak_x) + ',' + format_number(c.trough2_x) + ',' +
           format_number(c.trough1_value) + ',' + format_number(c.peak_value) + ',' +
           format_number(c.trough2_value) + ',' + format_number(c.ratio1) + ',' + format_number(c.ratio2) + ',' +
           format_number(c.period()) + ',' + to_string(c.classification) + ',' + (c.undefined_ratio ? "1" : "0") +
           '\n';
  }
  return out;
}

}  // namespace mir::io
