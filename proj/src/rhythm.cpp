#include "mir/rhythm.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "mir/error.hpp"

namespace mir {

const char* to_string(RhythmClass c) noexcept {
  switch (c) {
    case RhythmClass::kSignificant:
      return "significant";
    case RhythmClass::kMild:
      return "mild";
    case RhythmClass::kNone:
      break;
  }
  return "none";
}

namespace {

// Lowest local minimum with lo_x <= x < hi_x (lo_inclusive) or lo_x < x <= hi_x.
std::optional<std::size_t> lowest_min(const std::vector<std::size_t>& minima, std::span<const double> x,
                                      std::span<const double> y, double lo_x, double hi_x, bool closed_left) {
  std::optional<std::size_t> best;
  for (std::size_t k : minima) {
    const bool in = closed_left ? (x[k] >= lo_x && x[k] < hi_x) : (x[k] > lo_x && x[k] <= hi_x);
    if (in && (!best || y[k] < y[*best])) best = k;
  }
  return best;
}

}  // namespace

std::vector<RhythmCycle> detect_rhythms(std::span<const double> x, std::span<const double> y,
                                        const RhythmOptions& options) {
  const std::size_t n = x.size();
  if (y.size() != n) throw InvalidArgument("curve", "x and midpoint lengths differ");
  if (n < 3) throw InvalidArgument("curve", "need at least 3 samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InvalidArgument("curve", "non-finite sample at index " + std::to_string(i));
    }
    if (i > 0 && !(x[i] > x[i - 1])) {
      throw InvalidArgument("curve", "non-monotone x at index " + std::to_string(i));
    }
  }
  if (!(options.window > 0.0)) throw InvalidArgument("window", "must be positive");
  if (!(options.mild > 0.0 && options.significant >= options.mild)) {
    throw InvalidArgument("thresholds", "need 0 < mild <= significant");
  }

  std::vector<std::size_t> minima;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (y[k] < y[k - 1] && y[k] <= y[k + 1]) minima.push_back(k);
  }

  struct Peak {
    std::size_t at;
    std::size_t before;
    std::size_t after;
  };
  std::vector<Peak> peaks;
  const double w = options.window;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    bool dominant = true;
    for (std::size_t j = i; j-- > 0 && x[i] - x[j] <= w;) {
      if (y[j] >= y[i]) {
        dominant = false;
        break;
      }
    }
    for (std::size_t j = i + 1; dominant && j < n && x[j] - x[i] <= w; ++j) {
      if (y[j] >= y[i]) dominant = false;
    }
    if (!dominant) continue;
    const auto before = lowest_min(minima, x, y, x[i] - w, x[i], true);
    const auto after = lowest_min(minima, x, y, x[i], x[i] + w, false);
    if (before && after) peaks.push_back({i, *before, *after});
  }

  // Neighbouring cycles share the lowest trough lying in both windows.
  for (std::size_t p = 0; p + 1 < peaks.size(); ++p) {
    const double lo = std::max(x[peaks[p].at], x[peaks[p + 1].at] - w);
    const double hi = std::min(x[peaks[p].at] + w, x[peaks[p + 1].at]);
    if (lo < hi) {
      if (const auto shared = lowest_min(minima, x, y, lo, hi, true)) {
        if (x[*shared] > x[peaks[p].at]) {
          peaks[p].after = *shared;
          peaks[p + 1].before = *shared;
        }
      }
    }
  }

  std::vector<RhythmCycle> cycles;
  cycles.reserve(peaks.size());
  for (const Peak& pk : peaks) {
    RhythmCycle c;
    c.trough1_x = x[pk.before];
    c.peak_x = x[pk.at];
    c.trough2_x = x[pk.after];
    c.trough1_value = y[pk.before];
    c.peak_value = y[pk.at];
    c.trough2_value = y[pk.after];
    if (c.trough1_value <= 0.0 || c.trough2_value <= 0.0) {
      c.undefined_ratio = true;
      c.classification = RhythmClass::kNone;
    } else {
      c.ratio1 = c.peak_value / c.trough1_value;
      c.ratio2 = c.peak_value / c.trough2_value;
      const double r = c.min_ratio();
      c.classification = r >= options.significant ? RhythmClass::kSignificant
                         : r >= options.mild      ? RhythmClass::kMild
                                                  : RhythmClass::kNone;
    }
    cycles.push_back(c);
  }
  return cycles;
}

std::vector<RhythmCycle> detected_only(std::span<const RhythmCycle> cycles, const RhythmOptions& options) {
  std::vector<RhythmCycle> out;
  for (const RhythmCycle& c : cycles) {
    if (!c.undefined_ratio && c.min_ratio() >= options.mild) out.push_back(c);
  }
  return out;
}

}  // namespace mir
