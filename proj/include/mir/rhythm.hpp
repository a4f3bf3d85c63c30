#pragma once

#include <span>
#include <string>
#include <vector>

namespace mir {

enum class RhythmClass { kSignificant, kMild, kNone };

const char* to_string(RhythmClass c) noexcept;

// trough -> peak -> trough on a sampled midpoint curve.
struct RhythmCycle {
  double trough1_x = 0.0;
  double peak_x = 0.0;
  double trough2_x = 0.0;
  double trough1_value = 0.0;
  double peak_value = 0.0;
  double trough2_value = 0.0;
  double ratio1 = 0.0;  // peak / first trough
  double ratio2 = 0.0;  // peak / second trough
  RhythmClass classification = RhythmClass::kNone;
  // Set when a trough is <= 0, which leaves the ratios undefined (reported as 0).
  bool undefined_ratio = false;

  double period() const noexcept { return trough2_x - trough1_x; }
  double min_ratio() const noexcept { return ratio1 < ratio2 ? ratio1 : ratio2; }
};

struct RhythmOptions {
  double window = 24.0;
  double mild = 1.25;         // detection gate and lower edge of "mild"
  double significant = 1.5;
};

// A sample is a peak when it exceeds every other sample within `window` on
// both sides and each side window holds a local minimum. Every such peak is
// reported (classification kNone below `mild`). Troughs are the lowest local
// minima in the side windows; consecutive cycles share a trough when one lies
// in both windows. Extrema are taken on the given samples, no interpolation.
std::vector<RhythmCycle> detect_rhythms(std::span<const double> x, std::span<const double> midpoint,
                                        const RhythmOptions& options = {});

// Cycles whose smaller ratio reaches the detection gate.
std::vector<RhythmCycle> detected_only(std::span<const RhythmCycle> cycles, const RhythmOptions& options = {});

}  // namespace mir
