#include "shm/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shm/errors.hpp"

namespace shm {
namespace {

constexpr double kLevelTol = 1e-12;

double dwell(const StaircaseSignal& s, size_t m) {
  const double lo = m == 0 ? 0.0 : s.angles[m - 1];
  const double hi = m + 1 == s.levels.size() ? kPi : s.angles[m];
  return hi - lo;
}

// Removes waveform piece m, letting the piece on `keep_left ? left : right` take its time.
void absorb(StaircaseSignal& s, size_t m, bool into_left) {
  if (into_left) {
    // left piece extends to the end of m: drop the angle that started m
    s.angles.erase(s.angles.begin() + static_cast<std::ptrdiff_t>(m - 1));
  } else {
    // right piece starts where m started: drop the angle that ended m
    s.angles.erase(s.angles.begin() + static_cast<std::ptrdiff_t>(m));
  }
  s.levels.erase(s.levels.begin() + static_cast<std::ptrdiff_t>(m));
}

void merge_short_dwells(StaircaseSignal& s, double min_dwell, int& merged) {
  while (s.levels.size() > 1) {
    size_t shortest = 0;
    double shortest_len = dwell(s, 0);
    for (size_t m = 1; m < s.levels.size(); ++m) {
      const double len = dwell(s, m);
      if (len < shortest_len) {
        shortest = m;
        shortest_len = len;
      }
    }
    if (shortest_len >= min_dwell) break;
    ++merged;
    const size_t m = shortest;
    if (m == 0) {
      absorb(s, m, false);
    } else if (m + 1 == s.levels.size()) {
      absorb(s, m, true);
    } else if (s.levels[m - 1] == s.levels[m + 1]) {
      // fuse both neighbours into one piece
      s.levels.erase(s.levels.begin() + static_cast<std::ptrdiff_t>(m), s.levels.begin() + static_cast<std::ptrdiff_t>(m + 2));
      s.angles.erase(s.angles.begin() + static_cast<std::ptrdiff_t>(m - 1), s.angles.begin() + static_cast<std::ptrdiff_t>(m + 1));
    } else {
      absorb(s, m, dwell(s, m - 1) >= dwell(s, m + 1));
    }
  }
}

}  // namespace

StaircaseCheck validate_staircase(const StaircaseSignal& signal, const LevelSet& levels) {
  const auto fail = [](int index, std::string reason) { return StaircaseCheck{false, index, std::move(reason)}; };
  if (signal.levels.empty()) return fail(0, "empty waveform");
  if (signal.angles.size() + 1 != signal.levels.size()) return fail(0, "angle count must be level count minus one");
  for (size_t m = 0; m < signal.levels.size(); ++m) {
    if (!levels.contains(signal.levels[m], kLevelTol)) return fail(static_cast<int>(m), "level not in U");
  }
  for (size_t m = 0; m < signal.angles.size(); ++m) {
    const double phi = signal.angles[m];
    const double prev = m == 0 ? 0.0 : signal.angles[m - 1];
    if (!(phi > prev && phi < kPi)) return fail(static_cast<int>(m), "switching angles not strictly increasing in (0, pi)");
  }
  for (size_t m = 0; m + 1 < signal.levels.size(); ++m) {
    const double step = std::abs(signal.levels[m + 1] - signal.levels[m]);
    if (step == 0.0) return fail(static_cast<int>(m), "consecutive levels are equal");
    if (std::abs(step - levels.gap()) > kLevelTol) return fail(static_cast<int>(m), "transition skips a level");
  }
  return {};
}

double eval_signal(const StaircaseSignal& signal, double t) {
  if (!(t >= 0.0 && t < kPi)) throw DomainError("signal evaluated outside [0, pi): " + std::to_string(t));
  const auto it = std::upper_bound(signal.angles.begin(), signal.angles.end(), t);
  return signal.levels[static_cast<size_t>(it - signal.angles.begin())];
}

std::vector<double> sample_signal(const StaircaseSignal& signal, const TimeGrid& grid) {
  std::vector<double> out(static_cast<size_t>(grid.size()));
  for (int i = 0; i < grid.intervals(); ++i) out[static_cast<size_t>(i)] = eval_signal(signal, grid.node(i));
  out.back() = signal.levels.back();
  return out;
}

StaircaseSignal extract_unchecked(std::span<const double> u_samples, const LevelSet& levels, const TimeGrid& grid,
                                  double min_dwell, ExtractStats* stats) {
  if (static_cast<int>(u_samples.size()) != grid.size()) {
    throw ShapeError("expected " + std::to_string(grid.size()) + " samples, got " + std::to_string(u_samples.size()));
  }
  const double reach = 0.5 * levels.gap() + kLevelTol;
  StaircaseSignal s;
  for (int i = 0; i < grid.size(); ++i) {
    const double u = u_samples[static_cast<size_t>(i)];
    const double level = std::isfinite(u) ? levels[levels.nearest_index(u)] : 0.0;
    if (!std::isfinite(u) || std::abs(u - level) > reach) {
      throw ExtractionError("sample " + std::to_string(i) + " = " + std::to_string(u) + " is not near any level");
    }
    if (s.levels.empty()) {
      s.levels.push_back(level);
    } else if (level != s.levels.back()) {
      s.angles.push_back(0.5 * (grid.node(i - 1) + grid.node(i)));
      s.levels.push_back(level);
    }
  }
  int merged = 0;
  merge_short_dwells(s, min_dwell, merged);
  if (stats) stats->merged_intervals = merged;
  return s;
}

StaircaseSignal extract(std::span<const double> u_samples, const LevelSet& levels, const TimeGrid& grid,
                        double min_dwell, ExtractStats* stats) {
  StaircaseSignal s = extract_unchecked(u_samples, levels, grid, min_dwell, stats);
  if (const StaircaseCheck check = validate_staircase(s, levels); !check) {
    throw ValidationError("extracted signal is not a staircase: " + check.reason + " at index " +
                              std::to_string(check.index),
                          check.index);
  }
  return s;
}

}  // namespace shm
