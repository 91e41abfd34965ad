#pragma once

// Conversion between grid samples and staircase signals.

#include <span>
#include <string>
#include <vector>

#include "shm/dynamics.hpp"
#include "shm/penalty.hpp"
#include "shm/staircase_signal.hpp"

namespace shm {

struct StaircaseCheck {
  bool ok = true;
  int index = -1;  // first offending waveform index, -1 when ok
  std::string reason;

  explicit operator bool() const { return ok; }
};

/// Checks level membership, angle ordering in (0, pi), s_m != s_{m+1} and the
/// staircase property |s_{m+1} - s_m| = gap (no level of U skipped).
StaircaseCheck validate_staircase(const StaircaseSignal& signal, const LevelSet& levels);

/// s_m for phi_m <= t < phi_{m+1}. Throws DomainError outside [0, pi).
double eval_signal(const StaircaseSignal& signal, double t);

/// Values at every grid node; the node t = pi takes the last level.
std::vector<double> sample_signal(const StaircaseSignal& signal, const TimeGrid& grid);

struct ExtractStats {
  int merged_intervals = 0;
};

/// Snaps samples to U, places each switch halfway between the last node of one
/// level and the first node of the next, then merges dwell intervals shorter
/// than `min_dwell`.
///
/// Throws ExtractionError if a sample is farther than half a level gap from U,
/// ShapeError on a sample/grid length mismatch, and ValidationError if the
/// result is not a staircase.
StaircaseSignal extract(std::span<const double> u_samples, const LevelSet& levels, const TimeGrid& grid,
                        double min_dwell, ExtractStats* stats = nullptr);

/// Same as extract() without the final staircase validation.
StaircaseSignal extract_unchecked(std::span<const double> u_samples, const LevelSet& levels,
                                  const TimeGrid& grid, double min_dwell, ExtractStats* stats = nullptr);

}  // namespace shm
