#pragma once

// Piecewise-affine interpolant of u^2 over a uniform level set, its convex
// conjugate, the conjugate's subdifferential and its Moreau envelope.

#include <span>
#include <vector>

namespace shm {

/// Admissible control values u_1 < ... < u_L, uniformly spaced on [-1, 1].
class LevelSet {
 public:
  /// Uniform levels -1 = u_1 < ... < u_L = 1. Requires count >= 2.
  explicit LevelSet(int count = 3);

  /// Validates an explicit list (must be the uniform grid on [-1, 1] up to 1e-12).
  static LevelSet from_values(std::span<const double> values);

  int size() const { return static_cast<int>(levels_.size()); }
  double operator[](int k) const { return levels_[static_cast<size_t>(k)]; }
  const std::vector<double>& values() const { return levels_; }

  /// Spacing between adjacent levels, 2 / (L - 1).
  double gap() const { return gap_; }

  /// Index of the level closest to u (ties go to the lower level).
  int nearest_index(double u) const;

  bool contains(double u, double tol = 1e-12) const;

  bool operator==(const LevelSet& other) const { return levels_ == other.levels_; }

 private:
  std::vector<double> levels_;
  double gap_;
};

/// L(u): affine interpolation of u^2 between adjacent levels. Throws DomainError outside [-1, 1].
double penalty_eval(double u, const LevelSet& levels);

/// argmin_{v in [-1,1]} tau * L(v) + (v - x)^2 / 2, in closed form.
double penalty_prox(double x, double tau, const LevelSet& levels);

struct SubdiffInterval {
  double lo;
  double hi;
  bool is_singleton() const { return lo == hi; }
};

struct Envelope {
  double value;
  double grad;
};

/// Branch table of L*(w) = max_k (u_k w - u_k^2).
///
/// Breakpoints are w_k = u_k + u_{k+1} for k = 1..L-1. Beyond the outermost
/// breakpoints the first and last affine branches are extended, which is the
/// exact conjugate of L on the whole real line. The nominal ends
/// w_0 = w_1 - 4/(L-1) and w_L = w_{L-1} + 4/(L-1) are kept for reference.
class ConjugateTable {
 public:
  explicit ConjugateTable(const LevelSet& levels);

  const LevelSet& levels() const { return levels_; }
  std::span<const double> breakpoints() const { return breakpoints_; }
  double lower_end() const { return lower_end_; }
  double upper_end() const { return upper_end_; }

  double slope(int k) const { return levels_[k]; }
  double intercept(int k) const { return -levels_[k] * levels_[k]; }

  /// 0-based index of the affine branch active at w (right-continuous at breakpoints).
  int branch(double omega) const;

  double eval(double omega) const;
  SubdiffInterval subdiff(double omega) const;

  /// Moreau envelope min_v L*(v) + (w - v)^2 / (2 mu) and its derivative.
  Envelope smoothed(double omega, double mu) const;

  /// Distance from w to the closest breakpoint; writes its index when requested.
  double breakpoint_distance(double omega, int* index = nullptr) const;

 private:
  LevelSet levels_;
  std::vector<double> breakpoints_;
  double lower_end_;
  double upper_end_;
};

double conjugate_eval(double omega, const ConjugateTable& table);
SubdiffInterval conjugate_subdiff(double omega, const ConjugateTable& table);

/// Throws DomainError when mu <= 0.
Envelope smoothed_conjugate_grad(double omega, double mu, const ConjugateTable& table);

}  // namespace shm
