#include "shm/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "shm/errors.hpp"

namespace shm {

LevelSet::LevelSet(int count) {
  if (count < 2) throw DomainError("level set needs at least two levels, got " + std::to_string(count));
  gap_ = 2.0 / (count - 1);
  levels_.resize(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) levels_[static_cast<size_t>(k)] = -1.0 + k * gap_;
  levels_.back() = 1.0;
}

LevelSet LevelSet::from_values(std::span<const double> values) {
  const int count = static_cast<int>(values.size());
  if (count < 2) throw DomainError("level set needs at least two levels");
  LevelSet canonical(count);
  for (int k = 0; k < count; ++k) {
    const double v = values[static_cast<size_t>(k)];
    if (!std::isfinite(v) || std::abs(v - canonical[k]) > 1e-12) {
      throw DomainError("levels must be uniformly spaced on [-1, 1]; level " + std::to_string(k + 1) +
                        " is " + std::to_string(v));
    }
  }
  return canonical;
}

int LevelSet::nearest_index(double u) const {
  const double pos = (u + 1.0) / gap_;
  int k = static_cast<int>(std::floor(pos));
  if (pos - k > 0.5) ++k;
  return std::clamp(k, 0, size() - 1);
}

bool LevelSet::contains(double u, double tol) const {
  return std::abs(levels_[static_cast<size_t>(nearest_index(u))] - u) <= tol;
}

double penalty_eval(double u, const LevelSet& levels) {
  if (!(u >= -1.0 && u <= 1.0)) throw DomainError("penalty argument outside [-1, 1]: " + std::to_string(u));
  const int last = levels.size() - 1;
  if (u == levels[last]) return 1.0;
  // Segment k with u in [u_k, u_{k+1}).
  int k = static_cast<int>(std::floor((u + 1.0) / levels.gap()));
  k = std::clamp(k, 0, last - 1);
  if (u < levels[k]) --k;
  else if (u >= levels[k + 1]) ++k;
  k = std::clamp(k, 0, last - 1);
  const double lo = levels[k];
  const double hi = levels[k + 1];
  if (u == lo) return lo * lo;
  return (hi + lo) * u - lo * hi;
}

double penalty_prox(double x, double tau, const LevelSet& levels) {
  if (!(tau > 0.0)) throw DomainError("prox step must be positive");
  const int count = levels.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Optimality: x - v in tau * dL(v) + normal cone of [-1, 1] at v.
  for (int k = 0; k < count; ++k) {
    const double uk = levels[k];
    const double left_slope = k == 0 ? -inf : levels[k - 1] + uk;
    const double right_slope = k == count - 1 ? inf : uk + levels[k + 1];
    const double r = x - uk;
    if (r >= tau * left_slope && r <= tau * right_slope) return uk;
    if (k + 1 < count) {
      const double v = x - tau * right_slope;
      if (v > uk && v < levels[k + 1]) return v;
    }
  }
  return std::clamp(x, -1.0, 1.0);  // unreachable for finite x
}

ConjugateTable::ConjugateTable(const LevelSet& levels) : levels_(levels) {
  const int count = levels_.size();
  breakpoints_.resize(static_cast<size_t>(count - 1));
  for (int k = 0; k + 1 < count; ++k) breakpoints_[static_cast<size_t>(k)] = levels_[k] + levels_[k + 1];
  const double offset = 4.0 / (count - 1);
  lower_end_ = breakpoints_.front() - offset;
  upper_end_ = breakpoints_.back() + offset;
}

int ConjugateTable::branch(double omega) const {
  return static_cast<int>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), omega) -
                          breakpoints_.begin());
}

double ConjugateTable::eval(double omega) const {
  const int k = branch(omega);
  const double uk = levels_[k];
  return uk * omega - uk * uk;
}

SubdiffInterval ConjugateTable::subdiff(double omega) const {
  const int k = branch(omega);
  if (k > 0 && breakpoints_[static_cast<size_t>(k - 1)] == omega) return {levels_[k - 1], levels_[k]};
  return {levels_[k], levels_[k]};
}

Envelope ConjugateTable::smoothed(double omega, double mu) const {
  if (!(mu > 0.0)) throw DomainError("smoothing parameter must be positive");
  // Kink zone k is [w_k + mu u_k, w_k + mu u_{k+1}]; flat branch k sits between
  // kink zones k-1 and k, where the prox point is w - mu u_k.
  const int kinks = static_cast<int>(breakpoints_.size());
  int k = 0;
  while (k < kinks && omega > breakpoints_[static_cast<size_t>(k)] + mu * levels_[k + 1]) ++k;
  if (k < kinks) {
    const double bk = breakpoints_[static_cast<size_t>(k)];
    if (omega >= bk + mu * levels_[k]) {
      const double d = omega - bk;
      return {levels_[k] * levels_[k + 1] + d * d / (2.0 * mu), d / mu};
    }
  }
  const double uk = levels_[k];
  return {uk * omega - uk * uk - 0.5 * mu * uk * uk, uk};
}

double ConjugateTable::breakpoint_distance(double omega, int* index) const {
  double best = std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (size_t k = 0; k < breakpoints_.size(); ++k) {
    const double d = std::abs(omega - breakpoints_[k]);
    if (d < best) {
      best = d;
      best_k = static_cast<int>(k);
    }
  }
  if (index) *index = best_k;
  return best;
}

double conjugate_eval(double omega, const ConjugateTable& table) { return table.eval(omega); }

SubdiffInterval conjugate_subdiff(double omega, const ConjugateTable& table) { return table.subdiff(omega); }

Envelope smoothed_conjugate_grad(double omega, double mu, const ConjugateTable& table) {
  return table.smoothed(omega, mu);
}

}  // namespace shm
