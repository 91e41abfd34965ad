#pragma once

// Primal-side reference solvers for
//   F(u) = |x(pi)|^2 / (2 eps) + int_0^pi L(u(t)) dt,  u(t) in [-1, 1],
// used to cross-check the dual method. Not tuned for speed.

#include <span>
#include <vector>

#include "shm/dynamics.hpp"
#include "shm/penalty.hpp"

namespace shm {

struct PrimalConfig {
  LevelSet levels{3};
  double epsilon = 1e-5;
  int grid_size = 20000;
  double step = 0.0;  // 0 selects 1 / Lipschitz constant of the residual term
  int max_iter = 20000;
  double tol = 1e-10;  // stop when the relative objective change stays below tol
  int enum_grid = 8;
};

/// Quadrature value of F. Throws ShapeError on length mismatch, DomainError for samples outside [-1, 1].
double primal_objective(std::span<const double> u_samples, const HarmonicSpec& spec, const PrimalConfig& cfg);

struct PrimalResult {
  std::vector<double> u_samples;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Accelerated proximal-gradient descent on the sampled control with
/// adaptive restart; L plus the box [-1, 1] is handled through its exact prox.
PrimalResult primal_minimize(const HarmonicSpec& spec, const PrimalConfig& cfg);

struct EnumerationResult {
  std::vector<double> cell_levels;  // one level per coarse cell
  std::vector<double> u_samples;    // the same assignment sampled on the grid
  double objective = 0.0;
  long long evaluated = 0;
};

/// Tries every assignment of a level to each of `enum_grid` equal cells and keeps
/// the lexicographically first minimizer. Throws BudgetError when L^enum_grid > 1e7.
EnumerationResult enumerate_exhaustive(const HarmonicSpec& spec, const PrimalConfig& cfg);

/// Piecewise-constant cell control sampled on the grid (node t belongs to cell floor(t cells / pi)).
std::vector<double> cells_to_samples(std::span<const double> cell_levels, const TimeGrid& grid);

/// Quadrature mean of a fine control over each of `cells` equal cells.
std::vector<double> cell_average(std::span<const double> u_samples, const TimeGrid& grid, int cells);

}  // namespace shm
