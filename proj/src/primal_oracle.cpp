#include "shm/primal_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "shm/errors.hpp"

namespace shm {
namespace {

constexpr double kEnumerationBudget = 1e7;

int cell_of(int node, const TimeGrid& grid, int cells) {
  return std::min(cells - 1, static_cast<int>((static_cast<long long>(node) * cells) / grid.intervals()));
}

double penalty_integral(std::span<const double> u, const TimeGrid& grid, const LevelSet& levels) {
  double acc = 0.0;
  for (int i = 0; i < grid.size(); ++i) acc += grid.weight(i) * penalty_eval(u[static_cast<size_t>(i)], levels);
  return acc;
}

}  // namespace

double primal_objective(std::span<const double> u_samples, const HarmonicSpec& spec, const PrimalConfig& cfg) {
  const TimeGrid grid(cfg.grid_size);
  const Eigen::VectorXd x = terminal_state(u_samples, spec, grid);
  return x.squaredNorm() / (2.0 * cfg.epsilon) + penalty_integral(u_samples, grid, cfg.levels);
}

PrimalResult primal_minimize(const HarmonicSpec& spec, const PrimalConfig& cfg) {
  spec.validate();
  if (!(cfg.epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const TimeGrid grid(cfg.grid_size);
  const SampledDynamics dynamics(spec, grid);
  const Eigen::VectorXd x0 = spec.x0();
  const int n = dynamics.dim();
  const int count = grid.size();

  // In the weighted inner product sum_i w_i u_i v_i the residual term has
  // gradient C(t_i)^T x / eps with Lipschitz constant lambda_max(sum w C C^T) / eps.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < count; ++i) {
    const Eigen::Map<const Eigen::VectorXd> c(dynamics.row(i).data(), n);
    gram.noalias() += grid.weight(i) * c * c.transpose();
  }
  const double lipschitz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().maxCoeff() / cfg.epsilon;
  const double step = cfg.step > 0.0 ? cfg.step : 1.0 / lipschitz;

  const auto objective = [&](const std::vector<double>& u, const Eigen::VectorXd& x) {
    return x.squaredNorm() / (2.0 * cfg.epsilon) + penalty_integral(u, grid, cfg.levels);
  };

  std::vector<double> u(static_cast<size_t>(count), 0.0);
  std::vector<double> u_prev = u;
  std::vector<double> y = u;
  Eigen::VectorXd x = x0 + dynamics.integrate(u);
  double f = objective(u, x);
  double momentum = 1.0;

  PrimalResult out;
  int quiet = 0;
  for (out.iterations = 0; out.iterations < cfg.max_iter; ++out.iterations) {
    const Eigen::VectorXd xy = x0 + dynamics.integrate(y);
    const Eigen::VectorXd scaled = xy / cfg.epsilon;
    u_prev.swap(u);
    for (int i = 0; i < count; ++i) {
      const double grad = dynamics.project(i, scaled);
      u[static_cast<size_t>(i)] = penalty_prox(y[static_cast<size_t>(i)] - step * grad, step, cfg.levels);
    }
    x = x0 + dynamics.integrate(u);
    const double f_new = objective(u, x);

    if (f_new > f) {
      // restart momentum from the last iterate
      momentum = 1.0;
      y = u;
    } else {
      const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double beta = (momentum - 1.0) / next;
      for (int i = 0; i < count; ++i) {
        y[static_cast<size_t>(i)] = u[static_cast<size_t>(i)] + beta * (u[static_cast<size_t>(i)] - u_prev[static_cast<size_t>(i)]);
      }
      momentum = next;
    }
    const double change = std::abs(f_new - f) / std::max(1.0, std::abs(f_new));
    f = f_new;
    quiet = change <= cfg.tol ? quiet + 1 : 0;
    if (quiet >= 50) {
      out.converged = true;
      ++out.iterations;
      break;
    }
  }
  out.u_samples = std::move(u);
  out.objective = f;
  return out;
}

std::vector<double> cells_to_samples(std::span<const double> cell_levels, const TimeGrid& grid) {
  const int cells = static_cast<int>(cell_levels.size());
  std::vector<double> u(static_cast<size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) u[static_cast<size_t>(i)] = cell_levels[static_cast<size_t>(cell_of(i, grid, cells))];
  return u;
}

std::vector<double> cell_average(std::span<const double> u_samples, const TimeGrid& grid, int cells) {
  if (static_cast<int>(u_samples.size()) != grid.size()) throw ShapeError("sample count does not match grid");
  if (cells < 1) throw DomainError("cell count must be positive");
  std::vector<double> sum(static_cast<size_t>(cells), 0.0);
  std::vector<double> weight(static_cast<size_t>(cells), 0.0);
  for (int i = 0; i < grid.size(); ++i) {
    const auto c = static_cast<size_t>(cell_of(i, grid, cells));
    sum[c] += grid.weight(i) * u_samples[static_cast<size_t>(i)];
    weight[c] += grid.weight(i);
  }
  for (size_t c = 0; c < sum.size(); ++c) sum[c] /= weight[c];
  return sum;
}

EnumerationResult enumerate_exhaustive(const HarmonicSpec& spec, const PrimalConfig& cfg) {
  spec.validate();
  const int cells = cfg.enum_grid;
  const int count = cfg.levels.size();
  if (cells < 1) throw DomainError("enumeration needs at least one cell");
  if (cells * std::log10(static_cast<double>(count)) > std::log10(kEnumerationBudget) + 1e-12) {
    throw BudgetError("enumeration of " + std::to_string(count) + "^" + std::to_string(cells) +
                      " assignments exceeds the budget of 1e7");
  }
  const TimeGrid grid(cfg.grid_size);
  const SampledDynamics dynamics(spec, grid);
  const int n = dynamics.dim();

  // F is affine in each cell's level apart from the residual norm, so tabulate
  // per-cell quadrature of C and of the node weights once.
  Eigen::MatrixXd cell_c = Eigen::MatrixXd::Zero(n, cells);
  std::vector<double> cell_w(static_cast<size_t>(cells), 0.0);
  for (int i = 0; i < grid.size(); ++i) {
    const int c = cell_of(i, grid, cells);
    const Eigen::Map<const Eigen::VectorXd> col(dynamics.row(i).data(), n);
    cell_c.col(c) += grid.weight(i) * col;
    cell_w[static_cast<size_t>(c)] += grid.weight(i);
  }
  std::vector<double> level_penalty(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) level_penalty[static_cast<size_t>(k)] = penalty_eval(cfg.levels[k], cfg.levels);

  const Eigen::VectorXd x0 = spec.x0();
  std::vector<int> digits(static_cast<size_t>(cells), 0);
  std::vector<int> best_digits = digits;
  double best = std::numeric_limits<double>::infinity();
  EnumerationResult out;
  for (;;) {
    Eigen::VectorXd x = x0;
    double pen = 0.0;
    for (int c = 0; c < cells; ++c) {
      const int k = digits[static_cast<size_t>(c)];
      x += cfg.levels[k] * cell_c.col(c);
      pen += cell_w[static_cast<size_t>(c)] * level_penalty[static_cast<size_t>(k)];
    }
    const double f = x.squaredNorm() / (2.0 * cfg.epsilon) + pen;
    ++out.evaluated;
    if (f < best) {
      best = f;
      best_digits = digits;
    }
    // odometer with the last cell fastest keeps the visit order lexicographic
    int c = cells - 1;
    while (c >= 0 && ++digits[static_cast<size_t>(c)] == count) digits[static_cast<size_t>(c--)] = 0;
    if (c < 0) break;
  }
  out.cell_levels.resize(static_cast<size_t>(cells));
  for (int c = 0; c < cells; ++c) out.cell_levels[static_cast<size_t>(c)] = cfg.levels[best_digits[static_cast<size_t>(c)]];
  out.u_samples = cells_to_samples(out.cell_levels, grid);
  out.objective = primal_objective(out.u_samples, spec, cfg);
  return out;
}

}  // namespace shm
