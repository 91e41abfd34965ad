#include "shm/dual_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "shm/errors.hpp"
#include "shm/waveform.hpp"

namespace shm {
namespace {

constexpr int kNonmonotoneMemory = 10;
constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-12;
constexpr double kMaxStep = 1e12;
constexpr double kRoundoff = 1e-12;  // relative objective change treated as noise

struct StageResult {
  int iterations = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
};

StageResult bb_stage(const DualProblem& problem, Eigen::VectorXd& p, double mu, double tol, int max_iter) {
  Eigen::VectorXd g(problem.dim());
  Eigen::VectorXd g_trial(problem.dim());
  double f = problem.value_and_gradient(p, mu, g);
  if (!std::isfinite(f)) throw NumericalError("dual objective is not finite at the starting point");

  std::deque<double> recent{f};
  double alpha = 1.0 / (g.norm() + 1.0);
  StageResult out;
  for (;;) {
    out.grad_norm = g.norm();
    if (out.grad_norm <= tol) {
      out.converged = true;
      break;
    }
    if (out.iterations >= max_iter) break;

    const double reference = *std::max_element(recent.begin(), recent.end());
    const double g2 = out.grad_norm * out.grad_norm;
    double step = alpha;
    Eigen::VectorXd trial;
    double f_trial = 0.0;
    bool accepted = false;
    while (step >= 1e-30) {
      trial = p - step * g;
      f_trial = problem.value_and_gradient(trial, mu, g_trial);
      if (!std::isfinite(f_trial)) throw NumericalError("dual objective evaluated to NaN or infinity");
      if (f_trial <= reference - kArmijo * step * g2) {
        accepted = true;
        break;
      }
      // Approximate Armijo (Hager-Zhang) once objective differences are at round-off level.
      if (std::abs(f_trial - f) <= kRoundoff * std::abs(f) && g.dot(g_trial) >= -(1.0 - 2.0 * kArmijo) * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stalled at round-off level

    const Eigen::VectorXd s = trial - p;
    const Eigen::VectorXd y = g_trial - g;
    const double sy = s.dot(y);
    alpha = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, kMinStep, kMaxStep) : std::clamp(1.0 / g_trial.norm(), kMinStep, kMaxStep);

    p = std::move(trial);
    g.swap(g_trial);
    f = f_trial;
    recent.push_back(f);
    if (static_cast<int>(recent.size()) > kNonmonotoneMemory) recent.pop_front();
    ++out.iterations;
  }
  out.objective = f;
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (grid_size < 2) throw DomainError("grid size must be at least 2");
  if (mu_schedule.empty()) throw DomainError("smoothing schedule must not be empty");
  for (size_t k = 0; k < mu_schedule.size(); ++k) {
    if (!(mu_schedule[k] > 0.0)) throw DomainError("smoothing parameters must be positive");
    if (k > 0 && !(mu_schedule[k] < mu_schedule[k - 1])) throw DomainError("smoothing schedule must be strictly decreasing");
  }
  if (grad_tol && !(*grad_tol > 0.0)) throw DomainError("gradient tolerance must be positive");
  if (max_iter < 0) throw DomainError("max_iter must be non-negative");
  if (!(snap_tol >= 0.0)) throw DomainError("snap tolerance must be non-negative");
  if (!(min_dwell >= 0.0)) throw DomainError("minimum dwell must be non-negative");
  if (!(warm_mu_start > 0.0)) throw DomainError("warm-start smoothing level must be positive");
}

DualProblem::DualProblem(const HarmonicSpec& spec, const SolverConfig& cfg)
    : dynamics_(spec, TimeGrid(cfg.grid_size)), table_(cfg.levels), x0_(spec.x0()), epsilon_(cfg.epsilon) {}

double DualProblem::objective(const Eigen::VectorXd& p, double mu) const {
  if (mu < 0.0) throw DomainError("smoothing parameter must be non-negative");
  const TimeGrid& grid = dynamics_.grid();
  double integral = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double omega = dynamics_.project(i, p);
    integral += grid.weight(i) * (mu == 0.0 ? table_.eval(omega) : table_.smoothed(omega, mu).value);
  }
  return integral + 0.5 * epsilon_ * p.squaredNorm() + x0_.dot(p);
}

double DualProblem::value_and_gradient(const Eigen::VectorXd& p, double mu, Eigen::VectorXd& grad) const {
  if (!(mu > 0.0)) throw DomainError("gradient requires a positive smoothing parameter");
  const TimeGrid& grid = dynamics_.grid();
  const int n = dim();
  grad.setZero(n);
  double integral = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const std::span<const double> c = dynamics_.row(i);
    double omega = 0.0;
    for (int j = 0; j < n; ++j) omega += c[static_cast<size_t>(j)] * p[j];
    const Envelope env = table_.smoothed(omega, mu);
    const double w = grid.weight(i);
    integral += w * env.value;
    const double wg = w * env.grad;
    if (wg != 0.0) {
      for (int j = 0; j < n; ++j) grad[j] += wg * c[static_cast<size_t>(j)];
    }
  }
  grad += epsilon_ * p + x0_;
  return integral + 0.5 * epsilon_ * p.squaredNorm() + x0_.dot(p);
}

std::vector<double> DualProblem::smoothed_control(const Eigen::VectorXd& p, double mu) const {
  const TimeGrid& grid = dynamics_.grid();
  std::vector<double> u(static_cast<size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) u[static_cast<size_t>(i)] = table_.smoothed(dynamics_.project(i, p), mu).grad;
  return u;
}

std::vector<double> DualProblem::recover_control(const Eigen::VectorXd& p, double snap_tol) const {
  const TimeGrid& grid = dynamics_.grid();
  const int count = grid.size();
  const LevelSet& levels = table_.levels();
  std::vector<double> omega(static_cast<size_t>(count));
  std::vector<double> u(static_cast<size_t>(count));
  std::vector<int> ambiguous_kink(static_cast<size_t>(count), -1);
  for (int i = 0; i < count; ++i) {
    const double w = dynamics_.project(i, p);
    omega[static_cast<size_t>(i)] = w;
    int k = 0;
    if (table_.breakpoint_distance(w, &k) <= snap_tol) {
      ambiguous_kink[static_cast<size_t>(i)] = k;
    } else {
      u[static_cast<size_t>(i)] = table_.subdiff(w).lo;
    }
  }
  for (int i = 0; i < count; ++i) {
    const int k = ambiguous_kink[static_cast<size_t>(i)];
    if (k < 0) continue;
    const double kink = table_.breakpoints()[static_cast<size_t>(k)];
    int neighbour = -1;
    for (int d = 1; d < count && neighbour < 0; ++d) {
      if (i - d >= 0 && ambiguous_kink[static_cast<size_t>(i - d)] < 0) neighbour = i - d;
      else if (i + d < count && ambiguous_kink[static_cast<size_t>(i + d)] < 0) neighbour = i + d;
      else if (i - d < 0 && i + d >= count) break;
    }
    const bool upper = neighbour >= 0 && omega[static_cast<size_t>(neighbour)] > kink;
    u[static_cast<size_t>(i)] = upper ? levels[k + 1] : levels[k];
  }
  return u;
}

double dual_objective(const Eigen::VectorXd& p, const HarmonicSpec& spec, const SolverConfig& cfg, double mu) {
  return DualProblem(spec, cfg).objective(p, mu);
}

Eigen::VectorXd dual_gradient(const Eigen::VectorXd& p, const HarmonicSpec& spec, const SolverConfig& cfg, double mu) {
  Eigen::VectorXd grad;
  DualProblem(spec, cfg).value_and_gradient(p, mu, grad);
  return grad;
}

std::vector<double> recover_control(const Eigen::VectorXd& p, const HarmonicSpec& spec, const SolverConfig& cfg) {
  return DualProblem(spec, cfg).recover_control(p, cfg.snap_tol);
}

SolveReport minimize(const HarmonicSpec& spec, const SolverConfig& cfg, const std::optional<Eigen::VectorXd>& start) {
  spec.validate();
  cfg.validate();
  const DualProblem problem(spec, cfg);
  const int n = problem.dim();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  if (start) {
    if (start->size() != n) throw ShapeError("warm start has dimension " + std::to_string(start->size()) + ", expected " + std::to_string(n));
    p = *start;
  }
  const double tol = cfg.effective_grad_tol(n);

  std::vector<double> schedule;
  for (double mu : cfg.mu_schedule) {
    if (!start || mu <= cfg.warm_mu_start) schedule.push_back(mu);
  }
  if (schedule.empty()) schedule.push_back(cfg.mu_schedule.back());

  SolveReport report;
  for (double mu : schedule) {
    const StageResult stage = bb_stage(problem, p, mu, tol, cfg.max_iter);
    report.log.push_back({mu, stage.iterations, stage.objective, stage.grad_norm, stage.converged});
    report.iterations += stage.iterations;
  }
  report.converged = report.log.back().converged;
  report.final_grad_norm = report.log.back().grad_norm;
  report.p_opt = p;
  report.u_samples = problem.recover_control(p, cfg.snap_tol);

  ExtractStats stats;
  report.signal = extract_unchecked(report.u_samples, cfg.levels, problem.grid(), cfg.min_dwell, &stats);
  report.merged_intervals = stats.merged_intervals;
  const StaircaseCheck check = validate_staircase(report.signal, cfg.levels);
  report.staircase_valid = check.ok;
  report.staircase_violation = check.index;

  report.achieved = fourier_closed_form(report.signal, spec);
  report.x_terminal = problem.x0();
  report.x_terminal.head(spec.na()) -= report.achieved.a;
  report.x_terminal.tail(spec.nb()) -= report.achieved.b;
  report.residual_norm = report.x_terminal.norm();
  report.objective_value = problem.objective(p, 0.0);
  if (!std::isfinite(report.objective_value)) throw NumericalError("dual objective is not finite at the solution");
  report.duality_gap_check = verify_duality(report, cfg);
  return report;
}

double verify_duality(const SolveReport& report, const SolverConfig& cfg) {
  const double scale = std::max(1.0, cfg.epsilon * report.p_opt.norm());
  return (report.x_terminal + cfg.epsilon * report.p_opt).norm() / scale;
}

double approximate_control_bound(double epsilon) { return std::sqrt(4.0 * kPi * epsilon); }

}  // namespace shm
