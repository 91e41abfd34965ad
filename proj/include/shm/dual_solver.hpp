#pragma once

// Minimization of the dual functional
//   J(p) = int_0^pi L*(C(t)^T p) dt + (eps/2)|p|^2 + <x0, p>
// and recovery of the staircase control from u(t) in dL*(C(t)^T p).

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shm/dynamics.hpp"
#include "shm/penalty.hpp"
#include "shm/staircase_signal.hpp"

namespace shm {

struct SolverConfig {
  LevelSet levels{3};
  double epsilon = 1e-5;
  int grid_size = 20000;
  std::vector<double> mu_schedule{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::optional<double> grad_tol;  // defaults to 1e-9 * N
  int max_iter = 5000;             // per smoothing stage
  double snap_tol = 1e-9;
  double min_dwell = 1e-4;
  double warm_mu_start = 1e-3;  // warm-started solves skip schedule entries above this

  /// Throws DomainError on eps <= 0, non-decreasing mu schedule, bad tolerances.
  void validate() const;
  double effective_grad_tol(int dim) const { return grad_tol.value_or(1e-9 * dim); }
};

struct StageLog {
  double mu = 0.0;
  int iterations = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  bool converged = false;

  bool operator==(const StageLog&) const = default;
};

struct SolveReport {
  Eigen::VectorXd p_opt;
  std::vector<double> u_samples;
  StaircaseSignal signal;
  bool staircase_valid = false;
  int staircase_violation = -1;
  int merged_intervals = 0;
  FourierCoefficients achieved;  // closed form, from `signal`
  Eigen::VectorXd x_terminal;    // x0 - [achieved.a; achieved.b]
  double residual_norm = 0.0;
  double duality_gap_check = 0.0;
  double objective_value = 0.0;  // exact (unsmoothed) J at p_opt
  double final_grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<StageLog> log;
};

/// Quadrature model of J on a fixed grid. Immutable; safe to share across threads.
class DualProblem {
 public:
  DualProblem(const HarmonicSpec& spec, const SolverConfig& cfg);

  int dim() const { return dynamics_.dim(); }
  const TimeGrid& grid() const { return dynamics_.grid(); }
  const ConjugateTable& table() const { return table_; }
  const Eigen::VectorXd& x0() const { return x0_; }
  double epsilon() const { return epsilon_; }

  /// J with L* replaced by its Moreau envelope; mu == 0 evaluates the exact L*.
  double objective(const Eigen::VectorXd& p, double mu) const;

  /// Smoothed value; writes the gradient int C grad(L*_mu)(C^T p) + eps p + x0.
  double value_and_gradient(const Eigen::VectorXd& p, double mu, Eigen::VectorXd& grad) const;

  /// grad(L*_mu)(C(t_i)^T p) at every node.
  std::vector<double> smoothed_control(const Eigen::VectorXd& p, double mu) const;

  /// Selection from dL*(C(t_i)^T p); nodes within snap_tol of a breakpoint
  /// take the side of the nearest unambiguous node.
  std::vector<double> recover_control(const Eigen::VectorXd& p, double snap_tol) const;

 private:
  SampledDynamics dynamics_;
  ConjugateTable table_;
  Eigen::VectorXd x0_;
  double epsilon_;
};

double dual_objective(const Eigen::VectorXd& p, const HarmonicSpec& spec, const SolverConfig& cfg, double mu);

/// Throws DomainError for mu <= 0.
Eigen::VectorXd dual_gradient(const Eigen::VectorXd& p, const HarmonicSpec& spec, const SolverConfig& cfg, double mu);

std::vector<double> recover_control(const Eigen::VectorXd& p, const HarmonicSpec& spec, const SolverConfig& cfg);

/// Smoothing continuation with Barzilai-Borwein steps and a nonmonotone
/// Armijo line search, warm started from `start` (zero by default).
/// Non-convergence is reported, not thrown; a NaN objective throws NumericalError.
SolveReport minimize(const HarmonicSpec& spec, const SolverConfig& cfg,
                     const std::optional<Eigen::VectorXd>& start = std::nullopt);

/// |x_terminal + eps p_opt| / max(1, eps |p_opt|).
double verify_duality(const SolveReport& report, const SolverConfig& cfg);

/// sqrt(4 pi eps |L|_inf) with |L|_inf = 1.
double approximate_control_bound(double epsilon);

}  // namespace shm
