// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "shm/cli.hpp"
#include "shm/dual_solver.hpp"
#include "shm/dynamics.hpp"
#include "shm/penalty.hpp"
#include "shm/primal_oracle.hpp"
#include "shm/waveform.hpp"

using namespace shm;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Criteria 1-3 share the sweep.
void check_sweep() {
  const cli::RunConfig cfg;  // E_a = E_b = {1,5,7,11,13}, eps = 1e-5, U = {-1,0,1}, 33 m in [-0.8, 0.8]
  const double bound = approximate_control_bound(cfg.solver.epsilon);

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<cli::SweepPoint> points = cli::run_sweep(cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  int converged = 0, staircase = 0, bounded = 0;
  double worst_residual = 0.0, worst_coeff = 0.0, worst_duality = 0.0;
  int dual_ok = 0, dual_checked = 0;
  for (const cli::SweepPoint& pt : points) {
    const SolveReport& r = pt.report;
    converged += r.converged;
    staircase += r.staircase_valid;
    bounded += r.residual_norm <= bound;
    worst_residual = std::max(worst_residual, r.residual_norm);

    const HarmonicSpec spec = cfg.sweep_spec(pt.m);
    for (int j = 0; j < spec.na(); ++j) worst_coeff = std::max(worst_coeff, std::abs(r.achieved.a[j] - spec.a_target[static_cast<size_t>(j)]));
    for (int j = 0; j < spec.nb(); ++j) worst_coeff = std::max(worst_coeff, std::abs(r.achieved.b[j] - spec.b_target[static_cast<size_t>(j)]));

    if (r.converged) {
      ++dual_checked;
      dual_ok += r.duality_gap_check <= 1e-3;
      worst_duality = std::max(worst_duality, r.duality_gap_check);
    }
  }
  const int n = static_cast<int>(points.size());
  report(1, "sweep reproduction",
         n == 33 && converged == n && staircase == n && bounded == n && seconds <= 60.0,
         fmt("%d/%d converged, %d/%d staircase-valid, %d/%d with residual <= %.4e (max %.3e), %.1f s (budget 60 s)",
             converged, n, staircase, n, bounded, n, bound, worst_residual, seconds));
  report(2, "target attainment", worst_coeff <= 1.13e-2,
         fmt("max component-wise coefficient error %.3e (limit 1.13e-2)", worst_coeff));
  report(3, "duality relation", dual_checked > 0 && dual_ok == dual_checked,
         fmt("%d/%d converged solves with verify_duality <= 1e-3 (max %.3e)", dual_ok, dual_checked, worst_duality));
}

void check_conjugate() {
  const int u_intervals = 10000;  // 10001 nodes; contains every level for L in {2,3,5,9}
  const int omega_points = 1000;
  double worst = 0.0, worst_jump = 0.0;
  for (int count : {2, 3, 5, 9}) {
    const LevelSet levels(count);
    const ConjugateTable table(levels);
    std::vector<double> us(u_intervals + 1), pen(u_intervals + 1);
    for (int i = 0; i <= u_intervals; ++i) {
      us[static_cast<size_t>(i)] = -1.0 + 2.0 * i / u_intervals;
      pen[static_cast<size_t>(i)] = penalty_eval(us[static_cast<size_t>(i)], levels);
    }
    for (int k = 0; k < omega_points; ++k) {
      const double omega = -4.0 + 8.0 * k / (omega_points - 1);
      double best = -std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < us.size(); ++i) best = std::max(best, us[i] * omega - pen[i]);
      worst = std::max(worst, std::abs(best - conjugate_eval(omega, table)));
    }
    // adjacent affine branches agree at each breakpoint
    for (size_t k = 0; k < table.breakpoints().size(); ++k) {
      const double w = table.breakpoints()[k];
      const double left = table.slope(static_cast<int>(k)) * w + table.intercept(static_cast<int>(k));
      const double right = table.slope(static_cast<int>(k) + 1) * w + table.intercept(static_cast<int>(k) + 1);
      const double scale = std::max(1.0, std::abs(left));
      worst_jump = std::max(worst_jump, std::abs(left - right) / scale);
    }
  }
  const double machine = 4 * std::numeric_limits<double>::epsilon();
  report(4, "conjugate correctness", worst <= 1e-6 && worst_jump <= machine,
         fmt("max brute-force deviation %.3e (limit 1e-6), max breakpoint jump %.3e (limit %.1e)", worst, worst_jump,
             machine));
}

void check_gradient() {
  std::mt19937_64 rng(2718);
  const cli::RunConfig run;
  const HarmonicSpec spec = run.sweep_spec(0.5);
  const DualProblem problem(spec, run.solver);
  const int n = problem.dim();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_mu(-6.0, -1.0);
  std::uniform_real_distribution<double> log_scale(-1.0, 1.5);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd p(n);
    for (int j = 0; j < n; ++j) p[j] = normal(rng);
    p *= std::pow(10.0, log_scale(rng));
    const double mu = std::pow(10.0, log_mu(rng));
    Eigen::VectorXd g;
    problem.value_and_gradient(p, mu, g);
    Eigen::VectorXd fd(n);
    const double h = 1e-7 * std::max(1.0, p.norm());
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[j] = h;
      fd[j] = (problem.objective(p + e, mu) - problem.objective(p - e, mu)) / (2 * h);
    }
    worst = std::max(worst, (fd - g).norm() / g.norm());
  }
  report(5, "gradient check", worst <= 1e-5,
         fmt("max relative error %.3e over 50 random (p, mu) pairs (limit 1e-5)", worst));
}

void check_small_instance() {
  const HarmonicSpec spec{{1}, {1}, {0.5}, {0.3}};
  SolverConfig dcfg;
  dcfg.epsilon = 1e-4;
  PrimalConfig pcfg;
  pcfg.epsilon = 1e-4;
  pcfg.enum_grid = 8;

  const SolveReport dual = minimize(spec, dcfg);
  const double j_opt = dual_objective(dual.p_opt, spec, dcfg, 0.0);
  const double f_dual = primal_objective(dual.u_samples, spec, pcfg);
  const double gap = std::abs(f_dual + j_opt);

  // Weak duality makes -J a lower bound for every admissible control, so the
  // enumerated optimum can undercut F(u_dual) by at most the duality gap.
  const EnumerationResult best = enumerate_exhaustive(spec, pcfg);
  const double coarse_gap = best.objective - f_dual;
  const bool dominance = best.objective >= f_dual - gap - 1e-6;
  report(6, "small-instance oracle equivalence", dual.converged && gap <= 1e-3 && dominance,
         fmt("|F(u_dual) + J(p_opt)| = %.3e (limit 1e-3); enumeration over %lld assignments: best F = %.6e, "
             "F(u_dual) = %.6e, coarse-cell gap %.3e (allowed undercut %.3e)",
             gap, static_cast<long long>(best.evaluated), best.objective, f_dual, coarse_gap, gap + 1e-6));
}

StaircaseSignal random_midpoint_signal(std::mt19937_64& rng, const TimeGrid& grid) {
  std::uniform_int_distribution<int> switches_dist(0, 16);
  std::uniform_int_distribution<int> cell_dist(0, grid.intervals() - 1);
  std::uniform_int_distribution<int> level_dist(-1, 1);
  std::vector<int> cells;
  const int switches = switches_dist(rng);
  while (static_cast<int>(cells.size()) < switches) {
    const int c = cell_dist(rng);
    if (std::find(cells.begin(), cells.end(), c) == cells.end()) cells.push_back(c);
  }
  std::sort(cells.begin(), cells.end());
  StaircaseSignal s;
  s.levels.push_back(level_dist(rng));
  for (int c : cells) {
    s.angles.push_back(0.5 * (grid.node(c) + grid.node(c + 1)));
    double next = s.levels.back();
    while (next == s.levels.back()) next = level_dist(rng);
    s.levels.push_back(next);
  }
  return s;
}

void check_fourier() {
  std::mt19937_64 rng(1618);
  const TimeGrid grid(100000);
  const std::vector<int> freqs{1, 3, 5, 7, 9, 11, 13};
  const HarmonicSpec spec{freqs, freqs, std::vector<double>(freqs.size()), std::vector<double>(freqs.size())};
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const StaircaseSignal sig = random_midpoint_signal(rng, grid);
    const FourierCoefficients exact = fourier_closed_form(sig, spec);
    const FourierCoefficients quad = fourier_quadrature(sample_signal(sig, grid), spec, grid);
    worst = std::max({worst, (exact.a - quad.a).cwiseAbs().maxCoeff(), (exact.b - quad.b).cwiseAbs().maxCoeff()});
  }
  const StaircaseSignal square{{1.0}, {}};
  const double b1 = fourier_closed_form(square, HarmonicSpec{{}, {1}, {}, {0.0}}).b[0];
  const double b1_err = std::abs(b1 - 4.0 / kPi);
  report(7, "closed-form vs quadrature Fourier", worst <= 1e-7 && b1_err <= 1e-8,
         fmt("max deviation %.3e on 20 random staircases at G = 1e5 (limit 1e-7); square-wave |b_1 - 4/pi| = %.3e "
             "(limit 1e-8)",
             worst, b1_err));
}

void check_trivial() {
  cli::RunConfig cfg;
  const SolveReport r = minimize(cfg.spec(), cfg.solver);
  const bool p_zero = r.p_opt.isZero(0.0);
  const bool u_zero = std::all_of(r.u_samples.begin(), r.u_samples.end(), [](double u) { return u == 0.0; });
  const bool signal_zero = r.signal.levels == std::vector<double>{0.0} && r.signal.angles.empty();
  report(8, "trivial-instance exactness", p_zero && u_zero && signal_zero && r.residual_norm == 0.0,
         fmt("max|p| = %.3e, u identically zero: %s, signal M = %d, residual = %.3e", r.p_opt.cwiseAbs().maxCoeff(),
             u_zero ? "yes" : "no", r.signal.switches(), r.residual_norm));
}

}  // namespace

int main() {
  check_sweep();
  check_conjugate();
  check_gradient();
  check_small_instance();
  check_fourier();
  check_trivial();
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
