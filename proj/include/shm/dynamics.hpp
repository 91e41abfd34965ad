#pragma once

// Harmonic dynamics x'(t) = C(t) u(t), x(0) = [a_target; b_target] on [0, pi).
// x(pi) is the gap between the target Fourier coefficients and those of u.

#include <Eigen/Core>
#include <span>
#include <vector>

#include "shm/staircase_signal.hpp"

namespace shm {

inline constexpr double kPi = 3.14159265358979323846;

/// Frequencies with prescribed cosine (a) and sine (b) coefficients.
struct HarmonicSpec {
  std::vector<int> ea;
  std::vector<int> eb;
  std::vector<double> a_target;
  std::vector<double> b_target;

  int na() const { return static_cast<int>(ea.size()); }
  int nb() const { return static_cast<int>(eb.size()); }
  int size() const { return na() + nb(); }

  /// Throws DomainError: even/non-positive/duplicate frequencies, target length mismatch, N = 0.
  void validate() const;

  /// [a_target; b_target].
  Eigen::VectorXd x0() const;
};

/// Uniform nodes t_i = i pi / G, i = 0..G, with composite trapezoid weights.
class TimeGrid {
 public:
  explicit TimeGrid(int intervals);

  int intervals() const { return intervals_; }
  int size() const { return intervals_ + 1; }
  double step() const { return step_; }
  double node(int i) const { return i == intervals_ ? kPi : i * step_; }
  double weight(int i) const { return (i == 0 || i == intervals_) ? 0.5 * step_ : step_; }

 private:
  int intervals_;
  double step_;
};

/// Column [C^a(t); C^b(t)], C^a_i = -(2/pi) cos(ea_i t), C^b_i = -(2/pi) sin(eb_i t).
Eigen::VectorXd eval_C(double t, const HarmonicSpec& spec);

/// x0 + sum_i w_i C(t_i) u_i. Throws ShapeError if u does not have one sample per node.
Eigen::VectorXd terminal_state(std::span<const double> u_samples, const HarmonicSpec& spec,
                               const TimeGrid& grid);

struct FourierCoefficients {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

/// Exact coefficients of a piecewise-constant signal.
FourierCoefficients fourier_closed_form(const StaircaseSignal& signal, const HarmonicSpec& spec);

/// Trapezoid approximation of the same integrals from grid samples.
FourierCoefficients fourier_quadrature(std::span<const double> u_samples, const HarmonicSpec& spec,
                                       const TimeGrid& grid);

/// C(t_i) tabulated on a grid, row-major (node, component).
class SampledDynamics {
 public:
  SampledDynamics(const HarmonicSpec& spec, const TimeGrid& grid);

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  std::span<const double> row(int i) const {
    return {table_.data() + static_cast<size_t>(i) * static_cast<size_t>(dim_), static_cast<size_t>(dim_)};
  }

  /// C(t_i)^T p.
  double project(int i, const Eigen::VectorXd& p) const;

  /// sum_i w_i C(t_i) v_i, summed in node order.
  Eigen::VectorXd integrate(std::span<const double> values) const;

 private:
  TimeGrid grid_;
  int dim_;
  std::vector<double> table_;
};

}  // namespace shm
