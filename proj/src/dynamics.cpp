#include "shm/dynamics.hpp"

#include <cmath>
#include <set>
#include <string>

#include "shm/errors.hpp"

namespace shm {
namespace {

constexpr double kTwoOverPi = 2.0 / kPi;

void check_frequencies(const std::vector<int>& freqs, const char* name) {
  std::set<int> seen;
  for (int e : freqs) {
    if (e <= 0 || e % 2 == 0) {
      throw DomainError(std::string(name) + " frequencies must be odd and positive, got " + std::to_string(e));
    }
    if (!seen.insert(e).second) throw DomainError(std::string(name) + " frequency repeated: " + std::to_string(e));
  }
}

void check_samples(std::span<const double> u_samples, const TimeGrid& grid) {
  if (static_cast<int>(u_samples.size()) != grid.size()) {
    throw ShapeError("expected " + std::to_string(grid.size()) + " samples, got " +
                     std::to_string(u_samples.size()));
  }
}

}  // namespace

void HarmonicSpec::validate() const {
  check_frequencies(ea, "cosine");
  check_frequencies(eb, "sine");
  if (a_target.size() != ea.size()) throw DomainError("cosine target length does not match its frequency list");
  if (b_target.size() != eb.size()) throw DomainError("sine target length does not match its frequency list");
  if (size() < 1) throw DomainError("at least one harmonic must be prescribed");
  for (double v : a_target) if (!std::isfinite(v)) throw DomainError("non-finite cosine target");
  for (double v : b_target) if (!std::isfinite(v)) throw DomainError("non-finite sine target");
}

Eigen::VectorXd HarmonicSpec::x0() const {
  Eigen::VectorXd x(size());
  for (int i = 0; i < na(); ++i) x[i] = a_target[static_cast<size_t>(i)];
  for (int i = 0; i < nb(); ++i) x[na() + i] = b_target[static_cast<size_t>(i)];
  return x;
}

TimeGrid::TimeGrid(int intervals) : intervals_(intervals), step_(kPi / intervals) {
  if (intervals < 2) throw DomainError("time grid needs at least two intervals");
}

Eigen::VectorXd eval_C(double t, const HarmonicSpec& spec) {
  Eigen::VectorXd c(spec.size());
  for (int i = 0; i < spec.na(); ++i) c[i] = -kTwoOverPi * std::cos(spec.ea[static_cast<size_t>(i)] * t);
  for (int i = 0; i < spec.nb(); ++i) c[spec.na() + i] = -kTwoOverPi * std::sin(spec.eb[static_cast<size_t>(i)] * t);
  return c;
}

Eigen::VectorXd terminal_state(std::span<const double> u_samples, const HarmonicSpec& spec, const TimeGrid& grid) {
  check_samples(u_samples, grid);
  Eigen::VectorXd x = spec.x0();
  for (int i = 0; i < grid.size(); ++i) {
    const double u = u_samples[static_cast<size_t>(i)];
    if (u == 0.0) continue;
    x += (grid.weight(i) * u) * eval_C(grid.node(i), spec);
  }
  return x;
}

FourierCoefficients fourier_closed_form(const StaircaseSignal& signal, const HarmonicSpec& spec) {
  if (signal.levels.size() != signal.angles.size() + 1) {
    throw DomainError("staircase signal needs exactly one more level than switching angles");
  }
  FourierCoefficients out{Eigen::VectorXd::Zero(spec.na()), Eigen::VectorXd::Zero(spec.nb())};
  const size_t pieces = signal.levels.size();
  for (size_t m = 0; m < pieces; ++m) {
    const double s = signal.levels[m];
    if (s == 0.0) continue;
    const double lo = m == 0 ? 0.0 : signal.angles[m - 1];
    const double hi = m + 1 == pieces ? kPi : signal.angles[m];
    for (int i = 0; i < spec.na(); ++i) {
      const double j = spec.ea[static_cast<size_t>(i)];
      out.a[i] += s * (std::sin(j * hi) - std::sin(j * lo)) / j;
    }
    for (int i = 0; i < spec.nb(); ++i) {
      const double j = spec.eb[static_cast<size_t>(i)];
      out.b[i] += s * (std::cos(j * lo) - std::cos(j * hi)) / j;
    }
  }
  out.a *= kTwoOverPi;
  out.b *= kTwoOverPi;
  return out;
}

FourierCoefficients fourier_quadrature(std::span<const double> u_samples, const HarmonicSpec& spec,
                                       const TimeGrid& grid) {
  check_samples(u_samples, grid);
  FourierCoefficients out{Eigen::VectorXd::Zero(spec.na()), Eigen::VectorXd::Zero(spec.nb())};
  for (int n = 0; n < grid.size(); ++n) {
    const double wu = grid.weight(n) * u_samples[static_cast<size_t>(n)];
    if (wu == 0.0) continue;
    const double t = grid.node(n);
    for (int i = 0; i < spec.na(); ++i) out.a[i] += wu * std::cos(spec.ea[static_cast<size_t>(i)] * t);
    for (int i = 0; i < spec.nb(); ++i) out.b[i] += wu * std::sin(spec.eb[static_cast<size_t>(i)] * t);
  }
  out.a *= kTwoOverPi;
  out.b *= kTwoOverPi;
  return out;
}

SampledDynamics::SampledDynamics(const HarmonicSpec& spec, const TimeGrid& grid)
    : grid_(grid), dim_(spec.size()), table_(static_cast<size_t>(grid.size()) * static_cast<size_t>(spec.size())) {
  for (int i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd c = eval_C(grid.node(i), spec);
    std::copy(c.data(), c.data() + dim_, table_.begin() + static_cast<std::ptrdiff_t>(i) * dim_);
  }
}

double SampledDynamics::project(int i, const Eigen::VectorXd& p) const {
  const double* c = table_.data() + static_cast<size_t>(i) * static_cast<size_t>(dim_);
  double acc = 0.0;
  for (int j = 0; j < dim_; ++j) acc += c[j] * p[j];
  return acc;
}

Eigen::VectorXd SampledDynamics::integrate(std::span<const double> values) const {
  check_samples(values, grid_);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  for (int i = 0; i < grid_.size(); ++i) {
    const double wv = grid_.weight(i) * values[static_cast<size_t>(i)];
    const double* c = table_.data() + static_cast<size_t>(i) * static_cast<size_t>(dim_);
    for (int j = 0; j < dim_; ++j) out[j] += wv * c[j];
  }
  return out;
}

}  // namespace shm
