#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fracdim/core.hpp"

namespace fracdim {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double initial_step = 0.0;  // 0 selects automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::int64_t max_steps = 500'000'000;
};

namespace dopri {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension coefficients (Hairer's DOPRI5).
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace dopri

/// Stage storage for one Dormand-Prince attempt. k[0] holds f(t, y) on entry
/// and k[6] holds f(t + h, y_new) on exit (first-same-as-last).
struct DopriStages {
  std::array<Eigen::VectorXd, 7> k;
  Eigen::VectorXd y_new;
  Eigen::VectorXd tmp;

  explicit DopriStages(Index n = 0) {
    for (auto& v : k) v = Eigen::VectorXd::Zero(n);
    y_new = Eigen::VectorXd::Zero(n);
    tmp = Eigen::VectorXd::Zero(n);
  }
};

/// One attempted step of size h from (t, y). `f(t, y, dy)` is any callable.
/// Returns the scaled RMS error estimate (accept when <= 1).
template <typename Rhs>
double dopri_attempt(Rhs&& f, double t, const Eigen::VectorXd& y, double h, double rel_tol,
                     double abs_tol, DopriStages& s) {
  using namespace dopri;
  auto& k = s.k;
  s.tmp = y + h * a21 * k[0];
  f(t + c2 * h, s.tmp, k[1]);
  s.tmp = y + h * (a31 * k[0] + a32 * k[1]);
  f(t + c3 * h, s.tmp, k[2]);
  s.tmp = y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]);
  f(t + c4 * h, s.tmp, k[3]);
  s.tmp = y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]);
  f(t + c5 * h, s.tmp, k[4]);
  s.tmp = y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]);
  f(t + h, s.tmp, k[5]);
  s.y_new = y + h * (a71 * k[0] + a73 * k[2] + a74 * k[3] + a75 * k[4] + a76 * k[5]);
  f(t + h, s.y_new, k[6]);
  s.tmp = h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] + e7 * k[6]);
  double sum = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(s.y_new[i]));
    const double r = s.tmp[i] / scale;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(std::max<Index>(1, y.size())));
}

/// Adaptive Dormand-Prince 5(4) integrator with 4th-order dense output over
/// the most recent accepted step.
class DormandPrince {
 public:
  using Rhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

  DormandPrince(Rhs rhs, IntegratorConfig cfg);

  void reset(double t0, const Eigen::VectorXd& y0);
  /// Advance by one accepted step, never past t_limit. Throws StepUnderflow
  /// when the step size collapses.
  void step(double t_limit);
  /// Integrate until t() == t_end.
  void advance_to(double t_end);

  double t() const noexcept { return t_; }
  double t_previous() const noexcept { return t_prev_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }
  /// Interpolated state at t_previous() <= t <= t().
  Eigen::VectorXd dense(double t) const;
  std::int64_t accepted_steps() const noexcept { return accepted_; }
  std::int64_t rejected_steps() const noexcept { return rejected_; }

 private:
  double initial_step();

  Rhs rhs_;
  IntegratorConfig cfg_;
  double t_ = 0.0;
  double t_prev_ = 0.0;
  double h_ = 0.0;
  Eigen::VectorXd y_;
  Eigen::VectorXd y_prev_;
  DopriStages stages_;
  std::array<Eigen::VectorXd, 5> cont_;
  double h_last_ = 0.0;
  std::int64_t accepted_ = 0;
  std::int64_t rejected_ = 0;
};

/// Integrate from (t0, y0) and return the state at each requested time
/// (ascending, all >= t0), one row per time.
Eigen::MatrixXd integrate_and_sample(const DormandPrince::Rhs& rhs, double t0,
                                     const Eigen::VectorXd& y0, std::span<const double> times,
                                     const IntegratorConfig& cfg);

/// Cubic Hermite interpolation on [t0, t1] from values and derivatives.
inline double hermite(double t0, double y0, double f0, double t1, double y1, double f1, double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * f1;
}

}  // namespace fracdim
