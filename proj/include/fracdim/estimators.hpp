#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracdim/core.hpp"
#include "fracdim/mst.hpp"

namespace fracdim {

/// Sum of |I|^alpha over finite intervals. Throws InvalidParameter for
/// alpha <= 0.
double e_alpha(const IntervalSet& intervals, double alpha);
double e_alpha(std::span<const double> lengths, double alpha);

/// Degree 0 via the minimum spanning tree (any dimension) or degree 1 via
/// the planar alpha complex.
IntervalSet ph_intervals(const PointsRef& points, int degree);

struct PHDimConfig {
  int degree = 0;
  double alpha = 1.0;
  /// Prefix sizes; empty means subsample_schedule(n).
  std::vector<Index> schedule;
};

struct DimensionEstimate {
  double dimension = 0.0;
  bool infinite = false;  // PH: fitted slope >= 1
  ScalingCurve curve;
  FitResult fit;
};

/// Upper half of a schedule of L sizes: 1-based indices ceil(L/2)..L.
std::pair<double, double> upper_half_range(std::span<const Index> schedule);

/// dimension = alpha / (1 - beta), beta the log-log slope of E against size
/// over the upper half of the curve's sizes.
DimensionEstimate ph_dimension_from_curve(const ScalingCurve& curve, double alpha);
/// Computes E_alpha on each prefix x_1..x_c of the schedule, then fits.
DimensionEstimate ph_dimension(const PointCloud& cloud, const PHDimConfig& cfg);

/// #{i < j : |x_i - x_j| < eps}, counted exactly with a kd-tree.
Index correlation_pair_count(const PointsRef& points, double eps);
/// Pair count divided by n(n - 1).
double correlation_integral(const PointCloud& cloud, double eps);

struct CorrDimConfig {
  Index eps_count = 20;
  double lo_exponent = 0.75;  // target pair count n^0.75
  double hi_factor = 50.0;    // target pair count 50 n
  /// Fixed [eps_lo, eps_hi]; skips the anchor search.
  std::optional<std::pair<double, double>> eps_range;
};

struct CorrelationEstimate : DimensionEstimate {
  double eps_lo = 0.0;
  double eps_hi = 0.0;
  double target_lo = 0.0;  // C targets at eps_lo / eps_hi
  double target_hi = 0.0;
  double achieved_lo = 0.0;
  double achieved_hi = 0.0;
};

/// Sorted pairwise distances below the radius needed to hold at least
/// `min_pairs` pairs (or every distance below `radius` when given).
std::vector<double> sorted_pair_distances(const PointsRef& points, Index min_pairs,
                                          std::optional<double> radius = std::nullopt);

/// Slope of log C(n, eps) against log eps over eps_count log-spaced values.
/// The range ends are found by bisection on the empirical distribution of
/// pair distances so that C(eps_lo) and C(eps_hi) hit the target counts.
/// Throws HeuristicFailure when the targets cross or the range collapses.
CorrelationEstimate correlation_dimension(const PointCloud& cloud, const CorrDimConfig& cfg = {});

/// Occupied cells of the grid of width delta over points in [0, 1]^m.
/// Coordinates equal to 1 fall into the last cell.
Index box_count(const PointsRef& normalized, double delta);

struct BoxDimConfig {
  Index grid_denominator = 10000;
  Index max_index = 1000;
  Index lookback = 4;
  /// Prefix sizes (ascending, last = n); empty means subsample_schedule(n).
  std::vector<Index> prefix_sizes;
};

struct BoxEstimate : DimensionEstimate {
  Index stable_index = 0;  // j: stabilization width index
  std::vector<double> widths;
  std::vector<Index> counts;  // full-cloud counts at each examined width
};

/// Normalizes with the full cloud, finds the smallest width index j whose
/// full-cloud count equals the minimum over the `lookback` preceding prefix
/// sizes, and fits log N against log delta for indices ceil(j/2)..j.
/// Throws StabilizationFailure (with the counts in the message) when no j
/// exists or fewer than lookback + 1 prefix sizes are available.
BoxEstimate box_dimension(const PointCloud& cloud, const BoxDimConfig& cfg = {});

/// #{I : |I| > eps}.
Index cumulative_curve(const IntervalSet& intervals, double eps);

struct ComplexityConfig {
  double eps_lo = 0.0;
  double eps_hi = 0.0;
  Index samples = 100;  // log-spaced eps values in the range
};

struct ComplexityEstimate {
  double complexity = 0.0;
  ScalingCurve curve;  // (eps, F)
  FitResult fit;
};

/// Negated log-log slope of F against eps over the configured range.
/// Throws DegenerateData when F vanishes or is constant on the range.
ComplexityEstimate ph_complexity(const IntervalSet& intervals, const ComplexityConfig& cfg);

}  // namespace fracdim
