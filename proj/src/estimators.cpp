#include "fracdim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracdim/kdtree.hpp"
#include "fracdim/persistence.hpp"

namespace fracdim {

double e_alpha(std::span<const double> lengths, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::InvalidParameter, "alpha must be positive, got " + std::to_string(alpha));
  }
  double sum = 0.0;
  if (alpha == 1.0) {
    for (double l : lengths) sum += l;
  } else if (alpha == 0.5) {
    for (double l : lengths) sum += std::sqrt(l);
  } else {
    for (double l : lengths) sum += std::pow(l, alpha);
  }
  return sum;
}

double e_alpha(const IntervalSet& intervals, double alpha) {
  const auto lengths = intervals.finite_lengths();
  return e_alpha(std::span<const double>(lengths), alpha);
}

IntervalSet ph_intervals(const PointsRef& points, int degree) {
  switch (degree) {
    case 0:
      return ph0_intervals(euclidean_mst(points));
    case 1:
      return ph1_intervals(points);
    default:
      throw Error(ErrorKind::InvalidParameter, "homology degree must be 0 or 1");
  }
}

std::pair<double, double> upper_half_range(std::span<const Index> schedule) {
  const std::size_t L = schedule.size();
  if (L < 2) throw Error(ErrorKind::RangeTooNarrow, "the schedule needs at least two sizes");
  const std::size_t first = (L + 1) / 2 - 1;  // 1-based ceil(L/2)
  return {static_cast<double>(schedule[first]), static_cast<double>(schedule[L - 1])};
}

DimensionEstimate ph_dimension_from_curve(const ScalingCurve& curve, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidParameter, "alpha must be positive");
  const std::size_t L = curve.size();
  if (L < 2) throw Error(ErrorKind::RangeTooNarrow, "the curve needs at least two sizes");
  const auto& entries = curve.entries();
  const double lo = entries[(L + 1) / 2 - 1].x;
  const double hi = entries[L - 1].x;

  DimensionEstimate est;
  est.curve = curve;
  est.fit = loglog_fit(curve, lo, hi);
  const double beta = est.fit.slope;
  if (beta >= 1.0) {
    est.infinite = true;
    est.dimension = std::numeric_limits<double>::infinity();
  } else {
    est.dimension = alpha / (1.0 - beta);
  }
  return est;
}

DimensionEstimate ph_dimension(const PointCloud& cloud, const PHDimConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw Error(ErrorKind::InvalidParameter, "alpha must be positive");
  const std::vector<Index> schedule = cfg.schedule.empty() ? subsample_schedule(cloud.size()) : cfg.schedule;
  std::vector<ScalingCurve::Entry> entries;
  entries.reserve(schedule.size());
  for (const Index c : schedule) {
    if (c < 2 || c > cloud.size()) {
      throw Error(ErrorKind::InvalidArgument, "schedule size " + std::to_string(c) + " outside [2, n]");
    }
    const IntervalSet intervals = ph_intervals(PointsRef(cloud.head(c)), cfg.degree);
    entries.push_back({static_cast<double>(c), e_alpha(intervals, cfg.alpha)});
  }
  return ph_dimension_from_curve(ScalingCurve(std::move(entries)), cfg.alpha);
}

Index correlation_pair_count(const PointsRef& points, double eps) {
  const Index n = points.rows();
  if (n < 2 || !(eps > 0.0)) return 0;
  const KdTree tree(points);
  Index total = 0;
  for (Index i = 0; i < n; ++i) {
    total += tree.range_count(std::span<const double>(points.row(i).data(), static_cast<std::size_t>(points.cols())), eps);
  }
  return (total - n) / 2;  // drop self pairs, then each pair was seen twice
}

double correlation_integral(const PointCloud& cloud, double eps) {
  const Index n = cloud.size();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "correlation integral needs at least two points");
  const Index pairs = correlation_pair_count(PointsRef(cloud.points()), eps);
  return static_cast<double>(pairs) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

namespace {

std::vector<double> collect_below(const KdTree& tree, const PointsRef& points, double radius) {
  std::vector<double> out;
  const auto dim = static_cast<std::size_t>(points.cols());
  for (Index i = 0; i < points.rows(); ++i) {
    tree.for_each_within(std::span<const double>(points.row(i).data(), dim), radius, [&](Index j, double d) {
      if (j > i) out.push_back(d);
    });
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<double> sorted_pair_distances(const PointsRef& points, Index min_pairs, std::optional<double> radius) {
  const Index n = points.rows();
  if (n < 2) return {};
  const KdTree tree(points);
  if (radius) return collect_below(tree, points, *radius);

  const double all_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (static_cast<double>(min_pairs) > all_pairs) {
    throw Error(ErrorKind::InvalidArgument, "more pairs requested than exist");
  }

  // Initial radius from the pair distances of an evenly strided subsample.
  const Index s = std::min<Index>(n, 1500);
  std::vector<double> sample;
  sample.reserve(static_cast<std::size_t>(s * (s - 1) / 2));
  for (Index a = 0; a < s; ++a) {
    const Index ia = a * n / s;
    for (Index b = a + 1; b < s; ++b) sample.push_back(distance(points.row(ia), points.row(b * n / s)));
  }
  std::sort(sample.begin(), sample.end());
  const double fraction = std::min(1.0, 1.5 * static_cast<double>(min_pairs) / all_pairs);
  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(fraction * static_cast<double>(sample.size())), 8,
                                         sample.size() - 1);
  double r = sample[std::min(k, sample.size() - 1)];
  if (!(r > 0.0)) r = std::numeric_limits<double>::min();

  for (;;) {
    std::vector<double> d = collect_below(tree, points, r);
    if (static_cast<Index>(d.size()) >= min_pairs) return d;
    if (static_cast<double>(d.size()) >= all_pairs) return d;
    // C(eps) ~ eps^D locally with D <= m; grow assuming the smallest
    // plausible exponent of 1, with a floor on the step.
    const double ratio = d.empty() ? 4.0 : static_cast<double>(min_pairs) / static_cast<double>(d.size());
    r *= std::clamp(ratio, 1.25, 4.0);
  }
}

CorrelationEstimate correlation_dimension(const PointCloud& cloud, const CorrDimConfig& cfg) {
  const Index n = cloud.size();
  if (n < 3) throw Error(ErrorKind::HeuristicFailure, "correlation dimension needs at least three points");
  if (cfg.eps_count < 2) throw Error(ErrorKind::InvalidParameter, "eps_count must be at least 2");
  const double nn = static_cast<double>(n) * static_cast<double>(n - 1);
  const PointsRef points(cloud.points());

  CorrelationEstimate est;
  std::vector<double> dist;
  if (cfg.eps_range) {
    const auto [lo, hi] = *cfg.eps_range;
    if (!(lo > 0.0) || !(hi > lo)) throw Error(ErrorKind::InvalidRange, "eps range must satisfy 0 < lo < hi");
    dist = sorted_pair_distances(points, 0, std::nextafter(hi, std::numeric_limits<double>::infinity()));
    est.eps_lo = lo;
    est.eps_hi = hi;
  } else {
    const double k_lo = std::pow(static_cast<double>(n), cfg.lo_exponent);
    const double k_hi = cfg.hi_factor * static_cast<double>(n);
    est.target_lo = k_lo / nn;
    est.target_hi = k_hi / nn;
    const auto K_lo = static_cast<Index>(std::llround(std::max(1.0, k_lo)));
    const auto K_hi = static_cast<Index>(std::llround(k_hi));
    if (K_lo >= K_hi || static_cast<double>(K_hi) >= 0.5 * nn) {
      throw Error(ErrorKind::HeuristicFailure,
                  "correlation targets cross for n = " + std::to_string(n) + "; supply an eps range manually");
    }
    dist = sorted_pair_distances(points, K_hi + 1);
    // Bisection on the empirical distribution: the count of distances below
    // eps equals K anywhere in (d_(K), d_(K+1)]; take the midpoint.
    auto anchor = [&](Index K) {
      const auto lo_it = dist.begin() + (K - 1);
      return 0.5 * (*lo_it + *(lo_it + 1));
    };
    est.eps_lo = anchor(K_lo);
    est.eps_hi = anchor(K_hi);
    if (!(est.eps_lo > 0.0) || !(est.eps_hi > est.eps_lo)) {
      throw Error(ErrorKind::HeuristicFailure, "empty eps range from the anchor heuristic; supply an eps range manually");
    }
  }

  auto C = [&](double eps) {
    const auto below = std::lower_bound(dist.begin(), dist.end(), eps) - dist.begin();
    return static_cast<double>(below) / nn;
  };
  est.achieved_lo = C(est.eps_lo);
  est.achieved_hi = C(est.eps_hi);
  std::vector<ScalingCurve::Entry> entries;
  for (const double eps : logspace(est.eps_lo, est.eps_hi, cfg.eps_count)) entries.push_back({eps, C(eps)});
  est.curve = ScalingCurve(std::move(entries));
  est.fit = loglog_fit(est.curve, est.eps_lo, est.eps_hi);
  est.dimension = est.fit.slope;
  return est;
}

namespace {

using CellKey = unsigned __int128;
constexpr int kBitsPerAxis = 14;
constexpr CellKey kEmpty = ~CellKey{0};

// Open-addressing set of packed cell coordinates. Cell indices stay below
// 2^14 - 1, so the all-ones key never occurs.
class CellSet {
 public:
  explicit CellSet(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < 2 * expected) cap <<= 1;
    slots_.assign(cap, kEmpty);
    mask_ = cap - 1;
  }
  void clear() {
    std::fill(slots_.begin(), slots_.end(), kEmpty);
    size_ = 0;
  }
  bool insert(CellKey key) {
    std::size_t h = hash(key) & mask_;
    while (slots_[h] != kEmpty) {
      if (slots_[h] == key) return false;
      h = (h + 1) & mask_;
    }
    slots_[h] = key;
    ++size_;
    return true;
  }
  std::size_t size() const { return size_; }

 private:
  static std::size_t hash(CellKey key) {
    std::uint64_t x = static_cast<std::uint64_t>(key) ^ (static_cast<std::uint64_t>(key >> 64) * 0x9e3779b97f4a7c15ULL);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return static_cast<std::size_t>(x);
  }
  std::vector<CellKey> slots_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
};

CellKey cell_key(const PointsRef& p, Index row, double delta, std::uint32_t last_cell) {
  CellKey key = 0;
  for (Index k = 0; k < p.cols(); ++k) {
    const double q = std::floor(p(row, k) / delta);
    const auto c = q <= 0.0 ? 0u : static_cast<std::uint32_t>(std::min(q, static_cast<double>(last_cell)));
    key = (key << kBitsPerAxis) | c;
  }
  return key;
}

void check_box_input(const PointsRef& p, double delta) {
  if (!(delta > 0.0) || delta > 1.0) throw Error(ErrorKind::InvalidParameter, "box width must lie in (0, 1]");
  if (p.cols() * kBitsPerAxis > 128) {
    throw Error(ErrorKind::InvalidArgument, "box counting supports at most 9 dimensions");
  }
  if (std::ceil(1.0 / delta) > static_cast<double>((1u << kBitsPerAxis) - 1)) {
    throw Error(ErrorKind::InvalidParameter, "box width too small for the cell packing");
  }
}

}  // namespace

Index box_count(const PointsRef& normalized, double delta) {
  check_box_input(normalized, delta);
  const auto last_cell = static_cast<std::uint32_t>(std::ceil(1.0 / delta)) - 1;
  CellSet cells(static_cast<std::size_t>(normalized.rows()));
  for (Index i = 0; i < normalized.rows(); ++i) cells.insert(cell_key(normalized, i, delta, last_cell));
  return static_cast<Index>(cells.size());
}

BoxEstimate box_dimension(const PointCloud& cloud, const BoxDimConfig& cfg) {
  const Index n = cloud.size();
  if (cfg.grid_denominator < 1 || cfg.max_index < 1 || cfg.max_index > cfg.grid_denominator || cfg.lookback < 1) {
    throw Error(ErrorKind::InvalidParameter, "invalid box-counting grid configuration");
  }
  std::vector<Index> sizes = cfg.prefix_sizes;
  if (sizes.empty()) {
    try {
      sizes = subsample_schedule(n);
    } catch (const Error&) {
      sizes.clear();
    }
  }
  if (static_cast<Index>(sizes.size()) < cfg.lookback + 1) {
    throw Error(ErrorKind::StabilizationFailure,
                "box stabilization needs " + std::to_string(cfg.lookback + 1) + " prefix sizes, have " +
                    std::to_string(sizes.size()) + " for n = " + std::to_string(n));
  }
  if (!std::is_sorted(sizes.begin(), sizes.end()) || sizes.back() != n || sizes.front() < 1) {
    throw Error(ErrorKind::InvalidArgument, "prefix sizes must ascend and end at the cloud size");
  }

  const UnitCubeTransform unit = normalize_to_unit_cube(cloud);
  const PointsRef p(unit.cloud.points());
  check_box_input(p, 1.0 / static_cast<double>(cfg.grid_denominator));

  // Only the last lookback + 1 prefix sizes enter the rule.
  const std::vector<Index> checkpoints(sizes.end() - (cfg.lookback + 1), sizes.end());
  CellSet cells(static_cast<std::size_t>(n));
  BoxEstimate est;
  std::vector<Index> at(checkpoints.size());
  for (Index i = 1; i <= cfg.max_index; ++i) {
    const double delta = static_cast<double>(i) / static_cast<double>(cfg.grid_denominator);
    const auto last_cell =
        static_cast<std::uint32_t>((cfg.grid_denominator + i - 1) / i) - 1;  // ceil(1 / delta) - 1
    cells.clear();
    std::size_t next = 0;
    for (Index row = 0; row < n; ++row) {
      cells.insert(cell_key(p, row, delta, last_cell));
      while (next < checkpoints.size() && checkpoints[next] == row + 1) at[next++] = static_cast<Index>(cells.size());
    }
    est.widths.push_back(delta);
    est.counts.push_back(at.back());
    const Index previous_min = *std::min_element(at.begin(), at.end() - 1);
    if (at.back() == previous_min) {
      est.stable_index = i;
      break;
    }
  }
  if (est.stable_index == 0) {
    std::ostringstream msg;
    msg << "no stabilizing box width up to index " << cfg.max_index << "; full-sample counts at widths";
    for (std::size_t k = 0; k < est.counts.size(); k += std::max<std::size_t>(1, est.counts.size() / 10)) {
      msg << ' ' << est.widths[k] << ':' << est.counts[k];
    }
    throw Error(ErrorKind::StabilizationFailure, msg.str());
  }

  const Index j = est.stable_index;
  std::vector<ScalingCurve::Entry> entries;
  for (std::size_t k = 0; k < est.widths.size(); ++k) {
    entries.push_back({est.widths[k], static_cast<double>(est.counts[k])});
  }
  est.curve = ScalingCurve(std::move(entries));
  const double lo = est.widths[static_cast<std::size_t>((j + 1) / 2 - 1)];
  const double hi = est.widths[static_cast<std::size_t>(j - 1)];
  est.fit = loglog_fit(est.curve, lo, hi);
  est.dimension = -est.fit.slope;
  return est;
}

Index cumulative_curve(const IntervalSet& intervals, double eps) {
  Index count = 0;
  for (const Interval& I : intervals.intervals) {
    if (I.length() > eps) ++count;
  }
  return count;
}

ComplexityEstimate ph_complexity(const IntervalSet& intervals, const ComplexityConfig& cfg) {
  if (!(cfg.eps_lo > 0.0) || !(cfg.eps_hi > cfg.eps_lo)) {
    throw Error(ErrorKind::InvalidRange, "complexity fit range must satisfy 0 < lo < hi");
  }
  if (cfg.samples < 2) throw Error(ErrorKind::InvalidParameter, "complexity needs at least two samples");
  std::vector<double> lengths = intervals.finite_lengths();
  std::sort(lengths.begin(), lengths.end());

  std::vector<ScalingCurve::Entry> entries;
  for (const double eps : logspace(cfg.eps_lo, cfg.eps_hi, cfg.samples)) {
    const auto above = lengths.end() - std::upper_bound(lengths.begin(), lengths.end(), eps);
    if (above == 0) {
      throw Error(ErrorKind::DegenerateData, "no interval longer than eps = " + std::to_string(eps));
    }
    entries.push_back({eps, static_cast<double>(above)});
  }
  if (entries.front().y == entries.back().y) {
    throw Error(ErrorKind::DegenerateData, "cumulative curve is constant on the fit range");
  }
  ComplexityEstimate est;
  est.curve = ScalingCurve(std::move(entries));
  est.fit = loglog_fit(est.curve, cfg.eps_lo, cfg.eps_hi);
  est.complexity = -est.fit.slope;
  return est;
}

}  // namespace fracdim
