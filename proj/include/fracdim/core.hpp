#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fracdim {

using Index = Eigen::Index;

/// Row-major n x m storage: one point per row, coordinates contiguous.
template <typename Scalar>
using PointMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Points = PointMatrix<double>;
using PointsRef = Eigen::Ref<const Points>;

enum class ErrorKind {
  InvalidArgument,
  RangeTooNarrow,
  DegenerateData,
  InvalidRange,
  ZeroExtent,
  EmptyInput,
  Divergence,
  StepUnderflow,
  InvalidHistory,
  DegenerateInput,
  InvalidParameter,
  HeuristicFailure,
  StabilizationFailure,
  Parse,
  Format,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// An ordered sample of points in R^m. Order is significant: estimators
/// work on prefixes x_1..x_c, so the cloud is never reordered.
class PointCloud {
 public:
  PointCloud() = default;
  /// Throws InvalidArgument when m == 0 or any coordinate is non-finite.
  explicit PointCloud(Points points, std::string label = {},
                      std::optional<std::uint64_t> seed = std::nullopt);

  Index size() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }
  bool empty() const noexcept { return points_.rows() == 0; }

  const Points& points() const noexcept { return points_; }
  auto point(Index i) const { return points_.row(i); }
  /// View of the first `count` points, no copy.
  auto head(Index count) const { return points_.topRows(count); }
  PointCloud prefix(Index count) const;

  const std::string& label() const noexcept { return label_; }
  const std::optional<std::uint64_t>& seed() const noexcept { return seed_; }

 private:
  Points points_;
  std::string label_;
  std::optional<std::uint64_t> seed_;
};

/// (x, y) pairs for log-log regression; x strictly increasing, y >= 0.
class ScalingCurve {
 public:
  struct Entry {
    double x;
    double y;
  };

  ScalingCurve() = default;
  explicit ScalingCurve(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::vector<double> xs() const;
  std::vector<double> ys() const;

 private:
  std::vector<Entry> entries_;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;      // log10 units
  double slope_stderr = 0.0;   // textbook OLS standard error of the slope
  double range_lo = 0.0;       // smallest x used, original units
  double range_hi = 0.0;       // largest x used, original units
  Index n_points_used = 0;
};

/// Ordinary least squares of log10(y) on log10(x), restricted to lo <= x <= hi.
/// Entry order does not matter.
FitResult loglog_fit(std::span<const double> x, std::span<const double> y, double lo, double hi);
FitResult loglog_fit(const ScalingCurve& curve, double lo, double hi);

/// OLS on already-transformed data. Requires at least two points with
/// distinct abscissae.
template <typename DerivedX, typename DerivedY>
FitResult linear_fit(const Eigen::MatrixBase<DerivedX>& u, const Eigen::MatrixBase<DerivedY>& v) {
  using Scalar = typename DerivedX::Scalar;
  const Index n = u.size();
  if (n < 2 || v.size() != n) {
    throw Error(ErrorKind::RangeTooNarrow, "linear fit needs at least two points");
  }
  const Scalar mean_u = u.mean();
  const Scalar mean_v = v.mean();
  const auto du = (u.array() - mean_u).eval();
  const auto dv = (v.array() - mean_v).eval();
  const Scalar sxx = (du * du).sum();
  if (!(sxx > Scalar(0))) {
    throw Error(ErrorKind::DegenerateData, "linear fit abscissae are all equal");
  }
  FitResult fit;
  fit.slope = static_cast<double>((du * dv).sum() / sxx);
  fit.intercept = static_cast<double>(mean_v - Scalar(fit.slope) * mean_u);
  fit.n_points_used = n;
  if (n > 2) {
    const Scalar ssr = (dv - Scalar(fit.slope) * du).square().sum();
    fit.slope_stderr = static_cast<double>(std::sqrt(ssr / Scalar(n - 2) / sxx));
  }
  return fit;
}

/// `count` log-spaced integers from n_min to n_max (both exact), rounded and
/// deduplicated, so the result may be shorter than `count`.
std::vector<Index> subsample_schedule(Index n_max, Index n_min = 1000, Index count = 100);

/// `count` log-spaced reals in [lo, hi], endpoints exact.
std::vector<double> logspace(double lo, double hi, Index count);

struct UnitCubeTransform {
  PointCloud cloud;
  double scale = 1.0;        // original = normalized * scale + offset
  Eigen::VectorXd offset;
};

/// Translate by the componentwise minimum and divide by the longest side of
/// the bounding box. Throws ZeroExtent when every point is identical.
UnitCubeTransform normalize_to_unit_cube(const PointCloud& cloud);
/// Apply an existing transform (e.g. one computed from a larger sample).
Points apply_transform(const PointsRef& points, double scale, const Eigen::VectorXd& offset);
Points invert_transform(const PointsRef& normalized, double scale, const Eigen::VectorXd& offset);

/// Seedable, reproducible 64-bit generator. Integer and real draws are
/// implemented here rather than via <random> distributions so streams are
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, bound).
  std::uint64_t uniform_int(std::uint64_t bound);
  /// Uniform real in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

/// Plain-text point cloud: one point per line, whitespace or comma separated,
/// '#' comments. Dimension is fixed by the first data line.
PointCloud read_point_cloud(std::istream& in, std::string label = {});
PointCloud read_point_cloud(const std::filesystem::path& path);
void write_point_cloud(std::ostream& out, const PointCloud& cloud);

/// Parse the numeric fields of one data line; empty result for blank or
/// comment lines. Throws Parse with the line number on malformed input.
std::vector<double> parse_numeric_line(const std::string& line, std::size_t line_number);

}  // namespace fracdim
