#include "fracdim/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace fracdim {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::RangeTooNarrow: return "range-too-narrow";
    case ErrorKind::DegenerateData: return "degenerate-data";
    case ErrorKind::InvalidRange: return "invalid-range";
    case ErrorKind::ZeroExtent: return "zero-extent";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::StepUnderflow: return "step-underflow";
    case ErrorKind::InvalidHistory: return "invalid-history";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::HeuristicFailure: return "heuristic-failure";
    case ErrorKind::StabilizationFailure: return "stabilization-failure";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Format: return "format";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

PointCloud::PointCloud(Points points, std::string label, std::optional<std::uint64_t> seed)
    : points_(std::move(points)), label_(std::move(label)), seed_(seed) {
  if (points_.cols() < 1) {
    throw Error(ErrorKind::InvalidArgument, "point cloud needs ambient dimension >= 1");
  }
  if (!points_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "point cloud contains non-finite coordinates");
  }
}

PointCloud PointCloud::prefix(Index count) const {
  if (count < 0 || count > size()) {
    throw Error(ErrorKind::InvalidArgument, "prefix size out of range");
  }
  return PointCloud(Points(points_.topRows(count)), label_, seed_);
}

ScalingCurve::ScalingCurve(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!(entries_[i].y >= 0.0) || !std::isfinite(entries_[i].y)) {
      throw Error(ErrorKind::InvalidArgument, "scaling curve values must be finite and nonnegative");
    }
    if (!(entries_[i].x > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "scaling curve abscissae must be positive");
    }
    if (i > 0 && !(entries_[i].x > entries_[i - 1].x)) {
      throw Error(ErrorKind::InvalidArgument, "scaling curve abscissae must be strictly increasing");
    }
  }
}

std::vector<double> ScalingCurve::xs() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.x);
  return out;
}

std::vector<double> ScalingCurve::ys() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.y);
  return out;
}

FitResult loglog_fit(std::span<const double> x, std::span<const double> y, double lo, double hi) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::InvalidArgument, "loglog_fit: x and y lengths differ");
  }
  // Sort selected points by x so the result does not depend on entry order.
  std::vector<std::pair<double, double>> selected;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= lo && x[i] <= hi) selected.emplace_back(x[i], y[i]);
  }
  std::sort(selected.begin(), selected.end());
  if (selected.size() < 2) {
    std::ostringstream msg;
    msg << "only " << selected.size() << " entries in fit range [" << lo << ", " << hi << "]";
    throw Error(ErrorKind::RangeTooNarrow, msg.str());
  }
  Eigen::VectorXd u(static_cast<Index>(selected.size()));
  Eigen::VectorXd v(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const auto [xi, yi] = selected[static_cast<std::size_t>(i)];
    if (!(xi > 0.0) || !(yi > 0.0)) {
      std::ostringstream msg;
      msg << "non-positive value " << yi << " at x = " << xi;
      throw Error(ErrorKind::DegenerateData, msg.str());
    }
    u[i] = std::log10(xi);
    v[i] = std::log10(yi);
  }
  FitResult fit = linear_fit(u, v);
  fit.range_lo = selected.front().first;
  fit.range_hi = selected.back().first;
  return fit;
}

FitResult loglog_fit(const ScalingCurve& curve, double lo, double hi) {
  const auto xs = curve.xs();
  const auto ys = curve.ys();
  return loglog_fit(xs, ys, lo, hi);
}

std::vector<double> logspace(double lo, double hi, Index count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw Error(ErrorKind::InvalidRange, "logspace needs 0 < lo <= hi and count >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (Index i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<Index> subsample_schedule(Index n_max, Index n_min, Index count) {
  if (n_min < 2) throw Error(ErrorKind::InvalidRange, "schedule needs n_min >= 2");
  if (count < 1) throw Error(ErrorKind::InvalidRange, "schedule needs count >= 1");
  if (n_max < n_min) {
    std::ostringstream msg;
    msg << "schedule upper size " << n_max << " is below lower size " << n_min;
    throw Error(ErrorKind::InvalidRange, msg.str());
  }
  if (n_max == n_min || count == 1) return {n_max};
  const auto reals = logspace(static_cast<double>(n_min), static_cast<double>(n_max), count);
  std::vector<Index> sizes;
  sizes.reserve(reals.size());
  for (double r : reals) {
    const auto s = static_cast<Index>(std::llround(r));
    if (sizes.empty() || s > sizes.back()) sizes.push_back(s);
  }
  sizes.front() = n_min;
  sizes.back() = n_max;
  return sizes;
}

UnitCubeTransform normalize_to_unit_cube(const PointCloud& cloud) {
  if (cloud.empty()) throw Error(ErrorKind::EmptyInput, "cannot normalize an empty cloud");
  const Eigen::VectorXd lo = cloud.points().colwise().minCoeff().transpose();
  const Eigen::VectorXd hi = cloud.points().colwise().maxCoeff().transpose();
  const double scale = (hi - lo).maxCoeff();
  if (!(scale > 0.0)) throw Error(ErrorKind::ZeroExtent, "all points are identical");
  UnitCubeTransform t;
  t.scale = scale;
  t.offset = lo;
  t.cloud = PointCloud(apply_transform(cloud.points(), scale, lo), cloud.label(), cloud.seed());
  return t;
}

Points apply_transform(const PointsRef& points, double scale, const Eigen::VectorXd& offset) {
  Points out = (points.rowwise() - offset.transpose()) / scale;
  // Subtracting the minimum is exact for the argmin itself; clamp so the
  // bounding box is within [0, 1] despite rounding in the division.
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

Points invert_transform(const PointsRef& normalized, double scale, const Eigen::VectorXd& offset) {
  return (normalized * scale).rowwise() + offset.transpose();
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorKind::InvalidArgument, "uniform_int bound must be positive");
  // Rejection sampling on the top of the range removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % bound;
}

std::vector<double> parse_numeric_line(const std::string& line, std::size_t line_number) {
  std::vector<double> values;
  std::size_t i = 0;
  const std::size_t n = line.size();
  auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r' || c == '\n'; };
  while (i < n && is_sep(line[i])) ++i;
  if (i == n || line[i] == '#') return values;
  while (i < n) {
    while (i < n && is_sep(line[i])) ++i;
    if (i == n) break;
    std::size_t j = i;
    while (j < n && !is_sep(line[j])) ++j;
    double v = 0.0;
    const auto res = std::from_chars(line.data() + i, line.data() + j, v);
    if (res.ec != std::errc() || res.ptr != line.data() + j || !std::isfinite(v)) {
      std::ostringstream msg;
      msg << "line " << line_number << ": cannot parse '" << line.substr(i, j - i) << "'";
      throw Error(ErrorKind::Parse, msg.str());
    }
    values.push_back(v);
    i = j;
  }
  return values;
}

PointCloud read_point_cloud(std::istream& in, std::string label) {
  std::vector<double> flat;
  Index dim = 0;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto values = parse_numeric_line(line, line_number);
    if (values.empty()) continue;
    if (dim == 0) dim = static_cast<Index>(values.size());
    if (static_cast<Index>(values.size()) != dim) {
      std::ostringstream msg;
      msg << "line " << line_number << ": expected " << dim << " coordinates, found " << values.size();
      throw Error(ErrorKind::Format, msg.str());
    }
    flat.insert(flat.end(), values.begin(), values.end());
  }
  if (dim == 0) throw Error(ErrorKind::EmptyInput, "point cloud file has no data lines");
  const Index n = static_cast<Index>(flat.size()) / dim;
  Points pts = Eigen::Map<const Points>(flat.data(), n, dim);
  return PointCloud(std::move(pts), std::move(label));
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_point_cloud(in, path.filename().string());
}

void write_point_cloud(std::ostream& out, const PointCloud& cloud) {
  out << "# " << (cloud.label().empty() ? "points" : cloud.label()) << " n=" << cloud.size()
      << " m=" << cloud.dim();
  if (cloud.seed()) out << " seed=" << *cloud.seed();
  out << '\n';
  char buf[32];
  for (Index i = 0; i < cloud.size(); ++i) {
    for (Index k = 0; k < cloud.dim(); ++k) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), cloud.points()(i, k));
      if (k > 0) out << ' ';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace fracdim
