#include "fracdim/samplers.hpp"

#include <cmath>
#include <vector>

namespace fracdim {

namespace {

constexpr int kMaxDepth = 64;

const std::array<double, kMaxDepth + 2>& inverse_powers_of_three() {
  static const auto table = [] {
    std::array<double, kMaxDepth + 2> t{};
    t[0] = 1.0;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] / 3.0;
    return t;
  }();
  return table;
}

void check_request(Index n, int depth) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "sample size must be at least 1");
  if (depth < 1 || depth > kMaxDepth) {
    throw Error(ErrorKind::InvalidArgument, "digit depth must be in [1, 64]");
  }
}

// 3^32 < 2^64, so one uniform draw yields 32 independent base-3 digits.
constexpr std::uint64_t kThreeTo32 = 1853020188851841ULL;

void draw_ternary_digits(Rng& rng, std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t word = rng.uniform_int(kThreeTo32);
    for (int k = 0; k < 32 && i < out.size(); ++k, ++i) {
      out[i] = static_cast<std::uint8_t>(word % 3);
      word /= 3;
    }
  }
}

}  // namespace

double FractalSpec::true_dimension() const { return fracdim::true_dimension(kind); }

double true_dimension(FractalKind kind) {
  const double l2 = std::log(2.0);
  const double l3 = std::log(3.0);
  switch (kind) {
    case FractalKind::Sierpinski: return l3 / l2;
    case FractalKind::CantorDust: return 2.0 * l2 / l3;
    case FractalKind::CantorCrossInterval: return 1.0 + l2 / l3;
    case FractalKind::Menger: return std::log(20.0) / l3;
  }
  return 0.0;
}

std::string_view to_string(FractalKind kind) {
  switch (kind) {
    case FractalKind::Sierpinski: return "sierpinski";
    case FractalKind::CantorDust: return "cantor_dust";
    case FractalKind::CantorCrossInterval: return "cantor_cross_interval";
    case FractalKind::Menger: return "menger";
  }
  return "unknown";
}

std::optional<FractalKind> parse_fractal_kind(std::string_view name) {
  for (auto k : {FractalKind::Sierpinski, FractalKind::CantorDust, FractalKind::CantorCrossInterval,
                 FractalKind::Menger}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

Eigen::Vector2d sierpinski_point(std::span<const std::uint8_t> digits) {
  double x = 0.0;
  double y = 0.0;
  for (std::size_t j = digits.size(); j-- > 0;) {
    const int level = static_cast<int>(j) + 1;
    switch (digits[j]) {
      case 1: x += std::ldexp(1.0, -level); break;
      case 2:
        x += std::ldexp(1.0, -level - 1);
        y += std::ldexp(1.0, -level - 1);
        break;
      default: break;
    }
  }
  return {x, std::sqrt(3.0) * y};
}

double cantor_coordinate(std::span<const std::uint8_t> digits) {
  const auto& p3 = inverse_powers_of_three();
  double s = 0.0;
  for (std::size_t j = digits.size(); j-- > 0;) {
    if (digits[j] != 0) s += p3[j + 1];
  }
  return 2.0 * s;
}

Eigen::Vector3d menger_point(std::span<const std::array<std::uint8_t, 3>> digits) {
  const auto& p3 = inverse_powers_of_three();
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  for (std::size_t j = digits.size(); j-- > 0;) {
    for (int k = 0; k < 3; ++k) p[k] += digits[j][static_cast<std::size_t>(k)] * p3[j + 1];
  }
  return p;
}

std::array<std::uint8_t, 3> draw_menger_tuple(Rng& rng, std::uint64_t* rejected) {
  for (;;) {
    const auto code = rng.uniform_int(27);
    const std::array<std::uint8_t, 3> t{static_cast<std::uint8_t>(code % 3),
                                        static_cast<std::uint8_t>((code / 3) % 3),
                                        static_cast<std::uint8_t>(code / 9)};
    if (menger_tuple_allowed(t[0], t[1], t[2])) return t;
    if (rejected) ++*rejected;
  }
}

double sample_cantor_coordinate(Rng& rng, int depth) {
  check_request(1, depth);
  std::array<std::uint8_t, kMaxDepth> digits{};
  const std::uint64_t word = rng.next();
  for (int i = 0; i < depth; ++i) digits[static_cast<std::size_t>(i)] = (word >> i) & 1U;
  return cantor_coordinate(std::span(digits.data(), static_cast<std::size_t>(depth)));
}

PointCloud sample_sierpinski(Index n, std::uint64_t seed, int depth) {
  check_request(n, depth);
  Rng rng(seed);
  Points pts(n, 2);
  std::vector<std::uint8_t> digits(static_cast<std::size_t>(depth));
  for (Index i = 0; i < n; ++i) {
    draw_ternary_digits(rng, digits);
    pts.row(i) = sierpinski_point(digits).transpose();
  }
  return PointCloud(std::move(pts), "sierpinski", seed);
}

PointCloud sample_cantor_dust(Index n, std::uint64_t seed, int depth) {
  check_request(n, depth);
  Rng rng(seed);
  Points pts(n, 2);
  for (Index i = 0; i < n; ++i) {
    pts(i, 0) = sample_cantor_coordinate(rng, depth);
    pts(i, 1) = sample_cantor_coordinate(rng, depth);
  }
  return PointCloud(std::move(pts), "cantor_dust", seed);
}

PointCloud sample_cantor_cross_interval(Index n, std::uint64_t seed, int depth) {
  check_request(n, depth);
  Rng rng(seed);
  Points pts(n, 2);
  for (Index i = 0; i < n; ++i) {
    pts(i, 0) = sample_cantor_coordinate(rng, depth);
    pts(i, 1) = rng.uniform01();
  }
  return PointCloud(std::move(pts), "cantor_cross_interval", seed);
}

PointCloud sample_menger(Index n, std::uint64_t seed, int depth) {
  check_request(n, depth);
  Rng rng(seed);
  Points pts(n, 3);
  std::vector<std::array<std::uint8_t, 3>> digits(static_cast<std::size_t>(depth));
  for (Index i = 0; i < n; ++i) {
    for (auto& t : digits) t = draw_menger_tuple(rng);
    pts.row(i) = menger_point(digits).transpose();
  }
  return PointCloud(std::move(pts), "menger", seed);
}

PointCloud sample_fractal(const FractalSpec& spec, Index n, std::uint64_t seed) {
  switch (spec.kind) {
    case FractalKind::Sierpinski: return sample_sierpinski(n, seed, spec.digit_depth);
    case FractalKind::CantorDust: return sample_cantor_dust(n, seed, spec.digit_depth);
    case FractalKind::CantorCrossInterval: return sample_cantor_cross_interval(n, seed, spec.digit_depth);
    case FractalKind::Menger: return sample_menger(n, seed, spec.digit_depth);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown fractal kind");
}

}  // namespace fracdim
