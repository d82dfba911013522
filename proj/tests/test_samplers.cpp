#include <doctest.h>

#include <cmath>
#include <vector>

#include "fracdim/samplers.hpp"

using namespace fracdim;

TEST_CASE("reference dimensions") {
  CHECK(true_dimension(FractalKind::Sierpinski) == doctest::Approx(std::log(3.0) / std::log(2.0)));
  CHECK(true_dimension(FractalKind::CantorDust) == doctest::Approx(2 * std::log(2.0) / std::log(3.0)));
  CHECK(true_dimension(FractalKind::CantorCrossInterval) ==
        doctest::Approx(1 + std::log(2.0) / std::log(3.0)));
  CHECK(true_dimension(FractalKind::Menger) == doctest::Approx(std::log(20.0) / std::log(3.0)));
  CHECK(FractalSpec{FractalKind::Menger}.ambient_dim() == 3);
  for (auto k : {FractalKind::Sierpinski, FractalKind::CantorDust, FractalKind::CantorCrossInterval,
                 FractalKind::Menger}) {
    CHECK(parse_fractal_kind(to_string(k)) == k);
  }
  CHECK(!parse_fractal_kind("koch"));
}

TEST_CASE("sierpinski digit map") {
  std::vector<std::uint8_t> zeros(64, 0), twos(64, 2), ones(64, 1);
  CHECK(sierpinski_point(zeros) == Eigen::Vector2d(0, 0));
  const auto top = sierpinski_point(twos);
  CHECK(top.x() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(top.y() == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-15));
  CHECK(sierpinski_point(ones).x() == doctest::Approx(1.0).epsilon(1e-15));
  // Single digit at level 1: a_1 = 2 gives (1/4, sqrt3/4).
  std::vector<std::uint8_t> one{2};
  CHECK(sierpinski_point(one).isApprox(Eigen::Vector2d(0.25, std::sqrt(3.0) / 4)));
}

TEST_CASE("sierpinski samples") {
  const auto c = sample_sierpinski(100'000, 11);
  CHECK(c.dim() == 2);
  const Eigen::RowVector2d mean = c.points().colwise().mean();
  CHECK(std::abs(mean.x() - 0.5) < 0.01);
  CHECK(std::abs(mean.y() - std::sqrt(3.0) / 6) < 0.01);
  const double slack = std::ldexp(1.0, -60);
  for (Index i = 0; i < c.size(); ++i) {
    const double x = c.point(i)(0), y = c.point(i)(1);
    // Inside the triangle (0,0), (1,0), (1/2, sqrt3/2).
    CHECK_UNARY(y >= -slack);
    CHECK_UNARY(std::sqrt(3.0) * x - y >= -slack);
    CHECK_UNARY(std::sqrt(3.0) * (1 - x) - y >= -slack);
  }
}

TEST_CASE("cantor coordinates") {
  std::vector<std::uint8_t> zeros(64, 0), ones(64, 1);
  CHECK(cantor_coordinate(zeros) == 0.0);
  CHECK(cantor_coordinate(ones) == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<std::uint8_t> first{1};
  CHECK(cantor_coordinate(first) == doctest::Approx(2.0 / 3));

  Rng rng(4);
  double sum = 0;
  for (int i = 0; i < 100'000; ++i) sum += sample_cantor_coordinate(rng);
  CHECK(std::abs(sum / 100'000 - 0.5) < 0.01);

  const auto dust = sample_cantor_dust(20'000, 8);
  const double lo = 1.0 / 3 + 1e-12, hi = 2.0 / 3 - 1e-12;
  for (Index i = 0; i < dust.size(); ++i) {
    for (Index k = 0; k < 2; ++k) {
      const double v = dust.point(i)(k);
      CHECK_UNARY(v >= 0.0);
      CHECK_UNARY(v <= 1.0);
      CHECK_UNARY(!(v > lo && v < hi));
    }
  }

  const auto cxi = sample_cantor_cross_interval(20'000, 8);
  double ymean = 0;
  for (Index i = 0; i < cxi.size(); ++i) {
    const double x = cxi.point(i)(0), y = cxi.point(i)(1);
    CHECK_UNARY(!(x > lo && x < hi));
    CHECK_UNARY(y >= 0.0);
    CHECK_UNARY(y < 1.0);
    ymean += y / 20'000;
  }
  CHECK(std::abs(ymean - 0.5) < 0.01);
}

TEST_CASE("menger tuples") {
  CHECK(!menger_tuple_allowed(1, 1, 0));
  CHECK(!menger_tuple_allowed(1, 0, 1));
  CHECK(!menger_tuple_allowed(1, 1, 1));
  CHECK(menger_tuple_allowed(1, 2, 0));
  int allowed = 0;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      for (int z = 0; z < 3; ++z) allowed += menger_tuple_allowed(x, y, z);
  CHECK(allowed == 20);

  std::vector<std::array<std::uint8_t, 3>> zeros(64, {0, 0, 0});
  CHECK(menger_point(zeros) == Eigen::Vector3d::Zero());

  Rng rng(21);
  std::uint64_t rejected = 0;
  const int draws = 1'000'000;
  int accepted = 0;
  // Count raw draws: each accepted tuple costs 1 + its rejections.
  while (accepted + static_cast<int>(rejected) < draws) {
    const auto t = draw_menger_tuple(rng, &rejected);
    CHECK(menger_tuple_allowed(t[0], t[1], t[2]));
    ++accepted;
  }
  const double frac = static_cast<double>(accepted) / static_cast<double>(accepted + rejected);
  CHECK(std::abs(frac - 20.0 / 27) < 0.002);

  const auto m = sample_menger(5000, 3);
  CHECK(m.dim() == 3);
  CHECK(m.points().minCoeff() >= 0.0);
  CHECK(m.points().maxCoeff() <= 1.0);
}

TEST_CASE("determinism and seed sensitivity") {
  for (auto kind : {FractalKind::Sierpinski, FractalKind::CantorDust, FractalKind::CantorCrossInterval,
                    FractalKind::Menger}) {
    const FractalSpec spec{kind};
    CHECK(sample_fractal(spec, 500, 77).points() == sample_fractal(spec, 500, 77).points());
    CHECK(sample_fractal(spec, 500, 77).seed() == std::optional<std::uint64_t>(77));
  }
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto a = sample_sierpinski(1, 2 * s);
    const auto b = sample_sierpinski(1, 2 * s + 1);
    CHECK(a.point(0) != b.point(0));
  }
  CHECK_THROWS_AS(sample_sierpinski(0, 1), Error);
}
