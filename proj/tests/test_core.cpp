#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fracdim/core.hpp"
#include "fracdim/kdtree.hpp"
#include "oracles.hpp"

using namespace fracdim;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an fracdim::Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("loglog_fit on exact power laws") {
  const std::vector<double> x{1, 10, 100}, y{1, 10, 100};
  auto fit = loglog_fit(x, y, 1, 100);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fit.slope_stderr == doctest::Approx(0.0));
  CHECK(fit.n_points_used == 3);

  const std::vector<double> x2{1, 10}, y2{1, 100};
  CHECK(loglog_fit(x2, y2, 1, 10).slope == doctest::Approx(2.0));
}

TEST_CASE("loglog_fit recovers a synthetic exponent to 1e-9") {
  const auto xs = logspace(1e3, 1e6, 50);
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.0 * std::pow(x, 1.585));
  const auto fit = loglog_fit(xs, ys, 1e3, 1e6);
  CHECK(std::abs(fit.slope - 1.585) < 1e-9);
  CHECK(std::abs(fit.intercept - std::log10(3.0)) < 1e-9);
  CHECK(fit.range_lo == 1e3);
  CHECK(fit.range_hi == 1e6);
}

TEST_CASE("loglog_fit respects the range and reports errors") {
  const std::vector<double> x{1, 2, 4, 8}, y{1, 4, 16, 0};
  CHECK(loglog_fit(x, y, 1, 4).slope == doctest::Approx(2.0));
  CHECK(kind_of([&] { loglog_fit(x, y, 1, 8); }) == ErrorKind::DegenerateData);
  CHECK(kind_of([&] { loglog_fit(x, y, 1.5, 3); }) == ErrorKind::RangeTooNarrow);
}

TEST_CASE("loglog_fit is order invariant and y-scale invariant") {
  Rng rng(5);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(std::pow(10.0, rng.uniform(0, 4)));
    y.push_back(std::pow(x.back(), 0.7) * rng.uniform(0.5, 2.0));
  }
  const auto base = loglog_fit(x, y, 0, 1e9);

  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 g(3);
  std::shuffle(perm.begin(), perm.end(), g);
  std::vector<double> px, py, sy;
  for (auto p : perm) {
    px.push_back(x[p]);
    py.push_back(y[p]);
  }
  for (double v : y) sy.push_back(v * 123.4);
  CHECK(std::abs(loglog_fit(px, py, 0, 1e9).slope - base.slope) < 1e-12);
  CHECK(std::abs(loglog_fit(x, sy, 0, 1e9).slope - base.slope) < 1e-12);
}

TEST_CASE("OLS slope standard error matches the textbook formula") {
  const std::vector<double> x{1, 10, 100, 1000}, y{1, 30, 80, 1200};
  const auto fit = loglog_fit(x, y, 1, 1000);
  double u[4], v[4], mu = 0, mv = 0;
  for (int i = 0; i < 4; ++i) {
    u[i] = std::log10(x[i]);
    v[i] = std::log10(y[i]);
    mu += u[i] / 4;
    mv += v[i] / 4;
  }
  double sxx = 0, sxy = 0;
  for (int i = 0; i < 4; ++i) {
    sxx += (u[i] - mu) * (u[i] - mu);
    sxy += (u[i] - mu) * (v[i] - mv);
  }
  const double b = sxy / sxx;
  double ssr = 0;
  for (int i = 0; i < 4; ++i) {
    const double r = v[i] - mv - b * (u[i] - mu);
    ssr += r * r;
  }
  CHECK(fit.slope == doctest::Approx(b).epsilon(1e-12));
  CHECK(fit.slope_stderr == doctest::Approx(std::sqrt(ssr / 2 / sxx)).epsilon(1e-12));
}

TEST_CASE("ScalingCurve validates entries") {
  CHECK_NOTHROW(ScalingCurve({{1, 0}, {2, 1}}));
  CHECK_THROWS_AS(ScalingCurve({{2, 1}, {1, 1}}), Error);
  CHECK_THROWS_AS(ScalingCurve({{1, -1}, {2, 1}}), Error);
}

TEST_CASE("subsample_schedule") {
  CHECK(subsample_schedule(1000, 1000, 1) == std::vector<Index>{1000});
  CHECK(subsample_schedule(1000, 1000, 100) == std::vector<Index>{1000});

  const auto big = subsample_schedule(1'000'000, 1000, 100);
  CHECK(big.size() == 100);
  CHECK(big.front() == 1000);
  CHECK(big.back() == 1'000'000);

  // Direct formula: round(10^linspace(log10 2, log10 10, 4)), deduplicated.
  std::vector<Index> expected;
  for (int i = 0; i < 4; ++i) {
    const double e = std::log10(2.0) + (std::log10(10.0) - std::log10(2.0)) * i / 3.0;
    const auto v = static_cast<Index>(std::llround(std::pow(10.0, e)));
    if (expected.empty() || v > expected.back()) expected.push_back(v);
  }
  CHECK(subsample_schedule(10, 2, 4) == expected);
  CHECK(expected == std::vector<Index>{2, 3, 6, 10});

  const auto s = subsample_schedule(100'000, 1000, 100);
  CHECK(std::adjacent_find(s.begin(), s.end(), std::greater_equal<>()) == s.end());
  CHECK(s == subsample_schedule(100'000, 1000, 100));
  CHECK(kind_of([] { subsample_schedule(10, 100, 5); }) == ErrorKind::InvalidRange);
}

TEST_CASE("logspace endpoints are exact") {
  const auto v = logspace(0.003, 17.0, 9);
  CHECK(v.size() == 9);
  CHECK(v.front() == 0.003);
  CHECK(v.back() == 17.0);
  for (std::size_t i = 1; i < v.size(); ++i) {
    CHECK(v[i] / v[i - 1] == doctest::Approx(std::pow(17.0 / 0.003, 1.0 / 8)));
  }
}

TEST_CASE("normalize_to_unit_cube") {
  Points p(2, 2);
  p << 2, 2, 4, 6;
  const auto t = normalize_to_unit_cube(PointCloud(p));
  CHECK(t.scale == 4.0);
  CHECK(t.cloud.point(0).isApprox(Eigen::RowVector2d(0, 0)));
  CHECK(t.cloud.point(1).isApprox(Eigen::RowVector2d(0.5, 1)));

  Points same(3, 2);
  same.setConstant(1.5);
  CHECK(kind_of([&] { normalize_to_unit_cube(PointCloud(same)); }) == ErrorKind::ZeroExtent);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Points q = oracle::uniform_points(50, 1 + seed % 4, seed, -30, 70);
    const auto u = normalize_to_unit_cube(PointCloud(q));
    const auto& n = u.cloud.points();
    CHECK(n.minCoeff() >= 0.0);
    CHECK(n.maxCoeff() <= 1.0);
    const Eigen::RowVectorXd extent = n.colwise().maxCoeff() - n.colwise().minCoeff();
    CHECK(extent.maxCoeff() == doctest::Approx(1.0).epsilon(1e-15));
    const Points back = invert_transform(n, u.scale, u.offset);
    CHECK(((back - q).cwiseAbs().array() <= 1e-12 * q.cwiseAbs().array().max(1.0)).all());
  }
}

TEST_CASE("PointCloud validation and prefixes") {
  Points bad(2, 2);
  bad << 0, 1, std::nan(""), 2;
  CHECK(kind_of([&] { PointCloud c(bad); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { PointCloud c(Points(3, 0)); }) == ErrorKind::InvalidArgument);

  const PointCloud c(oracle::uniform_points(10, 3, 1), "u", 42);
  CHECK(c.prefix(4).size() == 4);
  CHECK(c.prefix(4).points() == c.points().topRows(4));
  CHECK(c.prefix(4).seed() == std::optional<std::uint64_t>(42));
}

TEST_CASE("Rng is reproducible") {
  Rng a(99), b(99), c(100);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs |= x != c.next();
  }
  CHECK(differs);
  Rng r(1);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[r.uniform_int(7)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("point cloud text format") {
  std::istringstream in("# header\n1, 2, 3\n\n4 5 6\n# trailing\n7\t8 9\n");
  const auto c = read_point_cloud(in, "t");
  CHECK(c.size() == 3);
  CHECK(c.dim() == 3);
  CHECK(c.point(2)(1) == 8.0);

  std::ostringstream out;
  const PointCloud r(oracle::uniform_points(20, 2, 3));
  write_point_cloud(out, r);
  std::istringstream back(out.str());
  CHECK(read_point_cloud(back).points() == r.points());

  std::istringstream mixed("1 2\n3 4 5\n");
  CHECK(kind_of([&] { read_point_cloud(mixed); }) == ErrorKind::Format);
  std::istringstream garbage("1 2\n3 x\n");
  try {
    read_point_cloud(garbage);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("kd-tree queries") {
  Points line(3, 1);
  line << 0, 1, 3;
  const KdTree t(line);
  const double c0[] = {0.0};
  CHECK(t.range_count(c0, 1.5) == 2);
  CHECK(t.range_count(c0, 0.0) == 0);
  CHECK(t.range_count(c0, 1.0) == 1);  // strict

  const Points p = oracle::uniform_points(1000, 3, 17);
  const KdTree tree(p, 8);
  Rng rng(2);
  for (int q = 0; q < 20; ++q) {
    const double center[3] = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
    const double r = rng.uniform(0.01, 0.4);
    Index brute = 0;
    std::vector<std::pair<double, Index>> all;
    for (Index i = 0; i < p.rows(); ++i) {
      const double d = distance(center, p.row(i).data(), 3);
      if (d < r) ++brute;
      all.push_back({d, i});
    }
    CHECK(tree.range_count(center, r) == brute);
    std::sort(all.begin(), all.end());
    const auto nn = tree.nearest(center, 7);
    REQUIRE(nn.size() == 7);
    for (int k = 0; k < 7; ++k) {
      CHECK(nn[k].index == all[k].second);
      CHECK(nn[k].distance == all[k].first);
    }
  }
  CHECK(kind_of([] { KdTree e{Points(0, 2)}; }) == ErrorKind::EmptyInput);
}

TEST_CASE("kd-tree nearest breaks ties by index") {
  Points p(4, 1);
  p << 1, -1, 1, -1;
  const KdTree t(p);
  const double c[] = {0.0};
  const auto nn = t.nearest(c, 4);
  CHECK(nn[0].index == 0);
  CHECK(nn[1].index == 1);
  CHECK(nn[2].index == 2);
  CHECK(nn[3].index == 3);
}
