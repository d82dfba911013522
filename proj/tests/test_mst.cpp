#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "fracdim/estimators.hpp"
#include "fracdim/mst.hpp"
#include "fracdim/samplers.hpp"
#include "oracles.hpp"

using namespace fracdim;

namespace {

std::vector<double> sorted_lengths(const EdgeList& e) {
  auto v = e.lengths();
  std::sort(v.begin(), v.end());
  return v;
}

bool is_spanning_tree(const EdgeList& e, Index n) {
  if (static_cast<Index>(e.size()) != std::max<Index>(n - 1, 0)) return false;
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& edge : e.edges) {
    if (edge.i >= edge.j) return false;
    const Index a = find(edge.i), b = find(edge.j);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

}  // namespace

TEST_CASE("small examples") {
  Points p(3, 2);
  p << 0, 0, 1, 0, 3, 0;
  const auto e = euclidean_mst(p);
  CHECK(sorted_lengths(e) == std::vector<double>{1, 2});

  CHECK(euclidean_mst(Points(Points::Zero(1, 2))).size() == 0);
  CHECK(euclidean_mst(Points(Points::Zero(1, 5))).size() == 0);

  const auto iv = ph0_intervals(e);
  REQUIRE(iv.size() == 2);
  CHECK(iv.degree == 0);
  CHECK(iv.intervals[0].birth == 0.0);
  CHECK(iv.intervals[0].death == 0.5);
  CHECK(iv.intervals[1].death == 1.0);

  Points two(2, 3);
  two << 0, 0, 0, 1, 2, 2;
  const auto pair = ph0_intervals(PointCloud(two));
  REQUIRE(pair.size() == 1);
  CHECK(pair.intervals[0].death == doctest::Approx(1.5));
}

TEST_CASE("oracle equivalence across sizes and dimensions") {
  std::uint64_t seed = 100;
  for (Index m : {2, 3, 8}) {
    for (Index n : {10, 100, 2000}) {
      const Points p = oracle::uniform_points(n, m, seed++);
      const auto expected = oracle::kruskal_lengths(p);
      for (auto method : {MstMethod::Auto, MstMethod::Boruvka}) {
        const auto e = euclidean_mst(p, method);
        CHECK(is_spanning_tree(e, n));
        const auto got = sorted_lengths(e);
        REQUIRE(got.size() == expected.size());
        double worst = 0;
        for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] - expected[k]));
        CHECK(worst <= 1e-12);
      }
    }
  }
}

TEST_CASE("delaunay and boruvka build the same tree") {
  const auto cloud = sample_sierpinski(5000, 8);
  const auto a = euclidean_mst(cloud, MstMethod::Delaunay);
  const auto b = euclidean_mst(cloud, MstMethod::Boruvka);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.edges[k].i == b.edges[k].i);
    CHECK(a.edges[k].j == b.edges[k].j);
    CHECK(a.edges[k].length == b.edges[k].length);
  }
  // Sorted by edge_less.
  CHECK(std::is_sorted(a.edges.begin(), a.edges.end(), edge_less));
}

TEST_CASE("ties on a lattice") {
  Points grid(36, 2);
  for (int i = 0; i < 36; ++i) grid.row(i) << i % 6, i / 6;
  for (auto method : {MstMethod::Delaunay, MstMethod::Boruvka}) {
    const auto e = euclidean_mst(grid, method);
    CHECK(is_spanning_tree(e, 36));
    CHECK(e.total_length() == doctest::Approx(35.0));
  }
  const auto a = euclidean_mst(grid, MstMethod::Delaunay);
  const auto b = euclidean_mst(grid, MstMethod::Boruvka);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.edges[k].i == b.edges[k].i);
    CHECK(a.edges[k].j == b.edges[k].j);
  }
}

TEST_CASE("collinear and duplicate points") {
  Points line(50, 2);
  for (int i = 0; i < 50; ++i) line.row(i) << 0.5 * i, 0.25 * i;
  const auto e = euclidean_mst(line, MstMethod::Delaunay);
  CHECK(is_spanning_tree(e, 50));
  CHECK(e.total_length() == doctest::Approx(49 * std::hypot(0.5, 0.25)));

  Points dup = oracle::uniform_points(200, 2, 4);
  dup.row(150) = dup.row(3);
  dup.row(151) = dup.row(3);
  for (auto method : {MstMethod::Delaunay, MstMethod::Boruvka}) {
    const auto d = euclidean_mst(dup, method);
    CHECK(is_spanning_tree(d, 200));
    const auto zeros = std::count_if(d.edges.begin(), d.edges.end(), [](const Edge& x) { return x.length == 0; });
    CHECK(zeros == 2);
    CHECK(sorted_lengths(d) == oracle::kruskal_lengths(dup));
  }
  const auto iv = ph0_intervals(euclidean_mst(dup));
  const auto ref = oracle::kruskal_lengths(dup);
  CHECK(e_alpha(iv, 1.0) == doctest::Approx(std::accumulate(ref.begin(), ref.end(), 0.0) / 2));
  CHECK(iv.finite_lengths().size() == 199);

  Points same(10, 3);
  same.setOnes();
  CHECK(euclidean_mst(same).total_length() == 0.0);
}

TEST_CASE("rigid motion and scaling invariance") {
  const Points p = oracle::uniform_points(1500, 3, 12);
  const auto base = sorted_lengths(euclidean_mst(p));
  const Eigen::Matrix3d q = Eigen::Matrix3d(Eigen::HouseholderQR<Eigen::Matrix3d>(
                                                oracle::uniform_points(3, 3, 13))
                                                .householderQ());
  const Points moved = (p * q.transpose()).rowwise() + Eigen::RowVector3d(5, -2, 7);
  const auto rotated = sorted_lengths(euclidean_mst(moved));
  for (std::size_t k = 0; k < base.size(); ++k) CHECK(std::abs(rotated[k] - base[k]) < 1e-9);

  const double total = euclidean_mst(p).total_length();
  const Points scaled = p * 3.7;
  CHECK(euclidean_mst(scaled).total_length() == doctest::Approx(3.7 * total).epsilon(1e-9));

  const auto planar = oracle::uniform_points(1500, 2, 14);
  const double t2 = euclidean_mst(planar).total_length();
  CHECK(euclidean_mst(Points(planar * 0.01)).total_length() == doctest::Approx(0.01 * t2).epsilon(1e-9));
}

TEST_CASE("prefix sums are finite and positive") {
  const auto cloud = sample_cantor_dust(3000, 2);
  for (Index k : {2, 10, 100, 3000}) {
    const double e = e_alpha(ph0_intervals(cloud.prefix(k)), 1.0);
    CHECK(std::isfinite(e));
    CHECK(e > 0.0);
  }
}
