#pragma once

#include <vector>

#include "fracdim/core.hpp"

namespace fracdim {

struct Edge {
  Index i;  // i < j
  Index j;
  double length;
};

/// Spanning tree edges sorted by (length, i, j).
struct EdgeList {
  std::vector<Edge> edges;

  std::size_t size() const noexcept { return edges.size(); }
  double total_length() const;
  std::vector<double> lengths() const;
};

/// Total order used for every tie: length, then smaller endpoint, then larger.
inline bool edge_less(const Edge& a, const Edge& b) {
  if (a.length != b.length) return a.length < b.length;
  if (a.i != b.i) return a.i < b.i;
  return a.j < b.j;
}

struct Interval {
  double birth;
  double death;
  double length() const noexcept { return death - birth; }
};

/// Finite persistence intervals of one homology degree.
struct IntervalSet {
  int degree = 0;
  std::vector<Interval> intervals;

  std::size_t size() const noexcept { return intervals.size(); }
  std::vector<double> finite_lengths() const;
};

enum class MstMethod {
  Auto,      // Delaunay + Kruskal in the plane, kd-tree Boruvka otherwise
  Delaunay,  // planar only; falls back to Boruvka for collinear input
  Boruvka,
};

/// Exact Euclidean minimum spanning tree. Duplicate points are joined by
/// zero-length edges. Among tied trees the one minimal under edge_less is
/// returned, so every method yields the same edges.
EdgeList euclidean_mst(const PointsRef& points, MstMethod method = MstMethod::Auto);
EdgeList euclidean_mst(const PointCloud& cloud, MstMethod method = MstMethod::Auto);

/// One interval (0, length / 2) per tree edge.
IntervalSet ph0_intervals(const EdgeList& edges);
IntervalSet ph0_intervals(const PointCloud& cloud);

}  // namespace fracdim
