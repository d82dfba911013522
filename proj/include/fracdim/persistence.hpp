#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fracdim/core.hpp"
#include "fracdim/delaunay.hpp"
#include "fracdim/mst.hpp"

namespace fracdim {

struct Simplex {
  int dim;                      // 0, 1 or 2
  std::array<Index, 3> vertex;  // input point ids; unused slots -1
  double value;
};

/// Planar alpha complex in filtration order (value, then dimension, then
/// mesh order). Values use the radius convention: a simplex enters when the
/// balls of radius r around the points first cover it, so an isolated
/// edge of length l enters at l / 2 and a triangle at its circumradius.
struct FilteredComplex2D {
  std::vector<Simplex> simplices;
  /// Positions (into `simplices`) of the facets; -1 for unused slots.
  std::vector<std::array<std::int32_t, 3>> facets;

  std::size_t size() const noexcept { return simplices.size(); }
  Index count(int dim) const;
};

/// Edge value: half its length when its diametral disk holds no other point
/// (Gabriel), else the smallest circumradius among incident triangles.
/// Triangle value: circumradius, raised if needed to its largest facet value
/// so that the filtration is monotone under rounding.
FilteredComplex2D alpha_filtration(const PointsRef& points, const TriangleMesh& mesh);

struct PersistencePair {
  int degree;
  double birth;
  double death;
  std::int32_t birth_simplex;  // positions in the filtration
  std::int32_t death_simplex;
};

struct PersistencePairs {
  std::vector<PersistencePair> pairs;  // positive persistence only

  IntervalSet intervals(int degree) const;
};

/// GF(2) column reduction with clearing: triangle columns are reduced
/// first, and edges they kill are skipped when edges are reduced against
/// vertices. Degree-0 pairs are computed only when requested.
PersistencePairs reduce(const FilteredComplex2D& complex, bool with_degree0 = false);

/// Degree-1 intervals of a planar cloud. Exact duplicates are dropped before
/// triangulating; their number is reported through `duplicates_removed`.
/// Throws InvalidArgument unless m = 2, DegenerateInput for fewer than three
/// distinct or all-collinear points.
IntervalSet ph1_intervals(const PointsRef& points, Index* duplicates_removed = nullptr);
IntervalSet ph1_intervals(const PointCloud& cloud, Index* duplicates_removed = nullptr);

}  // namespace fracdim
