#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fracdim/core.hpp"

namespace fracdim {

/// Finite part of a planar triangulation with edge adjacency. Vertex ids are
/// row indices of the input points.
struct TriangleMesh {
  struct Edge {
    Index a;  // a < b
    Index b;
    std::array<std::int32_t, 2> triangles{-1, -1};  // -1 on the convex hull
  };

  std::vector<std::array<Index, 3>> triangles;  // counterclockwise
  std::vector<std::array<std::int32_t, 3>> triangle_edges;  // edge opposite vertex i
  std::vector<Edge> edges;
  std::vector<Index> vertices;  // distinct vertices in the triangulation
};

/// Incremental Bowyer-Watson Delaunay triangulation with a vertex at
/// infinity, exact orientation / in-circle predicates, and exact duplicate
/// removal (later copies of a point are skipped).
///
/// Co-circular ties: an inserted point lying exactly on a circumcircle is not
/// in conflict with that triangle. This is equivalent to perturbing each new
/// point infinitesimally outward relative to earlier (lower insertion rank)
/// points, so the result is always a valid Delaunay triangulation.
class Delaunay2D {
 public:
  static constexpr std::int32_t kInfinite = -1;

  struct Triangle {
    std::array<std::int32_t, 3> v;  // counterclockwise; kInfinite for ghosts
    std::array<std::int32_t, 3> n;  // neighbor opposite v[i]
    bool alive = true;
    bool ghost() const { return v[0] == kInfinite || v[1] == kInfinite || v[2] == kInfinite; }
  };

  /// Triangulate all points, inserting in Hilbert-curve order. Throws
  /// DegenerateInput when fewer than 3 distinct points exist or all are
  /// collinear.
  explicit Delaunay2D(const PointsRef& points);

  /// Prepare for insertion in index order; call insert_until to grow.
  static Delaunay2D incremental(const PointsRef& points);

  /// Insert points [inserted(), count) in index order.
  void insert_until(Index count);
  Index inserted() const noexcept { return inserted_; }
  /// True once three non-collinear points have been inserted.
  bool has_triangles() const noexcept { return started_; }

  Index duplicates_skipped() const noexcept { return duplicates_; }
  const std::vector<Triangle>& raw_triangles() const noexcept { return tris_; }

  TriangleMesh mesh() const;

 private:
  struct Incremental {};
  Delaunay2D(const PointsRef& points, Incremental);

  const double* pt(std::int32_t v) const { return coords_.data() + 2 * static_cast<std::size_t>(v); }
  bool try_start(std::int32_t v);
  void insert(std::int32_t v);
  std::int32_t locate(std::int32_t v, std::int32_t start) const;
  bool in_conflict(const Triangle& t, const double* p) const;
  std::int32_t new_triangle(std::int32_t a, std::int32_t b, std::int32_t c);
  std::int32_t start_hint(std::int32_t v) const;
  void record_hint(std::int32_t v);

  std::vector<double> coords_;
  std::vector<std::int32_t> representative_;  // first occurrence of identical coordinates
  std::vector<Triangle> tris_;
  std::vector<std::int32_t> free_;
  std::vector<std::int32_t> vertex_triangle_;
  std::vector<std::int32_t> pending_;  // inserted before a non-collinear triple existed
  std::int32_t last_ = -1;
  Index inserted_ = 0;
  Index duplicates_ = 0;
  bool started_ = false;

  // Bucket grid of recently inserted vertices used to start walks when
  // inserting in index order.
  double grid_x0_ = 0.0, grid_y0_ = 0.0, grid_inv_ = 1.0;
  std::int32_t grid_n_ = 0;
  std::vector<std::int32_t> grid_;

  // Scratch for cavity construction.
  std::vector<std::int32_t> stack_;
  std::vector<std::int32_t> cavity_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t epoch_ = 0;
};

}  // namespace fracdim
