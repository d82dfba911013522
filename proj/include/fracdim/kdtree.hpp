#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "fracdim/core.hpp"

namespace fracdim {

/// Euclidean distance with a fixed evaluation order. Every module (index
/// queries, MST lengths, test oracles) goes through this so that strict
/// comparisons against a radius agree bit for bit.
template <typename DerivedA, typename DerivedB>
inline double distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  double s = 0.0;
  for (Index k = 0; k < a.size(); ++k) {
    const double d = a(k) - b(k);
    s += d * d;
  }
  return std::sqrt(s);
}

inline double distance(const double* a, const double* b, Index dim) {
  double s = 0.0;
  for (Index k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

struct Neighbor {
  Index index;
  double distance;
};

/// Exact static kd-tree over a copy of the input points. Immutable after
/// construction, so concurrent queries are safe.
class KdTree {
 public:
  struct Node {
    Index begin;   // range into the permuted order
    Index end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    bool leaf() const noexcept { return left < 0; }
  };

  /// Throws EmptyInput for an empty point set.
  explicit KdTree(const PointsRef& points, Index leaf_size = 12);

  Index size() const noexcept { return static_cast<Index>(order_.size()); }
  Index dim() const noexcept { return dim_; }

  /// Number of points with distance(center, x) < r (strict).
  Index range_count(std::span<const double> center, double r) const;
  /// The k nearest points, ascending by distance, ties by original index.
  std::vector<Neighbor> nearest(std::span<const double> center, Index k) const;
  /// Calls fn(original_index, distance) for every point strictly within r.
  void for_each_within(std::span<const double> center, double r,
                       const std::function<void(Index, double)>& fn) const;

  // Read access for tree algorithms (dual traversals, Boruvka).
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  /// Coordinates of the point at permuted position `pos`.
  const double* coords(Index pos) const noexcept { return data_.data() + pos * dim_; }
  /// Original index of the point at permuted position `pos`.
  Index original_index(Index pos) const noexcept { return order_[static_cast<std::size_t>(pos)]; }
  const double* box_lo(std::size_t node) const noexcept { return boxes_.data() + node * 2 * dim_; }
  const double* box_hi(std::size_t node) const noexcept { return boxes_.data() + node * 2 * dim_ + dim_; }
  /// Squared distance from q to the bounding box of `node` (0 inside).
  double min_sq_distance(const double* q, std::size_t node) const noexcept;

 private:
  std::int32_t build(Index begin, Index end, Index leaf_size, const PointsRef& points);

  Index dim_ = 0;
  std::vector<Index> order_;
  std::vector<double> data_;
  std::vector<Node> nodes_;
  std::vector<double> boxes_;
};

}  // namespace fracdim
