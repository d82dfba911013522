#include "fracdim/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace fracdim {

KdTree::KdTree(const PointsRef& points, Index leaf_size) : dim_(points.cols()) {
  if (points.rows() == 0) throw Error(ErrorKind::EmptyInput, "kd-tree needs at least one point");
  if (leaf_size < 1) leaf_size = 1;
  order_.resize(static_cast<std::size_t>(points.rows()));
  std::iota(order_.begin(), order_.end(), Index{0});
  nodes_.reserve(static_cast<std::size_t>(2 * points.rows() / leaf_size + 2));
  build(0, points.rows(), leaf_size, points);
  data_.resize(static_cast<std::size_t>(points.rows() * dim_));
  for (Index pos = 0; pos < points.rows(); ++pos) {
    for (Index k = 0; k < dim_; ++k) {
      data_[static_cast<std::size_t>(pos * dim_ + k)] = points(order_[static_cast<std::size_t>(pos)], k);
    }
  }
}

std::int32_t KdTree::build(Index begin, Index end, Index leaf_size, const PointsRef& points) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  boxes_.resize(boxes_.size() + static_cast<std::size_t>(2 * dim_));
  double* lo = boxes_.data() + static_cast<std::size_t>(id) * 2 * dim_;
  double* hi = lo + dim_;
  std::fill(lo, lo + dim_, std::numeric_limits<double>::infinity());
  std::fill(hi, hi + dim_, -std::numeric_limits<double>::infinity());
  for (Index i = begin; i < end; ++i) {
    const Index p = order_[static_cast<std::size_t>(i)];
    for (Index k = 0; k < dim_; ++k) {
      lo[k] = std::min(lo[k], points(p, k));
      hi[k] = std::max(hi[k], points(p, k));
    }
  }
  if (end - begin <= leaf_size) return id;

  Index axis = 0;
  double widest = -1.0;
  for (Index k = 0; k < dim_; ++k) {
    if (hi[k] - lo[k] > widest) {
      widest = hi[k] - lo[k];
      axis = k;
    }
  }
  if (!(widest > 0.0)) return id;  // all points coincide

  const Index mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Index a, Index b) { return points(a, axis) < points(b, axis); });
  const auto left = build(begin, mid, leaf_size, points);
  const auto right = build(mid, end, leaf_size, points);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double KdTree::min_sq_distance(const double* q, std::size_t node) const noexcept {
  const double* lo = box_lo(node);
  const double* hi = box_hi(node);
  double s = 0.0;
  for (Index k = 0; k < dim_; ++k) {
    double d = 0.0;
    if (q[k] < lo[k]) {
      d = lo[k] - q[k];
    } else if (q[k] > hi[k]) {
      d = q[k] - hi[k];
    }
    s += d * d;
  }
  return s;
}

namespace {

// Inflated square of a radius, used only to prune boxes conservatively; the
// final decision always compares the exact distance.
double prune_bound(double r) { return r * r * (1.0 + 1e-12) + 1e-300; }

}  // namespace

Index KdTree::range_count(std::span<const double> center, double r) const {
  if (static_cast<Index>(center.size()) != dim_) {
    throw Error(ErrorKind::InvalidArgument, "query dimension mismatch");
  }
  if (!(r > 0.0)) return 0;
  const double bound = prune_bound(r);
  Index count = 0;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const auto id = static_cast<std::size_t>(stack.back());
    stack.pop_back();
    if (min_sq_distance(center.data(), id) > bound) continue;
    const Node& node = nodes_[id];
    if (node.leaf()) {
      for (Index pos = node.begin; pos < node.end; ++pos) {
        if (distance(center.data(), coords(pos), dim_) < r) ++count;
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return count;
}

void KdTree::for_each_within(std::span<const double> center, double r,
                             const std::function<void(Index, double)>& fn) const {
  if (static_cast<Index>(center.size()) != dim_) {
    throw Error(ErrorKind::InvalidArgument, "query dimension mismatch");
  }
  if (!(r > 0.0)) return;
  const double bound = prune_bound(r);
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const auto id = static_cast<std::size_t>(stack.back());
    stack.pop_back();
    if (min_sq_distance(center.data(), id) > bound) continue;
    const Node& node = nodes_[id];
    if (node.leaf()) {
      for (Index pos = node.begin; pos < node.end; ++pos) {
        const double d = distance(center.data(), coords(pos), dim_);
        if (d < r) fn(original_index(pos), d);
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
}

std::vector<Neighbor> KdTree::nearest(std::span<const double> center, Index k) const {
  if (static_cast<Index>(center.size()) != dim_) {
    throw Error(ErrorKind::InvalidArgument, "query dimension mismatch");
  }
  if (k < 0 || k > size()) throw Error(ErrorKind::InvalidArgument, "k exceeds the number of points");
  if (k == 0) return {};

  auto worse = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  };
  // Max-heap of the best k so far; top is the current worst.
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(worse)> best(worse);
  const auto kk = static_cast<std::size_t>(k);

  struct Pending {
    double sq;
    std::int32_t node;
  };
  auto farther = [](const Pending& a, const Pending& b) { return a.sq > b.sq; };
  std::priority_queue<Pending, std::vector<Pending>, decltype(farther)> queue(farther);
  queue.push({min_sq_distance(center.data(), 0), 0});
  while (!queue.empty()) {
    const Pending top = queue.top();
    queue.pop();
    // Keep boxes at exactly the current worst distance: they may hold a tie
    // with a smaller index.
    if (best.size() == kk && top.sq > prune_bound(best.top().distance)) break;
    const Node& node = nodes_[static_cast<std::size_t>(top.node)];
    if (node.leaf()) {
      for (Index pos = node.begin; pos < node.end; ++pos) {
        const Neighbor cand{original_index(pos), distance(center.data(), coords(pos), dim_)};
        if (best.size() < kk) {
          best.push(cand);
        } else if (worse(cand, best.top())) {
          best.pop();
          best.push(cand);
        }
      }
    } else {
      for (const auto child : {node.left, node.right}) {
        queue.push({min_sq_distance(center.data(), static_cast<std::size_t>(child)), child});
      }
    }
  }
  std::vector<Neighbor> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace fracdim
