#include "fracdim/mst.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "fracdim/delaunay.hpp"
#include "fracdim/kdtree.hpp"

namespace fracdim {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(Index n) : parent_(static_cast<std::size_t>(n)), rank_(static_cast<std::size_t>(n), 0) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }
  Index find(Index x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<Index> parent_;
  std::vector<std::uint8_t> rank_;
};

Edge make_edge(const PointsRef& points, Index a, Index b) {
  if (a > b) std::swap(a, b);
  return {a, b, distance(points.row(a), points.row(b))};
}

EdgeList kruskal(Index n, std::vector<Edge> candidates) {
  std::sort(candidates.begin(), candidates.end(), edge_less);
  DisjointSets sets(n);
  EdgeList tree;
  tree.edges.reserve(static_cast<std::size_t>(std::max<Index>(n - 1, 0)));
  for (const Edge& e : candidates) {
    if (sets.unite(e.i, e.j)) {
      tree.edges.push_back(e);
      if (static_cast<Index>(tree.edges.size()) == n - 1) break;
    }
  }
  return tree;
}

EdgeList delaunay_mst(const PointsRef& points) {
  const Delaunay2D dt(points);
  const TriangleMesh mesh = dt.mesh();
  std::vector<Edge> candidates;
  candidates.reserve(mesh.edges.size() + static_cast<std::size_t>(dt.duplicates_skipped()));
  for (const auto& e : mesh.edges) candidates.push_back(make_edge(points, e.a, e.b));

  if (dt.duplicates_skipped() > 0) {
    // Join each later copy to the first occurrence of its coordinates.
    std::vector<Index> order(static_cast<std::size_t>(points.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      if (points(a, 0) != points(b, 0)) return points(a, 0) < points(b, 0);
      if (points(a, 1) != points(b, 1)) return points(a, 1) < points(b, 1);
      return a < b;
    });
    Index first = order[0];
    for (std::size_t k = 1; k < order.size(); ++k) {
      const Index v = order[k];
      if (points(v, 0) == points(first, 0) && points(v, 1) == points(first, 1)) {
        candidates.push_back({first, v, 0.0});
      } else {
        first = v;
      }
    }
  }
  return kruskal(points.rows(), std::move(candidates));
}

// Boruvka rounds; each point searches the kd-tree for its nearest point in
// another component, skipping subtrees that lie wholly in its own component
// or beyond the best candidate already known for that component.
EdgeList boruvka_mst(const PointsRef& points) {
  const Index n = points.rows();
  const Index dim = points.cols();
  const KdTree tree(points, 8);
  const auto& nodes = tree.nodes();
  DisjointSets sets(n);

  std::vector<Index> comp(static_cast<std::size_t>(n));        // by tree position
  std::vector<Index> node_comp(nodes.size());                  // -1 when mixed
  std::vector<Edge> best(static_cast<std::size_t>(n));         // by component root
  std::vector<char> has_best(static_cast<std::size_t>(n));
  std::vector<std::int32_t> stack;
  EdgeList tree_edges;
  Index components = n;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  while (components > 1) {
    for (Index pos = 0; pos < n; ++pos) comp[pos] = sets.find(tree.original_index(pos));
    for (std::size_t id = nodes.size(); id-- > 0;) {
      const auto& node = nodes[id];
      if (node.leaf()) {
        Index c = comp[node.begin];
        for (Index pos = node.begin + 1; pos < node.end && c >= 0; ++pos) {
          if (comp[pos] != c) c = -1;
        }
        node_comp[id] = c;
      } else {
        const Index l = node_comp[node.left];
        node_comp[id] = (l >= 0 && l == node_comp[node.right]) ? l : -1;
      }
    }
    std::fill(has_best.begin(), has_best.end(), 0);

    for (Index q = 0; q < n; ++q) {
      const Index c = comp[q];
      const double* qc = tree.coords(q);
      const Index qi = tree.original_index(q);
      Edge& b = best[c];
      double bound = has_best[c] ? b.length : kInf;
      stack.clear();
      stack.push_back(0);
      while (!stack.empty()) {
        const auto id = static_cast<std::size_t>(stack.back());
        stack.pop_back();
        if (node_comp[id] == c) continue;
        if (bound < kInf && tree.min_sq_distance(qc, id) > bound * bound * (1.0 + 1e-12) + 1e-300) continue;
        const auto& node = nodes[id];
        if (node.leaf()) {
          for (Index pos = node.begin; pos < node.end; ++pos) {
            if (comp[pos] == c) continue;
            const double d = distance(qc, tree.coords(pos), dim);
            if (d > bound) continue;
            Index pi = tree.original_index(pos);
            Edge cand{std::min(qi, pi), std::max(qi, pi), d};
            if (!has_best[c] || edge_less(cand, b)) {
              b = cand;
              has_best[c] = 1;
              bound = d;
            }
          }
        } else {
          // Push the farther child first so the nearer one is searched first.
          const double dl = tree.min_sq_distance(qc, static_cast<std::size_t>(node.left));
          const double dr = tree.min_sq_distance(qc, static_cast<std::size_t>(node.right));
          if (dl <= dr) {
            stack.push_back(node.right);
            stack.push_back(node.left);
          } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
          }
        }
      }
    }

    // Candidate edges all belong to the unique minimal tree under edge_less,
    // so adding them in any order cannot form a cycle except by repetition.
    std::vector<Edge> round;
    for (Index c = 0; c < n; ++c) {
      if (has_best[c]) round.push_back(best[c]);
    }
    std::sort(round.begin(), round.end(), edge_less);
    for (const Edge& e : round) {
      if (sets.unite(e.i, e.j)) {
        tree_edges.edges.push_back(e);
        --components;
      }
    }
  }
  std::sort(tree_edges.edges.begin(), tree_edges.edges.end(), edge_less);
  return tree_edges;
}

}  // namespace

double EdgeList::total_length() const {
  double s = 0.0;
  for (const Edge& e : edges) s += e.length;
  return s;
}

std::vector<double> EdgeList::lengths() const {
  std::vector<double> out;
  out.reserve(edges.size());
  for (const Edge& e : edges) out.push_back(e.length);
  return out;
}

std::vector<double> IntervalSet::finite_lengths() const {
  std::vector<double> out;
  out.reserve(intervals.size());
  for (const Interval& I : intervals) {
    if (std::isfinite(I.death)) out.push_back(I.length());
  }
  return out;
}

EdgeList euclidean_mst(const PointsRef& points, MstMethod method) {
  if (points.rows() <= 1) return {};
  if (method == MstMethod::Auto) method = points.cols() == 2 ? MstMethod::Delaunay : MstMethod::Boruvka;
  if (method == MstMethod::Delaunay) {
    if (points.cols() != 2) {
      throw Error(ErrorKind::InvalidArgument, "Delaunay MST needs planar points");
    }
    // Fewer than three distinct or all collinear points: no triangulation.
    try {
      return delaunay_mst(points);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateInput) throw;
    }
  }
  return boruvka_mst(points);
}

EdgeList euclidean_mst(const PointCloud& cloud, MstMethod method) {
  return euclidean_mst(PointsRef(cloud.points()), method);
}

IntervalSet ph0_intervals(const EdgeList& edges) {
  IntervalSet set;
  set.degree = 0;
  set.intervals.reserve(edges.size());
  for (const Edge& e : edges.edges) set.intervals.push_back({0.0, e.length / 2.0});
  return set;
}

IntervalSet ph0_intervals(const PointCloud& cloud) { return ph0_intervals(euclidean_mst(cloud)); }

}  // namespace fracdim
