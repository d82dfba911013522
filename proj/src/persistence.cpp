#include "fracdim/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fracdim/kdtree.hpp"
#include "fracdim/predicates.hpp"

namespace fracdim {

namespace {

double circumradius(const PointsRef& p, Index a, Index b, Index c) {
  const double ab = distance(p.row(a), p.row(b));
  const double bc = distance(p.row(b), p.row(c));
  const double ca = distance(p.row(c), p.row(a));
  const double cross = (p(b, 0) - p(a, 0)) * (p(c, 1) - p(a, 1)) - (p(b, 1) - p(a, 1)) * (p(c, 0) - p(a, 0));
  return ab * bc * ca / (2.0 * std::abs(cross));
}

// Sparse GF(2) column: sorted row positions.
using Column = std::vector<std::int32_t>;

void add_into(Column& target, const Column& source, Column& scratch) {
  scratch.clear();
  std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                std::back_inserter(scratch));
  target.swap(scratch);
}

}  // namespace

Index FilteredComplex2D::count(int dim) const {
  return std::count_if(simplices.begin(), simplices.end(), [dim](const Simplex& s) { return s.dim == dim; });
}

FilteredComplex2D alpha_filtration(const PointsRef& points, const TriangleMesh& mesh) {
  const std::size_t nt = mesh.triangles.size();
  const std::size_t ne = mesh.edges.size();
  const std::size_t nv = mesh.vertices.size();

  std::vector<double> tri_radius(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& v = mesh.triangles[t];
    tri_radius[t] = circumradius(points, v[0], v[1], v[2]);
  }

  std::vector<double> edge_value(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& edge = mesh.edges[e];
    bool gabriel = true;
    double smallest = std::numeric_limits<double>::infinity();
    for (const std::int32_t t : edge.triangles) {
      if (t < 0) continue;
      smallest = std::min(smallest, tri_radius[t]);
      const auto& v = mesh.triangles[t];
      Index opposite = v[0];
      for (Index w : v) {
        if (w != edge.a && w != edge.b) opposite = w;
      }
      const double* pa = points.row(edge.a).data();
      const double* pb = points.row(edge.b).data();
      const double* pw = points.row(opposite).data();
      if (predicates::diametral(pa, pb, pw) < 0) gabriel = false;
    }
    edge_value[e] = gabriel ? distance(points.row(edge.a), points.row(edge.b)) / 2.0 : smallest;
  }

  std::vector<double> tri_value(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    double v = tri_radius[t];
    for (const std::int32_t e : mesh.triangle_edges[t]) v = std::max(v, edge_value[e]);
    tri_value[t] = v;
  }

  // Global ids: vertices [0, nv), edges [nv, nv + ne), triangles after.
  std::vector<std::int32_t> order(nv + ne + nt);
  std::iota(order.begin(), order.end(), 0);
  auto value_of = [&](std::int32_t id) -> double {
    const auto u = static_cast<std::size_t>(id);
    if (u < nv) return 0.0;
    if (u < nv + ne) return edge_value[u - nv];
    return tri_value[u - nv - ne];
  };
  auto dim_of = [&](std::int32_t id) {
    const auto u = static_cast<std::size_t>(id);
    return u < nv ? 0 : (u < nv + ne ? 1 : 2);
  };
  std::vector<double> values(order.size());
  std::vector<int> dims(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    values[k] = value_of(static_cast<std::int32_t>(k));
    dims[k] = dim_of(static_cast<std::int32_t>(k));
  }
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    if (dims[a] != dims[b]) return dims[a] < dims[b];
    return a < b;
  });
  std::vector<std::int32_t> position(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = static_cast<std::int32_t>(k);

  std::vector<std::int32_t> vertex_id(static_cast<std::size_t>(points.rows()), -1);
  for (std::size_t k = 0; k < nv; ++k) vertex_id[mesh.vertices[k]] = static_cast<std::int32_t>(k);

  FilteredComplex2D complex;
  complex.simplices.reserve(order.size());
  complex.facets.reserve(order.size());
  for (const std::int32_t id : order) {
    const auto u = static_cast<std::size_t>(id);
    if (u < nv) {
      complex.simplices.push_back({0, {mesh.vertices[u], -1, -1}, 0.0});
      complex.facets.push_back({-1, -1, -1});
    } else if (u < nv + ne) {
      const auto& edge = mesh.edges[u - nv];
      complex.simplices.push_back({1, {edge.a, edge.b, -1}, values[id]});
      complex.facets.push_back({position[vertex_id[edge.a]], position[vertex_id[edge.b]], -1});
    } else {
      const std::size_t t = u - nv - ne;
      const auto& te = mesh.triangle_edges[t];
      complex.simplices.push_back({2, mesh.triangles[t], values[id]});
      complex.facets.push_back({position[nv + te[0]], position[nv + te[1]], position[nv + te[2]]});
    }
  }
  return complex;
}

IntervalSet PersistencePairs::intervals(int degree) const {
  IntervalSet set;
  set.degree = degree;
  for (const PersistencePair& p : pairs) {
    if (p.degree == degree) set.intervals.push_back({p.birth, p.death});
  }
  return set;
}

PersistencePairs reduce(const FilteredComplex2D& complex, bool with_degree0) {
  const std::size_t n = complex.size();
  std::vector<std::int32_t> pivot_owner(n, -1);  // row -> column whose pivot it is
  std::vector<Column> reduced(n);
  std::vector<char> cleared(n, 0);
  Column scratch;
  PersistencePairs out;

  auto reduce_dimension = [&](int dim) {
    for (std::size_t j = 0; j < n; ++j) {
      const Simplex& s = complex.simplices[j];
      if (s.dim != dim || cleared[j]) continue;
      Column col;
      for (const std::int32_t f : complex.facets[j]) {
        if (f >= 0) col.push_back(f);
      }
      std::sort(col.begin(), col.end());
      while (!col.empty() && pivot_owner[col.back()] >= 0) {
        add_into(col, reduced[pivot_owner[col.back()]], scratch);
      }
      if (col.empty()) continue;
      const std::int32_t low = col.back();
      pivot_owner[low] = static_cast<std::int32_t>(j);
      cleared[low] = 1;  // clearing: the column of a pivot row reduces to zero
      const double birth = complex.simplices[low].value;
      if (s.value > birth) {
        out.pairs.push_back({dim - 1, birth, s.value, low, static_cast<std::int32_t>(j)});
      }
      reduced[j] = std::move(col);
    }
  };

  reduce_dimension(2);
  if (with_degree0) reduce_dimension(1);
  return out;
}

IntervalSet ph1_intervals(const PointsRef& points, Index* duplicates_removed) {
  if (points.cols() != 2) {
    throw Error(ErrorKind::InvalidArgument, "degree-1 persistence is only supported for planar points");
  }
  const Delaunay2D dt(points);
  if (duplicates_removed) *duplicates_removed = dt.duplicates_skipped();
  const FilteredComplex2D complex = alpha_filtration(points, dt.mesh());
  return reduce(complex).intervals(1);
}

IntervalSet ph1_intervals(const PointCloud& cloud, Index* duplicates_removed) {
  return ph1_intervals(PointsRef(cloud.points()), duplicates_removed);
}

}  // namespace fracdim
