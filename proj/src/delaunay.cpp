#include "fracdim/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fracdim/predicates.hpp"

namespace fracdim {

namespace {

using predicates::orient2d;

// Position along a Hilbert curve filling a 2^16 x 2^16 grid.
std::uint64_t hilbert_key(std::uint32_t x, std::uint32_t y) {
  constexpr std::uint32_t n = 1u << 16;
  std::uint64_t d = 0;
  for (std::uint32_t s = n / 2; s > 0; s /= 2) {
    const std::uint32_t rx = (x & s) ? 1 : 0;
    const std::uint32_t ry = (y & s) ? 1 : 0;
    d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = n - 1 - x;
        y = n - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

// Strict betweenness for a point already known to be collinear with a, b.
bool strictly_between(const double* a, const double* b, const double* p) {
  if (a[0] != b[0]) {
    return (a[0] < p[0] && p[0] < b[0]) || (b[0] < p[0] && p[0] < a[0]);
  }
  return (a[1] < p[1] && p[1] < b[1]) || (b[1] < p[1] && p[1] < a[1]);
}

}  // namespace

Delaunay2D::Delaunay2D(const PointsRef& points, Incremental) {
  if (points.cols() != 2) {
    throw Error(ErrorKind::InvalidArgument, "Delaunay triangulation needs planar points");
  }
  const Index n = points.rows();
  if (n > std::numeric_limits<std::int32_t>::max() / 4) {
    throw Error(ErrorKind::InvalidArgument, "too many points for the triangulation");
  }
  coords_.resize(static_cast<std::size_t>(2 * n));
  for (Index i = 0; i < n; ++i) {
    coords_[2 * i] = points(i, 0);
    coords_[2 * i + 1] = points(i, 1);
  }

  std::vector<std::int32_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    const double* pa = pt(a);
    const double* pb = pt(b);
    if (pa[0] != pb[0]) return pa[0] < pb[0];
    if (pa[1] != pb[1]) return pa[1] < pb[1];
    return a < b;
  });
  representative_.assign(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::int32_t v = order[k];
    if (k > 0) {
      const std::int32_t prev = order[k - 1];
      if (pt(prev)[0] == pt(v)[0] && pt(prev)[1] == pt(v)[1]) {
        representative_[v] = representative_[prev];
        continue;
      }
    }
    representative_[v] = v;
  }

  vertex_triangle_.assign(static_cast<std::size_t>(n), -1);
  tris_.reserve(static_cast<std::size_t>(2 * n + 8));

  if (n > 0) {
    double x0 = coords_[0], x1 = x0, y0 = coords_[1], y1 = y0;
    for (Index i = 1; i < n; ++i) {
      x0 = std::min(x0, coords_[2 * i]);
      x1 = std::max(x1, coords_[2 * i]);
      y0 = std::min(y0, coords_[2 * i + 1]);
      y1 = std::max(y1, coords_[2 * i + 1]);
    }
    grid_n_ = static_cast<std::int32_t>(std::clamp(std::sqrt(static_cast<double>(n) / 4.0), 1.0, 2048.0));
    const double extent = std::max({x1 - x0, y1 - y0, std::numeric_limits<double>::min()});
    grid_x0_ = x0;
    grid_y0_ = y0;
    grid_inv_ = grid_n_ / extent;
    grid_.assign(static_cast<std::size_t>(grid_n_) * grid_n_, -1);
  }
}

Delaunay2D::Delaunay2D(const PointsRef& points) : Delaunay2D(points, Incremental{}) {
  const Index n = points.rows();
  std::vector<std::int32_t> order;
  order.reserve(static_cast<std::size_t>(n));
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  for (Index i = 0; i < n; ++i) {
    if (representative_[i] != i) {
      ++duplicates_;
      continue;
    }
    const double* p = pt(static_cast<std::int32_t>(i));
    if (order.empty()) {
      x0 = x1 = p[0];
      y0 = y1 = p[1];
    }
    x0 = std::min(x0, p[0]);
    x1 = std::max(x1, p[0]);
    y0 = std::min(y0, p[1]);
    y1 = std::max(y1, p[1]);
    order.push_back(static_cast<std::int32_t>(i));
  }
  if (order.size() < 3) {
    throw Error(ErrorKind::DegenerateInput, "triangulation needs at least three distinct points");
  }

  const double sx = x1 > x0 ? 65535.0 / (x1 - x0) : 0.0;
  const double sy = y1 > y0 ? 65535.0 / (y1 - y0) : 0.0;
  std::vector<std::pair<std::uint64_t, std::int32_t>> keyed;
  keyed.reserve(order.size());
  for (std::int32_t v : order) {
    const auto gx = static_cast<std::uint32_t>((pt(v)[0] - x0) * sx);
    const auto gy = static_cast<std::uint32_t>((pt(v)[1] - y0) * sy);
    keyed.emplace_back(hilbert_key(std::min(gx, 65535u), std::min(gy, 65535u)), v);
  }
  std::sort(keyed.begin(), keyed.end());

  for (const auto& [key, v] : keyed) {
    if (!started_) {
      try_start(v);
    } else {
      insert(v);
    }
  }
  inserted_ = n;
  if (!started_) {
    throw Error(ErrorKind::DegenerateInput, "all points are collinear");
  }
}

Delaunay2D Delaunay2D::incremental(const PointsRef& points) {
  return Delaunay2D(points, Incremental{});
}

void Delaunay2D::insert_until(Index count) {
  count = std::min<Index>(count, static_cast<Index>(representative_.size()));
  for (Index i = inserted_; i < count; ++i) {
    const auto v = static_cast<std::int32_t>(i);
    if (representative_[i] != v) {
      ++duplicates_;
    } else if (!started_) {
      try_start(v);
    } else {
      insert(v);
    }
    if (started_) record_hint(v);
  }
  inserted_ = std::max(inserted_, count);
}

std::int32_t Delaunay2D::new_triangle(std::int32_t a, std::int32_t b, std::int32_t c) {
  std::int32_t id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
    tris_[id] = Triangle{{a, b, c}, {-1, -1, -1}, true};
  } else {
    id = static_cast<std::int32_t>(tris_.size());
    tris_.push_back(Triangle{{a, b, c}, {-1, -1, -1}, true});
  }
  for (std::int32_t v : {a, b, c}) {
    if (v != kInfinite) vertex_triangle_[v] = id;
  }
  return id;
}

bool Delaunay2D::try_start(std::int32_t v) {
  pending_.push_back(v);
  if (pending_.size() < 3) return false;
  const std::int32_t a = pending_[0];
  const std::int32_t b = pending_[1];
  const int o = orient2d(pt(a), pt(b), pt(v));
  if (o == 0) return false;

  const std::int32_t p = o > 0 ? a : b;
  const std::int32_t q = o > 0 ? b : a;
  const std::int32_t r = v;
  const std::int32_t t = new_triangle(p, q, r);
  const std::int32_t g0 = new_triangle(r, q, kInfinite);
  const std::int32_t g1 = new_triangle(p, r, kInfinite);
  const std::int32_t g2 = new_triangle(q, p, kInfinite);
  tris_[t].n = {g0, g1, g2};
  tris_[g0].n = {g2, g1, t};
  tris_[g1].n = {g0, g2, t};
  tris_[g2].n = {g1, g0, t};
  last_ = t;
  started_ = true;
  for (std::int32_t u : {p, q, r}) record_hint(u);

  std::vector<std::int32_t> rest;
  for (std::size_t k = 2; k + 1 < pending_.size(); ++k) rest.push_back(pending_[k]);
  pending_.clear();
  pending_.shrink_to_fit();
  for (std::int32_t u : rest) {
    insert(u);
    record_hint(u);
  }
  return true;
}

bool Delaunay2D::in_conflict(const Triangle& t, const double* p) const {
  for (int k = 0; k < 3; ++k) {
    if (t.v[k] == kInfinite) {
      const double* x = pt(t.v[(k + 1) % 3]);
      const double* y = pt(t.v[(k + 2) % 3]);
      const int o = orient2d(x, y, p);
      return o > 0 || (o == 0 && strictly_between(x, y, p));
    }
  }
  return predicates::incircle(pt(t.v[0]), pt(t.v[1]), pt(t.v[2]), p) > 0;
}

std::int32_t Delaunay2D::start_hint(std::int32_t v) const {
  if (grid_n_ > 0) {
    const double* p = pt(v);
    const auto cx = std::clamp<std::int32_t>(static_cast<std::int32_t>((p[0] - grid_x0_) * grid_inv_), 0, grid_n_ - 1);
    const auto cy = std::clamp<std::int32_t>(static_cast<std::int32_t>((p[1] - grid_y0_) * grid_inv_), 0, grid_n_ - 1);
    const std::int32_t u = grid_[static_cast<std::size_t>(cy) * grid_n_ + cx];
    if (u >= 0 && vertex_triangle_[u] >= 0) return vertex_triangle_[u];
  }
  return last_;
}

void Delaunay2D::record_hint(std::int32_t v) {
  if (grid_n_ == 0 || representative_[v] != v) return;
  const double* p = pt(v);
  const auto cx = std::clamp<std::int32_t>(static_cast<std::int32_t>((p[0] - grid_x0_) * grid_inv_), 0, grid_n_ - 1);
  const auto cy = std::clamp<std::int32_t>(static_cast<std::int32_t>((p[1] - grid_y0_) * grid_inv_), 0, grid_n_ - 1);
  grid_[static_cast<std::size_t>(cy) * grid_n_ + cx] = v;
}

std::int32_t Delaunay2D::locate(std::int32_t v, std::int32_t start) const {
  const double* p = pt(v);
  std::int32_t t = start;
  const std::size_t limit = 4 * tris_.size() + 16;
  for (std::size_t steps = 0; steps < limit; ++steps) {
    const Triangle& tri = tris_[t];
    if (tri.ghost()) {
      if (in_conflict(tri, p)) return t;
      for (int k = 0; k < 3; ++k) {
        if (tri.v[k] == kInfinite) t = tri.n[k];
      }
      continue;
    }
    bool moved = false;
    for (int k = 0; k < 3; ++k) {
      if (orient2d(pt(tri.v[(k + 1) % 3]), pt(tri.v[(k + 2) % 3]), p) < 0) {
        t = tri.n[k];
        moved = true;
        break;
      }
    }
    if (!moved) return t;
  }
  // Walk failed to settle; scan instead.
  for (std::size_t k = 0; k < tris_.size(); ++k) {
    if (tris_[k].alive && in_conflict(tris_[k], p)) return static_cast<std::int32_t>(k);
  }
  throw Error(ErrorKind::DegenerateInput, "point location failed");
}

void Delaunay2D::insert(std::int32_t v) {
  const double* p = pt(v);
  const std::int32_t seed = locate(v, start_hint(v));

  if (mark_.size() < tris_.size()) mark_.resize(tris_.size() + tris_.size() / 2 + 16, 0);
  if (++epoch_ == 0) {
    std::fill(mark_.begin(), mark_.end(), 0);
    epoch_ = 1;
  }
  cavity_.clear();
  stack_.clear();
  stack_.push_back(seed);
  mark_[seed] = epoch_;
  while (!stack_.empty()) {
    const std::int32_t t = stack_.back();
    stack_.pop_back();
    cavity_.push_back(t);
    for (std::int32_t nb : tris_[t].n) {
      if (mark_[nb] == epoch_) continue;
      if (in_conflict(tris_[nb], p)) {
        mark_[nb] = epoch_;
        stack_.push_back(nb);
      }
    }
  }

  struct BoundaryEdge {
    std::int32_t a, b, outside;
  };
  std::vector<BoundaryEdge> boundary;
  for (std::int32_t t : cavity_) {
    const Triangle& tri = tris_[t];
    for (int k = 0; k < 3; ++k) {
      if (mark_[tri.n[k]] != epoch_) {
        boundary.push_back({tri.v[(k + 1) % 3], tri.v[(k + 2) % 3], tri.n[k]});
      }
    }
  }
  for (std::int32_t t : cavity_) {
    tris_[t].alive = false;
    free_.push_back(t);
  }

  std::vector<std::pair<std::int32_t, std::int32_t>> by_start, by_end;
  by_start.reserve(boundary.size());
  by_end.reserve(boundary.size());
  for (const BoundaryEdge& e : boundary) {
    const std::int32_t t = new_triangle(e.a, e.b, v);
    tris_[t].n[2] = e.outside;
    Triangle& out = tris_[e.outside];
    for (int k = 0; k < 3; ++k) {
      if (out.v[k] != e.a && out.v[k] != e.b) out.n[k] = t;
    }
    by_start.emplace_back(e.a, t);
    by_end.emplace_back(e.b, t);
  }
  std::sort(by_start.begin(), by_start.end());
  std::sort(by_end.begin(), by_end.end());
  auto find = [](const std::vector<std::pair<std::int32_t, std::int32_t>>& list, std::int32_t key) {
    const auto it = std::lower_bound(list.begin(), list.end(), std::make_pair(key, std::int32_t{-2}));
    return it->second;
  };
  for (const auto& [a, t] : by_start) {
    Triangle& tri = tris_[t];
    tri.n[0] = find(by_start, tri.v[1]);  // across edge (b, v)
    tri.n[1] = find(by_end, a);           // across edge (v, a)
  }
  last_ = by_start.front().second;
  if (mark_.size() < tris_.size()) mark_.resize(tris_.size() + tris_.size() / 2 + 16, 0);
}

TriangleMesh Delaunay2D::mesh() const {
  if (!started_) {
    throw Error(ErrorKind::DegenerateInput, "no triangles: fewer than three non-collinear points");
  }
  TriangleMesh mesh;
  std::vector<std::int32_t> compact(tris_.size(), -1);
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    if (!tris_[t].alive || tris_[t].ghost()) continue;
    compact[t] = static_cast<std::int32_t>(mesh.triangles.size());
    const auto& v = tris_[t].v;
    mesh.triangles.push_back({v[0], v[1], v[2]});
  }
  mesh.triangle_edges.assign(mesh.triangles.size(), {-1, -1, -1});
  mesh.edges.reserve(mesh.triangles.size() * 3 / 2 + 3);
  std::vector<char> seen(representative_.size(), 0);
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    const std::int32_t ct = compact[t];
    if (ct < 0) continue;
    const Triangle& tri = tris_[t];
    for (int k = 0; k < 3; ++k) {
      seen[tri.v[k]] = 1;
      const std::int32_t nb = tri.n[k];
      const std::int32_t cnb = compact[nb];
      if (cnb >= 0 && static_cast<std::size_t>(nb) < t) continue;  // already emitted
      Index a = tri.v[(k + 1) % 3];
      Index b = tri.v[(k + 2) % 3];
      if (a > b) std::swap(a, b);
      const auto e = static_cast<std::int32_t>(mesh.edges.size());
      mesh.edges.push_back({a, b, {ct, cnb}});
      mesh.triangle_edges[ct][k] = e;
      if (cnb >= 0) {
        for (int j = 0; j < 3; ++j) {
          if (tris_[nb].n[j] == static_cast<std::int32_t>(t)) mesh.triangle_edges[cnb][j] = e;
        }
      }
    }
  }
  for (std::size_t v = 0; v < seen.size(); ++v) {
    if (seen[v]) mesh.vertices.push_back(static_cast<Index>(v));
  }
  return mesh;
}

}  // namespace fracdim
