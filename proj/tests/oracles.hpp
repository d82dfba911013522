#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// tests. Deliberately naive: quadratic or worse, no spatial structure.

#include <algorithm>
#include <numeric>
#include <vector>

#include "fracdim/core.hpp"
#include "fracdim/kdtree.hpp"
#include "fracdim/mst.hpp"
#include "fracdim/persistence.hpp"

namespace oracle {

using fracdim::Index;
using fracdim::Points;

inline Points uniform_points(Index n, Index m, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  fracdim::Rng rng(seed);
  Points p(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < m; ++k) p(i, k) = rng.uniform(lo, hi);
  }
  return p;
}

/// Kruskal over the complete graph; returns sorted tree edge lengths.
inline std::vector<double> kruskal_lengths(const Points& p) {
  const Index n = p.rows();
  std::vector<fracdim::Edge> all;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) all.push_back({i, j, fracdim::distance(p.row(i), p.row(j))});
  }
  std::sort(all.begin(), all.end(), fracdim::edge_less);
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x];
    return x;
  };
  std::vector<double> out;
  for (const auto& e : all) {
    const Index a = find(e.i), b = find(e.j);
    if (a != b) {
      parent[a] = b;
      out.push_back(e.length);
    }
  }
  return out;
}

/// Pairs (i < j) closer than eps, by scanning every pair.
inline Index pair_count(const Points& p, double eps) {
  Index c = 0;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = i + 1; j < p.rows(); ++j) {
      if (fracdim::distance(p.row(i), p.row(j)) < eps) ++c;
    }
  }
  return c;
}

struct Pair {
  int degree;
  double birth;
  double death;
  bool operator==(const Pair&) const = default;
  bool operator<(const Pair& o) const {
    if (degree != o.degree) return degree < o.degree;
    if (birth != o.birth) return birth < o.birth;
    return death < o.death;
  }
};

/// Full boundary matrix over GF(2), dense rows, reduced left to right with
/// no clearing and no shortcuts. Returns every positive-persistence pair.
inline std::vector<Pair> naive_pairs(const fracdim::FilteredComplex2D& complex) {
  const std::size_t n = complex.size();
  std::vector<std::vector<char>> col(n, std::vector<char>(n, 0));
  for (std::size_t j = 0; j < n; ++j) {
    for (const auto f : complex.facets[j]) {
      if (f >= 0) col[j][static_cast<std::size_t>(f)] ^= 1;
    }
  }
  auto low = [&](std::size_t j) -> long {
    for (std::size_t r = n; r-- > 0;) {
      if (col[j][r]) return static_cast<long>(r);
    }
    return -1;
  };
  std::vector<long> lows(n, -1);
  for (std::size_t j = 0; j < n; ++j) {
    for (;;) {
      const long l = low(j);
      if (l < 0) break;
      std::size_t other = n;
      for (std::size_t k = 0; k < j; ++k) {
        if (lows[k] == l) {
          other = k;
          break;
        }
      }
      if (other == n) break;
      for (std::size_t r = 0; r < n; ++r) col[j][r] ^= col[other][r];
    }
    lows[j] = low(j);
  }
  std::vector<Pair> out;
  for (std::size_t j = 0; j < n; ++j) {
    if (lows[j] < 0) continue;
    const auto& death = complex.simplices[j];
    const auto& birth = complex.simplices[static_cast<std::size_t>(lows[j])];
    if (death.value > birth.value) out.push_back({birth.dim, birth.value, death.value});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
