#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fiberatlas/cloud.hpp"
#include "fiberatlas/error.hpp"

namespace fiberatlas::topo {

struct Edge {
  int i = 0;
  int j = 0;  // i < j
  double length = 0.0;
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

/// 2-skeleton of the Vietoris-Rips complex at scale eps. Edges are ordered
/// by (length, i, j); a triangle is identified by its three edge indices in
/// decreasing order, which orders triangles by diameter.
class RipsComplex {
 public:
  using TriangleKey = std::array<int, 3>;

  RipsComplex(PointCloud points, double eps, std::size_t simplex_cap = 2'000'000)
      : points_(std::move(points)), eps_(eps) {
    if (!(eps > 0)) throw InvalidArgument("Rips scale must be positive");
    const std::size_t n = points_.size();
    const double eps2 = eps * eps;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        double d2 = squared_distance(points_[a], points_[b]);
        if (d2 <= eps2) edges_.push_back({static_cast<int>(a), static_cast<int>(b), std::sqrt(d2)});
      }
      if (n + edges_.size() > simplex_cap) throw ComplexTooLarge("edge count exceeds the simplex cap");
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& x, const Edge& y) {
      if (x.length != y.length) return x.length < y.length;
      if (x.i != y.i) return x.i < y.i;
      return x.j < y.j;
    });
    adj_.assign(n, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      adj_[edges_[e].i].push_back({edges_[e].j, static_cast<int>(e)});
      adj_[edges_[e].j].push_back({edges_[e].i, static_cast<int>(e)});
    }
    for (auto& row : adj_) std::sort(row.begin(), row.end());
    std::size_t tri3 = 0;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      for_each_cofacet(static_cast<int>(e), [&](const TriangleKey&) { ++tri3; });
      if (n + edges_.size() + tri3 / 3 > simplex_cap) throw ComplexTooLarge("simplex count exceeds the cap");
    }
    triangles_ = tri3 / 3;
  }

  const PointCloud& points() const noexcept { return points_; }
  double eps() const noexcept { return eps_; }
  std::size_t num_vertices() const noexcept { return points_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t num_triangles() const noexcept { return triangles_; }

  int edge_index(int a, int b) const {
    const auto& row = adj_.at(a);
    auto it = std::lower_bound(row.begin(), row.end(), std::pair<int, int>{b, -1});
    return (it != row.end() && it->first == b) ? it->second : -1;
  }

  /// Calls f(key) for every triangle containing edge e.
  template <class F>
  void for_each_cofacet(int e, F&& f) const {
    const auto& ea = adj_[edges_[e].i];
    const auto& eb = adj_[edges_[e].j];
    auto ia = ea.begin();
    auto ib = eb.begin();
    while (ia != ea.end() && ib != eb.end()) {
      if (ia->first < ib->first) {
        ++ia;
      } else if (ib->first < ia->first) {
        ++ib;
      } else {
        TriangleKey k{e, ia->second, ib->second};
        std::sort(k.begin(), k.end(), std::greater<>());
        f(k);
        ++ia;
        ++ib;
      }
    }
  }

  template <class F>
  void for_each_triangle(F&& f) const {
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      for_each_cofacet(static_cast<int>(e), [&](const TriangleKey& k) {
        if (k[0] == static_cast<int>(e)) f(k);
      });
    }
  }

  std::array<int, 3> triangle_vertices(const TriangleKey& k) const {
    std::array<int, 6> v{edges_[k[0]].i, edges_[k[0]].j, edges_[k[1]].i, edges_[k[1]].j, edges_[k[2]].i, edges_[k[2]].j};
    std::sort(v.begin(), v.end());
    auto end = std::unique(v.begin(), v.end());
    (void)end;
    return {v[0], v[1], v[2]};
  }

 private:
  PointCloud points_;
  double eps_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
  std::size_t triangles_ = 0;
};

struct PersistencePair {
  int dim = 0;
  double birth = 0.0;
  double death = std::numeric_limits<double>::infinity();
};

/// Z/2 homology of the 2-skeleton in degrees 0 and 1, with persistence pairs
/// over [0, eps] and a cocycle basis of H^1 at scale eps.
struct RipsHomology {
  int beta0 = 0;
  int beta1 = 0;
  std::vector<PersistencePair> pairs;
  std::vector<std::vector<int>> cocycles;  // sorted edge indices
};

namespace detail {

template <class T>
void symmetric_difference_into(std::vector<T>& acc, const std::vector<T>& other, std::vector<T>& scratch) {
  scratch.clear();
  std::set_symmetric_difference(acc.begin(), acc.end(), other.begin(), other.end(), std::back_inserter(scratch));
  acc.swap(scratch);
}

struct KeyHash {
  std::size_t operator()(const RipsComplex::TriangleKey& k) const noexcept {
    std::size_t h = static_cast<std::size_t>(k[0]) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::size_t>(k[1]) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::size_t>(k[2]) + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
    return h;
  }
};

}  // namespace detail

/// Cohomology reduction of the edge-to-triangle coboundary matrix, columns in
/// reverse filtration order, with the union-find merge edges cleared.
inline RipsHomology compute_homology(const RipsComplex& K, bool keep_cocycles = true) {
  RipsHomology out;
  const auto& edges = K.edges();
  const std::size_t n = K.num_vertices();
  UnionFind uf(n);
  std::vector<char> merge(edges.size(), 0);
  int components = static_cast<int>(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (uf.unite(edges[e].i, edges[e].j)) {
      merge[e] = 1;
      --components;
      out.pairs.push_back({0, 0.0, edges[e].length});
    }
  }
  out.beta0 = components;
  for (int c = 0; c < components; ++c) out.pairs.push_back({0, 0.0, std::numeric_limits<double>::infinity()});

  using Key = RipsComplex::TriangleKey;
  std::unordered_map<Key, int, detail::KeyHash> pivot_owner;
  std::vector<std::vector<Key>> reduced(edges.size());
  std::vector<std::vector<int>> basis(edges.size());
  std::vector<Key> scratch;
  std::vector<int> scratch_v;
  for (int e = static_cast<int>(edges.size()) - 1; e >= 0; --e) {
    if (merge[e]) continue;
    std::vector<Key> col;
    K.for_each_cofacet(e, [&](const Key& k) { col.push_back(k); });
    std::sort(col.begin(), col.end());
    std::vector<int> v{e};
    while (!col.empty()) {
      auto it = pivot_owner.find(col.front());
      if (it == pivot_owner.end()) break;
      detail::symmetric_difference_into(col, reduced[it->second], scratch);
      if (keep_cocycles) detail::symmetric_difference_into(v, basis[it->second], scratch_v);
    }
    if (col.empty()) {
      ++out.beta1;
      out.pairs.push_back({1, edges[e].length, std::numeric_limits<double>::infinity()});
      if (keep_cocycles) out.cocycles.push_back(std::move(v));
    } else {
      double death = edges[col.front()[0]].length;
      if (death > edges[e].length) out.pairs.push_back({1, edges[e].length, death});
      pivot_owner.emplace(col.front(), e);
      reduced[e] = std::move(col);
      if (keep_cocycles) basis[e] = std::move(v);
    }
  }
  return out;
}

/// Rank of the vertex-edge boundary matrix by plain column reduction; an
/// independent route to beta0 used as a cross-check of union-find.
inline int betti0_by_reduction(const RipsComplex& K) {
  std::unordered_map<int, std::vector<int>> owner_col;
  std::vector<int> scratch;
  int rank = 0;
  for (const auto& e : K.edges()) {
    std::vector<int> col{e.i, e.j};
    while (!col.empty()) {
      auto it = owner_col.find(col.back());
      if (it == owner_col.end()) break;
      detail::symmetric_difference_into(col, it->second, scratch);
    }
    if (!col.empty()) {
      ++rank;
      int low = col.back();
      owner_col.emplace(low, std::move(col));
    }
  }
  return static_cast<int>(K.num_vertices()) - rank;
}

inline int rips_components(const PointCloud& points, double eps) {
  if (!(eps > 0)) throw InvalidArgument("Rips scale must be positive");
  UnionFind uf(points.size());
  int c = static_cast<int>(points.size());
  const double eps2 = eps * eps;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      if (squared_distance(points[a], points[b]) <= eps2 && uf.unite(a, b)) --c;
    }
  }
  return c;
}

/// Connected components as lists of point indices, ordered by smallest index.
inline std::vector<std::vector<std::size_t>> rips_component_lists(const PointCloud& points, double eps) {
  UnionFind uf(points.size());
  const double eps2 = eps * eps;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      if (squared_distance(points[a], points[b]) <= eps2) uf.unite(a, b);
    }
  }
  std::unordered_map<std::size_t, std::size_t> slot;
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto root = uf.find(i);
    auto [it, fresh] = slot.emplace(root, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(i);
  }
  return out;
}

inline int rips_betti1(const PointCloud& points, double eps, std::size_t simplex_cap = 2'000'000) {
  RipsComplex K(points, eps, simplex_cap);
  return compute_homology(K, false).beta1;
}

inline void write_persistence_csv(std::ostream& os, const std::vector<PersistencePair>& pairs) {
  os << "dim,birth,death\n";
  os.precision(17);
  for (const auto& p : pairs) {
    os << p.dim << ',' << p.birth << ',';
    if (std::isinf(p.death)) {
      os << "inf";
    } else {
      os << p.death;
    }
    os << '\n';
  }
}

/// One simplex per line: "0 i", "1 i j", "2 i j k".
inline void write_simplices(std::ostream& os, const RipsComplex& K) {
  for (std::size_t v = 0; v < K.num_vertices(); ++v) os << "0 " << v << '\n';
  for (const auto& e : K.edges()) os << "1 " << e.i << ' ' << e.j << '\n';
  K.for_each_triangle([&](const RipsComplex::TriangleKey& k) {
    auto t = K.triangle_vertices(k);
    os << "2 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  });
}

}  // namespace fiberatlas::topo
