#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "fiberatlas/cloud.hpp"
#include "fiberatlas/error.hpp"
#include "fiberatlas/topo/rips.hpp"

namespace fiberatlas::topo {

/// Closed vertex cycle v0 -> v1 -> ... -> v_{k-1} -> v0 on a point set.
struct LoopClass {
  std::vector<std::size_t> vertices;
  std::optional<bool> is_boundary;
};

/// Appends loop points that are not already in the cloud (exact match) and
/// returns the loop as indices into the enlarged cloud.
inline LoopClass embed_loop(PointCloud& points, const PointCloud& loop_points) {
  LoopClass loop;
  for (const auto& p : loop_points) {
    auto it = std::find(points.begin(), points.end(), p);
    if (it == points.end()) {
      points.push_back(p);
      loop.vertices.push_back(points.size() - 1);
    } else {
      loop.vertices.push_back(static_cast<std::size_t>(it - points.begin()));
    }
  }
  return loop;
}

/// Edge indices of the Z/2 1-chain traced by the loop, sorted.
inline std::vector<int> loop_chain(const RipsComplex& K, const LoopClass& loop) {
  const auto& v = loop.vertices;
  if (v.size() < 3) throw LoopNotCycle("a loop needs at least three vertices");
  std::vector<int> chain;
  for (std::size_t k = 0; k < v.size(); ++k) {
    auto a = static_cast<int>(v[k]);
    auto b = static_cast<int>(v[(k + 1) % v.size()]);
    if (a == b) continue;
    if (static_cast<std::size_t>(std::max(a, b)) >= K.num_vertices()) throw LoopNotCycle("loop vertex outside the complex");
    int e = K.edge_index(std::min(a, b), std::max(a, b));
    if (e < 0) {
      throw LoopNotCycle("consecutive loop vertices " + std::to_string(a) + ", " + std::to_string(b) +
                         " are farther apart than eps");
    }
    chain.push_back(e);
  }
  std::sort(chain.begin(), chain.end());
  // repeated edges cancel over Z/2
  std::vector<int> reduced;
  for (std::size_t i = 0; i < chain.size();) {
    std::size_t j = i;
    while (j < chain.size() && chain[j] == chain[i]) ++j;
    if ((j - i) % 2 == 1) reduced.push_back(chain[i]);
    i = j;
  }
  return reduced;
}

struct LoopVerdict {
  bool is_boundary = false;
  int beta0 = 0;
  int beta1 = 0;
  double eps = 0.0;
  std::size_t points = 0;
  std::size_t loop_length = 0;
  int nonzero_cocycles = 0;
};

/// A Z/2 cycle is a boundary iff every cocycle of an H^1 basis vanishes on it.
inline LoopVerdict loop_is_boundary_detailed(const PointCloud& points, const LoopClass& loop, double eps,
                                             std::size_t simplex_cap = 2'000'000) {
  RipsComplex K(points, eps, simplex_cap);
  auto chain = loop_chain(K, loop);
  auto h = compute_homology(K, true);
  LoopVerdict v;
  v.beta0 = h.beta0;
  v.beta1 = h.beta1;
  v.eps = eps;
  v.points = points.size();
  v.loop_length = loop.vertices.size();
  for (const auto& cocycle : h.cocycles) {
    std::vector<int> common;
    std::set_intersection(cocycle.begin(), cocycle.end(), chain.begin(), chain.end(), std::back_inserter(common));
    if (common.size() % 2 == 1) ++v.nonzero_cocycles;
  }
  v.is_boundary = v.nonzero_cocycles == 0;
  return v;
}

inline bool loop_is_boundary(const PointCloud& points, const LoopClass& loop, double eps) {
  return loop_is_boundary_detailed(points, loop, eps).is_boundary;
}

/// Orders points along a closed curve by nearest-neighbor chaining from the
/// lexicographically smallest point. Throws ChainingAmbiguity if the chain
/// skips points or some gap exceeds max_gap_ratio times the median gap.
inline std::vector<std::size_t> chain_cycle(const PointCloud& pts, double max_gap_ratio = 2.0) {
  const std::size_t n = pts.size();
  if (n < 3) throw ChainingAmbiguity("too few points to form a cycle");
  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (pts[i] < pts[start]) start = i;
  }
  std::vector<char> used(n, 0);
  std::vector<std::size_t> order{start};
  used[start] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t cur = order.back(), best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      double d = squared_distance(pts[cur], pts[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = 1;
    order.push_back(best);
  }
  std::vector<double> gaps;
  for (std::size_t k = 0; k < n; ++k) gaps.push_back(distance(pts[order[k]], pts[order[(k + 1) % n]]));
  std::vector<double> sorted = gaps;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  double median = sorted[n / 2];
  double worst = *std::max_element(gaps.begin(), gaps.end());
  if (worst > max_gap_ratio * median) {
    throw ChainingAmbiguity("chained cycle has a gap of " + std::to_string(worst) + " against median " +
                            std::to_string(median));
  }
  return order;
}

inline nlohmann::json to_json(const LoopVerdict& v) {
  return {{"is_boundary", v.is_boundary}, {"beta0", v.beta0},   {"beta1", v.beta1},
          {"eps", v.eps},                 {"points", v.points}, {"loop_length", v.loop_length},
          {"nonzero_cocycles", v.nonzero_cocycles}};
}

}  // namespace fiberatlas::topo
