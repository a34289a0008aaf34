#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <vector>

namespace fiberatlas {

using Point = std::vector<double>;
using PointCloud = std::vector<Point>;

inline double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(const Point& a, const Point& b) { return std::sqrt(squared_distance(a, b)); }

inline double norm_over(const Point& p, const std::vector<std::size_t>& axes) {
  double s = 0.0;
  if (axes.empty()) {
    for (double v : p) s += v * v;
  } else {
    for (auto a : axes) s += p[a] * p[a];
  }
  return std::sqrt(s);
}

/// Keeps the first point of every cluster of points closer than h (in input
/// order), using a uniform grid of cell size h.
inline std::vector<std::size_t> dedup_indices(const PointCloud& pts, double h) {
  std::vector<std::size_t> kept;
  if (pts.empty()) return kept;
  const std::size_t dim = pts.front().size();
  auto cell_of = [&](const Point& p) {
    std::vector<long long> c(dim);
    for (std::size_t d = 0; d < dim; ++d) c[d] = static_cast<long long>(std::floor(p[d] / h));
    return c;
  };
  auto hash_cell = [](const std::vector<long long>& c) {
    std::uint64_t hv = 1469598103934665603ULL;
    for (long long v : c) hv = (hv ^ static_cast<std::uint64_t>(v)) * 1099511628211ULL;
    return hv;
  };
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
  std::size_t neighbors = 1;
  for (std::size_t d = 0; d < dim; ++d) neighbors *= 3;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto c = cell_of(pts[i]);
    bool duplicate = false;
    std::vector<long long> probe(dim);
    for (std::size_t code = 0; code < neighbors && !duplicate; ++code) {
      std::size_t rest = code;
      for (std::size_t d = 0; d < dim; ++d) {
        probe[d] = c[d] + static_cast<long long>(rest % 3) - 1;
        rest /= 3;
      }
      auto it = grid.find(hash_cell(probe));
      if (it == grid.end()) continue;
      for (auto j : it->second) {
        if (squared_distance(pts[i], pts[j]) < h * h) {
          duplicate = true;
          break;
        }
      }
    }
    if (!duplicate) {
      grid[hash_cell(c)].push_back(i);
      kept.push_back(i);
    }
  }
  return kept;
}

/// Greedy farthest-point subsample of size k. Starts from the
/// lexicographically smallest point; ties go to the lower index. On return
/// covering_radius holds the largest distance from a point to the subsample.
inline std::vector<std::size_t> farthest_point_indices(const PointCloud& pts, std::size_t k,
                                                       double* covering_radius = nullptr) {
  std::vector<std::size_t> chosen;
  if (pts.empty() || k == 0) {
    if (covering_radius) *covering_radius = 0.0;
    return chosen;
  }
  std::size_t first = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i] < pts[first]) first = i;
  }
  std::vector<double> dist(pts.size(), std::numeric_limits<double>::infinity());
  std::size_t current = first;
  k = std::min(k, pts.size());
  for (;;) {
    chosen.push_back(current);
    dist[current] = -1.0;
    if (chosen.size() == k) break;
    std::size_t best = pts.size();
    double best_d = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (dist[i] < 0.0) continue;
      double d = squared_distance(pts[i], pts[current]);
      if (d < dist[i]) dist[i] = d;
      if (dist[i] > best_d) {
        best_d = dist[i];
        best = i;
      }
    }
    if (best == pts.size()) break;
    current = best;
  }
  if (covering_radius) {
    double cover = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (dist[i] >= 0.0) cover = std::max(cover, std::min(dist[i], squared_distance(pts[i], pts[current])));
    }
    *covering_radius = std::sqrt(cover);
  }
  return chosen;
}

inline PointCloud select(const PointCloud& pts, const std::vector<std::size_t>& idx) {
  PointCloud out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(pts[i]);
  return out;
}

inline double cloud_diameter(const PointCloud& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, squared_distance(pts[i], pts[j]));
  }
  return std::sqrt(d);
}

// Symmetric Hausdorff distance; infinite if exactly one cloud is empty.
inline double hausdorff_distance(const PointCloud& a, const PointCloud& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  auto directed = [](const PointCloud& p, const PointCloud& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : q) best = std::min(best, squared_distance(x, y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::sqrt(std::max(directed(a, b), directed(b, a)));
}

}  // namespace fiberatlas
