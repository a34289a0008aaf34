#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fiberatlas/cloud.hpp"
#include "fiberatlas/error.hpp"
#include "fiberatlas/topo/rips.hpp"

namespace fiberatlas::topo {

inline std::vector<double> nearest_neighbor_distances(const PointCloud& pts) {
  std::vector<double> nn(pts.size(), std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      double d = squared_distance(pts[a], pts[b]);
      nn[a] = std::min(nn[a], d);
      nn[b] = std::min(nn[b], d);
    }
  }
  for (auto& d : nn) d = std::sqrt(d);
  return nn;
}

struct ScaleChoice {
  double eps = 0.0;
  double factor = 3.0;
  double percentile = 0.9;
  double nn_quantile = 0.0;
  std::string rule;
};

/// eps = factor x (90th percentile of nearest-neighbor distances).
inline ScaleChoice select_scale_detailed(const PointCloud& pts, double factor = 3.0, double percentile = 0.9) {
  if (pts.size() < 2) throw InvalidArgument("select_scale needs at least two points");
  auto nn = nearest_neighbor_distances(pts);
  std::sort(nn.begin(), nn.end());
  auto idx = static_cast<std::size_t>(std::floor(percentile * static_cast<double>(nn.size() - 1)));
  ScaleChoice c;
  c.factor = factor;
  c.percentile = percentile;
  c.nn_quantile = nn[idx];
  if (!(c.nn_quantile > 0)) throw DegenerateCloud("nearest-neighbor distances vanish (repeated points)");
  c.eps = factor * c.nn_quantile;
  c.rule = "eps = " + std::to_string(factor) + " x p" + std::to_string(static_cast<int>(std::lround(100 * percentile))) +
           " nearest-neighbor distance";
  return c;
}

inline double select_scale(const PointCloud& pts, double factor = 3.0) { return select_scale_detailed(pts, factor).eps; }

struct SummaryOptions {
  double eps = 0.0;  // 0 selects the scale automatically
  double scale_factor = 3.0;
  std::size_t simplex_cap = 2'000'000;
  // beta1 counts classes born at or before fraction x eps that survive to
  // eps; 1 gives the plain rank of H1 at eps.
  double persistence_fraction = 0.75;
  bool keep_pairs = false;
};

struct PersistenceSummary {
  int beta0 = 0;
  int beta1 = 0;
  int beta1_at_eps = 0;  // rank of H1 of the complex at eps
  double eps = 0.0;
  double persistence_fraction = 1.0;
  std::string scale_rule;
  std::size_t points = 0;
  std::size_t edges = 0;
  std::size_t triangles = 0;
  std::size_t subsampled_from = 0;  // nonzero when the complex was thinned to fit the cap
  std::vector<PersistencePair> pairs;
};

/// beta0 - beta1; equals the Euler characteristic only for spaces with the
/// homotopy type of a graph.
inline int euler_estimate(const PersistenceSummary& s) { return s.beta0 - s.beta1; }

/// Betti numbers at a single scale. A complex over the simplex cap is retried
/// on farthest-point subsamples of decreasing size.
inline PersistenceSummary summarize(const PointCloud& pts, const SummaryOptions& opt = {}) {
  PersistenceSummary s;
  s.points = pts.size();
  if (pts.empty()) return s;
  if (pts.size() == 1) {
    s.beta0 = 1;
    s.eps = opt.eps;
    s.scale_rule = "single point";
    return s;
  }
  if (opt.eps > 0) {
    s.eps = opt.eps;
    s.scale_rule = "fixed";
  } else {
    auto choice = select_scale_detailed(pts, opt.scale_factor);
    s.eps = choice.eps;
    s.scale_rule = choice.rule;
  }
  PointCloud work = pts;
  for (;;) {
    try {
      RipsComplex K(work, s.eps, opt.simplex_cap);
      auto h = compute_homology(K, false);
      s.beta0 = h.beta0;
      s.beta1_at_eps = h.beta1;
      s.persistence_fraction = opt.persistence_fraction;
      s.beta1 = 0;
      for (const auto& p : h.pairs) {
        if (p.dim == 1 && p.death > s.eps && p.birth <= opt.persistence_fraction * s.eps) ++s.beta1;
      }
      s.edges = K.edges().size();
      s.triangles = K.num_triangles();
      s.points = work.size();
      if (opt.keep_pairs) s.pairs = std::move(h.pairs);
      return s;
    } catch (const ComplexTooLarge&) {
      if (work.size() < 8) throw;
      s.subsampled_from = pts.size();
      work = select(pts, farthest_point_indices(pts, work.size() * 3 / 4));
    }
  }
}

inline nlohmann::json to_json(const PersistenceSummary& s) {
  nlohmann::json j = {{"beta0", s.beta0},
                      {"beta1", s.beta1},
                      {"beta1_at_eps", s.beta1_at_eps},
                      {"euler_estimate", euler_estimate(s)},
                      {"euler_note", "1-type only"},
                      {"eps", s.eps},
                      {"persistence_fraction", s.persistence_fraction},
                      {"scale_rule", s.scale_rule},
                      {"points", s.points},
                      {"edges", s.edges},
                      {"triangles", s.triangles}};
  if (s.subsampled_from) j["subsampled_from"] = s.subsampled_from;
  return j;
}

}  // namespace fiberatlas::topo
