#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fiberatlas/arc.hpp"
#include "fiberatlas/arcscan/scan.hpp"
#include "fiberatlas/cloud.hpp"
#include "fiberatlas/error.hpp"
#include "fiberatlas/topo/loop.hpp"
#include "fiberatlas/topo/summary.hpp"
#include "fiberatlas/varnum/projection.hpp"
#include "fiberatlas/varnum/sampling.hpp"

namespace fiberatlas::arcscan {

struct LoopConfig {
  double R = 8.0;
  // The side region is resampled in balls grown by `growth` until it fits
  // inside 0.9 R; past max_radius it is treated as unbounded and R is kept.
  bool adaptive_radius = true;
  double growth = 1.5;
  double max_radius = 28.0;
  std::size_t count = 4000;
  std::uint64_t seed = 0;
  varnum::SampleConfig sample;
  bool one_side = true;  // sample only where every cut polynomial is >= 0
  double scale_factor = 3.0;
  double cut_spacing = 0.25;  // step along the cut locus as a fraction of eps
  std::size_t cut_starts = 400;  // fiber sample points nearest the cut used as starts
  double chain_accept_ratio = 4.0;  // gaps beyond this multiple of the median reject the chaining
  double max_gap_ratio = 2.0;       // longer gaps are subdivided on the cut locus
  double continuation_gap = 1.0;    // Hausdorff distance between adjacent loops flagged as a gap
};

struct LoopStep {
  double s = 0.0;
  double radius = 0.0;
  bool bounded_side = false;
  double eps = 0.0;
  std::size_t fiber_points = 0;
  std::size_t cut_points = 0;
  double gap_ratio = 0.0;  // largest consecutive gap over the median gap
  PointCloud loop;
  topo::LoopVerdict verdict;
  double hausdorff_to_previous = std::numeric_limits<double>::quiet_NaN();
  bool gap = false;
};

struct LoopTrace {
  std::vector<LoopStep> steps;  // schedule order
};

namespace detail {

inline double max_ball_norm(const PointCloud& pts, const std::vector<std::size_t>& axes) {
  double m = 0.0;
  for (const auto& p : pts) m = std::max(m, axes.empty() ? std::sqrt(squared_distance(p, Point(p.size(), 0.0))) : norm_over(p, axes));
  return m;
}

inline std::vector<double> gaps_of(const PointCloud& loop) {
  std::vector<double> g;
  for (std::size_t k = 0; k < loop.size(); ++k) g.push_back(distance(loop[k], loop[(k + 1) % loop.size()]));
  return g;
}

inline double median_of(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

// Splits every gap longer than ratio x median by projecting interpolated
// points back onto the cut locus.
inline PointCloud densify(const PointCloud& loop, const varnum::CompiledMap& cut, const Eigen::VectorXd& target, double ratio) {
  const double median = median_of(gaps_of(loop));
  PointCloud out;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const auto& a = loop[k];
    const auto& b = loop[(k + 1) % loop.size()];
    out.push_back(a);
    double d = distance(a, b);
    if (d <= ratio * median) continue;
    auto pieces = static_cast<int>(std::ceil(d / median));
    for (int j = 1; j < pieces; ++j) {
      double w = static_cast<double>(j) / pieces;
      Eigen::VectorXd x(static_cast<Eigen::Index>(a.size()));
      for (std::size_t i = 0; i < a.size(); ++i) x[static_cast<Eigen::Index>(i)] = (1 - w) * a[i] + w * b[i];
      out.push_back(varnum::to_std(varnum::project_to_fiber(cut, target, x)));
    }
  }
  return out;
}

}  // namespace detail

/// Realizes the loop fiber ∩ {cut = 0} at each schedule parameter, orders it
/// into a vertex cycle and decides whether it bounds in the Rips complex of
/// the fiber sample (the side cut >= 0 by default).
inline LoopTrace track_loop_along_arc(const PolynomialMap& F, const Arc& arc, const PolynomialMap& loop_constraints,
                                      const LoopConfig& cfg) {
  if (arc.dim() != F.target_dim()) throw DimensionMismatch("arc dimension differs from map target");
  if (loop_constraints.variables() != F.variables()) throw DimensionMismatch("cut constraints use other variables");
  PolynomialMap cut_map = F;
  for (const auto& c : loop_constraints.components()) cut_map = cut_map.with_component(c);
  if (cut_map.domain_dim() != cut_map.target_dim() + 1) {
    throw InvalidArgument("fiber and cut together must leave a curve");
  }
  varnum::CompiledMap C(F), Ccut(cut_map);
  std::vector<varnum::CompiledPolynomial> cut_polys;
  for (const auto& c : loop_constraints.components()) cut_polys.emplace_back(c);
  varnum::SampleConfig side = cfg.sample;
  if (cfg.one_side) {
    for (const auto& c : loop_constraints.components()) side.inequalities.push_back(c);
  }

  LoopTrace trace;
  for (double s : arc.schedule()) {
    LoopStep step;
    step.s = s;
    const auto target = arc.at(s);
    const auto seed = fiber_seed(cfg.seed, s, 0x100B);

    double R = cfg.R;
    auto sample = varnum::sample_fiber(C, target, R, cfg.count, seed, side);
    step.bounded_side = detail::max_ball_norm(sample.points, side.ball_axes) < 0.9 * R;
    if (cfg.adaptive_radius) {
      auto base = sample;
      while (!step.bounded_side && R * cfg.growth <= cfg.max_radius) {
        R *= cfg.growth;
        try {
          sample = varnum::sample_fiber(C, target, R, cfg.count, seed, side);
        } catch (const FiberEmptyWithinBall&) {
          break;  // starts this far out no longer reach the fiber
        }
        step.bounded_side = detail::max_ball_norm(sample.points, side.ball_axes) < 0.9 * R;
      }
      if (!step.bounded_side) {
        R = cfg.R;
        sample = std::move(base);
      }
    }
    step.radius = R;
    step.fiber_points = sample.size();
    step.eps = topo::select_scale(sample.points, cfg.scale_factor);

    varnum::SampleConfig lc = cfg.sample;
    lc.inequalities.clear();
    lc.spacing = cfg.cut_spacing * step.eps;
    // start from the fiber points closest to the cut
    {
      std::vector<std::pair<double, std::size_t>> closeness;
      for (std::size_t i = 0; i < sample.size(); ++i) {
        auto x = varnum::to_vector(sample.points[i]);
        double worst = 0.0;
        for (const auto& c : cut_polys) worst = std::max(worst, std::abs(c(x)));
        closeness.emplace_back(worst, i);
      }
      auto k = std::min(cfg.cut_starts, closeness.size());
      std::partial_sort(closeness.begin(), closeness.begin() + static_cast<long>(k), closeness.end());
      for (std::size_t j = 0; j < k; ++j) lc.start_points.push_back(sample.points[closeness[j].second]);
    }
    std::vector<double> cut_target = target;
    cut_target.resize(cut_map.target_dim(), 0.0);
    // count far above what the spacing allows, so the propagated front is kept whole
    auto cut = varnum::sample_fiber(Ccut, cut_target, R, std::numeric_limits<int>::max(), seed ^ 0xC07, lc);
    step.cut_points = cut.size();
    if (cut.size() < 3) throw CutLocusNotACircle("cut locus sample has fewer than three points at s = " + std::to_string(s));
    if (detail::max_ball_norm(cut.points, lc.ball_axes) >= 0.9 * R) {
      throw CutLocusNotACircle("cut locus reaches the ball boundary at s = " + std::to_string(s));
    }
    auto cut_summary = topo::summarize(cut.points);
    if (cut_summary.beta0 != 1 || cut_summary.beta1 != 1) {
      throw CutLocusNotACircle("cut locus at s = " + std::to_string(s) + " has (beta0, beta1) = (" +
                               std::to_string(cut_summary.beta0) + ", " + std::to_string(cut_summary.beta1) + ")");
    }
    auto order = topo::chain_cycle(cut.points, cfg.chain_accept_ratio);
    step.loop = detail::densify(select(cut.points, order), Ccut, varnum::to_vector(cut_target), cfg.max_gap_ratio);
    auto gaps = detail::gaps_of(step.loop);
    step.gap_ratio = *std::max_element(gaps.begin(), gaps.end()) / detail::median_of(gaps);

    auto cloud = sample.points;
    auto loop = topo::embed_loop(cloud, step.loop);
    step.verdict = topo::loop_is_boundary_detailed(cloud, loop, step.eps);

    if (!trace.steps.empty()) {
      step.hausdorff_to_previous = hausdorff_distance(trace.steps.back().loop, step.loop);
      step.gap = step.hausdorff_to_previous > cfg.continuation_gap;
    }
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

inline nlohmann::json to_json(const LoopStep& s) {
  nlohmann::json j = {{"s", s.s},
                      {"radius", s.radius},
                      {"bounded_side", s.bounded_side},
                      {"eps", s.eps},
                      {"fiber_points", s.fiber_points},
                      {"cut_points", s.cut_points},
                      {"loop_length", s.loop.size()},
                      {"gap_ratio", s.gap_ratio},
                      {"verdict", topo::to_json(s.verdict)},
                      {"continuation_gap", s.gap}};
  j["hausdorff_to_previous"] =
      std::isnan(s.hausdorff_to_previous) ? nlohmann::json(nullptr) : nlohmann::json(s.hausdorff_to_previous);
  return j;
}

inline nlohmann::json to_json(const LoopTrace& t) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : t.steps) steps.push_back(to_json(s));
  return {{"steps", steps}};
}

}  // namespace fiberatlas::arcscan
