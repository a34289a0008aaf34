#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fiberatlas/arcscan/loops.hpp"
#include "fiberatlas/arcscan/scan.hpp"
#include "fiberatlas/cloud.hpp"
#include "fiberatlas/error.hpp"

namespace fiberatlas::arcscan {

struct VanishingFlag {
  double s_first = 0.0;  // largest parameter of the tracked chain
  double s_last = 0.0;   // smallest positive parameter of the chain
  std::vector<std::size_t> points;
  std::vector<double> diameters;
};

namespace detail {

// Components of b matched to component a: Hausdorff distance within the
// larger of the two diameters.
inline std::optional<std::size_t> best_match(const ComponentInfo& a, const std::vector<ComponentInfo>& b,
                                             std::size_t min_points) {
  std::optional<std::size_t> best;
  double best_d = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (b[j].points < min_points) continue;
    double d = hausdorff_distance(a.cloud, b[j].cloud);
    if (d > std::max(a.diameter, b[j].diameter)) continue;
    if (!best || d < best_d) {
      best = j;
      best_d = d;
    }
  }
  return best;
}

}  // namespace detail

/// Follows each component of the fiber nearest to s = 0 back along the
/// schedule; flags it when point count and diameter never grow toward 0 and
/// nothing in the s = 0 fiber matches it. Components under min_component
/// points are not tracked; at s = 0 every component may serve as a match, so
/// a component collapsing onto a sampled limit point is not flagged.
inline std::vector<VanishingFlag> detect_vanishing_components(const ArcReport& report, std::size_t min_component = 3) {
  if (report.records.size() < 2) throw InvalidArgument("vanishing-component detection needs two schedule entries");
  std::vector<std::size_t> order(report.records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return report.records[a].s > report.records[b].s; });
  const auto& zero = report.records[order.back()];
  std::vector<VanishingFlag> flags;
  if (zero.s != 0.0 || !zero.ok) return flags;
  const std::size_t last_pos = order.size() - 2;
  const auto& near = report.records[order[last_pos]];
  if (!near.ok) return flags;
  for (const auto& comp : near.components) {
    if (comp.points < min_component) continue;
    // any s = 0 component counts as a match, a single limit point included
    if (detail::best_match(comp, zero.components, 1)) continue;
    VanishingFlag flag;
    flag.s_first = flag.s_last = near.s;
    flag.points = {comp.points};
    flag.diameters = {comp.diameter};
    const ComponentInfo* cur = &comp;
    bool monotone = true;
    for (std::size_t k = last_pos; k-- > 0;) {
      const auto& rec = report.records[order[k]];
      if (!rec.ok) break;
      auto m = detail::best_match(*cur, rec.components, min_component);
      if (!m) break;
      const auto& prev = rec.components[*m];
      if (prev.points < cur->points || prev.diameter < cur->diameter) {
        monotone = false;
        break;
      }
      flag.s_first = rec.s;
      flag.points.insert(flag.points.begin(), prev.points);
      flag.diameters.insert(flag.diameters.begin(), prev.diameter);
      cur = &prev;
    }
    if (monotone) flags.push_back(std::move(flag));
  }
  return flags;
}

struct Verdict {
  bool atypical = false;
  std::vector<std::string> reasons;
  bool homology_constant = true;
  std::string note = "evidence, not proof";
};

inline const std::string kBeta0Jump = "β₀ jump";
inline const std::string kBeta1Jump = "β₁ jump";
inline const std::string kVanishing = "vanishing component";
inline const std::string kLoopChange = "loop-class change (π₂ proxy)";

/// ATYPICAL iff some reason is present.
inline Verdict verdict_from_reasons(std::vector<std::string> reasons) {
  Verdict v;
  v.reasons = std::move(reasons);
  v.atypical = !v.reasons.empty();
  return v;
}

inline Verdict atypicality_verdict(const ArcReport& report, const std::optional<LoopTrace>& trace = std::nullopt,
                                   std::size_t min_component = 3) {
  std::vector<std::string> reasons;
  bool b0 = false, b1 = false;
  for (const auto& j : report.jumps) {
    b0 = b0 || j.invariant == "beta0";
    b1 = b1 || j.invariant == "beta1";
  }
  if (b0) reasons.push_back(kBeta0Jump);
  if (b1) reasons.push_back(kBeta1Jump);
  if (report.records.size() >= 2 && !detect_vanishing_components(report, min_component).empty()) {
    reasons.push_back(kVanishing);
  }
  if (trace && trace->steps.size() >= 2) {
    const LoopStep* at_zero = nullptr;
    const LoopStep* nearest = nullptr;
    for (const auto& st : trace->steps) {
      if (st.s == 0.0) {
        at_zero = &st;
      } else if (!nearest || st.s < nearest->s) {
        nearest = &st;
      }
    }
    if (at_zero && nearest && at_zero->verdict.is_boundary != nearest->verdict.is_boundary) reasons.push_back(kLoopChange);
  }
  auto v = verdict_from_reasons(std::move(reasons));
  v.homology_constant = !b0 && !b1;
  return v;
}

inline nlohmann::json to_json(const Verdict& v) {
  return {{"verdict", v.atypical ? "ATYPICAL" : "NO-EVIDENCE"},
          {"reasons", v.reasons},
          {"homology_constant", v.homology_constant},
          {"note", v.note}};
}

/// Single machine-parsable line: "VERDICT " followed by compact JSON.
inline std::string verdict_line(const Verdict& v) { return "VERDICT " + to_json(v).dump(); }

inline nlohmann::json to_json(const VanishingFlag& f) {
  return {{"s_first", f.s_first}, {"s_last", f.s_last}, {"points", f.points}, {"diameters", f.diameters}};
}

}  // namespace fiberatlas::arcscan
