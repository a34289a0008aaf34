#pragma once

#include <nlohmann/json.hpp>

#include <bit>
#include <optional>
#include <string>
#include <vector>

#include "fiberatlas/arc.hpp"
#include "fiberatlas/cloud.hpp"
#include "fiberatlas/error.hpp"
#include "fiberatlas/topo/rips.hpp"
#include "fiberatlas/topo/summary.hpp"
#include "fiberatlas/varnum/random.hpp"
#include "fiberatlas/varnum/sampling.hpp"

namespace fiberatlas::arcscan {

using polycore::PolynomialMap;

struct ScanConfig {
  double R = 8.0;
  std::size_t count = 2000;
  std::uint64_t seed = 0;
  varnum::SampleConfig sample;
  topo::SummaryOptions summary;
  std::size_t min_component = 3;  // smaller Rips components are ignored when tracking
  bool keep_points = false;
};

struct ComponentInfo {
  std::size_t points = 0;
  double diameter = 0.0;
  PointCloud cloud;
};

struct ArcRecord {
  double s = 0.0;
  std::vector<double> target;
  bool ok = false;
  std::string error;
  topo::PersistenceSummary summary;
  int chi = 0;
  std::size_t points = 0;
  double max_residual = 0.0;
  std::vector<ComponentInfo> components;
  PointCloud cloud;  // filled when keep_points is set
};

struct Jump {
  double s_from = 0.0;
  double s_to = 0.0;
  std::string invariant;
  int before = 0;
  int after = 0;
};

struct ArcReport {
  std::vector<ArcRecord> records;  // schedule order
  std::vector<Jump> jumps;
};

/// Seed of the fiber at parameter s; depends on s itself, not on its position
/// in the schedule, so refining a schedule leaves shared records unchanged.
inline std::uint64_t fiber_seed(std::uint64_t seed, double s, std::uint64_t stream) {
  return varnum::derive_seed(seed, std::bit_cast<std::uint64_t>(s), stream);
}

inline std::vector<ComponentInfo> component_infos(const PointCloud& pts, double eps) {
  std::vector<ComponentInfo> out;
  for (const auto& idx : topo::rips_component_lists(pts, eps)) {
    ComponentInfo c;
    c.cloud = select(pts, idx);
    c.points = idx.size();
    c.diameter = cloud_diameter(c.cloud);
    out.push_back(std::move(c));
  }
  return out;
}

inline ArcRecord analyze_fiber(const varnum::CompiledMap& F, const Arc& arc, double s, const ScanConfig& cfg) {
  ArcRecord rec;
  rec.s = s;
  rec.target = arc.at(s);
  try {
    auto sample = varnum::sample_fiber(F, rec.target, cfg.R, cfg.count, fiber_seed(cfg.seed, s, 0x5CA7), cfg.sample);
    rec.points = sample.size();
    for (double r : sample.residuals) rec.max_residual = std::max(rec.max_residual, r);
    rec.summary = topo::summarize(sample.points, cfg.summary);
    rec.chi = topo::euler_estimate(rec.summary);
    rec.components = component_infos(sample.points, rec.summary.eps);
    if (cfg.keep_points) rec.cloud = std::move(sample.points);
    rec.ok = true;
  } catch (const Error& e) {
    rec.error = e.code() + ": " + e.what();
  }
  return rec;
}

/// Samples every fiber of the schedule inside B_R and records its Betti
/// numbers and components; sampling failures are recorded, not thrown.
inline ArcReport scan_arc(const PolynomialMap& F, const Arc& arc, const ScanConfig& cfg) {
  if (arc.dim() != F.target_dim()) throw DimensionMismatch("arc dimension differs from map target");
  if (F.domain_dim() <= F.target_dim()) throw InvalidArgument("scan_arc needs more variables than equations");
  varnum::CompiledMap C(F);
  ArcReport report;
  for (double s : arc.schedule()) report.records.push_back(analyze_fiber(C, arc, s, cfg));
  for (std::size_t k = 1; k < report.records.size(); ++k) {
    const auto& a = report.records[k - 1];
    const auto& b = report.records[k];
    if (!a.ok || !b.ok) continue;
    if (a.summary.beta0 != b.summary.beta0) report.jumps.push_back({a.s, b.s, "beta0", a.summary.beta0, b.summary.beta0});
    if (a.summary.beta1 != b.summary.beta1) report.jumps.push_back({a.s, b.s, "beta1", a.summary.beta1, b.summary.beta1});
  }
  return report;
}

inline nlohmann::json to_json(const ArcRecord& r) {
  nlohmann::json j = {{"s", r.s}, {"target", r.target}, {"ok", r.ok}};
  if (!r.ok) {
    j["error"] = r.error;
    return j;
  }
  j["summary"] = topo::to_json(r.summary);
  j["chi"] = r.chi;
  j["points"] = r.points;
  j["max_residual"] = r.max_residual;
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : r.components) comps.push_back({{"points", c.points}, {"diameter", c.diameter}});
  j["components"] = comps;
  return j;
}

inline nlohmann::json to_json(const ArcReport& r) {
  nlohmann::json recs = nlohmann::json::array(), jumps = nlohmann::json::array();
  for (const auto& rec : r.records) recs.push_back(to_json(rec));
  for (const auto& jp : r.jumps) {
    jumps.push_back({{"s_from", jp.s_from}, {"s_to", jp.s_to}, {"invariant", jp.invariant}, {"before", jp.before}, {"after", jp.after}});
  }
  return {{"records", recs}, {"jumps", jumps}};
}

}  // namespace fiberatlas::arcscan
