#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fiberatlas/arcscan.hpp"
#include "fiberatlas/example5/model.hpp"
#include "fiberatlas/varnum.hpp"

namespace fiberatlas::example5 {

enum class Status { Pass, Fail, Inconclusive };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::Pass:
      return "pass";
    case Status::Fail:
      return "fail";
    default:
      return "inconclusive";
  }
}

struct ClaimResult {
  std::string name;
  Status status = Status::Inconclusive;
  std::vector<std::string> notes;
  nlohmann::json diagnostics = nlohmann::json::object();
};

inline std::vector<Rational> tenths() {
  std::vector<Rational> g;
  for (int k = 0; k <= 10; ++k) g.emplace_back(k, 10);
  return g;
}

struct Claim1Config {
  std::vector<Rational> u_grid = tenths();
  std::vector<Rational> z_samples{Rational(0),    Rational(1, 8), Rational(1, 4), Rational(1, 2), Rational(3, 4),
                                  Rational(1),    Rational(3, 2), Rational(2),    Rational(4),    Rational(8)};
  varnum::CertifyConfig certify;
  double half_width = 8.0;            // box for x, y, z
  std::pair<double, double> v_range{-1.0, 2.0};
  double max_tol = 1e-6;              // a looser candidate tolerance makes the claim inconclusive
  double residual_floor = 1e-4;       // smallest residual accepted as clear separation
};

struct Claims23Config {
  std::vector<double> u_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  double R = 8.0;
  std::size_t count = 8000;
  std::vector<double> milnor_grid{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  varnum::MilnorConfig milnor;
  topo::SummaryOptions summary;
  bool keep_points = false;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct Claim4Config {
  std::vector<double> morse_grid{0.5, 0.75, 1.0};
  varnum::CriticalConfig critical;
  double half_width = 8.0;
  double location_tol = 1e-8;
  double chart_tol = 1e-6;
  std::vector<double> loop_grid{0.0, 0.25, 0.5, 1.0};
  arcscan::LoopConfig loop;
  std::vector<Rational> case_ii_grid{Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1)};
};

struct Example5Config {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::size_t coarse_below = 4;  // topology or loop grids with fewer points get a warning
  Claim1Config claim1;
  Claims23Config claims23;
  Claim4Config claim4;
};

namespace detail {

inline std::uint64_t claim_seed(std::uint64_t seed, std::uint64_t claim) { return varnum::derive_seed(seed, claim, 0xE5); }

inline nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

// Arc t = (0, s) for the family (h, u); the schedule is u itself.
inline Arc family_arc(std::vector<double> grid) {
  std::sort(grid.begin(), grid.end(), std::greater<>());
  return Arc::parse("0; s", std::move(grid));
}

}  // namespace detail

/// g(x) = f1(x, 0, z, u, v) at v = N/D; a common root of g and g' is a
/// multiple root.
inline std::vector<varnum::ExactCheck> multiple_root_checks(const Example5Bundle& b, const Rational& u,
                                                            const std::vector<Rational>& z_samples) {
  std::vector<varnum::ExactCheck> out;
  for (const auto& z : z_samples) {
    Rational v = detail::v_of(z, u);
    auto g = polycore::UnivariateSlice::of(b.F[0], "x", {{"y", Rational(0)}, {"z", z}, {"u", u}, {"v", v}}).to_univariate();
    auto common = polycore::gcd(g, g.derivative());
    out.push_back({"z=" + z.str() + ", v=" + v.str(), common.degree() > 0});
  }
  return out;
}

/// System whose real solutions are the singular points of F on F^{-1}(delta)
/// at u = s: f1 = f2 = df1/dx = y = 0.
inline varnum::SingularitySystem claim1_system(const Example5Bundle& b, const Claim1Config& cfg) {
  varnum::SingularitySystem sys;
  const auto f1 = b.F[0], f2 = b.F[1];
  const auto y = Polynomial::variable(kVars5, "y"), u = Polynomial::variable(kVars5, "u");
  sys.at = [=](const Rational& s) {
    return PolynomialMap(kVars5, {f1, f2, f1.derivative("x"), y, u - Polynomial::constant(kVars5, s)});
  };
  const double w = cfg.half_width;
  sys.box = {{-w, w}, {-w, w}, {-w, w}, {0.0, 1.0}, cfg.v_range};
  sys.description = "f1 = f2 = df1/dx = y = 0, u = s";
  return sys;
}

inline ClaimResult verify_claim1(const Example5Bundle& b, const Claim1Config& cfg) {
  ClaimResult res;
  res.name = "claim1: no singularity on F^-1(delta)";
  auto ccfg = cfg.certify;
  ccfg.throw_on_candidate = false;
  auto report = varnum::certify_no_singularity(claim1_system(b, cfg), cfg.u_grid, ccfg, [&](const Rational& u) {
    return multiple_root_checks(b, u, cfg.z_samples);
  });
  res.diagnostics = varnum::to_json(report);
  res.diagnostics["residual_floor"] = cfg.residual_floor;
  if (report.candidates > 0 || !report.exact_all_negative) {
    res.status = Status::Fail;
    if (report.candidates > 0) res.notes.push_back(std::to_string(report.candidates) + " candidate singular points");
    if (!report.exact_all_negative) res.notes.push_back("g has a multiple root at a sampled (u, z)");
    if (!report.first_candidate.empty()) res.diagnostics["first_candidate"] = report.first_candidate;
  } else if (ccfg.tol > cfg.max_tol) {
    res.status = Status::Inconclusive;
    res.notes.push_back("candidate tolerance " + std::to_string(ccfg.tol) + " is looser than " + std::to_string(cfg.max_tol));
  } else if (!(report.min_residual > cfg.residual_floor)) {
    res.status = Status::Inconclusive;
    res.notes.push_back("smallest residual does not clear the separation floor");
  } else {
    res.status = Status::Pass;
  }
  return res;
}

struct TopologyResult {
  ClaimResult claim;
  arcscan::ArcReport scan;
  std::vector<std::optional<varnum::MilnorEstimate>> milnor;  // schedule order
};

inline TopologyResult verify_claims23(const Example5Bundle& b, const Claims23Config& cfg) {
  TopologyResult out;
  auto& res = out.claim;
  res.name = "claims2-3: fibers X_u have (b0, b1, chi) = (1, 1, 0)";
  auto arc = detail::family_arc(cfg.u_grid);

  arcscan::ScanConfig scfg;
  scfg.R = cfg.R;
  scfg.count = cfg.count;
  scfg.seed = cfg.seed;
  scfg.sample.ball_axes = {0, 1, 2};
  scfg.sample.threads = cfg.threads;
  scfg.summary = cfg.summary;
  scfg.keep_points = cfg.keep_points;
  out.scan = arcscan::scan_arc(b.family, arc, scfg);

  bool wrong = false, unsure = false;
  nlohmann::json fibers = nlohmann::json::array();
  for (const auto& rec : out.scan.records) {
    nlohmann::json f = {{"u", rec.s}, {"scan", arcscan::to_json(rec)}};
    auto mcfg = cfg.milnor;
    mcfg.ball_axes = {0, 1, 2};
    mcfg.seed = varnum::derive_seed(cfg.seed, std::bit_cast<std::uint64_t>(rec.s), 0x3117);
    mcfg.threads = cfg.threads;
    try {
      auto est = varnum::estimate_milnor_radius(b.family, rec.target, cfg.milnor_grid, mcfg);
      f["milnor"] = varnum::to_json(est);
      if (est.radius > cfg.R) {
        unsure = true;
        res.notes.push_back("u=" + std::to_string(rec.s) + ": estimated Milnor radius exceeds R");
      }
      out.milnor.push_back(est);
    } catch (const InconclusiveMargin& e) {
      unsure = true;
      f["milnor"] = {{"error", std::string(e.code()) + ": " + e.what()}};
      res.notes.push_back("u=" + std::to_string(rec.s) + ": " + e.what());
      out.milnor.push_back(std::nullopt);
    }
    if (!rec.ok) {
      unsure = true;
      res.notes.push_back("u=" + std::to_string(rec.s) + ": " + rec.error);
    } else if (rec.summary.beta0 != 1 || rec.summary.beta1 != 1 || rec.chi != 0) {
      wrong = true;
      res.notes.push_back("u=" + std::to_string(rec.s) + ": (b0, b1) = (" + std::to_string(rec.summary.beta0) + ", " +
                          std::to_string(rec.summary.beta1) + ")");
    }
    fibers.push_back(std::move(f));
  }
  res.diagnostics = {{"R", cfg.R}, {"count", cfg.count}, {"fibers", fibers}};
  res.status = wrong ? Status::Fail : (unsure ? Status::Inconclusive : Status::Pass);
  return out;
}

struct MorseCheck {
  double u = 0.0;
  std::vector<varnum::CriticalPoint> found;
  std::vector<double> reference;
  std::vector<double> chart_eigenvalues;
  std::vector<double> chart_reference;
  bool ok = false;
};

/// Hessian of r_u in the (y, z) chart at the critical point. Along y = 0 the
/// surface gives x(z) = (u^2+1)(z^2+1)/(z^2+u^2), so the z entry is
/// -2 + x''(0) = -2 + 2(u^2+1)(u^2-1)/u^4; the y entry is -2/g_x with g_x
/// evaluated at x = (u^2+1)/u^2, v = u^2/(u^2+1). At u = 1 this is
/// diag(-1/3, -2).
inline std::vector<double> reference_chart_eigenvalues(const Rational& u) {
  auto g = polycore::parse_polynomial(kG, kVars5);
  const Rational u2 = u * u;
  Rational x = (u2 + 1) / u2, v = u2 / (u2 + 1);
  Rational gx = polycore::eval<Rational>(g.derivative("x"), std::vector<Rational>{x, 0, 0, u, v});
  Rational zz = Rational(-2) + 2 * (u2 + 1) * (u2 - 1) / (u2 * u2);
  std::vector<double> ev{polycore::to_double(zz), polycore::to_double(Rational(-2) / gx)};
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline MorseCheck check_morse_point(const Example5Bundle& b, double u, const Claim4Config& cfg) {
  MorseCheck mc;
  mc.u = u;
  Rational ur = polycore::rational_from_double(u);
  varnum::RestrictedFunction rf;
  rf.objective = b.r;
  rf.constraints = b.reduced(ur);
  rf.inequalities = {b.r};
  auto ccfg = cfg.critical;
  const double w = cfg.half_width;
  ccfg.box = {{-w, w}, {-w, w}, {-w, w}};
  auto search = varnum::constrained_critical_points(rf, ccfg);
  mc.found = search.points;
  mc.found.insert(mc.found.end(), search.boundary_points.begin(), search.boundary_points.end());
  for (const auto& c : Example5Bundle::morse_point(ur)) mc.reference.push_back(polycore::to_double(c));
  mc.chart_reference = reference_chart_eigenvalues(ur);
  if (mc.found.size() != 1) return mc;
  const auto& p = mc.found[0];
  double dist = 0.0;
  for (std::size_t i = 0; i < 3; ++i) dist = std::max(dist, std::abs(p.location[i] - mc.reference[i]));
  mc.chart_eigenvalues = varnum::sorted_eigenvalues(varnum::implicit_chart_hessian(rf, p.location, {0}));
  bool chart_ok = mc.chart_eigenvalues.size() == 2;
  for (std::size_t i = 0; chart_ok && i < 2; ++i) {
    chart_ok = std::abs(mc.chart_eigenvalues[i] - mc.chart_reference[i]) <= cfg.chart_tol;
  }
  mc.ok = dist <= cfg.location_tol && p.morse_index == 2 && !p.on_boundary && chart_ok;
  return mc;
}

/// Case (ii) of the critical-point analysis: (1-x+z^2)(u^2+1)+x^2 = 0 forces
/// z^2 = x - 1 - x^2/(u^2+1), a quadratic in x without real roots and negative
/// everywhere, so no real z solves it together with (u^2+1)(z^2+1) = x(z^2+u^2).
inline bool case_ii_excluded(const Rational& u) {
  const Rational a = u * u + 1;
  polycore::UPoly w(std::vector<Rational>{Rational(-1), Rational(1), Rational(-1) / a});
  polycore::SturmSequence sturm(w);
  return sturm.count_all() == 0 && w(Rational(0)) < 0;
}

struct LoopResult {
  std::optional<arcscan::LoopTrace> trace;
  std::string error;
  bool dichotomy = false;
  bool gaps_ok = false;
};

struct Claim4Result {
  ClaimResult claim;
  std::vector<MorseCheck> morse;
  LoopResult loops;
};

inline LoopResult check_loop_dichotomy(const Example5Bundle& b, const Claim4Config& cfg) {
  LoopResult lr;
  try {
    auto lcfg = cfg.loop;
    lcfg.sample.ball_axes = {0, 1, 2};
    lr.trace = arcscan::track_loop_along_arc(b.family, detail::family_arc(cfg.loop_grid),
                                             PolynomialMap(kVars4, {b.loop_cut}), lcfg);
    lr.dichotomy = true;
    lr.gaps_ok = true;
    for (const auto& st : lr.trace->steps) {
      lr.dichotomy = lr.dichotomy && st.verdict.is_boundary == (st.s > 0.0);
      lr.gaps_ok = lr.gaps_ok && st.gap_ratio <= lcfg.max_gap_ratio;
    }
  } catch (const Error& e) {
    lr.error = e.code() + ": " + e.what();
  }
  return lr;
}

inline Claim4Result verify_claim4(const Example5Bundle& b, const Claim4Config& cfg) {
  Claim4Result out;
  auto& res = out.claim;
  res.name = "claim4: Morse point of r_u and loop dichotomy";
  bool morse_ok = true;
  nlohmann::json morse = nlohmann::json::array();
  for (double u : cfg.morse_grid) {
    auto mc = check_morse_point(b, u, cfg);
    morse_ok = morse_ok && mc.ok;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : mc.found) pts.push_back(varnum::to_json(p));
    morse.push_back({{"u", u},
                     {"critical_points", pts},
                     {"reference", mc.reference},
                     {"chart", "(y, z) implicit chart, x solved from the surface equation"},
                     {"chart_eigenvalues", mc.chart_eigenvalues},
                     {"chart_reference", mc.chart_reference},
                     {"ok", mc.ok}});
    if (!mc.ok) res.notes.push_back("u=" + std::to_string(u) + ": " + std::to_string(mc.found.size()) + " critical points, reference not matched");
    out.morse.push_back(std::move(mc));
  }

  bool case_ii = true;
  nlohmann::json c2 = nlohmann::json::array();
  for (const auto& u : cfg.case_ii_grid) {
    bool ex = case_ii_excluded(u);
    case_ii = case_ii && ex;
    c2.push_back({{"u", u.str()}, {"no_common_solution", ex}});
  }
  if (!case_ii) res.notes.push_back("case (ii) not excluded at some sampled u");

  out.loops = check_loop_dichotomy(b, cfg);
  nlohmann::json loops = out.loops.trace ? arcscan::to_json(*out.loops.trace) : nlohmann::json(nullptr);
  if (!out.loops.error.empty()) res.notes.push_back("loop tracking: " + out.loops.error);
  if (out.loops.trace && !out.loops.dichotomy) res.notes.push_back("loop verdicts do not follow bounds-for-u>0, nontrivial-at-0");
  if (out.loops.trace && !out.loops.gaps_ok) res.notes.push_back("a realized loop has a gap beyond the allowed ratio");

  res.diagnostics = {{"morse", morse}, {"case_ii", c2}, {"loops", loops}};
  if (!morse_ok || !case_ii || (out.loops.trace && !out.loops.dichotomy)) {
    res.status = Status::Fail;
  } else if (!out.loops.trace || !out.loops.gaps_ok) {
    res.status = Status::Inconclusive;
  } else {
    res.status = Status::Pass;
  }
  return out;
}

struct ClaimReport {
  std::vector<ClaimResult> claims;
  bool overall_pass = false;
  arcscan::Verdict verdict;
  std::vector<std::string> warnings;
  nlohmann::json betti_table = nlohmann::json::array();
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  TopologyResult topology;
  Claim4Result claim4;
};

inline nlohmann::json to_json(const Example5Config& c) {
  auto rationals = [](const std::vector<Rational>& v) {
    std::vector<std::string> out;
    for (const auto& r : v) out.push_back(r.str());
    return out;
  };
  return {{"seed", c.seed},
          {"claim1",
           {{"u_grid", rationals(c.claim1.u_grid)},
            {"z_samples", rationals(c.claim1.z_samples)},
            {"multistart_n", c.claim1.certify.multistart_n},
            {"tol", c.claim1.certify.tol},
            {"residual_floor", c.claim1.residual_floor},
            {"half_width", c.claim1.half_width}}},
          {"claims23",
           {{"u_grid", c.claims23.u_grid},
            {"R", c.claims23.R},
            {"count", c.claims23.count},
            {"milnor_grid", c.claims23.milnor_grid},
            {"milnor_threshold", c.claims23.milnor.threshold},
            {"persistence_fraction", c.claims23.summary.persistence_fraction},
            {"scale_factor", c.claims23.summary.scale_factor},
            {"simplex_cap", c.claims23.summary.simplex_cap}}},
          {"claim4",
           {{"morse_grid", c.claim4.morse_grid},
            {"multistart_n", c.claim4.critical.multistart_n},
            {"location_tol", c.claim4.location_tol},
            {"chart_tol", c.claim4.chart_tol},
            {"loop_grid", c.claim4.loop_grid},
            {"loop_R", c.claim4.loop.R},
            {"loop_count", c.claim4.loop.count}}}};
}

/// Copies the master seed and thread count into every stage.
inline Example5Config resolved(Example5Config cfg) {
  cfg.claim1.certify.seed = detail::claim_seed(cfg.seed, 1);
  cfg.claim1.certify.threads = cfg.threads;
  cfg.claims23.seed = detail::claim_seed(cfg.seed, 2);
  cfg.claims23.threads = cfg.threads;
  cfg.claim4.critical.seed = detail::claim_seed(cfg.seed, 4);
  cfg.claim4.critical.threads = cfg.threads;
  cfg.claim4.loop.seed = detail::claim_seed(cfg.seed, 5);
  cfg.claim4.loop.sample.threads = cfg.threads;
  return cfg;
}

inline ClaimReport verify_all(const Example5Config& config) {
  const auto cfg = resolved(config);
  const auto bundle = build_example();
  ClaimReport rep;
  rep.seed = cfg.seed;
  rep.config = to_json(cfg);
  rep.claims.push_back(verify_claim1(bundle, cfg.claim1));
  rep.topology = verify_claims23(bundle, cfg.claims23);
  rep.claims.push_back(rep.topology.claim);
  rep.claim4 = verify_claim4(bundle, cfg.claim4);
  rep.claims.push_back(rep.claim4.claim);
  rep.overall_pass = std::all_of(rep.claims.begin(), rep.claims.end(), [](const auto& c) { return c.status == Status::Pass; });

  for (const auto& rec : rep.topology.scan.records) {
    nlohmann::json row = {{"u", rec.s}, {"ok", rec.ok}};
    if (rec.ok) {
      row["beta0"] = rec.summary.beta0;
      row["beta1"] = rec.summary.beta1;
      row["chi"] = rec.chi;
    }
    rep.betti_table.push_back(row);
  }
  rep.verdict = arcscan::atypicality_verdict(rep.topology.scan, rep.claim4.loops.trace);
  if (cfg.claims23.u_grid.size() < cfg.coarse_below) rep.warnings.push_back("coarse topology grid");
  if (cfg.claim4.loop_grid.size() < cfg.coarse_below) rep.warnings.push_back("coarse loop grid");
  if (rep.claim4.loops.trace) {
    for (const auto& st : rep.claim4.loops.trace->steps) {
      if (st.gap) rep.warnings.push_back("loop continuation gap at u=" + std::to_string(st.s));
    }
  }
  return rep;
}

/// One line stating the verdict next to the betti table along delta.
inline std::string headline(const ClaimReport& r) {
  std::string table;
  for (const auto& row : r.betti_table) {
    if (!table.empty()) table += ", ";
    table += "u=" + nlohmann::json(row["u"]).dump() + ":";
    table += row["ok"].get<bool>() ? "(" + row["beta0"].dump() + "," + row["beta1"].dump() + ")" : "(n/a)";
  }
  std::string reasons;
  for (const auto& s : r.verdict.reasons) reasons += (reasons.empty() ? "" : "; ") + s;
  return std::string(r.verdict.atypical ? "ATYPICAL" : "NO-EVIDENCE") + (reasons.empty() ? "" : " via " + reasons) +
         "; betti table " + (r.verdict.homology_constant ? "constant" : "not constant") + " [" + table + "]";
}

inline nlohmann::json to_json(const ClaimResult& c) {
  return {{"name", c.name}, {"status", to_string(c.status)}, {"notes", c.notes}, {"diagnostics", c.diagnostics}};
}

inline nlohmann::json to_json(const ClaimReport& r) {
  nlohmann::json claims = nlohmann::json::array();
  for (const auto& c : r.claims) claims.push_back(to_json(c));
  auto v = arcscan::to_json(r.verdict);
  v["line"] = headline(r);
  return {{"overall", r.overall_pass ? "pass" : "not pass"},
          {"verdict", v},
          {"betti_table", r.betti_table},
          {"homology_constant", r.verdict.homology_constant},
          {"warnings", r.warnings},
          {"claims", claims},
          {"seed", r.seed},
          {"config", r.config},
          {"example", to_json(build_example())}};
}

}  // namespace fiberatlas::example5
