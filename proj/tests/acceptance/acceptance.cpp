#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fiberatlas/arcscan.hpp"
#include "fiberatlas/example5.hpp"
#include "fiberatlas/polycore.hpp"
#include "fiberatlas/topo.hpp"
#include "fiberatlas/varnum.hpp"
#include "support/synthetic.hpp"

using namespace fiberatlas;
using polycore::Rational;

namespace {

// Tolerances and limits, fixed here and nowhere else.
constexpr double kAnchorTol = 1e-12;
constexpr double kRootTol = 1e-10;
constexpr double kResidualFloor = 1e-4;
constexpr double kMorseLocationTol = 1e-8;
constexpr double kChartTol = 1e-6;
constexpr double kHessianFdTol = 1e-4;
constexpr int kSeeds = 20;
constexpr int kSeedsRequired = 18;
constexpr int kSyntheticRequired = 19;  // 95% of 20
constexpr std::size_t kMinFiberPoints = 2000;
constexpr double kLimit1 = 1.0, kLimit2 = 5.0, kLimit3 = 120.0, kLimit4PerFiber = 120.0, kLimit5 = 30.0,
                 kLimit6 = 180.0, kLimit8 = 30.0;
const std::vector<double> kTopologyGrid{0.0, 0.25, 0.5, 1.0};
const std::vector<double> kLoopGrid{0.0, 0.25, 0.5, 1.0};
const std::string kPlanted = "y^2+(x-1)^2*(x-2)*(v*x+u^2+1)";

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

const example5::Example5Bundle& bundle() {
  static const example5::Example5Bundle b = example5::build_example();
  return b;
}

example5::Example5Config seeded(std::uint64_t seed, unsigned threads = 0) {
  example5::Example5Config c;
  c.seed = seed;
  c.threads = threads;
  return example5::resolved(c);
}

// Criterion 4 runs, shared with criterion 6.
struct SeedTopology {
  std::map<double, bool> fiber_ok;
  std::size_t min_points = 0;
  double seconds = 0.0;
};

std::map<int, SeedTopology>& topology_cache() {
  static std::map<int, SeedTopology> cache;
  return cache;
}

const SeedTopology& topology_for(int seed) {
  auto& cache = topology_cache();
  if (auto it = cache.find(seed); it != cache.end()) return it->second;
  auto cfg = seeded(static_cast<std::uint64_t>(seed)).claims23;
  cfg.u_grid = kTopologyGrid;
  auto t0 = Clock::now();
  auto res = example5::verify_claims23(bundle(), cfg);
  SeedTopology st;
  st.seconds = since(t0);
  st.min_points = std::numeric_limits<std::size_t>::max();
  for (const auto& rec : res.scan.records) {
    st.fiber_ok[rec.s] = rec.ok && rec.summary.beta0 == 1 && rec.summary.beta1 == 1 && rec.chi == 0;
    st.min_points = std::min(st.min_points, rec.points);
  }
  return cache[seed] = st;
}

// verify_all at seed 1, shared by criteria 6 and 9.
const nlohmann::json& full_report(unsigned threads) {
  static std::map<unsigned, nlohmann::json> cache;
  if (auto it = cache.find(threads); it != cache.end()) return it->second;
  example5::Example5Config c;
  c.seed = 1;
  c.threads = threads;
  return cache[threads] = example5::to_json(example5::verify_all(c));
}

Outcome criterion1() {
  auto t0 = Clock::now();
  const auto& b = bundle();
  std::vector<std::string> bad;
  if (b.F.evaluate<Rational>(std::vector<Rational>{2, 0, 0, 1, Rational(1, 2)}) != std::vector<Rational>{0, 0, 1}) {
    bad.push_back("F(2,0,0,1,1/2)");
  }
  auto g = polycore::parse_polynomial(example5::kG, example5::kVars5);
  if (polycore::eval<Rational>(g, std::vector<Rational>{0, 0, 0, 0, 0}) != -1) bad.push_back("g0(0,0)");
  const std::vector<double> anchor{1.0, std::sqrt(2.0), 0.0};
  auto circle = polycore::parse_polynomial("y^2+(z^2-1)*(z^2+1)*(z^2+2)", example5::kVars3);
  double circle_res = std::abs(polycore::eval<double>(circle, anchor));
  double surface_res = std::abs(polycore::eval<double>(b.reduced(0)[0], anchor));
  double p_res = std::abs(polycore::eval<double>(b.p, anchor) - 1.0);
  if (circle_res > kAnchorTol || surface_res > kAnchorTol || p_res > kAnchorTol) bad.push_back("anchor (1,sqrt2,0)");
  auto J = polycore::symbolic_jacobian(b.F);
  for (std::size_t k = 0; k < 5; ++k) {
    if (!J[2][k].is_constant() || J[2][k].constant_term() != (k == 3 ? 1 : 0)) bad.push_back("third Jacobian row");
  }
  double secs = since(t0);
  Outcome o;
  o.pass = bad.empty() && secs < kLimit1;
  o.detail = "anchor residuals " + fmt(circle_res) + ", " + fmt(surface_res) + "; " +
             (bad.empty() ? "all identities exact" : "failed: " + bad.front()) + " [" + fmt(secs) + " s]";
  return o;
}

Outcome criterion2() {
  auto t0 = Clock::now();
  const Rational precision(1, 10'000'000'000'000LL);
  int checked = 0, good = 0;
  double worst = 0.0;
  for (const Rational& u : {Rational(1, 4), Rational(1, 2), Rational(1)}) {
    for (int k = 1; k <= 9; ++k) {
      Rational v(k, 10);
      auto gp = example5::g_univariate(u, v);
      auto roots = polycore::isolate_real_roots(gp, precision);
      auto expected = example5::Example5Bundle::g_roots(u, v);
      std::sort(expected.begin(), expected.end());
      bool ok = roots.size() == 2 && !polycore::square_free_part(gp).has_multiple_root && !roots.has_multiple_root();
      for (std::size_t i = 0; ok && i < 2; ++i) {
        double err = std::abs(roots.roots[i].midpoint() - polycore::to_double(expected[i]));
        worst = std::max(worst, err);
        ok = err <= kRootTol;
      }
      ++checked;
      good += ok;
    }
  }
  double secs = since(t0);
  return {good == checked && secs < kLimit2, std::to_string(good) + "/" + std::to_string(checked) +
                                                 " grid points with two simple roots, max error " + fmt(worst) + " [" +
                                                 fmt(secs) + " s]"};
}

Outcome criterion3() {
  auto t0 = Clock::now();
  auto cfg = seeded(1).claim1;
  auto res = example5::verify_claim1(bundle(), cfg);
  double min_res = res.diagnostics["min_residual"].get<double>();
  auto candidates = res.diagnostics["candidates"].get<std::size_t>();
  bool exact_neg = res.diagnostics["exact_all_negative"].get<bool>();
  auto mutant = example5::verify_claim1(example5::with_f1(bundle(), kPlanted), cfg);
  auto mutant_candidates = mutant.diagnostics["candidates"].get<std::size_t>();
  double secs = since(t0);
  bool ok = cfg.u_grid.size() == 11 && cfg.certify.multistart_n == 2000 && candidates == 0 && min_res > kResidualFloor &&
            exact_neg && mutant.status == example5::Status::Fail && mutant_candidates > 0 && secs < kLimit3;
  return {ok, "11 u x 2000 starts: " + std::to_string(candidates) + " candidates, min residual " + fmt(min_res) +
                  ", exact gcd " + (exact_neg ? "all negative" : "POSITIVE") + "; planted mutant " +
                  example5::to_string(mutant.status) + " with " + std::to_string(mutant_candidates) + " candidates [" +
                  fmt(secs) + " s]"};
}

Outcome criterion4() {
  std::map<double, int> hits;
  double worst_per_fiber = 0.0, total = 0.0;
  std::size_t min_points = std::numeric_limits<std::size_t>::max();
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const auto& st = topology_for(seed);
    for (const auto& [u, ok] : st.fiber_ok) hits[u] += ok;
    worst_per_fiber = std::max(worst_per_fiber, st.seconds / static_cast<double>(kTopologyGrid.size()));
    min_points = std::min(min_points, st.min_points);
    total += st.seconds;
  }
  bool ok = min_points >= kMinFiberPoints && worst_per_fiber < kLimit4PerFiber;
  std::string detail;
  for (double u : kTopologyGrid) {
    ok = ok && hits[u] >= kSeedsRequired;
    detail += "u=" + fmt(u) + ":" + std::to_string(hits[u]) + "/" + std::to_string(kSeeds) + " ";
  }
  return {ok, detail + "at (1,1,0), >= " + std::to_string(min_points) + " points, " + fmt(worst_per_fiber) +
                  " s per fiber [" + fmt(total) + " s]"};
}

Outcome criterion5() {
  auto t0 = Clock::now();
  auto cfg = seeded(1).claim4;
  bool ok = true;
  std::string detail;
  for (double u : {0.5, 0.75, 1.0}) {
    auto mc = example5::check_morse_point(bundle(), u, cfg);
    bool here = mc.found.size() == 1;
    double dist = std::numeric_limits<double>::infinity();
    if (here) {
      const auto& p = mc.found[0];
      dist = 0.0;
      for (std::size_t i = 0; i < 3; ++i) dist = std::max(dist, std::abs(p.location[i] - mc.reference[i]));
      here = dist <= kMorseLocationTol && p.morse_index == 2 && !p.on_boundary;
      if (u == 1.0) {
        std::vector<double> expected{-2.0, -1.0 / 3.0};
        here = here && mc.chart_eigenvalues.size() == 2;
        for (std::size_t i = 0; here && i < 2; ++i) here = std::abs(mc.chart_eigenvalues[i] - expected[i]) <= kChartTol;
        if (mc.chart_eigenvalues.size() == 2) {
          detail += "chart at u=1 {" + fmt(mc.chart_eigenvalues[0], 10) + ", " + fmt(mc.chart_eigenvalues[1], 10) + "}; ";
        }
      }
    }
    detail += "u=" + fmt(u) + ": " + std::to_string(mc.found.size()) + " point(s), offset " + fmt(dist) + "; ";
    ok = ok && here;
  }
  double secs = since(t0);
  return {ok && secs < kLimit5, detail + "[" + fmt(secs) + " s]"};
}

Outcome criterion6() {
  int dichotomy = 0, both = 0;
  double loop_secs = 0.0;
  std::string misses;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    auto cfg = seeded(static_cast<std::uint64_t>(seed)).claim4;
    cfg.loop_grid = kLoopGrid;
    auto t0 = Clock::now();
    auto lr = example5::check_loop_dichotomy(bundle(), cfg);
    loop_secs += since(t0);
    bool d = lr.trace && lr.dichotomy;
    const auto& topo = topology_for(seed);
    bool constant = std::all_of(topo.fiber_ok.begin(), topo.fiber_ok.end(), [](const auto& kv) { return kv.second; });
    dichotomy += d;
    both += d && constant;
    if (!(d && constant)) misses += " " + std::to_string(seed) + (lr.error.empty() ? "" : "(" + lr.error + ")");
  }
  auto t0 = Clock::now();
  const auto& rep = full_report(1);
  double report_secs = since(t0);
  bool table_constant = true;
  for (const auto& row : rep["betti_table"]) {
    table_constant = table_constant && row["ok"].get<bool>() && row["beta0"] == 1 && row["beta1"] == 1;
  }
  const std::string line = rep["verdict"]["line"].get<std::string>();
  bool displayed = rep["verdict"]["verdict"] == "ATYPICAL" && rep["homology_constant"].get<bool>() && table_constant &&
                   line.find("ATYPICAL") != std::string::npos && line.find("betti table constant") != std::string::npos;
  double secs = loop_secs + report_secs;
  bool ok = both >= kSeedsRequired && displayed && secs < kLimit6;
  return {ok, "loop bounds for u>0 and not at 0 in " + std::to_string(dichotomy) + "/" + std::to_string(kSeeds) +
                  ", together with constant (1,1) table in " + std::to_string(both) + "/" + std::to_string(kSeeds) +
                  (misses.empty() ? "" : " (misses:" + misses + ")") + "; report: " + line + " [" + fmt(secs) + " s]"};
}

Outcome criterion7() {
  auto t0 = Clock::now();
  // union-find against boundary-matrix reduction
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> size(3, 40);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    PointCloud pts;
    int n = size(rng);
    for (int i = 0; i < n; ++i) pts.push_back({U(rng), U(rng), U(rng)});
    double eps = 0.05 + 0.4 * U(rng);
    topo::RipsComplex K(pts, eps);
    agree += topo::rips_components(pts, eps) == topo::betti0_by_reduction(K);
  }

  // restricted Hessian against finite differences
  const std::vector<std::string> xyz{"x", "y", "z"};
  std::uniform_int_distribution<int> coef(-3, 3), pos(1, 4);
  std::uniform_real_distribution<double> S(-1.5, 1.5);
  int problems = 0, close = 0;
  double worst = 0.0;
  for (int trial = 0; problems < 50 && trial < 1000; ++trial) {
    std::ostringstream c, f;
    c << pos(rng) << "*x^2+" << pos(rng) << "*y^2+" << pos(rng) << "*z^2+(" << coef(rng) << ")*x*y-" << pos(rng);
    f << "(" << coef(rng) << ")*x^2*z+(" << coef(rng) << ")*y^3+(" << coef(rng) << ")*x*y+(" << coef(rng) << ")*z+("
      << coef(rng) << ")*y*z";
    varnum::RestrictedFunction rf{polycore::parse_polynomial(f.str(), xyz), polycore::parse_map(c.str(), xyz), {}};
    varnum::CompiledRestriction cr(rf);
    Eigen::VectorXd x;
    try {
      x = varnum::project_to_fiber(cr.constraints(), varnum::to_vector({0.0}), varnum::to_vector({S(rng), S(rng), S(rng)}));
    } catch (const Error&) {
      continue;
    }
    Eigen::MatrixXd J = cr.constraints().jacobian(x);
    Eigen::MatrixXd Q = varnum::tangent_basis(J);
    Eigen::VectorXd lambda = varnum::least_squares_multipliers(J, cr.objective().gradient(x));
    Eigen::MatrixXd exact = varnum::restricted_hessian(cr, x, lambda, &Q);
    Eigen::MatrixXd fd = varnum::finite_difference_restricted_hessian(cr, x, Q);
    double err = (exact - fd).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    close += err <= kHessianFdTol;
    ++problems;
  }

  // synthetic manifolds
  int circle = 0, annulus = 0, sphere = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 g(seed + 7000);
    auto cs = topo::summarize(synthetic::circle_cloud(200, 1.0, g));
    circle += cs.beta0 == 1 && cs.beta1 == 1;
    auto as = topo::summarize(synthetic::annulus_cloud(800, 1.0, 1.5, g));
    annulus += as.beta0 == 1 && as.beta1 == 1;
    auto ss = topo::summarize(synthetic::sphere_cloud(800, g));
    sphere += ss.beta0 == 1 && ss.beta1 == 0;
  }
  double secs = since(t0);
  bool ok = agree == 100 && problems == 50 && close == 50 && circle >= kSyntheticRequired &&
            annulus >= kSyntheticRequired && sphere >= kSyntheticRequired;
  return {ok, "b0 union-find = reduction " + std::to_string(agree) + "/100; Hessian vs FD " + std::to_string(close) + "/" +
                  std::to_string(problems) + " (max " + fmt(worst) + "); circle " + std::to_string(circle) +
                  "/20, annulus " + std::to_string(annulus) + "/20, sphere " + std::to_string(sphere) + "/20 [" +
                  fmt(secs) + " s]"};
}

Outcome criterion8() {
  auto t0 = Clock::now();
  arcscan::ScanConfig cfg;
  cfg.R = 4.0;
  cfg.count = 2000;
  cfg.seed = 1;
  auto branch = arcscan::scan_arc(polycore::parse_map("x*(x*y-1)", {"x", "y"}), Arc::parse("s", {1.0, 0.5, 0.25, 0.0}), cfg);
  std::string b0s;
  for (const auto& r : branch.records) b0s += (b0s.empty() ? "" : ",") + std::to_string(r.summary.beta0);
  auto v = arcscan::atypicality_verdict(branch);
  bool jump = branch.jumps.size() == 1 && branch.jumps[0].invariant == "beta0" && branch.jumps[0].before == 2 &&
              branch.jumps[0].after == 3 && branch.jumps[0].s_to == 0.0;
  bool reason = v.atypical && std::find(v.reasons.begin(), v.reasons.end(), arcscan::kBeta0Jump) != v.reasons.end();

  cfg.count = 1000;
  auto product = arcscan::scan_arc(polycore::parse_map("x^2+y^2; t", {"x", "y", "t"}), Arc::parse("1; s", {1.0, 0.5, 0.0}), cfg);
  auto pv = arcscan::atypicality_verdict(product);
  double secs = since(t0);
  return {jump && reason && !pv.atypical && secs < kLimit8,
          "x(xy-1) b0 along s=1..0: " + b0s + ", verdict " + (v.atypical ? "ATYPICAL" : "NO-EVIDENCE") +
              (reason ? " (β₀ jump)" : "") + "; product fibration " + (pv.atypical ? "ATYPICAL" : "NO-EVIDENCE") + " [" +
              fmt(secs) + " s]"};
}

Outcome criterion9() {
  auto t0 = Clock::now();
  const std::string one = full_report(1).dump();
  const std::string four = full_report(4).dump();
  double secs = since(t0);
  return {one == four, "claims report (criteria 3-6) at 1 and 4 threads: " + std::to_string(one.size()) + " bytes, " +
                           (one == four ? "identical" : "DIFFERENT") + " [" + fmt(secs) + " s]"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact values", criterion1},     {"root structure", criterion2}, {"claim 1 certification", criterion3},
      {"fiber topology", criterion4},   {"Morse point", criterion5},    {"loop dichotomy", criterion6},
      {"oracle suites", criterion7},    {"negative control", criterion8}, {"determinism", criterion9}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[k].first << "): " << o.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
