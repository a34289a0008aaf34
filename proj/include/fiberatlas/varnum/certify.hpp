#pragma once

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fiberatlas/arc.hpp"
#include "fiberatlas/error.hpp"
#include "fiberatlas/varnum/compiled.hpp"
#include "fiberatlas/varnum/parallel.hpp"
#include "fiberatlas/varnum/random.hpp"

namespace fiberatlas::varnum {

/// Polynomial system whose real zeros in the box are singular points of the
/// fiber over gamma(s).
struct SingularitySystem {
  std::function<PolynomialMap(const Rational& s)> at;
  std::vector<std::pair<double, double>> box;
  std::string description;
};

/// Generic system F(x) = gamma(s), JF(x)^T w = 0, |w|^2 = 1 in the unknowns
/// (x, w); x is confined to [-half_width, half_width]^m.
inline SingularitySystem generic_singularity_system(const PolynomialMap& F, const Arc& arc, double half_width) {
  if (arc.dim() != F.target_dim()) throw DimensionMismatch("arc dimension differs from map target");
  std::vector<std::string> vars = F.variables();
  for (std::size_t i = 0; i < F.target_dim(); ++i) vars.push_back("w_" + std::to_string(i));
  std::vector<Polynomial> comps;
  std::vector<Polynomial> lifted;
  for (const auto& c : F.components()) lifted.push_back(c.with_variables(vars));
  for (std::size_t k = 0; k < F.domain_dim(); ++k) {
    Polynomial row(vars);
    for (std::size_t i = 0; i < F.target_dim(); ++i) {
      row += Polynomial::variable(vars, vars[F.domain_dim() + i]) * lifted[i].derivative(k);
    }
    comps.push_back(row);
  }
  Polynomial unit = Polynomial::constant(vars, Rational(-1));
  for (std::size_t i = 0; i < F.target_dim(); ++i) {
    auto w = Polynomial::variable(vars, vars[F.domain_dim() + i]);
    unit += w * w;
  }
  comps.push_back(unit);
  SingularitySystem sys;
  sys.at = [vars, lifted, comps, arc](const Rational& s) {
    auto target = arc.exact_at(s);
    std::vector<Polynomial> eqs;
    for (std::size_t i = 0; i < lifted.size(); ++i) eqs.push_back(lifted[i] - Polynomial::constant(vars, target[i]));
    eqs.insert(eqs.end(), comps.begin(), comps.end());
    return PolynomialMap(vars, std::move(eqs));
  };
  for (std::size_t k = 0; k < F.domain_dim(); ++k) sys.box.emplace_back(-half_width, half_width);
  for (std::size_t i = 0; i < F.target_dim(); ++i) sys.box.emplace_back(-1.0, 1.0);
  sys.description = "F = gamma(s), JF^T w = 0, |w| = 1";
  return sys;
}

struct ExactCheck {
  std::string label;
  bool common_root = false;
};

using ExactChecker = std::function<std::vector<ExactCheck>(const Rational& s)>;

struct CertifyConfig {
  std::size_t multistart_n = 2000;
  std::uint64_t seed = 0;
  double tol = 1e-8;  // a start reaching this residual is a candidate singularity
  int max_iter = 60;
  double rank_threshold = 1e-10;
  bool throw_on_candidate = true;
  unsigned threads = 0;
};

struct GridRecord {
  std::string s;
  double min_residual = std::numeric_limits<double>::infinity();
  std::size_t candidates = 0;
  std::vector<double> best_point;
  std::vector<ExactCheck> exact;
};

struct CertifyReport {
  std::vector<GridRecord> grid;
  double min_residual = std::numeric_limits<double>::infinity();
  std::size_t candidates = 0;
  std::size_t exact_checks = 0;
  bool exact_all_negative = true;
  std::vector<double> first_candidate;
  double tol = 0.0;
  std::string system;
};

namespace detail {

// Least-squares Gauss-Newton that records the smallest residual met while
// the iterate stays inside twice the box.
inline std::pair<double, VectorXd> descend(const CompiledMap& G, VectorXd x,
                                           const std::vector<std::pair<double, double>>& box, const CertifyConfig& cfg) {
  auto inside = [&](const VectorXd& y) {
    for (Eigen::Index d = 0; d < y.size(); ++d) {
      const auto& [lo, hi] = box[static_cast<std::size_t>(d)];
      double mid = 0.5 * (lo + hi), half = hi - lo;
      if (std::abs(y[d] - mid) > half) return false;
    }
    return true;
  };
  VectorXd r = G.value(x);
  double norm = r.norm();
  double best = norm;
  VectorXd best_x = x;
  for (int it = 0; it < cfg.max_iter && norm > 1e-14; ++it) {
    // the threshold must be set before compute(); afterwards solve() reads stale Z factors
    const MatrixXd J = G.jacobian(x);
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(J.rows(), J.cols());
    cod.setThreshold(cfg.rank_threshold);
    cod.compute(J);
    VectorXd dx = -cod.solve(r);
    bool accepted = false;
    auto try_step = [&](const VectorXd& step) {
      VectorXd xt = x + step;
      VectorXd rt = G.value(xt);
      double nt = rt.norm();
      if (!std::isfinite(nt) || nt >= norm) return false;
      x = std::move(xt);
      r = std::move(rt);
      norm = nt;
      return true;
    };
    double alpha = 1.0;
    for (int ls = 0; ls < 30 && !accepted; ++ls, alpha *= 0.5) accepted = try_step(alpha * dx);
    if (!accepted) {
      // near-singular Jacobian: damped (Levenberg-Marquardt) steps
      const MatrixXd JtJ = J.transpose() * J;
      const VectorXd g = J.transpose() * r;
      double lambda = 1e-6 * std::max(JtJ.diagonal().maxCoeff(), 1.0);
      for (int k = 0; k < 20 && !accepted; ++k, lambda *= 10.0) {
        MatrixXd A = JtJ;
        A.diagonal().array() += lambda;
        accepted = try_step(-A.ldlt().solve(g));
      }
    }
    if (!accepted || !inside(x)) break;
    if (norm < best) {
      best = norm;
      best_x = x;
    }
  }
  return {best, best_x};
}

}  // namespace detail

/// Multistart least-squares Newton on the singularity system at each grid
/// parameter plus optional exact checks. The minimal residual is evidence,
/// not a proof, that no singular point lies in the box.
inline CertifyReport certify_no_singularity(const SingularitySystem& sys, const std::vector<Rational>& grid,
                                            const CertifyConfig& cfg, const ExactChecker& exact = {}) {
  CertifyReport report;
  report.tol = cfg.tol;
  report.system = sys.description;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    CompiledMap G(sys.at(grid[gi]));
    if (G.domain_dim() != sys.box.size()) throw DimensionMismatch("singularity system box has the wrong dimension");
    const std::size_t m = G.domain_dim();
    ScrambledHalton halton(m, derive_seed(cfg.seed, gi, 0xCE27));
    std::vector<std::pair<double, VectorXd>> runs(cfg.multistart_n);
    parallel_for(
        cfg.multistart_n,
        [&](std::size_t i) {
          auto u = halton.point(i);
          VectorXd x(static_cast<Eigen::Index>(m));
          for (std::size_t d = 0; d < m; ++d) {
            x[static_cast<Eigen::Index>(d)] = sys.box[d].first + (sys.box[d].second - sys.box[d].first) * u[d];
          }
          runs[i] = detail::descend(G, x, sys.box, cfg);
        },
        cfg.threads);
    GridRecord rec;
    rec.s = grid[gi].str();
    for (const auto& [res, x] : runs) {
      if (res < rec.min_residual) {
        rec.min_residual = res;
        rec.best_point = to_std(x);
      }
      if (res < cfg.tol) {
        ++rec.candidates;
        if (report.first_candidate.empty()) report.first_candidate = to_std(x);
      }
    }
    if (exact) {
      rec.exact = exact(grid[gi]);
      for (const auto& e : rec.exact) {
        ++report.exact_checks;
        if (e.common_root) report.exact_all_negative = false;
      }
    }
    report.min_residual = std::min(report.min_residual, rec.min_residual);
    report.candidates += rec.candidates;
    report.grid.push_back(std::move(rec));
  }
  if (report.candidates > 0 && cfg.throw_on_candidate) {
    std::string where;
    for (double v : report.first_candidate) where += (where.empty() ? "" : ", ") + std::to_string(v);
    throw CandidateSingularityFound("singularity system reached residual < " + std::to_string(cfg.tol) + " at (" +
                                    where + ")");
  }
  return report;
}

inline CertifyReport certify_no_singularity_on_arc(const PolynomialMap& F, const Arc& arc,
                                                   const std::vector<Rational>& u_grid, const CertifyConfig& cfg,
                                                   double half_width = 8.0) {
  return certify_no_singularity(generic_singularity_system(F, arc, half_width), u_grid, cfg);
}

inline nlohmann::json to_json(const CertifyReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& g : r.grid) {
    nlohmann::json ex = nlohmann::json::array();
    for (const auto& e : g.exact) ex.push_back({{"sample", e.label}, {"common_root", e.common_root}});
    grid.push_back({{"s", g.s}, {"min_residual", num(g.min_residual)}, {"candidates", g.candidates}, {"exact", ex}});
  }
  return {{"system", r.system},
          {"tol", r.tol},
          {"min_residual", num(r.min_residual)},
          {"candidates", r.candidates},
          {"exact_checks", r.exact_checks},
          {"exact_all_negative", r.exact_all_negative},
          {"grid", grid}};
}

}  // namespace fiberatlas::varnum
