#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fiberatlas/cloud.hpp"
#include "fiberatlas/error.hpp"
#include "fiberatlas/varnum/compiled.hpp"
#include "fiberatlas/varnum/parallel.hpp"
#include "fiberatlas/varnum/projection.hpp"
#include "fiberatlas/varnum/random.hpp"

namespace fiberatlas::varnum {

struct MilnorConfig {
  double threshold = 0.05;  // minimal accepted |P_T x| / |x| on a sphere
  std::size_t starts = 400;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  int max_iter = 100;
  std::vector<std::size_t> ball_axes;
  unsigned threads = 0;
};

struct ShellReport {
  double r = 0.0;
  std::size_t points = 0;
  double min_margin = std::numeric_limits<double>::quiet_NaN();
  std::string status;  // "empty", "ok", "low"
};

struct MilnorEstimate {
  double radius = 0.0;
  bool vacuous = false;
  bool compact = false;
  double fiber_extent = 0.0;  // largest norm found on the fiber (search box 2 r_max)
  double min_margin_beyond = std::numeric_limits<double>::quiet_NaN();
  std::vector<ShellReport> shells;
};

namespace detail {

inline VectorXd ball_part(const VectorXd& x, const std::vector<std::size_t>& axes) {
  if (axes.empty()) return x;
  VectorXd b = VectorXd::Zero(x.size());
  for (auto a : axes) b[a] = x[a];
  return b;
}

// |P_T x_b| / |x_b| where P_T projects onto ker JF(x).
inline double tangent_margin(const CompiledMap& F, const VectorXd& x, const std::vector<std::size_t>& axes) {
  VectorXd xb = ball_part(x, axes);
  double nx = xb.norm();
  if (nx == 0.0) return 0.0;
  MatrixXd J = F.jacobian(x);
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(J.transpose());
  // normal component: least-squares fit of xb by the rows of J
  VectorXd coeff = cod.solve(xb);
  VectorXd normal = J.transpose() * coeff;
  return (xb - normal).norm() / nx;
}

// Joint map (F, |x_b|^2) so that spheres can be intersected with the fiber.
inline PolynomialMap with_sphere(const PolynomialMap& F, const std::vector<std::size_t>& axes) {
  Polynomial psi(F.variables());
  for (std::size_t a = 0; a < F.domain_dim(); ++a) {
    if (!axes.empty() && std::find(axes.begin(), axes.end(), a) == axes.end()) continue;
    Polynomial xa = Polynomial::variable(F.variables(), F.variables()[a]);
    psi += xa * xa;
  }
  return F.with_component(psi);
}

}  // namespace detail

/// For each grid radius r, intersects the fiber with the sphere |x_b| = r by
/// multistart projection and records the smallest tangential share of the
/// radial direction. The returned radius is the smallest grid value from
/// which every larger shell is empty or above threshold; a fiber found to
/// lie inside the grid is reported as compact with the vacuous flag once the
/// radius exceeds its extent.
inline MilnorEstimate estimate_milnor_radius(const PolynomialMap& F, const std::vector<double>& t,
                                             const std::vector<double>& r_grid, const MilnorConfig& cfg = {}) {
  if (r_grid.empty()) throw InvalidArgument("Milnor radius grid is empty");
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > 0) || (i > 0 && r_grid[i] <= r_grid[i - 1])) {
      throw InvalidArgument("Milnor radius grid must be positive and increasing");
    }
  }
  if (t.size() != F.target_dim()) throw DimensionMismatch("Milnor estimate: target length differs from map target");
  CompiledMap Fc(F);
  CompiledMap G(detail::with_sphere(F, cfg.ball_axes));
  const std::size_t m = F.domain_dim();
  const double r_max = r_grid.back();
  ProjectionOptions opt;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  opt.escape_norm = 1e3 * r_max;

  MilnorEstimate est;
  // extent of the fiber inside the box [-2 r_max, 2 r_max]^m
  {
    ScrambledHalton halton(m, derive_seed(cfg.seed, 0, 0x3117));
    std::vector<double> ext(cfg.starts, -1.0);
    VectorXd tv = to_vector(t);
    parallel_for(
        cfg.starts,
        [&](std::size_t i) {
          auto u = halton.point(i);
          VectorXd x(m);
          for (std::size_t d = 0; d < m; ++d) x[d] = 2.0 * r_max * (2.0 * u[d] - 1.0);
          try {
            auto res = project_detailed(Fc, tv, x, opt);
            ext[i] = detail::ball_part(res.x, cfg.ball_axes).norm();
          } catch (const MaxIterExceeded&) {
          } catch (const SingularStep&) {
          }
        },
        cfg.threads);
    for (double e : ext) est.fiber_extent = std::max(est.fiber_extent, e);
    est.compact = est.fiber_extent < r_max;
  }

  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    const double r = r_grid[k];
    VectorXd target(t.size() + 1);
    for (std::size_t i = 0; i < t.size(); ++i) target[i] = t[i];
    target[t.size()] = r * r;
    ScrambledHalton halton(m, derive_seed(cfg.seed, k + 1, 0x3117));
    std::vector<double> margins(cfg.starts, -1.0);
    parallel_for(
        cfg.starts,
        [&](std::size_t i) {
          auto u = halton.point(i);
          VectorXd x(m);
          for (std::size_t d = 0; d < m; ++d) x[d] = r * (2.0 * u[d] - 1.0);
          try {
            auto res = project_detailed(G, target, x, opt);
            margins[i] = detail::tangent_margin(Fc, res.x, cfg.ball_axes);
          } catch (const MaxIterExceeded&) {
          } catch (const SingularStep&) {
          }
        },
        cfg.threads);
    ShellReport shell;
    shell.r = r;
    for (double mg : margins) {
      if (mg < 0.0) continue;
      ++shell.points;
      if (!(shell.min_margin <= mg)) shell.min_margin = mg;
    }
    shell.status = shell.points == 0 ? "empty" : (shell.min_margin >= cfg.threshold ? "ok" : "low");
    est.shells.push_back(shell);
  }

  // smallest k such that every shell from k on is fine
  std::optional<std::size_t> first_good;
  for (std::size_t k = est.shells.size(); k-- > 0;) {
    if (est.shells[k].status == "low") break;
    first_good = k;
  }
  if (!first_good) {
    throw InconclusiveMargin("margin below " + std::to_string(cfg.threshold) + " at the largest grid radius " +
                             std::to_string(r_max));
  }
  std::size_t k = *first_good;
  if (est.compact) {
    while (k < r_grid.size() && r_grid[k] < est.fiber_extent) ++k;
    if (k == r_grid.size()) k = r_grid.size() - 1;
    est.vacuous = true;
    for (std::size_t j = k; j < est.shells.size(); ++j) {
      if (est.shells[j].points > 0) est.vacuous = false;
    }
  }
  est.radius = r_grid[k];
  for (std::size_t j = k; j < est.shells.size(); ++j) {
    const auto& sh = est.shells[j];
    if (sh.points > 0 && !(est.min_margin_beyond <= sh.min_margin)) est.min_margin_beyond = sh.min_margin;
  }
  return est;
}

inline nlohmann::json to_json(const MilnorEstimate& e) {
  nlohmann::json shells = nlohmann::json::array();
  for (const auto& s : e.shells) {
    nlohmann::json j = {{"r", s.r}, {"points", s.points}, {"status", s.status}};
    j["min_margin"] = std::isnan(s.min_margin) ? nlohmann::json(nullptr) : nlohmann::json(s.min_margin);
    shells.push_back(j);
  }
  nlohmann::json j = {{"radius", e.radius},
                      {"vacuous", e.vacuous},
                      {"compact", e.compact},
                      {"fiber_extent", e.fiber_extent},
                      {"shells", shells}};
  j["min_margin_beyond"] =
      std::isnan(e.min_margin_beyond) ? nlohmann::json(nullptr) : nlohmann::json(e.min_margin_beyond);
  return j;
}

}  // namespace fiberatlas::varnum
