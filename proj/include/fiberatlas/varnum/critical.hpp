#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fiberatlas/cloud.hpp"
#include "fiberatlas/error.hpp"
#include "fiberatlas/varnum/compiled.hpp"
#include "fiberatlas/varnum/parallel.hpp"
#include "fiberatlas/varnum/projection.hpp"
#include "fiberatlas/varnum/random.hpp"

namespace fiberatlas::varnum {

/// Objective restricted to {constraints = 0, inequalities >= 0}.
struct RestrictedFunction {
  Polynomial objective;
  PolynomialMap constraints;
  std::vector<Polynomial> inequalities;

  const std::vector<std::string>& variables() const { return objective.variables(); }

  void validate() const {
    if (constraints.variables() != objective.variables()) {
      throw DimensionMismatch("objective and constraints use different variable lists");
    }
    for (const auto& g : inequalities) {
      if (g.variables() != objective.variables()) throw DimensionMismatch("inequality over a different variable list");
    }
    if (constraints.target_dim() >= constraints.domain_dim()) {
      throw InvalidArgument("constraints leave no tangent directions");
    }
  }
};

struct CriticalPoint {
  std::vector<double> location;
  std::vector<double> multipliers;
  std::vector<double> eigenvalues;  // ascending
  std::string chart = "orthonormal null-space basis (QR)";
  int morse_index = 0;
  double kkt_residual = 0.0;
  double constraint_residual = 0.0;
  bool on_boundary = false;
};

struct CriticalConfig {
  std::vector<std::pair<double, double>> box;  // one interval per variable
  std::size_t multistart_n = 400;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  double cluster = 1e-6;
  int max_iter = 100;
  double rank_ratio = 1e-6;
  bool boundary_pass = true;
  unsigned threads = 0;
};

struct CriticalSearch {
  std::vector<CriticalPoint> points;
  std::vector<CriticalPoint> boundary_points;
  std::size_t starts = 0;
  std::size_t converged = 0;
  std::size_t failed = 0;
  std::size_t outside_box = 0;
  std::size_t infeasible = 0;  // violate an inequality
  std::size_t degenerate = 0;
};

/// Orthonormal basis of ker J from a full QR of J^T.
inline MatrixXd tangent_basis(const MatrixXd& J) {
  const Eigen::Index m = J.cols(), n = J.rows();
  Eigen::HouseholderQR<MatrixXd> qr(J.transpose());
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(m, m);
  return Q.rightCols(m - n);
}

/// Multipliers solving J^T lambda = grad f in the least-squares sense.
inline VectorXd least_squares_multipliers(const MatrixXd& J, const VectorXd& grad) {
  return Eigen::CompleteOrthogonalDecomposition<MatrixXd>(J.transpose()).solve(grad);
}

/// Evaluates objective and constraint derivatives at a point.
class CompiledRestriction {
 public:
  explicit CompiledRestriction(const RestrictedFunction& rf) : f_(rf.objective), c_(rf.constraints) {
    rf.validate();
    for (const auto& g : rf.inequalities) ineq_.emplace_back(g);
  }

  std::size_t dim() const { return c_.domain_dim(); }
  std::size_t codim() const { return c_.target_dim(); }
  const CompiledFunction& objective() const { return f_; }
  const CompiledMap& constraints() const { return c_; }
  const std::vector<CompiledPolynomial>& inequalities() const { return ineq_; }

  MatrixXd lagrangian_hessian(const VectorXd& x, const VectorXd& lambda) const {
    MatrixXd H = f_.hessian(x);
    for (std::size_t i = 0; i < codim(); ++i) H -= lambda[static_cast<Eigen::Index>(i)] * c_.component(i).hessian(x);
    return H;
  }

  VectorXd kkt_residual(const VectorXd& x, const VectorXd& lambda) const {
    VectorXd r(dim() + codim());
    r.head(dim()) = f_.gradient(x) - c_.jacobian(x).transpose() * lambda;
    r.tail(codim()) = c_.value(x);
    return r;
  }

  MatrixXd kkt_jacobian(const VectorXd& x, const VectorXd& lambda) const {
    const auto m = static_cast<Eigen::Index>(dim()), n = static_cast<Eigen::Index>(codim());
    MatrixXd J = c_.jacobian(x);
    MatrixXd K = MatrixXd::Zero(m + n, m + n);
    K.topLeftCorner(m, m) = lagrangian_hessian(x, lambda);
    K.topRightCorner(m, n) = -J.transpose();
    K.bottomLeftCorner(n, m) = J;
    return K;
  }

 private:
  CompiledFunction f_;
  CompiledMap c_;
  std::vector<CompiledPolynomial> ineq_;
};

/// Hessian of the Lagrangian projected onto a tangent basis (orthonormal
/// null-space basis unless one is supplied).
inline MatrixXd restricted_hessian(const CompiledRestriction& cr, const VectorXd& x, const VectorXd& lambda,
                                   const MatrixXd* basis = nullptr) {
  MatrixXd T = basis ? *basis : tangent_basis(cr.constraints().jacobian(x));
  MatrixXd H = T.transpose() * cr.lagrangian_hessian(x, lambda) * T;
  return 0.5 * (H + H.transpose());
}

inline std::vector<double> sorted_eigenvalues(const MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H, Eigen::EigenvaluesOnly);
  return to_std(es.eigenvalues());
}

/// Hessian in the implicit chart where the listed variables are solved from
/// the constraints: tangent vectors T_j = e_j - J_S^{-1} J_j for each free j.
/// Returns the matrix over the free variables in their original order.
inline MatrixXd implicit_chart_hessian(const RestrictedFunction& rf, const std::vector<double>& location,
                                       const std::vector<std::size_t>& solved) {
  CompiledRestriction cr(rf);
  const std::size_t m = cr.dim(), n = cr.codim();
  if (solved.size() != n) throw DimensionMismatch("implicit chart: need one solved variable per constraint");
  VectorXd x = to_vector(location);
  MatrixXd J = cr.constraints().jacobian(x);
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < m; ++j) {
    if (std::find(solved.begin(), solved.end(), j) == solved.end()) free.push_back(j);
  }
  MatrixXd JS(n, n), JF(n, free.size());
  for (std::size_t i = 0; i < n; ++i) JS.col(static_cast<Eigen::Index>(i)) = J.col(static_cast<Eigen::Index>(solved[i]));
  for (std::size_t i = 0; i < free.size(); ++i) JF.col(static_cast<Eigen::Index>(i)) = J.col(static_cast<Eigen::Index>(free[i]));
  Eigen::FullPivLU<MatrixXd> lu(JS);
  if (!lu.isInvertible()) throw SingularStep("implicit chart: solved variables do not parametrize the constraints");
  MatrixXd dS = -lu.solve(JF);
  MatrixXd T = MatrixXd::Zero(m, free.size());
  for (std::size_t k = 0; k < free.size(); ++k) {
    T(static_cast<Eigen::Index>(free[k]), static_cast<Eigen::Index>(k)) = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      T(static_cast<Eigen::Index>(solved[i]), static_cast<Eigen::Index>(k)) = dS(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
  }
  // multipliers from the solved block: grad_S f = J_S^T lambda
  VectorXd grad = cr.objective().gradient(x);
  VectorXd gS(n);
  for (std::size_t i = 0; i < n; ++i) gS[static_cast<Eigen::Index>(i)] = grad[static_cast<Eigen::Index>(solved[i])];
  VectorXd lambda = JS.transpose().fullPivLu().solve(gS);
  return restricted_hessian(cr, x, lambda, &T);
}

/// Second differences of f(P(x + v)) where P moves x + v back onto the
/// constraints along the normal space at x (so odd-order drift cancels),
/// expressed in the tangent basis at x.
inline MatrixXd finite_difference_restricted_hessian(const CompiledRestriction& cr, const VectorXd& x,
                                                     const MatrixXd& basis, double h = 1e-3) {
  const Eigen::Index k = basis.cols();
  const MatrixXd Jt = cr.constraints().jacobian(x).transpose();
  auto f_at = [&](const VectorXd& v) {
    VectorXd mu = VectorXd::Zero(Jt.cols());
    VectorXd y = x + v;
    for (int it = 0; it < 50; ++it) {
      VectorXd c = cr.constraints().value(y);
      if (c.norm() <= 1e-14) break;
      mu -= (cr.constraints().jacobian(y) * Jt).fullPivLu().solve(c);
      y = x + v + Jt * mu;
    }
    return cr.objective().value(y);
  };
  const double f0 = f_at(VectorXd::Zero(x.size()));
  MatrixXd H(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    VectorXd qi = h * basis.col(i);
    H(i, i) = (f_at(qi) + f_at(-qi) - 2.0 * f0) / (h * h);
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      VectorXd qi = h * basis.col(i), qj = h * basis.col(j);
      double mixed = (f_at(qi + qj) - f_at(qi - qj) - f_at(-qi + qj) + f_at(-qi - qj)) / (4.0 * h * h);
      H(i, j) = H(j, i) = mixed;
    }
  }
  return H;
}

namespace detail {

struct KktOutcome {
  enum Status { ok, failed, outside, infeasible, degenerate } status = failed;
  CriticalPoint point;
};

inline KktOutcome solve_kkt_from(const CompiledRestriction& cr, VectorXd x, const CriticalConfig& cfg,
                                 double box_reach) {
  KktOutcome out;
  const auto m = static_cast<Eigen::Index>(cr.dim()), n = static_cast<Eigen::Index>(cr.codim());
  ProjectionOptions popt;
  popt.tol = cfg.tol;
  popt.max_iter = cfg.max_iter;
  popt.rank_ratio = cfg.rank_ratio;
  popt.escape_norm = box_reach;
  VectorXd zero = VectorXd::Zero(n);
  try {
    x = project_detailed(cr.constraints(), zero, x, popt).x;
  } catch (const MaxIterExceeded&) {
    return out;
  } catch (const SingularStep&) {
    return out;
  }
  VectorXd lambda = least_squares_multipliers(cr.constraints().jacobian(x), cr.objective().gradient(x));
  VectorXd r = cr.kkt_residual(x, lambda);
  double norm = r.norm();
  for (int it = 0; it < cfg.max_iter && norm > cfg.tol; ++it) {
    MatrixXd K = cr.kkt_jacobian(x, lambda);
    VectorXd dz = Eigen::CompleteOrthogonalDecomposition<MatrixXd>(K).solve(-r);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      VectorXd xt = x + alpha * dz.head(m);
      VectorXd lt = lambda + alpha * dz.tail(n);
      VectorXd rt = cr.kkt_residual(xt, lt);
      double nt = rt.norm();
      if (std::isfinite(nt) && nt < norm) {
        x = std::move(xt);
        lambda = std::move(lt);
        r = std::move(rt);
        norm = nt;
        accepted = true;
        break;
      }
    }
    if (!accepted || x.norm() > box_reach) break;
  }
  if (!(norm <= cfg.tol)) return out;

  for (Eigen::Index d = 0; d < m; ++d) {
    const auto& [lo, hi] = cfg.box[static_cast<std::size_t>(d)];
    if (x[d] < lo || x[d] > hi) {
      out.status = KktOutcome::outside;
      return out;
    }
  }
  for (const auto& g : cr.inequalities()) {
    if (g(x) < -cfg.tol) {
      out.status = KktOutcome::infeasible;
      return out;
    }
  }
  Eigen::JacobiSVD<MatrixXd> svd(cr.kkt_jacobian(x, lambda));
  const auto& s = svd.singularValues();
  if (s[s.size() - 1] < cfg.rank_ratio * s[0]) {
    out.status = KktOutcome::degenerate;
    return out;
  }
  auto& cp = out.point;
  cp.location = to_std(x);
  cp.multipliers = to_std(lambda);
  cp.eigenvalues = sorted_eigenvalues(restricted_hessian(cr, x, lambda));
  cp.morse_index = static_cast<int>(std::count_if(cp.eigenvalues.begin(), cp.eigenvalues.end(), [](double e) { return e < 0; }));
  cp.kkt_residual = r.head(m).norm();
  cp.constraint_residual = r.tail(n).norm();
  out.status = KktOutcome::ok;
  return out;
}

inline void run_multistart(const CompiledRestriction& cr, const CriticalConfig& cfg, std::uint64_t stream,
                           std::vector<CriticalPoint>& points, CriticalSearch& diag) {
  const std::size_t m = cr.dim();
  double reach = 0.0;
  for (const auto& [lo, hi] : cfg.box) reach += std::max(lo * lo, hi * hi);
  reach = 4.0 * std::sqrt(reach) + 1.0;
  ScrambledHalton halton(m, derive_seed(cfg.seed, stream, 0xC417));
  std::vector<KktOutcome> outcomes(cfg.multistart_n);
  parallel_for(
      cfg.multistart_n,
      [&](std::size_t i) {
        auto u = halton.point(i);
        VectorXd x(static_cast<Eigen::Index>(m));
        for (std::size_t d = 0; d < m; ++d) {
          const auto& [lo, hi] = cfg.box[d];
          x[static_cast<Eigen::Index>(d)] = lo + (hi - lo) * u[d];
        }
        outcomes[i] = solve_kkt_from(cr, x, cfg, reach);
      },
      cfg.threads);
  diag.starts += cfg.multistart_n;
  for (auto& o : outcomes) {
    switch (o.status) {
      case KktOutcome::failed: ++diag.failed; break;
      case KktOutcome::outside: ++diag.outside_box; ++diag.converged; break;
      case KktOutcome::infeasible: ++diag.infeasible; ++diag.converged; break;
      case KktOutcome::degenerate: ++diag.degenerate; ++diag.converged; break;
      case KktOutcome::ok: {
        ++diag.converged;
        bool dup = false;
        for (const auto& p : points) {
          if (std::sqrt(squared_distance(p.location, o.point.location)) <= cfg.cluster) {
            dup = true;
            break;
          }
        }
        if (!dup) points.push_back(std::move(o.point));
        break;
      }
    }
  }
  auto key = [](const CriticalPoint& p) {
    std::vector<double> k;
    for (double v : p.location) k.push_back(std::round(v * 1e8) / 1e8);
    return k;
  };
  std::sort(points.begin(), points.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
}

}  // namespace detail

/// Critical points of the objective on the constraint variety inside the
/// box: damped Newton on the Lagrange system from quasi-random starts that
/// are first projected onto the variety. Points violating an inequality are
/// dropped; each inequality boundary gets its own pass when enabled.
inline CriticalSearch constrained_critical_points(const RestrictedFunction& rf, const CriticalConfig& cfg) {
  CompiledRestriction cr(rf);
  if (cfg.box.size() != cr.dim()) throw DimensionMismatch("critical point box needs one interval per variable");
  for (const auto& [lo, hi] : cfg.box) {
    if (!(lo < hi)) throw InvalidArgument("critical point box has an empty interval");
  }
  CriticalSearch result;
  detail::run_multistart(cr, cfg, 0, result.points, result);
  if (cfg.boundary_pass) {
    for (std::size_t k = 0; k < rf.inequalities.size(); ++k) {
      RestrictedFunction edge;
      edge.objective = rf.objective;
      edge.constraints = rf.constraints.with_component(rf.inequalities[k]);
      for (std::size_t j = 0; j < rf.inequalities.size(); ++j) {
        if (j != k) edge.inequalities.push_back(rf.inequalities[j]);
      }
      if (edge.constraints.target_dim() >= edge.constraints.domain_dim()) continue;
      CompiledRestriction ce(edge);
      CriticalSearch diag;
      std::vector<CriticalPoint> found;
      detail::run_multistart(ce, cfg, k + 1, found, diag);
      result.degenerate += diag.degenerate;
      for (auto& p : found) {
        p.on_boundary = true;
        result.boundary_points.push_back(std::move(p));
      }
    }
  }
  return result;
}

inline nlohmann::json to_json(const CriticalPoint& p) {
  return {{"location", p.location},
          {"multipliers", p.multipliers},
          {"eigenvalues", p.eigenvalues},
          {"chart", p.chart},
          {"morse_index", p.morse_index},
          {"kkt_residual", p.kkt_residual},
          {"constraint_residual", p.constraint_residual},
          {"on_boundary", p.on_boundary}};
}

inline nlohmann::json to_json(const CriticalSearch& s) {
  nlohmann::json pts = nlohmann::json::array(), bnd = nlohmann::json::array();
  for (const auto& p : s.points) pts.push_back(to_json(p));
  for (const auto& p : s.boundary_points) bnd.push_back(to_json(p));
  return {{"points", pts},
          {"boundary_points", bnd},
          {"starts", s.starts},
          {"converged", s.converged},
          {"failed", s.failed},
          {"outside_box", s.outside_box},
          {"infeasible", s.infeasible},
          {"degenerate", s.degenerate}};
}

}  // namespace fiberatlas::varnum
