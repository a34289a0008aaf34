#pragma once

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

#include "fiberatlas/error.hpp"
#include "fiberatlas/varnum/compiled.hpp"

namespace fiberatlas::varnum {

struct ProjectionOptions {
  double tol = 1e-10;
  int max_iter = 100;
  double rank_ratio = 1e-6;  // sigma_min < rank_ratio * sigma_max is a rank collapse
  double escape_norm = std::numeric_limits<double>::infinity();
};

struct ProjectionResult {
  VectorXd x;
  double residual = 0.0;
  int iterations = 0;
};

/// Minimal-norm Gauss-Newton step for J dx = -r, with the rank test applied
/// to the singular values of J.
inline VectorXd minimal_norm_step(const MatrixXd& J, const VectorXd& r, double rank_ratio) {
  Eigen::JacobiSVD<MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const Eigen::Index k = std::min(J.rows(), J.cols());
  if (k == 0 || s[0] == 0.0 || !std::isfinite(s[0]) || s[k - 1] < rank_ratio * s[0]) {
    throw SingularStep("Jacobian rank collapse (sigma_min/sigma_max = " +
                       std::to_string(s[0] > 0 ? s[k - 1] / s[0] : 0.0) + ")");
  }
  VectorXd ut_r = svd.matrixU().transpose() * r;
  for (Eigen::Index i = 0; i < k; ++i) ut_r[i] /= s[i];
  return -(svd.matrixV() * ut_r);
}

/// Gauss-Newton with backtracking on ||G(x) - t||. Each step is the
/// least-squares minimal-norm correction, so the iterate moves along the
/// normal space of the level set.
inline ProjectionResult project_detailed(const CompiledMap& G, const VectorXd& t, VectorXd x,
                                         const ProjectionOptions& opt = {}) {
  if (G.domain_dim() < G.target_dim()) throw InvalidArgument("projection needs domain dimension >= target dimension");
  if (static_cast<std::size_t>(x.size()) != G.domain_dim() || static_cast<std::size_t>(t.size()) != G.target_dim()) {
    throw DimensionMismatch("projection: start or target has wrong length");
  }
  if (!x.allFinite()) throw InvalidArgument("projection: start is not finite");
  VectorXd r = G.value(x) - t;
  double norm = r.norm();
  for (int it = 0; it < opt.max_iter; ++it) {
    if (norm <= opt.tol) return {x, norm, it};
    VectorXd dx = minimal_norm_step(G.jacobian(x), r, opt.rank_ratio);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      VectorXd trial = x + alpha * dx;
      VectorXd rt = G.value(trial) - t;
      double nt = rt.norm();
      if (std::isfinite(nt) && nt < norm) {
        x = std::move(trial);
        r = std::move(rt);
        norm = nt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (x.norm() > opt.escape_norm) throw MaxIterExceeded("projection left the search region");
  }
  if (norm <= opt.tol) return {x, norm, opt.max_iter};
  throw MaxIterExceeded("projection did not reach tolerance (residual " + std::to_string(norm) + ")");
}

inline VectorXd project_to_fiber(const CompiledMap& F, const VectorXd& t, const VectorXd& start, double tol = 1e-10,
                                 int max_iter = 100) {
  ProjectionOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  return project_detailed(F, t, start, opt).x;
}

inline VectorXd project_to_fiber(const PolynomialMap& F, const VectorXd& t, const VectorXd& start, double tol = 1e-10,
                                 int max_iter = 100) {
  return project_to_fiber(CompiledMap(F), t, start, tol, max_iter);
}

}  // namespace fiberatlas::varnum
