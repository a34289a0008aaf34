#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "fiberatlas/cloud.hpp"
#include "fiberatlas/error.hpp"
#include "fiberatlas/varnum/compiled.hpp"
#include "fiberatlas/varnum/parallel.hpp"
#include "fiberatlas/varnum/projection.hpp"
#include "fiberatlas/varnum/random.hpp"

namespace fiberatlas::varnum {

struct SampleConfig {
  double tol = 1e-10;
  int max_iter = 100;
  double oversample = 4.0;  // multistart attempts per requested point
  std::size_t starts = 0;   // explicit multistart count, overrides oversample
  PointCloud start_points;  // when nonempty, replaces the quasi-random starts
  double dedup = 1e-6;
  // Front propagation: step length (0 picks it from the requested count) and
  // the minimum separation between accepted points as a fraction of it.
  double spacing = 0.0;
  double separation = 0.75;
  double fill_ratio = 1.3;  // target propagated size relative to count
  // Curves are thinned from a denser front: farthest-point thinning of a
  // nearly uniform chain leaves gaps up to three times the spacing otherwise.
  double curve_fill_ratio = 4.0;
  int max_refinements = 6;
  // Axes measured by the ball norm; empty means all coordinates.
  std::vector<std::size_t> ball_axes;
  // Extra constraints g(x) >= 0 on accepted points.
  std::vector<Polynomial> inequalities;
  unsigned threads = 0;
};

struct FiberSample {
  std::vector<std::string> variables;
  std::vector<double> target;
  double radius = 0.0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::vector<std::size_t> ball_axes;
  PointCloud points;
  std::vector<double> residuals;
  std::size_t attempts = 0;
  std::size_t converged = 0;
  double spacing = 0.0;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

namespace detail {

struct Sampler {
  const CompiledMap& F;
  VectorXd t;
  double R;
  const SampleConfig& cfg;
  std::vector<CompiledPolynomial> ineq;
  ProjectionOptions opt;

  Sampler(const CompiledMap& f, const std::vector<double>& target, double radius, const SampleConfig& c)
      : F(f), t(to_vector(target)), R(radius), cfg(c) {
    for (const auto& g : cfg.inequalities) ineq.emplace_back(g);
    opt.tol = cfg.tol;
    opt.max_iter = cfg.max_iter;
    opt.escape_norm = 1e3 * std::max(1.0, R);
  }

  bool accept(const VectorXd& x) const {
    Point p = to_std(x);
    if (norm_over(p, cfg.ball_axes) > R) return false;
    for (const auto& g : ineq) {
      if (g(x) < 0.0) return false;
    }
    return true;
  }

  std::optional<VectorXd> project(const VectorXd& start) const {
    try {
      auto res = project_detailed(F, t, start, opt);
      if (accept(res.x)) return res.x;
    } catch (const MaxIterExceeded&) {
    } catch (const SingularStep&) {
    }
    return std::nullopt;
  }

  // Projects each start; slot i is empty on failure or rejection.
  std::vector<std::optional<Point>> project_all(const std::vector<VectorXd>& starts) const {
    std::vector<std::optional<Point>> out(starts.size());
    parallel_for(
        starts.size(),
        [&](std::size_t i) {
          if (auto x = project(starts[i])) out[i] = to_std(*x);
        },
        cfg.threads);
    return out;
  }

  // Orthonormal basis of ker JF(x), or empty when the rank test fails.
  MatrixXd tangent_basis(const VectorXd& x) const {
    MatrixXd J = F.jacobian(x);
    Eigen::JacobiSVD<MatrixXd> svd(J, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const Eigen::Index n = J.rows(), m = J.cols();
    if (s.size() == 0 || s[0] == 0.0 || s[s.size() - 1] < opt.rank_ratio * s[0]) return {};
    return svd.matrixV().rightCols(m - n);
  }
};

// Uniform hash grid over all coordinates for nearest-point queries at a fixed
// radius.
class PointGrid {
 public:
  PointGrid(std::size_t dim, double cell) : dim_(dim), cell_(cell) {
    neighbors_ = 1;
    for (std::size_t d = 0; d < dim; ++d) neighbors_ *= 3;
  }

  void insert(const Point& p) {
    pts_.push_back(p);
    cells_[hash(cell_of(p))].push_back(pts_.size() - 1);
  }

  bool any_within(const Point& p, double r) const {
    auto c = cell_of(p);
    std::vector<long long> probe(dim_);
    for (std::size_t code = 0; code < neighbors_; ++code) {
      std::size_t rest = code;
      for (std::size_t d = 0; d < dim_; ++d) {
        probe[d] = c[d] + static_cast<long long>(rest % 3) - 1;
        rest /= 3;
      }
      auto it = cells_.find(hash(probe));
      if (it == cells_.end()) continue;
      for (auto j : it->second) {
        if (squared_distance(p, pts_[j]) < r * r) return true;
      }
    }
    return false;
  }

  const PointCloud& points() const noexcept { return pts_; }

 private:
  std::vector<long long> cell_of(const Point& p) const {
    std::vector<long long> c(dim_);
    for (std::size_t d = 0; d < dim_; ++d) c[d] = static_cast<long long>(std::floor(p[d] / cell_));
    return c;
  }

  static std::uint64_t hash(const std::vector<long long>& c) {
    std::uint64_t hv = 1469598103934665603ULL;
    for (long long v : c) hv = (hv ^ static_cast<std::uint64_t>(v)) * 1099511628211ULL;
    return hv;
  }

  std::size_t dim_;
  double cell_;
  std::size_t neighbors_;
  PointCloud pts_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

// Tangent-step directions for a point: six in a 2-dimensional tangent space,
// the two signs for curves, random unit vectors otherwise.
inline std::vector<VectorXd> step_directions(const MatrixXd& T, std::mt19937_64& rng) {
  std::vector<VectorXd> out;
  const Eigen::Index d = T.cols();
  if (d == 1) {
    out.push_back(T.col(0));
    out.push_back(-T.col(0));
  } else if (d == 2) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double phase = uni(rng);
    for (int k = 0; k < 6; ++k) {
      double a = 2.0 * 3.14159265358979323846 * (k + phase) / 6.0;
      out.push_back(std::cos(a) * T.col(0) + std::sin(a) * T.col(1));
    }
  } else {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index k = 0; k < 4 * d; ++k) {
      VectorXd c(d);
      for (Eigen::Index i = 0; i < d; ++i) c[i] = gauss(rng);
      out.push_back(T * c.normalized());
    }
  }
  return out;
}

// Poisson-disk style front propagation at step r from the given seeds.
inline PointCloud propagate(const Sampler& S, const PointCloud& seeds, double r, std::uint64_t seed,
                            std::size_t limit, std::size_t& projections) {
  const double sep = S.cfg.separation * r;
  PointGrid grid(seeds.empty() ? 0 : seeds.front().size(), sep);
  std::vector<std::size_t> queue;
  for (const auto& p : seeds) {
    if (grid.points().size() >= limit) break;
    if (grid.any_within(p, sep)) continue;
    grid.insert(p);
    queue.push_back(grid.points().size() - 1);
    for (std::size_t head = queue.size() - 1; head < queue.size() && grid.points().size() < limit; ++head) {
      VectorXd x = to_vector(grid.points()[queue[head]]);
      MatrixXd T = S.tangent_basis(x);
      if (T.cols() == 0) continue;
      auto rng = task_rng(seed, queue[head], 0x5eed);
      for (const auto& dir : step_directions(T, rng)) {
        VectorXd cand = x + r * dir;
        Point cp = to_std(cand);
        if (grid.any_within(cp, sep)) continue;
        ++projections;
        auto y = S.project(cand);
        if (!y || (*y - cand).norm() > r) continue;
        Point yp = to_std(*y);
        if (grid.any_within(yp, sep)) continue;
        grid.insert(yp);
        queue.push_back(grid.points().size() - 1);
      }
    }
  }
  return grid.points();
}

}  // namespace detail

/// Samples F^{-1}(t) inside the ball of radius R. Quasi-random starts from
/// the cube [-R,R]^m are projected onto the fiber; from these seeds a front
/// is propagated along tangent steps with a minimum separation, and the
/// result is thinned by farthest-point sampling to `count` points (fewer if
/// the fiber part inside the ball is too small to hold them).
inline FiberSample sample_fiber(const CompiledMap& F, const std::vector<double>& t, double R, std::size_t count,
                                std::uint64_t seed, const SampleConfig& cfg = {}) {
  if (R <= 0) throw InvalidArgument("sample_fiber: radius must be positive");
  if (t.size() != F.target_dim()) throw DimensionMismatch("sample_fiber: target length differs from map target");
  if (F.domain_dim() <= F.target_dim()) throw InvalidArgument("sample_fiber: needs more variables than equations");
  for (auto a : cfg.ball_axes) {
    if (a >= F.domain_dim()) throw InvalidArgument("sample_fiber: ball axis out of range");
  }
  FiberSample s;
  s.variables = F.variables();
  s.target = t;
  s.radius = R;
  s.seed = seed;
  s.tol = cfg.tol;
  s.ball_axes = cfg.ball_axes;
  if (count == 0) return s;

  detail::Sampler sampler(F, t, R, cfg);
  const std::size_t m = F.domain_dim();
  const auto attempts =
      cfg.starts > 0 ? cfg.starts
                     : std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.oversample * static_cast<double>(count))));
  std::vector<VectorXd> starts;
  if (!cfg.start_points.empty()) {
    for (const auto& p : cfg.start_points) {
      if (p.size() != m) throw DimensionMismatch("sample_fiber: start point length differs from variable count");
      starts.push_back(to_vector(p));
    }
  } else {
    ScrambledHalton halton(m, seed);
    starts.resize(attempts);
    for (std::size_t i = 0; i < attempts; ++i) {
      auto u = halton.point(i);
      VectorXd x(m);
      for (std::size_t d = 0; d < m; ++d) x[d] = R * (2.0 * u[d] - 1.0);
      starts[i] = std::move(x);
    }
  }
  PointCloud seeds;
  for (auto& p : sampler.project_all(starts)) {
    if (p) seeds.push_back(std::move(*p));
  }
  s.attempts = starts.size();
  if (seeds.empty()) {
    throw FiberEmptyWithinBall("no start converged to the fiber inside the ball of radius " + std::to_string(R));
  }
  seeds = select(seeds, dedup_indices(seeds, cfg.dedup));

  const double dim = static_cast<double>(m - F.target_dim());
  const double fill = dim == 1.0 ? cfg.curve_fill_ratio : cfg.fill_ratio;
  const auto wanted = static_cast<std::size_t>(std::ceil(fill * static_cast<double>(count)));
  const std::size_t limit = 4 * wanted + 64;
  const std::size_t enough = std::max(count, wanted / 2);
  double r = cfg.spacing > 0.0 ? cfg.spacing : 4.0 * R * std::pow(static_cast<double>(count), -1.0 / dim);
  double too_small = 0.0, too_large = 0.0;  // bracketing step lengths
  PointCloud cloud;
  for (int round = 0;; ++round) {
    std::size_t projections = 0;
    cloud = detail::propagate(sampler, seeds, r, seed, limit, projections);
    s.attempts += projections;
    if (cfg.spacing > 0.0 || round >= cfg.max_refinements) break;
    if (cloud.size() >= limit) {
      too_small = r;
    } else if (cloud.size() < enough) {
      too_large = r;
    } else {
      break;
    }
    if (too_small > 0.0 && too_large > 0.0) {
      r = std::sqrt(too_small * too_large);
    } else {
      // point density scales like r^-dim
      double ratio = static_cast<double>(std::max<std::size_t>(cloud.size(), 1)) / static_cast<double>(wanted);
      r *= std::clamp(std::pow(ratio, 1.0 / dim), 0.25, 4.0);
    }
  }
  s.spacing = r;
  s.converged = cloud.size();
  s.points = select(cloud, farthest_point_indices(cloud, count));
  for (const auto& p : s.points) s.residuals.push_back((F.value(to_vector(p)) - sampler.t).norm());
  return s;
}

inline FiberSample sample_fiber(const PolynomialMap& F, const std::vector<double>& t, double R, std::size_t count,
                                std::uint64_t seed, const SampleConfig& cfg = {}) {
  return sample_fiber(CompiledMap(F), t, R, count, seed, cfg);
}

/// One row per point: the variables, then the residual.
inline void write_csv(std::ostream& os, const FiberSample& s) {
  for (const auto& v : s.variables) os << v << ',';
  os << "residual\n";
  os.precision(17);
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    for (double c : s.points[i]) os << c << ',';
    os << s.residuals[i] << '\n';
  }
}

inline nlohmann::json to_json(const FiberSample& s, bool include_points = true) {
  nlohmann::json j = {{"variables", s.variables}, {"target", s.target},       {"radius", s.radius},
                      {"seed", s.seed},           {"tol", s.tol},             {"ball_axes", s.ball_axes},
                      {"count", s.points.size()}, {"attempts", s.attempts},   {"converged", s.converged},
                      {"spacing", s.spacing}};
  double worst = 0.0;
  for (double r : s.residuals) worst = std::max(worst, r);
  j["max_residual"] = worst;
  if (include_points) {
    j["points"] = s.points;
    j["residuals"] = s.residuals;
  }
  return j;
}

}  // namespace fiberatlas::varnum
