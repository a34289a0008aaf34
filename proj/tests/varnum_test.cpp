#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fiberatlas/polycore.hpp"
#include "fiberatlas/topo.hpp"
#include "fiberatlas/varnum.hpp"

using namespace fiberatlas;
using namespace fiberatlas::varnum;
using polycore::parse_map;
using polycore::parse_polynomial;
using polycore::Rational;

namespace {

const std::vector<std::string> kXYZ{"x", "y", "z"};

// Denominator-cleared y^2 + g_u(x, z) for a rational literal u.
std::string reduced_text(const std::string& u) {
  std::string U = "(" + u + ")";
  std::string D = "((" + U + "^2+1)*(z^2+1))", N = "(z^2+" + U + "^2)";
  return D + "^2*y^2 + (" + U + "^2*x+1)*(" + N + "*x-" + D + ")*(" + D + "*x^2+(" + N + "-" + U + "^2*" + D + ")*x+" +
         D + ")";
}

PolynomialMap reduced(const std::string& u) { return parse_map(reduced_text(u), kXYZ); }

}  // namespace

TEST(Projection, ConvergesToAnchorOnX0) {
  auto x = project_to_fiber(reduced("0"), to_vector({0.0}), to_vector({0.0, 0.9, 0.0}));
  EXPECT_NEAR(x[0], 0.0, 1e-10);
  EXPECT_NEAR(x[1], 1.0, 1e-10);
  EXPECT_NEAR(x[2], 0.0, 1e-10);
}

TEST(Projection, PointOnFiberIsUnchanged) {
  auto F = parse_map("x^2+y^2-1", {"x", "y"});
  VectorXd p = to_vector({0.6, 0.8});
  auto res = project_detailed(CompiledMap(F), to_vector({0.0}), p);
  EXPECT_EQ(res.iterations, 0);
  EXPECT_EQ(res.x, p);
}

TEST(Projection, StallingStartRaisesMaxIter) {
  // on the plane z = 0 the Gauss-Newton direction for X_0 stalls at residual 1
  EXPECT_THROW(project_to_fiber(reduced("0"), to_vector({0.0}), to_vector({10.0, 0.0, 0.0})), MaxIterExceeded);
}

TEST(Projection, RankCollapseRaisesSingularStep) {
  auto F = parse_map("x; x", {"x", "y"});
  EXPECT_THROW(project_to_fiber(F, to_vector({1.0, 2.0}), to_vector({0.0, 0.0})), SingularStep);
}

TEST(Projection, IdempotentOnRandomStarts) {
  CompiledMap F(reduced("1/2"));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-4.0, 4.0);
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    VectorXd s = to_vector({U(rng), U(rng), U(rng)});
    try {
      auto a = project_to_fiber(F, to_vector({0.0}), s);
      auto b = project_to_fiber(F, to_vector({0.0}), a);
      EXPECT_LE((a - b).norm(), 1e-10);
      ++checked;
    } catch (const MaxIterExceeded&) {
    } catch (const SingularStep&) {
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Sampling, ZeroCountGivesEmptySample) {
  auto s = sample_fiber(parse_map("x^2+y^2-1", {"x", "y"}), {0.0}, 2.0, 0, 1);
  EXPECT_TRUE(s.empty());
}

TEST(Sampling, EmptyVarietyRaises) {
  EXPECT_THROW(sample_fiber(parse_map("x^2+y^2+1", {"x", "y"}), {0.0}, 2.0, 50, 1), FiberEmptyWithinBall);
}

TEST(Sampling, InvariantsHold) {
  SampleConfig cfg;
  cfg.ball_axes = {0, 1, 2};
  auto s = sample_fiber(reduced("1"), {0.0}, 8.0, 500, 3, cfg);
  ASSERT_EQ(s.size(), 500u);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_LE(s.residuals[i], cfg.tol);
    EXPECT_LE(norm_over(s.points[i], cfg.ball_axes), 8.0);
  }
}

TEST(Sampling, DeterministicAcrossRunsAndThreads) {
  auto F = reduced("1/4");
  SampleConfig one, four;
  one.threads = 1;
  four.threads = 4;
  std::ostringstream a, b, c;
  write_csv(a, sample_fiber(F, {0.0}, 8.0, 300, 42, one));
  write_csv(b, sample_fiber(F, {0.0}, 8.0, 300, 42, one));
  write_csv(c, sample_fiber(F, {0.0}, 8.0, 300, 42, four));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(), c.str());
}

TEST(Sampling, X0IsConnected) {
  SampleConfig cfg;
  cfg.ball_axes = {0, 1, 2};
  auto s = sample_fiber(reduced("0"), {0.0}, 8.0, 2000, 5, cfg);
  auto summary = topo::summarize(s.points);
  EXPECT_EQ(summary.beta0, 1);
}

TEST(Milnor, CircleIsVacuousFromOneAndAHalf) {
  auto e = estimate_milnor_radius(parse_map("x^2+y^2-1", {"x", "y"}), {0.0}, {0.5, 1.5, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(e.radius, 1.5);
  EXPECT_TRUE(e.vacuous);
  EXPECT_TRUE(e.compact);
}

TEST(Milnor, LineThroughOriginReturnsSmallestRadius) {
  auto e = estimate_milnor_radius(parse_map("y", {"x", "y"}), {0.0}, {1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(e.radius, 1.0);
  EXPECT_FALSE(e.vacuous);
  EXPECT_NEAR(e.min_margin_beyond, 1.0, 1e-12);
}

TEST(Milnor, NearTangentSphereAtLargestRadiusIsInconclusive) {
  // the line y = 1 grazes the unit sphere
  EXPECT_THROW(estimate_milnor_radius(parse_map("y-1", {"x", "y"}), {0.0}, {0.5, 1.0001}), InconclusiveMargin);
  auto e = estimate_milnor_radius(parse_map("y-1", {"x", "y"}), {0.0}, {1.0001, 2.0});
  EXPECT_DOUBLE_EQ(e.radius, 2.0);
}

TEST(Milnor, X0RegressionRadius) {
  MilnorConfig mc;
  mc.seed = 1;
  std::vector<double> grid;
  for (int r = 2; r <= 12; ++r) grid.push_back(r);
  auto e = estimate_milnor_radius(reduced("0"), {0.0}, grid, mc);
  EXPECT_DOUBLE_EQ(e.radius, 2.0);
  EXPECT_FALSE(e.compact);
  EXPECT_NEAR(e.min_margin_beyond, 0.2086, 1e-3);
  for (const auto& sh : e.shells) EXPECT_EQ(sh.status, "ok");
}

TEST(Milnor, RejectsUnsortedGrid) {
  EXPECT_THROW(estimate_milnor_radius(parse_map("y", {"x", "y"}), {0.0}, {2.0, 1.0}), InvalidArgument);
}

TEST(Critical, HeightOnCircle) {
  RestrictedFunction rf{parse_polynomial("x", {"x", "y"}), parse_map("x^2+y^2-1", {"x", "y"}), {}};
  CriticalConfig cc;
  cc.box = {{-2, 2}, {-2, 2}};
  cc.multistart_n = 100;
  auto r = constrained_critical_points(rf, cc);
  ASSERT_EQ(r.points.size(), 2u);
  EXPECT_NEAR(r.points[0].location[0], -1.0, 1e-10);
  EXPECT_EQ(r.points[0].morse_index, 0);
  EXPECT_NEAR(r.points[1].location[0], 1.0, 1e-10);
  EXPECT_EQ(r.points[1].morse_index, 1);
  for (const auto& p : r.points) {
    EXPECT_LE(p.kkt_residual, cc.tol);
    EXPECT_LE(p.constraint_residual, cc.tol);
  }
}

TEST(Critical, MorsePointOfRuAtOne) {
  RestrictedFunction rf{parse_polynomial("x-z^2", kXYZ), reduced("1"), {parse_polynomial("x-z^2", kXYZ)}};
  CriticalConfig cc;
  cc.box = {{-8, 8}, {-8, 8}, {-8, 8}};
  cc.multistart_n = 300;
  cc.seed = 2;
  auto r = constrained_critical_points(rf, cc);
  ASSERT_EQ(r.points.size(), 1u);
  const auto& p = r.points[0];
  EXPECT_NEAR(p.location[0], 2.0, 1e-8);
  EXPECT_NEAR(p.location[1], 0.0, 1e-8);
  EXPECT_NEAR(p.location[2], 0.0, 1e-8);
  EXPECT_EQ(p.morse_index, 2);
  auto chart = sorted_eigenvalues(implicit_chart_hessian(rf, p.location, {0}));
  EXPECT_NEAR(chart[0], -2.0, 1e-6);
  EXPECT_NEAR(chart[1], -1.0 / 3.0, 1e-6);
  EXPECT_TRUE(r.boundary_points.empty());
}

TEST(Critical, PIsASubmersionOnX0) {
  RestrictedFunction rf{parse_polynomial("x-z^2", kXYZ), reduced("0"), {}};
  CriticalConfig cc;
  cc.box = {{-8, 8}, {-8, 8}, {-8, 8}};
  cc.multistart_n = 300;
  EXPECT_TRUE(constrained_critical_points(rf, cc).points.empty());
}

TEST(Critical, IndexInvariantUnderTangentRotation) {
  RestrictedFunction rf{parse_polynomial("x*y+z^3-2*x", kXYZ), parse_map("x^2+2*y^2+3*z^2-4", kXYZ), {}};
  CriticalConfig cc;
  cc.box = {{-3, 3}, {-3, 3}, {-3, 3}};
  cc.multistart_n = 200;
  auto r = constrained_critical_points(rf, cc);
  ASSERT_FALSE(r.points.empty());
  CompiledRestriction cr(rf);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  for (const auto& p : r.points) {
    VectorXd x = to_vector(p.location);
    MatrixXd Q = tangent_basis(cr.constraints().jacobian(x));
    MatrixXd A(2, 2);
    for (int i = 0; i < 4; ++i) A(i / 2, i % 2) = N(rng);
    MatrixXd rot = Eigen::HouseholderQR<MatrixXd>(A).householderQ();
    MatrixXd rotated = Q * rot;
    auto ev = sorted_eigenvalues(restricted_hessian(cr, x, to_vector(p.multipliers), &rotated));
    ASSERT_EQ(ev.size(), p.eigenvalues.size());
    for (std::size_t k = 0; k < ev.size(); ++k) EXPECT_NEAR(ev[k], p.eigenvalues[k], 1e-8);
    int index = static_cast<int>(std::count_if(ev.begin(), ev.end(), [](double e) { return e < 0; }));
    EXPECT_EQ(index, p.morse_index);
  }
}

TEST(Critical, RestrictedHessianMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> coef(-3, 3);
  std::uniform_int_distribution<int> pos(1, 4);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  int done = 0;
  for (int trial = 0; done < 50 && trial < 500; ++trial) {
    std::ostringstream c, f;
    c << pos(rng) << "*x^2+" << pos(rng) << "*y^2+" << pos(rng) << "*z^2+(" << coef(rng) << ")*x*y-" << pos(rng);
    f << "(" << coef(rng) << ")*x^2*z+(" << coef(rng) << ")*y^3+(" << coef(rng) << ")*x*y+(" << coef(rng)
      << ")*z+(" << coef(rng) << ")*y*z";
    RestrictedFunction rf{parse_polynomial(f.str(), kXYZ), parse_map(c.str(), kXYZ), {}};
    CompiledRestriction cr(rf);
    VectorXd x;
    try {
      x = project_to_fiber(cr.constraints(), to_vector({0.0}), to_vector({U(rng), U(rng), U(rng)}));
    } catch (const std::exception&) {
      continue;
    }
    MatrixXd J = cr.constraints().jacobian(x);
    MatrixXd Q = tangent_basis(J);
    VectorXd lambda = least_squares_multipliers(J, cr.objective().gradient(x));
    MatrixXd exact = restricted_hessian(cr, x, lambda, &Q);
    MatrixXd fd = finite_difference_restricted_hessian(cr, x, Q);
    EXPECT_LE((exact - fd).cwiseAbs().maxCoeff(), 1e-4) << "constraint " << c.str() << " objective " << f.str();
    ++done;
  }
  EXPECT_EQ(done, 50);
}

TEST(Certify, ConeSingularityIsFound) {
  auto arc = Arc::parse("s", {1.0, 0.5, 0.0});
  CertifyConfig cfg;
  cfg.multistart_n = 200;
  std::vector<Rational> grid{Rational(0), Rational(1, 2), Rational(1)};
  EXPECT_THROW(certify_no_singularity_on_arc(parse_map("x^2+y^2", {"x", "y"}), arc, grid, cfg), CandidateSingularityFound);
  cfg.throw_on_candidate = false;
  auto rep = certify_no_singularity_on_arc(parse_map("x^2+y^2", {"x", "y"}), arc, grid, cfg);
  EXPECT_GT(rep.grid[0].candidates, 0u);
  EXPECT_EQ(rep.grid[2].candidates, 0u);
}

TEST(Certify, SubmersionFixtureHasNoCandidate) {
  auto arc = Arc::parse("s", {1.0, 0.5, 0.0});
  CertifyConfig cfg;
  cfg.multistart_n = 500;
  std::vector<Rational> grid;
  for (int k = 0; k <= 4; ++k) grid.emplace_back(k, 4);
  auto rep = certify_no_singularity_on_arc(parse_map("x*(x*y-1)", {"x", "y"}), arc, grid, cfg);
  EXPECT_EQ(rep.candidates, 0u);
  EXPECT_GT(rep.min_residual, 1e-4);
}
