#include <gtest/gtest.h>

#include <cmath>

#include "fiberatlas/example5.hpp"

using namespace fiberatlas;
using namespace fiberatlas::example5;

namespace {

const Example5Bundle& bundle() {
  static const Example5Bundle b = build_example();
  return b;
}

const std::string kPlanted = "y^2+(x-1)^2*(x-2)*(v*x+u^2+1)";

}  // namespace

TEST(Bundle, ExactIdentities) {
  const auto& b = bundle();
  auto val = b.F.evaluate<Rational>(std::vector<Rational>{2, 0, 0, 1, Rational(1, 2)});
  EXPECT_EQ(val, (std::vector<Rational>{0, 0, 1}));
  auto g0 = polycore::eval<Rational>(polycore::parse_polynomial(kG, kVars5), std::vector<Rational>{0, 0, 0, 0, 0});
  EXPECT_EQ(g0, -1);
  EXPECT_EQ(polycore::eval<Rational>(b.reduced(0)[0], std::vector<Rational>{0, 1, 0}), 0);
  EXPECT_EQ(polycore::eval<Rational>(b.p, std::vector<Rational>{0, 1, 0}), 0);
}

TEST(Bundle, CircleAnchorOfPAtOne) {
  const auto& b = bundle();
  const std::vector<double> anchor{1.0, std::sqrt(2.0), 0.0};
  auto circle = polycore::parse_polynomial("y^2+(z^2-1)*(z^2+1)*(z^2+2)", kVars3);
  EXPECT_NEAR(polycore::eval<double>(circle, anchor), 0.0, 1e-12);
  EXPECT_NEAR(polycore::eval<double>(b.reduced(0)[0], anchor), 0.0, 1e-12);
  EXPECT_NEAR(polycore::eval<double>(b.p, anchor), 1.0, 1e-15);
}

TEST(Bundle, ThirdJacobianRow) {
  auto J = polycore::symbolic_jacobian(bundle().F);
  for (std::size_t k = 0; k < 5; ++k) {
    ASSERT_TRUE(J[2][k].is_constant());
    EXPECT_EQ(J[2][k].constant_term(), k == 3 ? 1 : 0);
  }
}

TEST(Bundle, MutantFailsIdentityCheck) {
  EXPECT_THROW(check_bundle(with_f1(bundle(), kPlanted)), InvalidArgument);
}

TEST(RootStructure, TwoSimpleRootsOnRationalGrid) {
  const Rational prec(1, 10'000'000'000'000LL);
  for (const Rational& u : {Rational(1, 4), Rational(1, 2), Rational(1)}) {
    for (int k = 1; k <= 9; ++k) {
      Rational v(k, 10);
      auto g = g_univariate(u, v);
      EXPECT_FALSE(polycore::square_free_part(g).has_multiple_root);
      auto roots = polycore::isolate_real_roots(g, prec);
      ASSERT_EQ(roots.size(), 2u) << "u=" << u << " v=" << v;
      auto expected = Example5Bundle::g_roots(u, v);
      std::sort(expected.begin(), expected.end());
      for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(roots.roots[i].midpoint(), polycore::to_double(expected[i]), 1e-10);
    }
  }
}

TEST(Claim1, ExactChecksFindNoMultipleRoot) {
  for (const auto& u : tenths()) {
    for (const auto& c : multiple_root_checks(bundle(), u, Claim1Config{}.z_samples)) EXPECT_FALSE(c.common_root) << c.label;
  }
}

TEST(Claim1, PlantedDoubleRootIsDetected) {
  Claim1Config cfg;
  cfg.u_grid = {Rational(3, 10)};
  cfg.certify.multistart_n = 200;
  cfg.certify.seed = 1;
  auto res = verify_claim1(with_f1(bundle(), kPlanted), cfg);
  EXPECT_EQ(res.status, Status::Fail);
  EXPECT_GT(res.diagnostics["candidates"].get<int>(), 0);
  EXPECT_FALSE(res.diagnostics["exact_all_negative"].get<bool>());
}

TEST(Claim1, SmallGridPasses) {
  Claim1Config cfg;
  cfg.u_grid = {Rational(0), Rational(1, 2), Rational(1)};
  cfg.certify.multistart_n = 300;
  cfg.certify.seed = 2;
  auto res = verify_claim1(bundle(), cfg);
  EXPECT_EQ(res.status, Status::Pass);
  EXPECT_GT(res.diagnostics["min_residual"].get<double>(), 1e-4);
}

TEST(Claim1, LooseToleranceIsInconclusive) {
  Claim1Config cfg;
  cfg.u_grid = {Rational(1, 2)};
  cfg.certify.multistart_n = 100;
  cfg.certify.tol = 1e-2;
  EXPECT_EQ(verify_claim1(bundle(), cfg).status, Status::Inconclusive);
}

TEST(Claims23, TinyBallIsInconclusive) {
  Claims23Config cfg;
  cfg.u_grid = {0.0, 1.0};
  cfg.R = 0.01;
  cfg.count = 200;
  cfg.milnor.starts = 40;
  cfg.milnor_grid = {2, 3, 4};
  auto res = verify_claims23(bundle(), cfg);
  EXPECT_EQ(res.claim.status, Status::Inconclusive);
  for (const auto& rec : res.scan.records) EXPECT_FALSE(rec.ok);
}

TEST(Claim4, ChartEigenvaluesAtOne) {
  auto ref = reference_chart_eigenvalues(Rational(1));
  EXPECT_DOUBLE_EQ(ref[0], -2.0);
  EXPECT_DOUBLE_EQ(ref[1], -1.0 / 3.0);
  Claim4Config cfg;
  cfg.critical.multistart_n = 150;
  cfg.critical.seed = 3;
  auto mc = check_morse_point(bundle(), 1.0, cfg);
  ASSERT_EQ(mc.found.size(), 1u);
  EXPECT_TRUE(mc.ok);
  EXPECT_EQ(mc.found[0].morse_index, 2);
  EXPECT_NEAR(mc.chart_eigenvalues[0], -2.0, 1e-6);
  EXPECT_NEAR(mc.chart_eigenvalues[1], -1.0 / 3.0, 1e-6);
}

TEST(Claim4, MorsePointAtOneHalf) {
  Claim4Config cfg;
  cfg.critical.multistart_n = 150;
  cfg.critical.seed = 4;
  auto mc = check_morse_point(bundle(), 0.5, cfg);
  ASSERT_EQ(mc.found.size(), 1u);
  EXPECT_NEAR(mc.found[0].location[0], 5.0, 1e-8);
  EXPECT_NEAR(mc.chart_eigenvalues[0], -32.0, 1e-6);
  EXPECT_TRUE(mc.ok);
}

TEST(Claim4, CaseTwoHasNoCommonSolution) {
  for (int k = 1; k <= 10; ++k) EXPECT_TRUE(case_ii_excluded(Rational(k, 10)));
}

TEST(VerifyAll, CoarseGridsKeepVerdictAndWarn) {
  Example5Config cfg;
  cfg.claim1.u_grid = {Rational(0), Rational(1)};
  cfg.claim1.certify.multistart_n = 200;
  cfg.claims23.u_grid = {0.0, 0.5, 1.0};
  cfg.claims23.count = 4000;
  cfg.claim4.morse_grid = {1.0};
  cfg.claim4.critical.multistart_n = 100;
  cfg.claim4.loop_grid = {0.0, 0.5, 1.0};
  auto rep = verify_all(cfg);
  EXPECT_TRUE(rep.overall_pass);
  EXPECT_TRUE(rep.verdict.atypical);
  EXPECT_TRUE(rep.verdict.homology_constant);
  EXPECT_NE(std::find(rep.warnings.begin(), rep.warnings.end(), "coarse topology grid"), rep.warnings.end());
  auto j = to_json(rep);
  EXPECT_EQ(j["verdict"]["verdict"], "ATYPICAL");
  EXPECT_EQ(j["betti_table"].size(), 3u);
  EXPECT_NE(headline(rep).find("constant"), std::string::npos);
}
