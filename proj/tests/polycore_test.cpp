#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fiberatlas/polycore.hpp"

namespace {

using namespace fiberatlas;
using namespace fiberatlas::polycore;

const std::vector<std::string> kVars5{"x", "y", "z", "u", "v"};

Polynomial P(std::string_view text, const std::vector<std::string>& vars = kVars5) {
  return parse_polynomial(text, vars);
}

PolynomialMap example_map() {
  return parse_map(
      "y^2+(u^2*x+1)*(v*x-1)*(x^2+(v-u^2)*x+1);"
      "(z^2+u^2)-v*(u^2+1)*(z^2+1);"
      "u",
      kVars5);
}

std::vector<Rational> pt(std::initializer_list<Rational> xs) { return xs; }

Polynomial random_polynomial(std::mt19937_64& rng, const std::vector<std::string>& vars, int terms, int max_exp) {
  std::uniform_int_distribution<int> e(0, max_exp);
  std::uniform_int_distribution<int> c(-9, 9);
  std::uniform_int_distribution<int> d(1, 4);
  Polynomial p(vars);
  for (int t = 0; t < terms; ++t) {
    Monomial m(vars.size());
    for (auto& k : m) k = static_cast<std::uint32_t>(e(rng));
    p.add_term(m, make_rational(c(rng), d(rng)));
  }
  return p;
}

TEST(PolycoreEval, ExampleMapAtRationalPoint) {
  auto F = example_map();
  auto p = pt({2, 0, 0, 1, make_rational(1, 2)});
  EXPECT_EQ(eval(F[0], p), 0);
  auto value = F.evaluate<Rational>(p);
  EXPECT_EQ(value, (std::vector<Rational>{0, 0, 1}));
}

TEST(PolycoreEval, ThirdComponentIsU) {
  auto F = example_map();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(-20, 20);
  for (int i = 0; i < 10; ++i) {
    std::vector<Rational> p;
    for (int k = 0; k < 5; ++k) p.push_back(make_rational(d(rng), 7));
    EXPECT_EQ(eval(F[2], p), p[3]);
  }
}

TEST(PolycoreEval, ZeroPolynomialAndMismatch) {
  Polynomial zero(kVars5);
  EXPECT_EQ(eval(zero, pt({1, 2, 3, 4, 5})), 0);
  EXPECT_EQ(eval<double>(zero, std::vector<double>{1, 2, 3, 4, 5}), 0.0);
  EXPECT_THROW(eval(zero, pt({1, 2})), DimensionMismatch);
}

TEST(PolycoreDifferentiate, Examples) {
  auto F = example_map();
  EXPECT_EQ(differentiate(F[2], "u"), Polynomial::constant(kVars5, 1));
  Polynomial g = P("(u^2*x+1)*(v*x-1)*(x^2+(v-u^2)*x+1)");
  EXPECT_EQ(eval(differentiate(g, "x"), pt({2, 0, 0, 1, make_rational(1, 2)})), 6);
  EXPECT_EQ(differentiate(P("y^2"), "y"), P("2*y"));
  EXPECT_THROW(differentiate(g, "w"), UnknownVariable);
}

TEST(PolycoreDifferentiate, LinearityAndProductRuleExact) {
  std::mt19937_64 rng(11);
  std::vector<std::string> vars{"a", "b", "c"};
  for (int trial = 0; trial < 25; ++trial) {
    auto p = random_polynomial(rng, vars, 6, 3);
    auto q = random_polynomial(rng, vars, 5, 3);
    Rational s = make_rational(static_cast<long long>(trial) - 12, 5);
    for (std::size_t v = 0; v < vars.size(); ++v) {
      EXPECT_EQ((p + s * q).derivative(v), p.derivative(v) + s * q.derivative(v));
      EXPECT_EQ((p * q).derivative(v), p.derivative(v) * q + p * q.derivative(v));
    }
  }
}

TEST(PolycoreDifferentiate, MatchesCentralDifferences) {
  std::mt19937_64 rng(5);
  std::vector<std::string> vars{"a", "b", "c"};
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  for (int trial = 0; trial < 40; ++trial) {
    auto p = random_polynomial(rng, vars, 7, 3);
    std::vector<double> x{uni(rng), uni(rng), uni(rng)};
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const double h = 1e-5;
      auto xp = x, xm = x;
      xp[v] += h;
      xm[v] -= h;
      double fd = (eval(p, xp) - eval(p, xm)) / (2 * h);
      double exact = eval(p.derivative(v), x);
      EXPECT_NEAR(fd, exact, 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST(PolycoreJacobian, ExampleRowsAndEntries) {
  auto F = example_map();
  std::vector<Rational> p = pt({2, 0, 0, 1, make_rational(1, 2)});
  auto J = jacobian(F, p);
  EXPECT_EQ(J[2], (std::vector<Rational>{0, 0, 0, 1, 0}));
  EXPECT_EQ(J[0][1], 0);   // 2y
  EXPECT_EQ(J[1][4], -2);  // -(u^2+1)(z^2+1)
  auto Jd = jacobian<double>(F, std::vector<double>{0.3, -1.2, 4.0, 0.7, 0.1});
  EXPECT_EQ(Jd[2], (std::vector<double>{0, 0, 0, 1, 0}));
  EXPECT_THROW(jacobian(F, pt({1, 2, 3})), DimensionMismatch);
}

TEST(PolycoreJacobian, ZeroMapAndRowsAreGradients) {
  PolynomialMap zero(kVars5, {Polynomial(kVars5), Polynomial(kVars5)});
  auto J = jacobian(zero, pt({1, 2, 3, 4, 5}));
  for (const auto& row : J) {
    for (const auto& e : row) EXPECT_EQ(e, 0);
  }
  auto F = example_map();
  auto sym = symbolic_jacobian(F);
  for (std::size_t i = 0; i < F.target_dim(); ++i) {
    for (std::size_t k = 0; k < F.domain_dim(); ++k) EXPECT_EQ(sym[i][k], F[i].derivative(k));
  }
}

TEST(PolycoreHessian, Examples) {
  std::vector<std::string> xyz{"x", "y", "z"};
  auto H = hessian(P("x^2+y^2+z^2", xyz), pt({7, -3, make_rational(1, 9)}));
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) EXPECT_EQ(H[i][k], i == k ? 2 : 0);
  }
  auto H2 = hessian(P("x-z^2", xyz), pt({1, 1, 1}));
  EXPECT_EQ(H2, (Matrix<Rational>{{0, 0, 0}, {0, 0, 0}, {0, 0, -2}}));
  // g(x,1,1/2) = (x+1)(x/2-1)(x^2-x/2+1); second derivative at 2 is 29/2
  // (sympy oracle), the y-block is 2.
  std::vector<std::string> xy{"x", "y"};
  auto H3 = hessian(P("y^2+(x+1)*(1/2*x-1)*(x^2-1/2*x+1)", xy), pt({2, 0}));
  EXPECT_EQ(H3, (Matrix<Rational>{{make_rational(29, 2), 0}, {0, 2}}));
}

UPoly g_slice(const Rational& u, const Rational& v) {
  Polynomial g = P("(u^2*x+1)*(v*x-1)*(x^2+(v-u^2)*x+1)");
  return UnivariateSlice::of(g, "x", {{"u", u}, {"v", v}}).to_univariate();
}

TEST(PolycoreRoots, ExampleSlices) {
  const Rational prec = make_rational(1, 1000000000000LL);
  auto r = isolate_real_roots(g_slice(1, make_rational(1, 2)), prec);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r.roots[0].midpoint(), -1.0, 1e-12);
  EXPECT_NEAR(r.roots[1].midpoint(), 2.0, 1e-12);
  auto r2 = isolate_real_roots(g_slice(make_rational(1, 2), make_rational(1, 4)), prec);
  ASSERT_EQ(r2.size(), 2u);
  EXPECT_NEAR(r2.roots[0].midpoint(), -4.0, 1e-12);
  EXPECT_NEAR(r2.roots[1].midpoint(), 4.0, 1e-12);
  // quadratic factor at (1/2, 1/4) is x^2 + 1
  auto sf = square_free_part(g_slice(make_rational(1, 2), make_rational(1, 4)));
  auto [q, rem] = divmod(sf.part, UPoly({-16, 0, 1}));
  EXPECT_TRUE(rem.is_zero());
  EXPECT_EQ(q, UPoly({1, 0, 1}));
}

TEST(PolycoreRoots, NoRealRootsAndErrors) {
  auto r = isolate_real_roots(UPoly({1, 0, 1}), make_rational(1, 1000));
  EXPECT_EQ(r.size(), 0u);
  EXPECT_THROW(isolate_real_roots(UPoly(), make_rational(1, 10)), ZeroPolynomial);
  EXPECT_THROW(square_free_part(UPoly()), ZeroPolynomial);
}

TEST(PolycoreRoots, MultiplicityAndExactRationalRoots) {
  // (x-1)^2 (x+2) x
  UPoly p = UPoly({-1, 1}) * UPoly({-1, 1}) * UPoly({2, 1}) * UPoly({0, 1});
  auto r = isolate_real_roots(p, make_rational(1, 1 << 20));
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r.roots[0].midpoint(), -2.0, 1e-6);
  EXPECT_NEAR(r.roots[1].midpoint(), 0.0, 1e-6);
  EXPECT_NEAR(r.roots[2].midpoint(), 1.0, 1e-6);
  EXPECT_EQ(r.roots[0].multiplicity, 1);
  EXPECT_EQ(r.roots[2].multiplicity, 2);
  EXPECT_TRUE(r.has_multiple_root());
}

TEST(PolycoreSquareFree, Examples) {
  EXPECT_FALSE(square_free_part(g_slice(1, make_rational(1, 2))).has_multiple_root);
  EXPECT_FALSE(square_free_part(g_slice(make_rational(1, 2), make_rational(1, 4))).has_multiple_root);
  auto sq = square_free_part(UPoly({1, -2, 1}));
  EXPECT_TRUE(sq.has_multiple_root);
  EXPECT_EQ(sq.part, UPoly({-1, 1}));
}

TEST(PolycoreRoots, CountsMatchSturmAndIntervalsChangeSign) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> c(-6, 6);
  for (int trial = 0; trial < 60; ++trial) {
    // product of random linear and quadratic factors, with occasional repeats
    UPoly p({1});
    int factors = 1 + trial % 4;
    for (int k = 0; k < factors; ++k) {
      UPoly f = (k % 2 == 0) ? UPoly({c(rng), 1}) : UPoly({c(rng), c(rng), 1});
      p = p * f;
      if (trial % 5 == 0) p = p * f;
    }
    auto sqf = square_free_part(p).part;
    SturmSequence s(sqf);
    auto r = isolate_real_roots(p, make_rational(1, 1 << 16));
    EXPECT_EQ(static_cast<int>(r.size()), s.count_all());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const auto& iv = r.roots[i];
      if (iv.lo == iv.hi) {
        EXPECT_EQ(sign(sqf(iv.lo)), 0);
      } else {
        EXPECT_LT(sign(sqf(iv.lo)) * sign(sqf(iv.hi)), 0);
      }
      if (i > 0) EXPECT_LT(r.roots[i - 1].hi, iv.lo);
    }
  }
}

TEST(PolycoreParser, RoundTripsThroughTextAndJson) {
  std::mt19937_64 rng(23);
  std::vector<std::string> vars{"x", "y", "z"};
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_polynomial(rng, vars, 6, 4);
    EXPECT_EQ(parse_polynomial(p.to_string(), vars), p);
    EXPECT_EQ(polynomial_from_json(to_json(p)), p);
  }
  EXPECT_EQ(parse_polynomial("0.25*x - 1/4*x", {"x"}), Polynomial({"x"}));
  EXPECT_THROW(parse_polynomial("x^", {"x"}), ParseError);
  EXPECT_THROW(parse_polynomial("x/y", {"x", "y"}), ParseError);
  EXPECT_THROW(parse_polynomial("w+1", {"x"}), UnknownVariable);
  EXPECT_EQ(collect_variables("y^2+2e3*x+y"), (std::vector<std::string>{"y", "x"}));
}

}  // namespace
