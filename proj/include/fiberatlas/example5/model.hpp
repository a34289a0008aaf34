#pragma once

#include <nlohmann/json.hpp>

#include <random>
#include <string>
#include <vector>

#include "fiberatlas/arc.hpp"
#include "fiberatlas/error.hpp"
#include "fiberatlas/polycore.hpp"

namespace fiberatlas::example5 {

using polycore::Polynomial;
using polycore::PolynomialMap;
using polycore::Rational;

inline const std::vector<std::string> kVars5{"x", "y", "z", "u", "v"};
inline const std::vector<std::string> kVars4{"x", "y", "z", "u"};
inline const std::vector<std::string> kVars3{"x", "y", "z"};

inline const std::string kF1 = "y^2+(u^2*x+1)*(v*x-1)*(x^2+(v-u^2)*x+1)";
inline const std::string kF2 = "(z^2+u^2)-v*(u^2+1)*(z^2+1)";
inline const std::string kG = "(u^2*x+1)*(v*x-1)*(x^2+(v-u^2)*x+1)";
inline const std::string kLoopCut = "x-z^2";
// v solved from f2 = 0
inline const std::string kVFormula = "v = (z^2+u^2)/((u^2+1)*(z^2+1))";

/// y^2 + g_u(x, z) multiplied by D^2, D = (u^2+1)(z^2+1), with v = N/D,
/// N = z^2+u^2. `u` is any expression in the parser syntax (a rational
/// literal, or the variable u).
inline std::string reduced_text(const std::string& u) {
  const std::string U = "(" + u + ")";
  const std::string D = "((" + U + "^2+1)*(z^2+1))";
  const std::string N = "(z^2+" + U + "^2)";
  return D + "^2*y^2 + (" + U + "^2*x+1)*(" + N + "*x-" + D + ")*(" + D + "*x^2+(" + N + "-" + U + "^2*" + D + ")*x+" +
         D + ")";
}

struct Example5Bundle {
  PolynomialMap F;        // (f1, f2, f3) on (x, y, z, u, v)
  Arc delta;              // t = (0, 0, u), u in [0, 1]
  PolynomialMap family;   // (h, u) on (x, y, z, u); the fiber over (0, u) is X_u
  Polynomial loop_cut;    // x - z^2 on (x, y, z, u)
  Polynomial p;           // x - z^2 on (x, y, z), restricted to X_0
  Polynomial q;           // z on (x, y, z), restricted to X_u
  Polynomial r;           // x - z^2 on (x, y, z), restricted to X_u
  std::string v_formula = kVFormula;

  /// Reduced surface X_u as a single equation in (x, y, z).
  PolynomialMap reduced(const Rational& u) const {
    return polycore::parse_map(reduced_text(u.str()), kVars3);
  }

  /// Reference critical point of r_u: ((u^2+1)/u^2, 0, 0).
  static std::vector<Rational> morse_point(const Rational& u) {
    if (u == 0) throw InvalidArgument("the critical point of r_u leaves every ball as u -> 0");
    return {(u * u + 1) / (u * u), Rational(0), Rational(0)};
  }

  /// Real roots of g_{u,v}: -1/u^2 (when u != 0) and 1/v.
  static std::vector<Rational> g_roots(const Rational& u, const Rational& v) {
    std::vector<Rational> out;
    if (u != 0) out.push_back(-1 / (u * u));
    out.push_back(1 / v);
    return out;
  }
};

namespace detail {

inline Rational eval5(const Polynomial& p, std::vector<Rational> pt) { return polycore::eval<Rational>(p, pt); }

inline Rational v_of(const Rational& z, const Rational& u) { return (z * z + u * u) / ((u * u + 1) * (z * z + 1)); }

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument("example bundle identity failed: " + what);
}

}  // namespace detail

/// g_{u,v}(x) as an exact univariate polynomial.
inline polycore::UPoly g_univariate(const Rational& u, const Rational& v) {
  static const Polynomial g = polycore::parse_polynomial(kG, kVars5);
  return polycore::UnivariateSlice::of(g, "x", {{"u", u}, {"v", v}}).to_univariate();
}

/// Checks the bundle identities in exact arithmetic; throws on the first failure.
inline void check_bundle(const Example5Bundle& b) {
  using detail::require;
  const std::vector<Rational> pt{2, 0, 0, 1, Rational(1, 2)};
  auto val = b.F.evaluate<Rational>(pt);
  require(val == std::vector<Rational>{0, 0, 1}, "F(2,0,0,1,1/2) = (0,0,1)");

  auto g = polycore::parse_polynomial(kG, kVars5);
  auto g0_at_origin = detail::eval5(g, {0, 0, 0, 0, detail::v_of(0, 0)});
  require(g0_at_origin == -1, "g0(0,0) = -1");

  auto X0 = b.reduced(0);
  require(polycore::eval<Rational>(X0[0], std::vector<Rational>{0, 1, 0}) == 0, "(0,1,0) lies on X0");
  require(polycore::eval<Rational>(b.p, std::vector<Rational>{0, 1, 0}) == 0, "p(0,1,0) = 0");

  auto J = polycore::symbolic_jacobian(b.F);
  for (std::size_t k = 0; k < 5; ++k) {
    Rational expect = k == 3 ? 1 : 0;
    require(J[2][k].is_constant() && J[2][k].constant_term() == expect, "third Jacobian row is (0,0,0,1,0)");
  }

  // the reduced family is D^2 f1 on the slice v = N/D
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> num(-40, 40), den(1, 12), unum(0, 12);
  for (int trial = 0; trial < 100; ++trial) {
    Rational x(num(rng), den(rng)), y(num(rng), den(rng)), z(num(rng), den(rng)), u(unum(rng), 12);
    Rational v = detail::v_of(z, u);
    Rational D = (u * u + 1) * (z * z + 1);
    Rational lhs = polycore::eval<Rational>(b.family[0], std::vector<Rational>{x, y, z, u});
    Rational rhs = D * D * detail::eval5(b.F[0], {x, y, z, u, v});
    require(lhs == rhs, "reduced family equals D^2 f1 on the v-eliminated slice");
    require(detail::eval5(b.F[1], {x, y, z, u, v}) == 0, "v formula solves f2 = 0");
  }
}

/// The map F, the arc delta and the reduced data, with all identities verified.
inline Example5Bundle build_example() {
  Example5Bundle b;
  b.F = polycore::parse_map(kF1 + "; " + kF2 + "; u", kVars5);
  b.delta = Arc::parse("0; 0; s", {1.0, 0.75, 0.5, 0.25, 0.0});
  b.family = polycore::parse_map(reduced_text("u") + "; u", kVars4);
  b.loop_cut = polycore::parse_polynomial(kLoopCut, kVars4);
  b.p = polycore::parse_polynomial(kLoopCut, kVars3);
  b.q = polycore::parse_polynomial("z", kVars3);
  b.r = b.p;
  check_bundle(b);
  return b;
}

/// Same bundle with f1 replaced; used to plant a singularity. No identity check.
inline Example5Bundle with_f1(Example5Bundle b, const std::string& f1) {
  b.F = PolynomialMap(kVars5, {polycore::parse_polynomial(f1, kVars5), b.F[1], b.F[2]});
  return b;
}

inline nlohmann::json to_json(const Example5Bundle& b) {
  return {{"F", polycore::to_json(b.F)},
          {"delta", b.delta.to_json()},
          {"loop_cut", b.loop_cut.to_string()},
          {"v_reconstruction", b.v_formula},
          {"working_space", "reduced coordinates (x, y, z); v eliminated"}};
}

}  // namespace fiberatlas::example5
