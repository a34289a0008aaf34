#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fiberatlas/error.hpp"
#include "fiberatlas/polycore/polynomial.hpp"

namespace fiberatlas::polycore {

/// Dense univariate polynomial, coefficients low degree first, no trailing zeros.
class UPoly {
 public:
  UPoly() = default;
  explicit UPoly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

  static UPoly monomial(unsigned degree, const Rational& c = Rational(1)) {
    std::vector<Rational> v(degree + 1, Rational(0));
    v[degree] = c;
    return UPoly(std::move(v));
  }

  bool is_zero() const noexcept { return c_.empty(); }
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  const std::vector<Rational>& coefficients() const noexcept { return c_; }
  const Rational& leading() const { return c_.back(); }
  Rational coefficient(std::size_t k) const { return k < c_.size() ? c_[k] : Rational(0); }

  Rational operator()(const Rational& x) const {
    Rational acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  double operator()(double x) const {
    double acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + to_double(*it);
    return acc;
  }

  UPoly derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<Rational> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * Rational(k);
    return UPoly(std::move(d));
  }

  UPoly monic() const {
    if (is_zero()) return {};
    UPoly r = *this;
    Rational lc = leading();
    for (auto& x : r.c_) x /= lc;
    return r;
  }

  friend UPoly operator+(const UPoly& a, const UPoly& b) {
    std::vector<Rational> v(std::max(a.c_.size(), b.c_.size()), Rational(0));
    for (std::size_t k = 0; k < a.c_.size(); ++k) v[k] += a.c_[k];
    for (std::size_t k = 0; k < b.c_.size(); ++k) v[k] += b.c_[k];
    return UPoly(std::move(v));
  }
  friend UPoly operator-(const UPoly& a) {
    UPoly r = a;
    for (auto& x : r.c_) x = -x;
    return r;
  }
  friend UPoly operator-(const UPoly& a, const UPoly& b) { return a + (-b); }
  friend UPoly operator*(const UPoly& a, const UPoly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> v(a.c_.size() + b.c_.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      for (std::size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
    }
    return UPoly(std::move(v));
  }
  friend bool operator==(const UPoly& a, const UPoly& b) { return a.c_ == b.c_; }

  /// Euclidean division; returns (quotient, remainder).
  friend std::pair<UPoly, UPoly> divmod(const UPoly& a, const UPoly& b) {
    if (b.is_zero()) throw ZeroPolynomial("division by the zero polynomial");
    std::vector<Rational> rem = a.c_;
    if (a.degree() < b.degree()) return {UPoly(), a};
    std::vector<Rational> quo(a.c_.size() - b.c_.size() + 1, Rational(0));
    const Rational& lb = b.leading();
    for (int k = a.degree() - b.degree(); k >= 0; --k) {
      Rational q = rem[k + b.degree()] / lb;
      quo[k] = q;
      if (q == 0) continue;
      for (int j = 0; j <= b.degree(); ++j) rem[k + j] -= q * b.c_[j];
    }
    rem.resize(b.c_.size() - 1);
    return {UPoly(std::move(quo)), UPoly(std::move(rem))};
  }

  std::string to_string(const std::string& var = "x") const {
    std::vector<std::string> vars{var};
    return to_polynomial(var).to_string();
  }

  Polynomial to_polynomial(const std::string& var) const {
    Polynomial p(std::vector<std::string>{var});
    for (std::size_t k = 0; k < c_.size(); ++k) p.add_term(Monomial{static_cast<std::uint32_t>(k)}, c_[k]);
    return p;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

/// Monic gcd by the Euclidean algorithm; gcd(0, 0) = 0.
inline UPoly gcd(UPoly a, UPoly b) {
  while (!b.is_zero()) {
    auto r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

inline int sign(const Rational& r) { return r > 0 ? 1 : (r < 0 ? -1 : 0); }

/// A polynomial with every variable but one fixed to an exact value.
class UnivariateSlice {
 public:
  /// `values` has one entry per variable of `base`; the free variable's entry
  /// must be empty, every other entry set.
  UnivariateSlice(Polynomial base, std::vector<std::optional<Rational>> values)
      : base_(std::move(base)), values_(std::move(values)) {
    if (values_.size() != base_.num_variables()) throw DimensionMismatch("slice: one value per variable required");
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!values_[i]) {
        free_ = i;
        ++free_count;
      }
    }
    if (free_count != 1) throw InvalidArgument("slice: exactly one variable must stay free");
  }

  /// Convenience: name of the free variable plus name=value pairs.
  static UnivariateSlice of(const Polynomial& base, std::string_view free_var,
                            const std::vector<std::pair<std::string, Rational>>& fixed) {
    std::vector<std::optional<Rational>> values(base.num_variables());
    std::size_t free_index = base.index_of(free_var);
    for (const auto& [name, value] : fixed) values[base.index_of(name)] = value;
    if (values[free_index]) throw InvalidArgument("slice: free variable also assigned");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i != free_index && !values[i]) {
        // Variables the polynomial does not use may be left unassigned.
        if (base.degree_in(i) <= 0) values[i] = Rational(0);
      }
    }
    return UnivariateSlice(base, std::move(values));
  }

  const Polynomial& base() const noexcept { return base_; }
  std::size_t free_variable() const noexcept { return free_; }
  const std::string& free_name() const { return base_.variables()[free_]; }

  UPoly to_univariate() const {
    std::vector<Rational> coeffs(std::max(base_.degree_in(free_), 0) + 1, Rational(0));
    for (const auto& [m, c] : base_.terms()) {
      Rational t = c;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (i == free_) continue;
        for (std::uint32_t e = 0; e < m[i]; ++e) t *= *values_[i];
      }
      coeffs[m[free_]] += t;
    }
    return UPoly(std::move(coeffs));
  }

 private:
  Polynomial base_;
  std::vector<std::optional<Rational>> values_;
  std::size_t free_ = 0;
};

struct RootInterval {
  Rational lo;
  Rational hi;  // lo == hi when the root is exactly rational and was hit
  int multiplicity = 1;

  double midpoint() const { return to_double((lo + hi) / 2); }
  Rational width() const { return hi - lo; }
};

struct RootIsolationResult {
  std::vector<RootInterval> roots;  // increasing, pairwise disjoint
  std::size_t size() const noexcept { return roots.size(); }
  bool has_multiple_root() const {
    for (const auto& r : roots) {
      if (r.multiplicity > 1) return true;
    }
    return false;
  }
};

struct SquareFreeResult {
  UPoly part;
  bool has_multiple_root = false;
};

inline SquareFreeResult square_free_part(const UPoly& q) {
  if (q.is_zero()) throw ZeroPolynomial("square-free part of the zero polynomial");
  UPoly g = gcd(q, q.derivative());
  SquareFreeResult r;
  r.has_multiple_root = g.degree() > 0;
  r.part = r.has_multiple_root ? divmod(q, g).first.monic() : q.monic();
  return r;
}

inline SquareFreeResult square_free_part(const UnivariateSlice& q) { return square_free_part(q.to_univariate()); }

/// Sturm chain s0 = p, s1 = p', s_{k+1} = -rem(s_{k-1}, s_k).
class SturmSequence {
 public:
  explicit SturmSequence(const UPoly& p) {
    if (p.is_zero()) throw ZeroPolynomial("Sturm sequence of the zero polynomial");
    seq_.push_back(p);
    UPoly d = p.derivative();
    if (d.is_zero()) return;
    seq_.push_back(d);
    for (;;) {
      UPoly r = divmod(seq_[seq_.size() - 2], seq_.back()).second;
      if (r.is_zero()) break;
      seq_.push_back(-r);
    }
  }

  int variations_at(const Rational& x) const {
    int count = 0;
    int prev = 0;
    for (const auto& s : seq_) {
      int sg = sign(s(x));
      if (sg == 0) continue;
      if (prev != 0 && sg != prev) ++count;
      prev = sg;
    }
    return count;
  }

  int variations_at_infinity(bool positive) const {
    int count = 0;
    int prev = 0;
    for (const auto& s : seq_) {
      int sg = sign(s.leading());
      if (!positive && s.degree() % 2 == 1) sg = -sg;
      if (prev != 0 && sg != prev) ++count;
      prev = sg;
    }
    return count;
  }

  /// Number of distinct real roots in (a, b] for square-free input.
  int count(const Rational& a, const Rational& b) const { return variations_at(a) - variations_at(b); }
  int count_all() const { return variations_at_infinity(false) - variations_at_infinity(true); }

 private:
  std::vector<UPoly> seq_;
};

/// Cauchy bound: every real root has |x| < bound.
inline Rational root_bound(const UPoly& p) {
  Rational m = 0;
  for (int k = 0; k < p.degree(); ++k) {
    Rational a = p.coefficient(k) / p.leading();
    if (a < 0) a = -a;
    if (a > m) m = a;
  }
  return m + 1;
}

namespace detail {

inline void bisect_isolate(const UPoly& sqf, const SturmSequence& sturm, Rational lo, Rational hi, int n,
                           std::vector<RootInterval>& out) {
  // invariant: (lo, hi] holds exactly n distinct roots and sqf(lo) != 0
  if (n == 0) return;
  if (n == 1) {
    if (sign(sqf(hi)) == 0) {
      out.push_back({hi, hi, 1});
    } else {
      out.push_back({lo, hi, 1});
    }
    return;
  }
  Rational mid = (lo + hi) / 2;
  if (sign(sqf(mid)) == 0) {
    int left = sturm.count(lo, mid) - 1;
    // exclude the exact root at mid from both halves: shrink by a tiny rational step
    Rational step = (hi - lo) / 1024;
    while (sturm.count(mid - step, mid) != 1 || sturm.count(mid, mid + step) != 0 || sign(sqf(mid - step)) == 0 ||
           sign(sqf(mid + step)) == 0) {
      step /= 2;
    }
    bisect_isolate(sqf, sturm, lo, mid - step, left, out);
    out.push_back({mid, mid, 1});
    bisect_isolate(sqf, sturm, mid + step, hi, sturm.count(mid + step, hi), out);
    return;
  }
  int left = sturm.count(lo, mid);
  bisect_isolate(sqf, sturm, lo, mid, left, out);
  bisect_isolate(sqf, sturm, mid, hi, n - left, out);
}

}  // namespace detail

/// Shrinks an isolating interval of a simple root of `sqf` to width <= precision.
inline RootInterval refine_root(const UPoly& sqf, RootInterval r, const Rational& precision) {
  if (r.lo == r.hi) return r;
  int s_lo = sign(sqf(r.lo));
  while (r.hi - r.lo > precision) {
    Rational mid = (r.lo + r.hi) / 2;
    int s_mid = sign(sqf(mid));
    if (s_mid == 0) {
      r.lo = r.hi = mid;
      break;
    }
    if (s_mid == s_lo) {
      r.lo = mid;
    } else {
      r.hi = mid;
    }
  }
  return r;
}

/// Isolates every distinct real root of a univariate polynomial and refines
/// each interval to the requested width. Multiplicities come from the chain
/// of gcds with successive derivatives.
inline RootIsolationResult isolate_real_roots(const UPoly& q, const Rational& precision) {
  if (q.is_zero()) throw ZeroPolynomial("root isolation of the zero polynomial");
  if (precision <= 0) throw InvalidArgument("precision must be positive");
  RootIsolationResult result;
  if (q.degree() == 0) return result;
  UPoly sqf = square_free_part(q).part;
  SturmSequence sturm(sqf);
  Rational bound = root_bound(sqf);
  int total = sturm.count(-bound, bound);
  std::vector<RootInterval> raw;
  detail::bisect_isolate(sqf, sturm, -bound, bound, total, raw);

  // gcd chain G_1 = gcd(q, q'), G_j = gcd(G_{j-1}, q^{(j)}) flags multiplicities.
  std::vector<UPoly> chain;
  UPoly deriv = q.derivative();
  UPoly g = gcd(q, deriv);
  while (g.degree() > 0) {
    chain.push_back(g);
    deriv = deriv.derivative();
    g = gcd(g, deriv);
  }
  for (auto& r : raw) {
    RootInterval refined = refine_root(sqf, r, precision);
    for (const auto& gj : chain) {
      bool has_root = false;
      if (refined.lo == refined.hi) {
        has_root = sign(gj(refined.lo)) == 0;
      } else {
        UPoly gsq = square_free_part(gj).part;
        SturmSequence gs(gsq);
        has_root = gs.count(refined.lo, refined.hi) > 0;
      }
      if (!has_root) break;
      ++refined.multiplicity;
    }
    result.roots.push_back(refined);
  }
  return result;
}

inline RootIsolationResult isolate_real_roots(const UnivariateSlice& q, const Rational& precision) {
  return isolate_real_roots(q.to_univariate(), precision);
}

}  // namespace fiberatlas::polycore
