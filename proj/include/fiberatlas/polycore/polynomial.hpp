#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fiberatlas/error.hpp"
#include "fiberatlas/polycore/rational.hpp"

namespace fiberatlas::polycore {

using Monomial = std::vector<std::uint32_t>;

template <class T>
using Matrix = std::vector<std::vector<T>>;

/// Sparse multivariate polynomial with exact rational coefficients over an
/// ordered list of named variables. Terms are kept in lexicographic exponent
/// order and zero coefficients are never stored, so structural equality is
/// value equality.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<std::string> variables) : vars_(std::move(variables)) {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (vars_[i] == vars_[j]) throw InvalidArgument("duplicate variable '" + vars_[i] + "'");
      }
    }
  }

  static Polynomial constant(std::vector<std::string> variables, const Rational& c) {
    Polynomial p(std::move(variables));
    p.add_term(Monomial(p.vars_.size(), 0), c);
    return p;
  }

  static Polynomial variable(std::vector<std::string> variables, std::string_view name) {
    Polynomial p(std::move(variables));
    Monomial m(p.vars_.size(), 0);
    m[p.index_of(name)] = 1;
    p.add_term(std::move(m), Rational(1));
    return p;
  }

  const std::vector<std::string>& variables() const noexcept { return vars_; }
  std::size_t num_variables() const noexcept { return vars_.size(); }
  const std::map<Monomial, Rational>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) return i;
    }
    throw UnknownVariable("unknown variable '" + std::string(name) + "'");
  }

  void add_term(Monomial m, const Rational& c) {
    if (m.size() != vars_.size()) throw DimensionMismatch("monomial length differs from variable count");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(m), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  int total_degree() const {
    int d = terms_.empty() ? -1 : 0;
    for (const auto& [m, c] : terms_) {
      int s = 0;
      for (auto e : m) s += static_cast<int>(e);
      d = std::max(d, s);
    }
    return d;
  }

  int degree_in(std::size_t var) const {
    int d = terms_.empty() ? -1 : 0;
    for (const auto& [m, c] : terms_) d = std::max(d, static_cast<int>(m.at(var)));
    return d;
  }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && total_degree() == 0);
  }

  Rational constant_term() const {
    auto it = terms_.find(Monomial(vars_.size(), 0));
    return it == terms_.end() ? Rational(0) : it->second;
  }

  Polynomial operator-() const {
    Polynomial r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
  }

  Polynomial& operator+=(const Polynomial& o) {
    require_same_vars(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    require_same_vars(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(const Polynomial& o) {
    *this = *this * o;
    return *this;
  }
  Polynomial& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator*(const Rational& s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.require_same_vars(b);
    Polynomial r(a.vars_);
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m(ma.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
        r.add_term(std::move(m), ca * cb);
      }
    }
    return r;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.vars_ == b.vars_ && a.terms_ == b.terms_;
  }

  Polynomial pow(unsigned k) const {
    Polynomial result = constant(vars_, Rational(1));
    Polynomial base = *this;
    while (k > 0) {
      if (k & 1u) result *= base;
      k >>= 1u;
      if (k > 0) base *= base;
    }
    return result;
  }

  template <class Scalar>
  Scalar evaluate(std::span<const Scalar> point) const {
    if (point.size() != vars_.size()) {
      throw DimensionMismatch("point has " + std::to_string(point.size()) + " coordinates, polynomial has " +
                              std::to_string(vars_.size()) + " variables");
    }
    Scalar sum = Scalar(0);
    for (const auto& [m, c] : terms_) {
      Scalar term = coefficient_as<Scalar>(c);
      for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::uint32_t e = 0; e < m[i]; ++e) term *= point[i];
      }
      sum += term;
    }
    return sum;
  }

  Polynomial derivative(std::size_t var) const {
    if (var >= vars_.size()) throw UnknownVariable("variable index out of range");
    Polynomial r(vars_);
    for (const auto& [m, c] : terms_) {
      if (m[var] == 0) continue;
      Monomial d = m;
      --d[var];
      r.add_term(std::move(d), c * Rational(m[var]));
    }
    return r;
  }
  Polynomial derivative(std::string_view name) const { return derivative(index_of(name)); }

  /// Replaces variable `var` by the constant `value`; the variable list is kept.
  Polynomial substitute(std::size_t var, const Rational& value) const {
    Polynomial r(vars_);
    for (const auto& [m, c] : terms_) {
      Rational factor = c;
      for (std::uint32_t e = 0; e < m.at(var); ++e) factor *= value;
      Monomial d = m;
      d[var] = 0;
      r.add_term(std::move(d), factor);
    }
    return r;
  }

  /// Replaces variable `var` by the polynomial `value` (same variable list).
  Polynomial substitute(std::size_t var, const Polynomial& value) const {
    require_same_vars(value);
    Polynomial r(vars_);
    std::vector<Polynomial> powers{constant(vars_, Rational(1))};
    for (const auto& [m, c] : terms_) {
      while (powers.size() <= m.at(var)) powers.push_back(powers.back() * value);
      Monomial rest = m;
      rest[var] = 0;
      Polynomial t(vars_);
      t.add_term(std::move(rest), c);
      r += t * powers[m[var]];
    }
    return r;
  }

  /// Re-expresses the polynomial over another variable list. Variables that
  /// the polynomial actually uses must exist in `target`.
  Polynomial with_variables(const std::vector<std::string>& target) const {
    std::vector<std::size_t> map(vars_.size(), target.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      for (std::size_t j = 0; j < target.size(); ++j) {
        if (target[j] == vars_[i]) map[i] = j;
      }
    }
    Polynomial r(target);
    for (const auto& [m, c] : terms_) {
      Monomial d(target.size(), 0);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0) continue;
        if (map[i] == target.size()) throw UnknownVariable("variable '" + vars_[i] + "' missing from target list");
        d[map[i]] = m[i];
      }
      r.add_term(std::move(d), c);
    }
    return r;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    // Highest degree first reads more naturally.
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [m, c] = *it;
      Rational mag = c < 0 ? Rational(-c) : c;
      if (first) {
        if (c < 0) out << "-";
      } else {
        out << (c < 0 ? " - " : " + ");
      }
      first = false;
      bool is_unit_monomial = std::all_of(m.begin(), m.end(), [](auto e) { return e == 0; });
      bool wrote = false;
      if (mag != 1 || is_unit_monomial) {
        out << mag.str();
        wrote = true;
      }
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0) continue;
        if (wrote) out << "*";
        out << vars_[i];
        if (m[i] > 1) out << "^" << m[i];
        wrote = true;
      }
    }
    return out.str();
  }

 private:
  template <class Scalar>
  static Scalar coefficient_as(const Rational& c) {
    if constexpr (std::is_same_v<Scalar, Rational>) {
      return c;
    } else {
      return static_cast<Scalar>(to_double(c));
    }
  }

  void require_same_vars(const Polynomial& o) const {
    if (vars_ != o.vars_) throw DimensionMismatch("polynomials are over different variable lists");
  }

  std::vector<std::string> vars_;
  std::map<Monomial, Rational> terms_;
};

/// Ordered list of polynomials over one shared variable list: a map R^m -> R^n.
class PolynomialMap {
 public:
  PolynomialMap() = default;
  PolynomialMap(std::vector<std::string> variables, std::vector<Polynomial> components)
      : vars_(std::move(variables)), comps_(std::move(components)) {
    for (const auto& c : comps_) {
      if (c.variables() != vars_) throw DimensionMismatch("map component over a different variable list");
    }
  }

  const std::vector<std::string>& variables() const noexcept { return vars_; }
  const std::vector<Polynomial>& components() const noexcept { return comps_; }
  const Polynomial& operator[](std::size_t i) const { return comps_.at(i); }
  std::size_t domain_dim() const noexcept { return vars_.size(); }
  std::size_t target_dim() const noexcept { return comps_.size(); }

  PolynomialMap with_component(Polynomial extra) const {
    auto comps = comps_;
    comps.push_back(extra.with_variables(vars_));
    return PolynomialMap(vars_, std::move(comps));
  }

  template <class Scalar>
  std::vector<Scalar> evaluate(std::span<const Scalar> point) const {
    std::vector<Scalar> out;
    out.reserve(comps_.size());
    for (const auto& c : comps_) out.push_back(c.template evaluate<Scalar>(point));
    return out;
  }

 private:
  std::vector<std::string> vars_;
  std::vector<Polynomial> comps_;
};

template <class Scalar>
Scalar eval(const Polynomial& p, std::span<const Scalar> point) {
  return p.template evaluate<Scalar>(point);
}

template <class Scalar>
Scalar eval(const Polynomial& p, const std::vector<Scalar>& point) {
  return p.template evaluate<Scalar>(std::span<const Scalar>(point));
}

inline Polynomial differentiate(const Polynomial& p, std::string_view var) { return p.derivative(var); }

inline Matrix<Polynomial> symbolic_jacobian(const PolynomialMap& f) {
  Matrix<Polynomial> j(f.target_dim());
  for (std::size_t i = 0; i < f.target_dim(); ++i) {
    for (std::size_t k = 0; k < f.domain_dim(); ++k) j[i].push_back(f[i].derivative(k));
  }
  return j;
}

inline Matrix<Polynomial> symbolic_hessian(const Polynomial& p) {
  Matrix<Polynomial> h(p.num_variables());
  for (std::size_t i = 0; i < p.num_variables(); ++i) {
    Polynomial di = p.derivative(i);
    for (std::size_t k = 0; k < p.num_variables(); ++k) h[i].push_back(di.derivative(k));
  }
  return h;
}

template <class Scalar>
Matrix<Scalar> jacobian(const PolynomialMap& f, std::span<const Scalar> point) {
  if (point.size() != f.domain_dim()) throw DimensionMismatch("jacobian: point length differs from domain dimension");
  Matrix<Scalar> out(f.target_dim(), std::vector<Scalar>(f.domain_dim(), Scalar(0)));
  for (std::size_t i = 0; i < f.target_dim(); ++i) {
    for (std::size_t k = 0; k < f.domain_dim(); ++k) out[i][k] = f[i].derivative(k).template evaluate<Scalar>(point);
  }
  return out;
}

template <class Scalar>
Matrix<Scalar> jacobian(const PolynomialMap& f, const std::vector<Scalar>& point) {
  return jacobian<Scalar>(f, std::span<const Scalar>(point));
}

template <class Scalar>
Matrix<Scalar> hessian(const Polynomial& p, std::span<const Scalar> point) {
  if (point.size() != p.num_variables()) throw DimensionMismatch("hessian: point length differs from variable count");
  auto sym = symbolic_hessian(p);
  Matrix<Scalar> out(p.num_variables(), std::vector<Scalar>(p.num_variables(), Scalar(0)));
  for (std::size_t i = 0; i < p.num_variables(); ++i) {
    for (std::size_t k = 0; k < p.num_variables(); ++k) out[i][k] = sym[i][k].template evaluate<Scalar>(point);
  }
  return out;
}

template <class Scalar>
Matrix<Scalar> hessian(const Polynomial& p, const std::vector<Scalar>& point) {
  return hessian<Scalar>(p, std::span<const Scalar>(point));
}

}  // namespace fiberatlas::polycore
