#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "fiberatlas/error.hpp"
#include "fiberatlas/polycore/polynomial.hpp"

namespace fiberatlas::polycore {

namespace detail {

// Recursive-descent parser for expressions such as
//   y^2+(u^2*x+1)*(v*x-1)*(x^2+(v-u^2)*x+1)
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*' unary) | ('/' unary-constant))*
//   unary  := ('-'|'+') unary | power
//   power  := atom ('^' integer)?
//   atom   := number | identifier | '(' expr ')'
class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, const std::vector<std::string>& vars) : text_(text), vars_(vars) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at offset " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expr() {
    Polynomial acc = term();
    for (;;) {
      if (accept('+')) {
        acc += term();
      } else if (accept('-')) {
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  Polynomial term() {
    Polynomial acc = unary();
    for (;;) {
      if (accept('*')) {
        acc *= unary();
      } else if (accept('/')) {
        Polynomial d = unary();
        if (!d.is_constant() || d.is_zero()) fail("division only by nonzero constants");
        acc *= Rational(1) / d.constant_term();
      } else {
        return acc;
      }
    }
  }

  Polynomial unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Polynomial power() {
    Polynomial base = atom();
    if (accept('^')) {
      skip_space();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected a nonnegative integer exponent");
      unsigned long k = std::stoul(std::string(text_.substr(start, pos_ - start)));
      if (k > 1000) fail("exponent too large");
      return base.pow(static_cast<unsigned>(k));
    }
    return base;
  }

  Polynomial atom() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
      // scientific suffix
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
        std::size_t digits = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (digits == pos_) pos_ = save;
      }
      return Polynomial::constant(vars_, parse_rational(text_.substr(start, pos_ - start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      return Polynomial::variable(vars_, text_.substr(start, pos_ - start));
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Identifiers in order of first appearance.
inline std::vector<std::string> collect_variables(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size();) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    bool after_digit = i > 0 && (std::isdigit(static_cast<unsigned char>(text[i - 1])) || text[i - 1] == '.');
    if ((std::isalpha(c) || c == '_') && !(after_digit && (c == 'e' || c == 'E'))) {
      std::size_t start = i;
      while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
      std::string name(text.substr(start, i - start));
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    } else {
      ++i;
    }
  }
  return out;
}

inline Polynomial parse_polynomial(std::string_view text, const std::vector<std::string>& vars) {
  return detail::ExpressionParser(text, vars).parse();
}

inline Polynomial parse_polynomial(std::string_view text) { return parse_polynomial(text, collect_variables(text)); }

/// Components separated by ';'.
inline PolynomialMap parse_map(std::string_view text, const std::vector<std::string>& vars) {
  std::vector<Polynomial> comps;
  std::size_t start = 0;
  for (;;) {
    std::size_t end = text.find(';', start);
    std::string_view piece = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    comps.push_back(parse_polynomial(piece, vars));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return PolynomialMap(vars, std::move(comps));
}

}  // namespace fiberatlas::polycore
