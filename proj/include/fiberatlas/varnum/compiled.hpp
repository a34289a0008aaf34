#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <string>
#include <vector>

#include "fiberatlas/error.hpp"
#include "fiberatlas/polycore/polynomial.hpp"

namespace fiberatlas::varnum {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using polycore::Polynomial;
using polycore::PolynomialMap;

/// Floating-point image of an exact polynomial. Built once, then shared
/// read-only between threads.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;

  explicit CompiledPolynomial(const Polynomial& p) : nvars_(p.num_variables()) {
    for (const auto& [m, c] : p.terms()) {
      Term t;
      t.coef = polycore::to_double(c);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0) continue;
        t.factors.emplace_back(static_cast<int>(i), static_cast<int>(m[i]));
      }
      terms_.push_back(std::move(t));
    }
  }

  std::size_t num_variables() const noexcept { return nvars_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  double operator()(const VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != nvars_) throw DimensionMismatch("compiled polynomial: wrong point length");
    double sum = 0.0;
    for (const auto& t : terms_) {
      double v = t.coef;
      for (const auto& [i, e] : t.factors) v *= ipow(x[i], e);
      sum += v;
    }
    return sum;
  }

 private:
  struct Term {
    double coef = 0.0;
    std::vector<std::pair<int, int>> factors;
  };

  static double ipow(double b, int e) {
    double r = 1.0;
    while (e > 0) {
      if (e & 1) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }

  std::size_t nvars_ = 0;
  std::vector<Term> terms_;
};

/// Polynomial compiled together with its first and second derivatives.
class CompiledFunction {
 public:
  CompiledFunction() = default;

  explicit CompiledFunction(const Polynomial& p) : f_(p) {
    const std::size_t m = p.num_variables();
    grad_.resize(m);
    hess_.assign(m, std::vector<CompiledPolynomial>(m));
    for (std::size_t i = 0; i < m; ++i) {
      Polynomial di = p.derivative(i);
      grad_[i] = CompiledPolynomial(di);
      for (std::size_t k = i; k < m; ++k) {
        hess_[i][k] = CompiledPolynomial(di.derivative(k));
        hess_[k][i] = hess_[i][k];
      }
    }
  }

  std::size_t num_variables() const noexcept { return grad_.size(); }
  double value(const VectorXd& x) const { return f_(x); }

  VectorXd gradient(const VectorXd& x) const {
    VectorXd g(grad_.size());
    for (std::size_t i = 0; i < grad_.size(); ++i) g[i] = grad_[i].is_zero() ? 0.0 : grad_[i](x);
    return g;
  }

  MatrixXd hessian(const VectorXd& x) const {
    const auto m = static_cast<Eigen::Index>(grad_.size());
    MatrixXd h(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index k = 0; k < m; ++k) h(i, k) = hess_[i][k].is_zero() ? 0.0 : hess_[i][k](x);
    }
    return h;
  }

 private:
  CompiledPolynomial f_;
  std::vector<CompiledPolynomial> grad_;
  std::vector<std::vector<CompiledPolynomial>> hess_;
};

/// Compiled polynomial map R^m -> R^n.
class CompiledMap {
 public:
  CompiledMap() = default;

  explicit CompiledMap(const PolynomialMap& f) : vars_(f.variables()) {
    for (const auto& c : f.components()) comps_.emplace_back(c);
  }

  const std::vector<std::string>& variables() const noexcept { return vars_; }
  std::size_t domain_dim() const noexcept { return vars_.size(); }
  std::size_t target_dim() const noexcept { return comps_.size(); }
  const CompiledFunction& component(std::size_t i) const { return comps_.at(i); }

  VectorXd value(const VectorXd& x) const {
    VectorXd v(comps_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) v[i] = comps_[i].value(x);
    return v;
  }

  MatrixXd jacobian(const VectorXd& x) const {
    MatrixXd j(comps_.size(), vars_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) j.row(i) = comps_[i].gradient(x).transpose();
    return j;
  }

 private:
  std::vector<std::string> vars_;
  std::vector<CompiledFunction> comps_;
};

inline VectorXd to_vector(const std::vector<double>& v) { return Eigen::Map<const VectorXd>(v.data(), v.size()); }

inline std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace fiberatlas::varnum
